"""
周期环境 - f(y mod Q)
"""
import numpy as np

from ..contract import BaseOrientation


class PeriodicOrientation(BaseOrientation):
    """
    周期方向

    Uses the mathematical modulus, so negative rows wrap into [0, Q).
    """

    def orientations(self, spec, ys: np.ndarray) -> np.ndarray:
        table = np.asarray(spec.f_table, dtype=np.int64)
        return table[np.mod(ys, spec.period)]
