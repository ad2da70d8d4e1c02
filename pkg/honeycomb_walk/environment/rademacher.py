"""
Rademacher 环境 - 每行独立取 ±1
"""
import numpy as np

from ..contract import BaseOrientation
from ..streams import TAG_ORIENTATION, keyed_signs


class RademacherOrientation(BaseOrientation):
    """
    Rademacher 方向

    Row y gets the sign of the keyed hash of (seed, y); rows are independent fair signs.
    """

    def orientations(self, spec, ys: np.ndarray) -> np.ndarray:
        return keyed_signs(spec.seed, TAG_ORIENTATION, ys)
