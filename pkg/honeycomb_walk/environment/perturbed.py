"""
扰动周期环境 - 以概率 p(y) 用随机值替换周期值
"""
import numpy as np

from ..contract import BaseOrientation
from ..streams import TAG_PERTURBATION, keyed_uniforms
from .periodic import PeriodicOrientation
from .rademacher import RademacherOrientation


class PerturbedOrientation(BaseOrientation):
    """
    扰动方向

    The replacement draw and the random value come from two streams of the same seed; the
    random value is exactly the Rademacher row of that seed.
    """

    def __init__(self):
        self._periodic = PeriodicOrientation()
        self._random = RademacherOrientation()

    def perturbed_mask(self, spec, ys: np.ndarray) -> np.ndarray:
        from .spec import perturbation_probability

        p = perturbation_probability(spec.c, spec.beta, ys)
        return keyed_uniforms(spec.seed, TAG_PERTURBATION, ys) < p

    def orientations(self, spec, ys: np.ndarray) -> np.ndarray:
        mask = self.perturbed_mask(spec, ys)
        return np.where(mask, self._random.orientations(spec, ys), self._periodic.orientations(spec, ys))
