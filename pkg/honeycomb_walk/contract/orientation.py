from abc import ABC, abstractmethod

import numpy as np


class BaseOrientation(ABC):
    """
    Interface for horizontal-orientation regimes.
    """

    @abstractmethod
    def orientations(self, spec, ys: np.ndarray) -> np.ndarray:
        """
        Orientation of every requested row.

        Args:
            spec (EnvironmentSpec): A validated environment description
            ys (np.ndarray): Integer levels, any shape

        Returns:
            np.ndarray: int64 array of ±1 with the shape of ys
        """
        pass

    def perturbed_mask(self, spec, ys: np.ndarray) -> np.ndarray:
        """
        Rows where the periodic value is replaced by the random one.

        Args:
            spec (EnvironmentSpec): A validated environment description
            ys (np.ndarray): Integer levels

        Returns:
            np.ndarray: boolean array, all False unless the regime perturbs rows
        """
        return np.zeros(np.shape(ys), dtype=bool)
