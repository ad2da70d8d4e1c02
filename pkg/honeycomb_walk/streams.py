"""
Random streams.

Two kinds of randomness are used:

* environment values are a keyed hash of (seed, stream tag, level), so any level can be
  queried in any order, from any process, and always gives the same answer;
* walks and Monte Carlo batches draw from a Philox generator keyed by
  ``SeedSequence([master_seed, task_index])``, one independent substream per task.
"""
from typing import Union

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_S63 = np.uint64(63)

# stream tags
TAG_ORIENTATION = 0x52414445   # "RADE"
TAG_PERTURBATION = 0x4C414D42  # "LAMB"

SeedLike = Union[int, np.random.Generator, None]


def _mix(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finaliser on a uint64 array (wrapping arithmetic)."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
        return z ^ (z >> _S31)


def keyed_hash(seed: int, tag: int, ys) -> np.ndarray:
    """
    Hash levels under (seed, tag).

    Args:
        seed: 64-bit unsigned seed
        tag: stream tag separating independent streams of the same seed
        ys: integer level(s)

    Returns:
        uint64 array with the shape of ``ys``
    """
    key = np.array([(seed + (tag + 1) * int(_GOLDEN)) & _MASK64], dtype=np.uint64)
    key = _mix(_mix(key))[0]
    levels = np.asarray(ys, dtype=np.int64).view(np.uint64)
    with np.errstate(over="ignore"):
        return _mix(key ^ _mix(levels + _GOLDEN))


def keyed_signs(seed: int, tag: int, ys) -> np.ndarray:
    """±1 per level from the top bit of the keyed hash."""
    top = keyed_hash(seed, tag, ys) >> _S63
    return np.where(top == 0, 1, -1).astype(np.int64)


def keyed_uniforms(seed: int, tag: int, ys) -> np.ndarray:
    """Uniform [0, 1) per level from the top 53 bits of the keyed hash."""
    return (keyed_hash(seed, tag, ys) >> _S11).astype(np.float64) * (1.0 / (1 << 53))


def task_generator(master_seed: int, task_index: int = 0) -> np.random.Generator:
    """
    Independent generator for one task of a batch.

    Args:
        master_seed: seed of the whole run
        task_index: position of the task in the batch

    Returns:
        Philox-backed numpy Generator
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(master_seed), int(task_index)])))


def derive_seed(master_seed: int, task_index: int) -> int:
    """64-bit seed of task ``task_index`` under ``master_seed``."""
    state = np.random.SeedSequence([int(master_seed), int(task_index)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Accept an int seed, an existing Generator, or None (seed 0)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return task_generator(0 if seed is None else int(seed), 0)
