"""
Vertical skeleton chain (Y_k, nu_k).

Y is the level after k vertical steps and nu the direction of the last one. The chain keeps
its direction with probability 1/3 and reverses it with probability 2/3; it starts at (0, +1).
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from .exception import (
    InvalidArgumentException,
    OverflowException,
    ResourceLimitException,
    TruncationTooCoarseException,
)
from .streams import SeedLike, as_generator

log = logging.getLogger(__name__)

PERSISTENCE = 1.0 / 3.0
REVERSAL = 1.0 - PERSISTENCE
# asymptotic variance per step of Y and the resulting local limit constant
ASYMPTOTIC_VARIANCE = 0.5
RETURN_CONSTANT = math.sqrt(2.0 / math.pi)

_LOG_MAX = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class SkeletonState:
    """
    骨架状态 (level, direction of the last vertical step)
    """
    y: int
    nu: int

    def __post_init__(self):
        if self.nu not in (-1, 1):
            raise InvalidArgumentException(f"nu={self.nu} must be +1 or -1")


START = SkeletonState(0, 1)


@dataclass(eq=False)
class SkeletonPath:
    """
    Skeleton path stored as two aligned int64 arrays, index 0 being the start state.
    """
    y: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.int64)
        self.nu = np.asarray(self.nu, dtype=np.int64)
        if self.y.shape != self.nu.shape or self.y.ndim != 1:
            raise InvalidArgumentException("y and nu must be 1-d arrays of equal length")

    @classmethod
    def from_states(cls, states: Sequence[Union[SkeletonState, Tuple[int, int]]]) -> 'SkeletonPath':
        pairs = [(s.y, s.nu) if isinstance(s, SkeletonState) else tuple(s) for s in states]
        if not pairs:
            return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
        y, nu = zip(*pairs)
        return cls(np.array(y), np.array(nu))

    @property
    def horizon(self) -> int:
        return len(self.y) - 1

    def __len__(self) -> int:
        return len(self.y)

    def __getitem__(self, k: int) -> SkeletonState:
        return SkeletonState(int(self.y[k]), int(self.nu[k]))

    def __iter__(self) -> Iterator[SkeletonState]:
        for k in range(len(self.y)):
            yield self[k]

    def to_states(self) -> List[SkeletonState]:
        return list(self)


def skeleton_transition(s: SkeletonState) -> List[Tuple[SkeletonState, float]]:
    """
    One-step law of the chain.

    Args:
        s: current state

    Returns:
        [(persisting successor, 1/3), (reversing successor, 2/3)]
    """
    return [
        (SkeletonState(s.y + s.nu, s.nu), PERSISTENCE),
        (SkeletonState(s.y - s.nu, -s.nu), REVERSAL),
    ]


def simulate_skeleton_batch(n: int, n_paths: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw independent skeleton paths.

    Args:
        n: horizon
        n_paths: number of paths
        rng: generator

    Returns:
        (y, nu) int64 arrays of shape (n_paths, n + 1)
    """
    persist = rng.random((n_paths, n)) < PERSISTENCE
    nu = np.empty((n_paths, n + 1), dtype=np.int64)
    nu[:, 0] = 1
    nu[:, 1:] = np.cumprod(np.where(persist, 1, -1), axis=1)
    y = np.zeros((n_paths, n + 1), dtype=np.int64)
    np.cumsum(nu[:, 1:], axis=1, out=y[:, 1:])
    return y, nu


def simulate_skeleton(n: int, seed: SeedLike = None) -> SkeletonPath:
    """
    Draw one skeleton path of horizon n started at (0, +1).

    Args:
        n: horizon (path length n + 1)
        seed: integer seed or generator

    Returns:
        SkeletonPath
    """
    if n < 0:
        raise InvalidArgumentException(f"n={n} must be nonnegative")
    y, nu = simulate_skeleton_batch(n, 1, as_generator(seed))
    return SkeletonPath(y[0], nu[0])


@dataclass
class OccupationStats:
    """
    占用统计

    eta counts visits k = 0..n per (level, direction); m_o and m_e split the visits
    k = 0..n-1 by whether the next step keeps or reverses the direction.
    """
    eta: Dict[int, Tuple[int, int]]
    m_o: Dict[int, int]
    m_e: Dict[int, int]
    n: int

    def eta_total(self, y: int) -> int:
        plus, minus = self.eta.get(y, (0, 0))
        return plus + minus

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "eta": {str(y): list(v) for y, v in sorted(self.eta.items())},
            "m_o": {str(y): v for y, v in sorted(self.m_o.items())},
            "m_e": {str(y): v for y, v in sorted(self.m_e.items())},
        }


def _count(levels: np.ndarray) -> Dict[int, int]:
    values, counts = np.unique(levels, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


def occupation_stats(path: SkeletonPath) -> OccupationStats:
    """
    Occupation measures of a path.

    Args:
        path: skeleton path

    Returns:
        OccupationStats with eta over all visits and m-counts over visits with a successor
    """
    plus = _count(path.y[path.nu == 1])
    minus = _count(path.y[path.nu == -1])
    eta = {y: (plus.get(y, 0), minus.get(y, 0)) for y in sorted(set(plus) | set(minus))}
    keep = path.nu[:-1] == path.nu[1:]
    head = path.y[:-1]
    return OccupationStats(eta=eta, m_o=_count(head[keep]), m_e=_count(head[~keep]), n=path.horizon)


def sigma_returns(path: SkeletonPath) -> List[int]:
    """Indices k >= 1 with Y_k = 0."""
    return [int(k) for k in np.flatnonzero(path.y[1:] == 0) + 1]


def _step(plus: np.ndarray, minus: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Advance the (y, nu) law by one step on a fixed window; mass leaving the window is dropped."""
    new_plus = np.zeros_like(plus)
    new_minus = np.zeros_like(minus)
    new_plus[1:] = PERSISTENCE * plus[:-1] + REVERSAL * minus[:-1]
    new_minus[:-1] = PERSISTENCE * minus[1:] + REVERSAL * plus[1:]
    return new_plus, new_minus


def skeleton_law(n: int) -> np.ndarray:
    """
    Exact law of (Y_n, nu_n) from (0, +1).

    Args:
        n: horizon

    Returns:
        array of shape (2, 2n + 1); row 0 is nu=+1, row 1 is nu=-1, column j is level j - n
    """
    plus = np.zeros(2 * n + 1)
    minus = np.zeros(2 * n + 1)
    plus[n] = 1.0
    for _ in range(n):
        plus, minus = _step(plus, minus)
    return np.stack([plus, minus])


def return_prob_series(n_max: int) -> np.ndarray:
    """
    P(Y_{2n} = 0) for n = 0..n_max from one DP run.

    Args:
        n_max: largest n

    Returns:
        float array of length n_max + 1
    """
    width = 2 * n_max
    plus = np.zeros(2 * width + 1)
    minus = np.zeros(2 * width + 1)
    plus[width] = 1.0
    out = np.empty(n_max + 1)
    out[0] = 1.0
    for k in range(1, width + 1):
        plus, minus = _step(plus, minus)
        if k % 2 == 0:
            out[k // 2] = plus[width] + minus[width]
    return out


def return_prob_exact(n: int) -> float:
    """
    Exact P(Y_{2n} = 0).

    Args:
        n: half horizon, n >= 1

    Returns:
        probability
    """
    if n < 1:
        raise InvalidArgumentException(f"n={n} must be >= 1")
    law = skeleton_law(2 * n)
    return float(law[0, 2 * n] + law[1, 2 * n])


@dataclass(frozen=True, eq=False)
class TiltedSpectrum:
    """
    倾斜矩阵及其特征值 (lambda_1 >= lambda_2)
    """
    t: float
    matrix: np.ndarray
    eigenvalues: Tuple[float, float]


def tilted_eigenvalues(t) -> Tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenvalues q cosh t ± sqrt(q^2 cosh^2 t - (2q - 1))."""
    q = PERSISTENCE
    ch = np.cosh(t)
    root = np.sqrt(q * q * ch * ch - (2 * q - 1))
    return q * ch + root, q * ch - root


def tilted_matrix(t: float) -> TiltedSpectrum:
    """
    The matrix [[q e^t, (1-q) e^-t], [(1-q) e^t, q e^-t]] in state order (+, -).

    Args:
        t: tilt

    Returns:
        TiltedSpectrum
    """
    q = PERSISTENCE
    et, emt = math.exp(t), math.exp(-t)
    matrix = np.array([[q * et, (1 - q) * emt], [(1 - q) * et, q * emt]])
    lam1, lam2 = tilted_eigenvalues(t)
    return TiltedSpectrum(t=t, matrix=matrix, eigenvalues=(float(lam1), float(lam2)))


def tilted_curvature(h1: float = 1e-3, h2: float = 1e-4) -> float:
    """
    Second derivative of lambda_1 at 0 by central differences, Richardson-extrapolated.

    Args:
        h1: coarse step
        h2: fine step

    Returns:
        estimate of lambda_1''(0) (exact value 1/2)
    """
    def second(h: float) -> float:
        return float((tilted_eigenvalues(h)[0] - 2 * tilted_eigenvalues(0.0)[0] + tilted_eigenvalues(-h)[0]) / (h * h))

    ratio = (h1 / h2) ** 2
    return (ratio * second(h2) - second(h1)) / (ratio - 1)


def log_mgf_Y(n: int, t: float) -> float:
    """
    log E(e^{t Y_{2n}}) by 2n products with the tilted matrix, renormalised each step.

    Args:
        n: half horizon
        t: tilt

    Returns:
        logarithm of the moment generating function
    """
    matrix = tilted_matrix(t).matrix
    vector = np.array([1.0, 0.0])
    log_scale = 0.0
    for _ in range(2 * n):
        vector = vector @ matrix
        total = vector.sum()
        log_scale += math.log(total)
        vector /= total
    return log_scale


def mgf_Y_exact(n: int, t: float) -> float:
    """
    E(e^{t Y_{2n}}).

    Raises:
        OverflowException: result exceeds the double range
    """
    value = log_mgf_Y(n, t)
    if value > _LOG_MAX:
        raise OverflowException(f"E(exp({t} Y_{2 * n})) = exp({value:.6g}) exceeds double range")
    return math.exp(value)


@dataclass(frozen=True)
class GreenValue:
    """
    Green 函数值
    """
    value: float
    error_bound: float
    method: str
    k_max: int = 0


def _state_return_series(k_max: int) -> np.ndarray:
    """P((Y_k, nu_k) = (0, +1)) for k = 0..k_max, window limited to levels that can still return."""
    half = k_max // 2 + 1
    plus = np.zeros(2 * half + 1)
    minus = np.zeros(2 * half + 1)
    plus[half] = 1.0
    out = np.empty(k_max + 1)
    out[0] = 1.0
    for k in range(1, k_max + 1):
        plus, minus = _step(plus, minus)
        out[k] = plus[half]
    return out


def _resolvent(s: float) -> float:
    """Closed-form G(s) = 1/2 + (1 - a/2) / sqrt((a - b)(a + b)) of the two-state chain."""
    q = PERSISTENCE
    a = 1.0 + s * s * (2 * q - 1)
    b = 2 * s * q
    a_minus_b = (1.0 - s) * (1.0 + s * (1 - 2 * q))
    return 0.5 + (1.0 - a / 2) / math.sqrt(a_minus_b * (a + b))


SERIES_LIMIT = 4000


def green_function(a: SkeletonState, s: float, k_max: int = None, tol: float = 1e-12,
                   method: str = "auto") -> GreenValue:
    """
    G_{a,a}(s) = sum_k P_a(state a at step k) s^k.

    Args:
        a: state (the value does not depend on it)
        s: argument in [0, 1)
        k_max: series truncation (default ceil(50 / (1 - s)))
        tol: largest accepted truncation bound s^(k_max+1) / (1 - s)
        method: "series", "resolvent" or "auto"

    Returns:
        GreenValue

    Raises:
        InvalidArgumentException: s outside [0, 1) or unknown method
        TruncationTooCoarseException: the truncation bound exceeds tol
    """
    if not 0.0 <= s < 1.0:
        raise InvalidArgumentException(f"s={s} must lie in [0, 1)")
    if method not in ("auto", "series", "resolvent"):
        raise InvalidArgumentException(f"unknown method: {method}")
    if k_max is None:
        k_max = math.ceil(50.0 / (1.0 - s))
    if method == "auto":
        method = "series" if k_max <= SERIES_LIMIT else "resolvent"
    if method == "resolvent":
        return GreenValue(value=_resolvent(s), error_bound=0.0, method=method)

    bound = s ** (k_max + 1) / (1.0 - s)
    if bound > tol:
        raise TruncationTooCoarseException(
            f"truncation bound {bound:.3g} exceeds {tol:.3g} at k_max={k_max}", data={"bound": bound})
    terms = _state_return_series(k_max)
    value = float(np.polynomial.polynomial.polyval(s, terms))
    log.debug("green series s=%g k_max=%d value=%.17g", s, k_max, value)
    return GreenValue(value=value, error_bound=bound, method=method, k_max=k_max)


@dataclass(frozen=True)
class FirstReturn:
    """
    首次返回的 Laplace 变换
    """
    t: float
    laplace: float
    diagnostic: float   # -ln(laplace) / sqrt(t)


def first_return_laplace(a: SkeletonState, t: float, method: str = "auto") -> FirstReturn:
    """
    E(e^{-t sigma}) = 1 - 1/G(e^{-t}) for the first return to a.

    Args:
        a: state
        t: t > 0
        method: passed to green_function

    Returns:
        FirstReturn with the diagnostic -ln E / sqrt(t)
    """
    if not t > 0:
        raise InvalidArgumentException(f"t={t} must be positive")
    g = green_function(a, math.exp(-t), method=method).value
    value = 1.0 - 1.0 / g
    return FirstReturn(t=t, laplace=value, diagnostic=-math.log(value) / math.sqrt(t))


def excursion_tail_bound(n: int, delta1: float) -> float:
    """
    2 inf_t E(e^{t Y_2n}) e^{-2 t a_n} with a_n = floor(n^(1/2 + delta1)).

    Chernoff bound on reaching level a_n and coming back to 0 by time 2n (reflection doubles
    the level, the factor 2 covers both signs).
    """
    level = math.floor(n ** (0.5 + delta1))

    def objective(t: float) -> float:
        return log_mgf_Y(n, t) - 2.0 * t * level

    res = optimize.minimize_scalar(objective, bounds=(1e-9, 20.0), method="bounded")
    return min(1.0, 2.0 * math.exp(min(res.fun, 0.0)))


def occupation_tail_bound(n: int, delta2: float) -> float:
    """
    inf_t e^{2nt} E(e^{-t sigma})^m with m = floor(n^(1/2 + delta2) / 2).

    Bounds the probability that a fixed state is visited m more times within 2n steps.
    """
    m = math.floor(n ** (0.5 + delta2) / 2)

    def objective(log_t: float) -> float:
        t = math.exp(log_t)
        return 2 * n * t + m * math.log(first_return_laplace(START, t, method="resolvent").laplace)

    res = optimize.minimize_scalar(objective, bounds=(-20.0, 1.0), method="bounded")
    return min(1.0, math.exp(min(res.fun, 0.0)))


def _state_index(nu: np.ndarray) -> np.ndarray:
    return (1 - nu) // 2


def sample_bridges(horizon: int, targets: Sequence[Tuple[int, int]], n_paths: int,
                   rng: np.random.Generator, max_cells: int = 30_000_000) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact sampling of skeleton paths conditioned to end in ``targets`` at ``horizon``.

    A backward table h_k(y, nu) = P((Y, nu) at horizon in targets | state at k) drives a
    Doob transform of the forward chain.

    Args:
        horizon: number of steps
        targets: admissible end states (y, nu)
        n_paths: number of paths
        rng: generator
        max_cells: ceiling on the size of the backward table

    Returns:
        (y, nu) int64 arrays of shape (n_paths, horizon + 1)

    Raises:
        ResourceLimitException: backward table too large
        InvalidArgumentException: the conditioning event has probability zero
    """
    width = 2 * horizon + 3
    offset = horizon + 1
    cells = (horizon + 1) * 2 * width
    if cells > max_cells:
        raise ResourceLimitException("bridge table too large", "steps x states", cells, max_cells)

    h = np.zeros((horizon + 1, 2, width))
    for ty, tnu in targets:
        if abs(ty) <= horizon:
            h[horizon, int(_state_index(np.int64(tnu))), ty + offset] = 1.0
    for k in range(horizon - 1, -1, -1):
        nxt = h[k + 1]
        # from (y,+): persist to (y+1,+), reverse to (y-1,-)
        h[k, 0, 1:-1] = PERSISTENCE * nxt[0, 2:] + REVERSAL * nxt[1, :-2]
        # from (y,-): persist to (y-1,-), reverse to (y+1,+)
        h[k, 1, 1:-1] = PERSISTENCE * nxt[1, :-2] + REVERSAL * nxt[0, 2:]
    if h[0, 0, offset] <= 0:
        raise InvalidArgumentException("conditioning event has probability zero")

    y = np.zeros((n_paths, horizon + 1), dtype=np.int64)
    nu = np.ones((n_paths, horizon + 1), dtype=np.int64)
    for k in range(horizon):
        cy, cnu = y[:, k], nu[:, k]
        w_keep = PERSISTENCE * h[k + 1, _state_index(cnu), cy + cnu + offset]
        w_turn = REVERSAL * h[k + 1, _state_index(-cnu), cy - cnu + offset]
        keep = rng.random(n_paths) * (w_keep + w_turn) < w_keep
        nu[:, k + 1] = np.where(keep, cnu, -cnu)
        y[:, k + 1] = cy + nu[:, k + 1]
    return y, nu
