"""
Embedded horizontal walk.

Between two vertical steps the walk makes a Geometric(1/2) number of horizontal moves along
the current row. An odd run keeps the vertical direction and an even (or empty) run reverses
it, so given the skeleton the jump after step k is the row orientation at Y_k times an odd
geometric variable when nu_k = nu_{k+1} and an even one otherwise. Both laws put mass
3 (1/2)^(2k+2) on their k-th support point.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .config import OracleConfig
from .environment import EnvironmentSpec, orientations
from .exception import (
    DegenerateVarianceException,
    DomainException,
    InvalidArgumentException,
    InvariantViolationException,
    QuadratureNotConvergedException,
)
from .skeleton import SkeletonPath, occupation_stats
from .streams import SeedLike, as_generator

log = logging.getLogger(__name__)

# parameter of K in value = 2K (+1): P(K = k) = (3/4)(1/4)^k
_K_SUCCESS = 0.75

M_O = 5.0 / 3.0
M_E = 2.0 / 3.0
S2_O = 16.0 / 9.0
S2_E = 16.0 / 9.0
S2 = max(S2_O, S2_E)
LN2 = math.log(2.0)


class GeomKind(Enum):
    """
    几何跳跃类型
    """
    ODD = "odd"      # 取值 1, 3, 5, ...
    EVEN = "even"    # 取值 0, 2, 4, ...


class Support(Enum):
    """
    反演积分的格支撑
    """
    ALL_INTEGERS = "AllIntegers"
    EVEN_INTEGERS = "EvenIntegers"


def pmf(kind: GeomKind, k: int) -> float:
    """
    Probability of the k-th support point (2k+1 for ODD, 2k for EVEN).

    Args:
        kind: jump kind
        k: index, negative indices have probability 0

    Returns:
        3 (1/2)^(2k+2)
    """
    if k < 0:
        return 0.0
    return 3.0 * 0.25 ** (k + 1)


def in_support(kind: GeomKind, value: int) -> bool:
    """Whether ``value`` is a possible jump of the given kind."""
    if value < 0:
        return False
    return value % 2 == (1 if kind is GeomKind.ODD else 0)


def moments(kind: GeomKind) -> Tuple[float, float]:
    """(mean, variance) of the jump law."""
    if kind is GeomKind.ODD:
        return M_O, S2_O
    return M_E, S2_E


def sample(kind: GeomKind, rng: np.random.Generator, size=None):
    """
    Draw jumps of one kind.

    Args:
        kind: jump kind
        rng: generator
        size: numpy size argument

    Returns:
        int or int64 array
    """
    k = rng.geometric(_K_SUCCESS, size=size) - 1
    value = 2 * k + (1 if kind is GeomKind.ODD else 0)
    return int(value) if size is None else value.astype(np.int64)


def _arg_odd(theta):
    """Argument of chi_o(theta) = theta - arg(4 - e^{2i theta})."""
    two = 2.0 * np.asarray(theta, dtype=np.float64)
    return theta - np.arctan2(-np.sin(two), 4.0 - np.cos(two))


def modulus_r(theta):
    """r(theta) = 3 / sqrt(17 - 8 cos 2 theta), the common modulus of chi_o and chi_e."""
    return 3.0 / np.sqrt(17.0 - 8.0 * np.cos(2.0 * np.asarray(theta, dtype=np.float64)))


def charfn(kind: GeomKind, theta):
    """
    Characteristic function chi_o(theta) = 3 e^{i theta} / (4 - e^{2 i theta}), chi_e = e^{-i theta} chi_o.

    Args:
        kind: jump kind
        theta: real or real array

    Returns:
        complex or complex array
    """
    z = np.exp(1j * np.asarray(theta, dtype=np.float64))
    value = 3.0 * z / (4.0 - z * z)
    if kind is GeomKind.EVEN:
        value = value / z
    return complex(value) if np.ndim(value) == 0 else value


def log_mgf(kind: GeomKind, t: float) -> float:
    """log E(e^{t xi}); finite for t < ln 2."""
    if t >= LN2:
        raise DomainException(f"t={t} must be < ln 2")
    value = math.log(3.0) + t - math.log(4.0 - math.exp(2.0 * t))
    if kind is GeomKind.EVEN:
        value -= t
    return value


def mgf(kind: GeomKind, t: float) -> float:
    """
    phi_o(t) = 3 e^t / (4 - e^{2t}), phi_e(t) = e^{-t} phi_o(t).

    Raises:
        DomainException: t >= ln 2
    """
    return math.exp(log_mgf(kind, t))


@dataclass(frozen=True)
class PathStats:
    """
    路径统计

    Signed counts of odd and even jumps: *_plus jumps happen on right-directed rows,
    *_minus on left-directed rows.
    """
    n_o_plus: int = 0
    n_o_minus: int = 0
    n_e_plus: int = 0
    n_e_minus: int = 0

    @property
    def delta_o(self) -> int:
        return self.n_o_plus - self.n_o_minus

    @property
    def delta_e(self) -> int:
        return self.n_e_plus - self.n_e_minus

    @property
    def sigma_o(self) -> int:
        return self.n_o_plus + self.n_o_minus

    @property
    def sigma_e(self) -> int:
        return self.n_e_plus + self.n_e_minus

    @property
    def n_jumps(self) -> int:
        return self.sigma_o + self.sigma_e

    @property
    def drift(self) -> float:
        """Conditional mean m_o Delta_o + m_e Delta_e of the embedded walk."""
        return M_O * self.delta_o + M_E * self.delta_e

    @property
    def variance(self) -> float:
        return S2_O * self.sigma_o + S2_E * self.sigma_e

    def to_dict(self) -> Dict[str, int]:
        return {
            "N_o_plus": self.n_o_plus,
            "N_o_minus": self.n_o_minus,
            "N_e_plus": self.n_e_plus,
            "N_e_minus": self.n_e_minus,
            "Delta_o": self.delta_o,
            "Delta_e": self.delta_e,
            "Sigma_o": self.sigma_o,
            "Sigma_e": self.sigma_e,
        }


def _counts(keep: np.ndarray, eps: np.ndarray, axis=None) -> Tuple[np.ndarray, ...]:
    right = eps == 1
    return (
        np.sum(keep & right, axis=axis),
        np.sum(keep & ~right, axis=axis),
        np.sum(~keep & right, axis=axis),
        np.sum(~keep & ~right, axis=axis),
    )


def path_stats(path: SkeletonPath, spec: EnvironmentSpec, check: bool = True) -> PathStats:
    """
    Jump counts of a skeleton path, transition k using the orientation at Y_k.

    Args:
        path: skeleton path of length >= 2
        spec: environment
        check: verify m_o Delta_o + m_e Delta_e = sum_y eps_y (m_o m_o(y) + m_e m_e(y))

    Returns:
        PathStats
    """
    if len(path) < 2:
        raise InvalidArgumentException("path needs at least one transition")
    keep = path.nu[:-1] == path.nu[1:]
    eps = orientations(spec, path.y[:-1])
    stats = PathStats(*(int(c) for c in _counts(keep, eps)))
    if check:
        occ = occupation_stats(path)
        levels = sorted(set(occ.m_o) | set(occ.m_e))
        signs = orientations(spec, np.array(levels, dtype=np.int64))
        weighted = sum(int(s) * (M_O * occ.m_o.get(y, 0) + M_E * occ.m_e.get(y, 0)) for y, s in zip(levels, signs))
        if abs(weighted - stats.drift) > 1e-9 * max(1.0, abs(weighted)):
            raise InvariantViolationException(f"drift {stats.drift} != occupation sum {weighted}")
    return stats


def path_stats_batch(y: np.ndarray, nu: np.ndarray, spec: EnvironmentSpec) -> Tuple[np.ndarray, ...]:
    """
    Vectorised path_stats over rows of (n_paths, horizon + 1) arrays.

    Returns:
        (n_o_plus, n_o_minus, n_e_plus, n_e_minus) int arrays of length n_paths
    """
    keep = nu[:, :-1] == nu[:, 1:]
    eps = orientations(spec, y[:, :-1])
    return _counts(keep, eps, axis=1)


def conditional_charfn(stats: PathStats, theta):
    """
    E(e^{i theta X} | path), accumulated as log-modulus and argument.

    Args:
        stats: path statistics
        theta: real or real array

    Returns:
        complex or complex array
    """
    theta = np.asarray(theta, dtype=np.float64)
    log_mod = stats.n_jumps * np.log(modulus_r(theta))
    arg_o = _arg_odd(theta)
    arg_e = arg_o - theta
    value = np.exp(log_mod + 1j * (stats.delta_o * arg_o + stats.delta_e * arg_e))
    return complex(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class InversionResult:
    """
    反演结果
    """
    probability: float
    error_estimate: float
    n_quad: int


def _grid_mean(fn, lo: float, width: float, n: int) -> float:
    theta = lo + width * np.arange(n) / n
    return float(np.mean(fn(theta).real))


def return_prob_inversion(stats: PathStats, support: Union[Support, str] = Support.ALL_INTEGERS,
                          n_quad: int = 64, tol: Optional[float] = None, max_quad: Optional[int] = None,
                          config: Optional[OracleConfig] = None) -> InversionResult:
    """
    P(X = 0 | path) by trapezoid quadrature of the inversion integral, doubling the grid
    until two resolutions agree.

    Args:
        stats: path statistics
        support: ALL_INTEGERS integrates over [-pi, pi); EVEN_INTEGERS over [-pi/2, pi/2) with 1/pi
        n_quad: initial number of nodes, >= 64
        tol: absolute agreement between successive resolutions, config.quad_tol when None
        max_quad: largest number of nodes, config.max_quad when None
        config: oracle settings

    Returns:
        InversionResult

    Raises:
        QuadratureNotConvergedException: no agreement before max_quad
    """
    config = config or OracleConfig()
    tol = config.quad_tol if tol is None else tol
    max_quad = config.max_quad if max_quad is None else max_quad
    support = Support(support)
    if n_quad < 64:
        raise InvalidArgumentException(f"n_quad={n_quad} must be >= 64")
    if support is Support.ALL_INTEGERS:
        lo, width = -math.pi, 2 * math.pi
    else:
        if stats.sigma_o % 2:
            raise InvalidArgumentException("X is odd when the number of odd jumps is odd")
        lo, width = -math.pi / 2, math.pi

    def fn(theta):
        return conditional_charfn(stats, theta)

    previous = _grid_mean(fn, lo, width, n_quad)
    n = n_quad
    while True:
        n *= 2
        if n > max_quad:
            raise QuadratureNotConvergedException(
                f"inversion did not settle below {tol:g} with {max_quad} nodes", data={"last": previous})
        current = _grid_mean(fn, lo, width, n)
        delta = abs(current - previous)
        if delta < tol:
            log.debug("inversion converged with %d nodes (delta %.3g)", n, delta)
            return InversionResult(probability=current, error_estimate=delta, n_quad=n)
        previous = current


def modulus_integral_bound(stats: Union[PathStats, int], tol: float = 1e-13) -> float:
    """
    (1/2 pi) int r(theta)^m d theta with m the number of jumps: bounds P(X = 0 | path) for
    every path with m jumps.

    Args:
        stats: path statistics or the jump count m

    Returns:
        bound
    """
    m = stats.n_jumps if isinstance(stats, PathStats) else int(stats)

    def fn(theta):
        return np.exp(m * np.log(modulus_r(theta))).astype(np.complex128)

    n = 64
    previous = _grid_mean(fn, -math.pi, 2 * math.pi, n)
    while n < 2 ** 22:
        n *= 2
        current = _grid_mean(fn, -math.pi, 2 * math.pi, n)
        if abs(current - previous) < tol:
            return current
        previous = current
    return previous


@dataclass(frozen=True)
class GaussianApprox:
    """
    高斯近似
    """
    a_n: float        # 条件均值
    b_n: float        # 条件标准差
    p_approx: float   # 2/(B sqrt(2 pi)) exp(-A^2 / 2B^2)


def gaussian_approx(stats: PathStats) -> GaussianApprox:
    """
    Local Gaussian approximation of P(X = 0 | path) on the even lattice.

    Raises:
        DegenerateVarianceException: no jumps
    """
    b2 = stats.variance
    if b2 <= 0:
        raise DegenerateVarianceException("path has no jumps")
    a = stats.drift
    b = math.sqrt(b2)
    p = 2.0 / (b * math.sqrt(2 * math.pi)) * math.exp(-0.5 * (a / b) ** 2)
    return GaussianApprox(a_n=a, b_n=b, p_approx=p)


@dataclass(frozen=True)
class ChernoffBound:
    """
    指数界

    ``raw`` is the rigorous Markov bound E(e^{tX} | path); ``optimized`` is the
    second-order expansion exp(t A + t^2 s^2 n) at the same t.
    """
    t: float
    log_raw: float
    log_optimized: float

    @property
    def raw(self) -> float:
        return math.exp(min(self.log_raw, 700.0))

    @property
    def optimized(self) -> float:
        return math.exp(min(self.log_optimized, 700.0))


def chernoff_bound(stats: PathStats, n: int, delta3: float) -> ChernoffBound:
    """
    Exponential bound on P(X_{2n} = 0 | path) at t = -sign(A) n^(delta3 - 1/2) / (2 s^2).

    Args:
        stats: path statistics
        n: half horizon
        delta3: exponent in (0, 1/2)

    Returns:
        ChernoffBound

    Raises:
        DomainException: |t| >= ln 2
    """
    if not 0 < delta3 < 0.5:
        raise InvalidArgumentException(f"delta3={delta3} must lie in (0, 1/2)")
    a = stats.drift
    t = -float(np.sign(a)) * n ** (delta3 - 0.5) / (2 * S2)
    if abs(t) >= LN2:
        raise DomainException(f"|t|={abs(t)} must be < ln 2")
    log_raw = (stats.n_o_plus * log_mgf(GeomKind.ODD, t) + stats.n_e_plus * log_mgf(GeomKind.EVEN, t)
               + stats.n_o_minus * log_mgf(GeomKind.ODD, -t) + stats.n_e_minus * log_mgf(GeomKind.EVEN, -t))
    return ChernoffBound(t=t, log_raw=log_raw, log_optimized=t * a + t * t * S2 * n)


def sample_x_given_stats(stats: PathStats, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo draws of X given the four jump counts."""
    total = np.zeros(n_samples, dtype=np.int64)
    groups = (
        (stats.n_o_plus, GeomKind.ODD, 1),
        (stats.n_o_minus, GeomKind.ODD, -1),
        (stats.n_e_plus, GeomKind.EVEN, 1),
        (stats.n_e_minus, GeomKind.EVEN, -1),
    )
    for count, kind, sign in groups:
        if count:
            total += sign * sample(kind, rng, (n_samples, count)).sum(axis=1)
    return total


def simulate_embedded_batch(y: np.ndarray, nu: np.ndarray, spec: EnvironmentSpec,
                            rng: np.random.Generator) -> np.ndarray:
    """
    Embedded walks along a batch of skeleton paths.

    Args:
        y, nu: (n_paths, horizon + 1) arrays
        spec: environment
        rng: generator

    Returns:
        X of shape (n_paths, horizon + 1), X[:, 0] = 0
    """
    keep = (nu[:, :-1] == nu[:, 1:]).astype(np.int64)
    k = rng.geometric(_K_SUCCESS, size=keep.shape) - 1
    jumps = orientations(spec, y[:, :-1]) * (2 * k + keep)
    x = np.zeros(y.shape, dtype=np.int64)
    np.cumsum(jumps, axis=1, out=x[:, 1:])
    return x


def simulate_embedded(path: SkeletonPath, spec: EnvironmentSpec, seed: SeedLike = None) -> np.ndarray:
    """
    Embedded walk X_0..X_n along one skeleton path.

    Args:
        path: skeleton path
        spec: environment
        seed: integer seed or generator

    Returns:
        int64 array of length len(path)
    """
    return simulate_embedded_batch(path.y[None, :], path.nu[None, :], spec, as_generator(seed))[0]
