"""
Exact dynamic-programming engines.

These propagate probability mass on dense windows and give the ground truth the Monte Carlo
estimates are checked against. Geometric jumps are convolved with the recursion
E[x] = 3/4 P[x] + 1/4 E[x - 2], i.e. an IIR filter, so no jump length is truncated; the only
losses are mass pushed out of the windows, which is reported as a deficit.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import lfilter

from .config import OracleConfig
from .embedded import GeomKind, PathStats, pmf
from .environment import EnvironmentSpec, orientations, validate
from .exception import (
    InvalidArgumentException,
    InvalidPeriodException,
    InvalidParamException,
    NonZeroSumException,
    ResourceLimitException,
    TailTolTooLooseException,
)
from .skeleton import PERSISTENCE, REVERSAL, _step, skeleton_law

log = logging.getLogger(__name__)

_EVEN_B = np.array([0.75])
_EVEN_A = np.array([1.0, 0.0, -0.25])
MAX_TAIL_TOL = 1e-4


@dataclass(eq=False)
class DistributionGrid:
    """
    概率网格

    ``axes`` names the array axes; ``origin_offset`` is the array index of coordinate 0 along
    each of them (0 for the direction axis, whose index 0 is nu=+1).
    """
    axes: Tuple[str, ...]
    origin_offset: Tuple[int, ...]
    mass: np.ndarray
    deficit: float = 0.0

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    def to_csv(self) -> str:
        """
        稀疏 CSV (仅非零项)

        Returns:
            表头为坐标轴名称加 "mass" 的 CSV 文本
        """
        names = [a for a in self.axes]
        lines = [",".join(names + ["mass"])]
        for index in zip(*np.nonzero(self.mass)):
            coords = []
            for axis, i in zip(self.axes, index):
                offset = self.origin_offset[self.axes.index(axis)]
                coords.append(str(1 - 2 * int(i)) if axis == "nu" else str(int(i) - offset))
            lines.append(",".join(coords + [format(float(self.mass[index]), ".17g")]))
        return "\n".join(lines) + "\n"


def _check_cells(cells: int, dimension: str, config: OracleConfig) -> None:
    if cells > config.max_cells:
        raise ResourceLimitException(f"{dimension} grid too large", dimension, cells, config.max_cells)


def full_walk_distribution(spec: EnvironmentSpec, t_max: int, config: Optional[OracleConfig] = None) -> List[float]:
    """
    Quenched P(M_t = (0, 0)) for t = 0..t_max by propagating the full walk.

    Args:
        spec: environment
        t_max: horizon, >= 1
        config: oracle settings (cell ceiling)

    Returns:
        list of t_max + 1 probabilities

    Raises:
        ResourceLimitException: the (2 t_max + 1)^2 window exceeds max_cells
    """
    validate(spec)
    config = config or OracleConfig()
    if t_max < 1:
        raise InvalidArgumentException(f"t_max={t_max} must be >= 1")
    size = 2 * t_max + 1
    _check_cells(size * size, "y x x", config)
    coords = np.arange(-t_max, t_max + 1)
    eps = orientations(spec, coords)
    right = eps == 1
    up = ((coords[:, None] + coords[None, :]) % 2 == 1)

    mass = np.zeros((size, size))
    mass[t_max, t_max] = 1.0
    out = [1.0]
    for _ in range(t_max):
        half = 0.5 * mass
        new = np.zeros_like(mass)
        new[right, 1:] += half[right, :-1]
        new[~right, :-1] += half[~right, 1:]
        rising = np.where(up, half, 0.0)
        new[1:, :] += rising[:-1, :]
        new[:-1, :] += (half - rising)[1:, :]
        mass = new
        out.append(float(mass[t_max, t_max]))
    return out


@dataclass(eq=False)
class JointSeries:
    """
    联合返回概率序列

    p[n] = P(X_2n = 0, Y_2n = 0); y0_mass[n] = P(Y_2n = 0) seen by the same DP.
    """
    p: np.ndarray
    y0_mass: np.ndarray
    deficit: np.ndarray
    x_halfwidth: int
    y_halfwidth: int
    final: Optional[DistributionGrid] = field(default=None, repr=False)


def _even_convolve(block: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Convolve every row of block (nu, y, x) with the signed even-geometric law."""
    out = np.empty_like(block)
    if right.any():
        out[:, right, :] = lfilter(_EVEN_B, _EVEN_A, block[:, right, :], axis=-1)
    if (~right).any():
        out[:, ~right, :] = lfilter(_EVEN_B, _EVEN_A, block[:, ~right, ::-1], axis=-1)[..., ::-1]
    return out


def _shift_along(even: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Odd jumps are even jumps plus one step in the row direction."""
    odd = np.zeros_like(even)
    odd[:, right, 1:] = even[:, right, :-1]
    odd[:, ~right, :-1] = even[:, ~right, 1:]
    return odd


def _check_tail_tol(tail_tol: float) -> None:
    if not 0 < tail_tol <= MAX_TAIL_TOL:
        raise TailTolTooLooseException(f"tail_tol={tail_tol} must lie in (0, {MAX_TAIL_TOL}]")


def joint_pn_series(spec: EnvironmentSpec, n_max: int, tail_tol: Optional[float] = None,
                    config: Optional[OracleConfig] = None) -> JointSeries:
    """
    P(X_2n = 0, Y_2n = 0) for every n <= n_max from one DP over (nu, y, x).

    One macro step moves the skeleton and convolves the x-marginal of every row with the signed
    odd (direction kept) or even (direction reversed) jump, the sign being the orientation of the
    row the run happens on. The x window doubles whenever its edges hold more than tail_tol;
    levels are capped where the skeleton's Gaussian tail drops below tail_tol.

    Args:
        spec: environment
        n_max: largest n, >= 1
        tail_tol: truncation tolerance in (0, 1e-4], config.tail_tol when None
        config: oracle settings

    Returns:
        JointSeries

    Raises:
        TailTolTooLooseException: tail_tol out of range
        ResourceLimitException: grid exceeds max_cells
    """
    validate(spec)
    config = config or OracleConfig()
    if tail_tol is None:
        tail_tol = config.tail_tol
    _check_tail_tol(tail_tol)
    if n_max < 1:
        raise InvalidArgumentException(f"n_max={n_max} must be >= 1")
    k_max = 2 * n_max
    rows = min(k_max, int(math.ceil(math.sqrt(k_max * math.log(2.0 / tail_tol)))) + 2)
    guard = config.guard
    half = 4 * guard
    _check_cells(2 * (2 * rows + 1) * (2 * half + 1), "nu x y x x", config)

    levels = np.arange(-rows, rows + 1)
    right_rows = orientations(spec, levels) == 1
    mass = np.zeros((2, 2 * rows + 1, 2 * half + 1))
    mass[0, rows, half] = 1.0

    p = np.zeros(n_max + 1)
    y0 = np.zeros(n_max + 1)
    deficit = np.zeros(n_max + 1)
    p[0] = y0[0] = 1.0
    for k in range(k_max):
        edge = mass[..., :guard].sum() + mass[..., -guard:].sum()
        if edge > tail_tol * 1e-3:
            _check_cells(2 * (2 * rows + 1) * (4 * half + 1), "nu x y x x", config)
            mass = np.pad(mass, ((0, 0), (0, 0), (half, half)))
            half *= 2
            log.debug("x window grown to +-%d at step %d", half, k)

        reach = min(k, rows)
        lo, hi = rows - reach, rows + reach + 1
        block = mass[:, lo:hi, :]
        right = right_rows[lo:hi]
        even = _even_convolve(block, right)
        odd = _shift_along(even, right)
        rising = PERSISTENCE * odd[0] + REVERSAL * even[1]
        falling = PERSISTENCE * odd[1] + REVERSAL * even[0]

        new = np.zeros_like(mass)
        top = min(hi + 1, 2 * rows + 1)
        new[0, lo + 1:top] = rising[:top - lo - 1]
        bottom = max(lo - 1, 0)
        new[1, bottom:hi - 1] = falling[bottom - lo + 1:]
        mass = new

        if (k + 1) % 2 == 0:
            n = (k + 1) // 2
            p[n] = mass[0, rows, half] + mass[1, rows, half]
            y0[n] = mass[:, rows, :].sum()
            deficit[n] = max(0.0, 1.0 - mass.sum())

    final = DistributionGrid(axes=("nu", "y", "x"), origin_offset=(0, rows, half), mass=mass,
                             deficit=float(deficit[n_max]))
    log.info("joint DP n_max=%d rows=+-%d x=+-%d deficit=%.3g", n_max, rows, half, deficit[n_max])
    return JointSeries(p=p, y0_mass=y0, deficit=deficit, x_halfwidth=half, y_halfwidth=rows, final=final)


@dataclass(frozen=True)
class JointPn:
    """
    p_n 及截断亏损
    """
    n: int
    probability: float
    deficit: float


def joint_pn_exact(spec: EnvironmentSpec, n: int, tail_tol: Optional[float] = None,
                   config: Optional[OracleConfig] = None) -> JointPn:
    """P(X_2n = 0, Y_2n = 0) to tolerance, with the truncation deficit."""
    series = joint_pn_series(spec, n, tail_tol, config)
    return JointPn(n=n, probability=float(series.p[n]), deficit=float(series.deficit[n]))


@dataclass(frozen=True)
class UnrolledResult:
    """
    按时间展开的 DP 结果
    """
    probability: float
    remaining_mass: float   # 截止 t_max 仍未完成 2n 次竖直步的质量


def joint_pn_unrolled(spec: EnvironmentSpec, n: int, t_max: Optional[int] = None,
                      config: Optional[OracleConfig] = None) -> UnrolledResult:
    """
    P(the walk is at (0, 0) right after its 2n-th vertical step), by propagating the full walk
    in time with the number of completed vertical steps as an extra coordinate.

    Args:
        spec: environment
        n: half number of vertical steps (meant for small n)
        t_max: time horizon (default 16 n + 40)
        config: oracle settings

    Returns:
        UnrolledResult
    """
    validate(spec)
    config = config or OracleConfig()
    if n < 1:
        raise InvalidArgumentException(f"n={n} must be >= 1")
    t_max = 16 * n + 40 if t_max is None else t_max
    levels = 2 * n
    ys = np.arange(-levels, levels + 1)
    xs = np.arange(-t_max, t_max + 1)
    _check_cells(levels * ys.size * xs.size, "count x y x x", config)
    right = orientations(spec, ys) == 1
    up = ((ys[:, None] + xs[None, :]) % 2 == 1)

    mass = np.zeros((levels, ys.size, xs.size))
    mass[0, levels, t_max] = 1.0
    absorbed = 0.0
    for _ in range(t_max):
        half = 0.5 * mass
        new = np.zeros_like(mass)
        new[:, right, 1:] += half[:, right, :-1]
        new[:, ~right, :-1] += half[:, ~right, 1:]
        rising = np.where(up, half, 0.0)
        falling = half - rising
        moved = np.zeros_like(mass)
        moved[:, 1:, :] += rising[:, :-1, :]
        moved[:, :-1, :] += falling[:, 1:, :]
        absorbed += moved[-1, levels, t_max]
        new[1:] += moved[:-1]
        mass = new
    return UnrolledResult(probability=float(absorbed), remaining_mass=float(mass.sum()))


def skeleton_distribution_exact(n: int, config: Optional[OracleConfig] = None) -> DistributionGrid:
    """
    Exact law of (Y_n, nu_n).

    Returns:
        DistributionGrid with axes ("nu", "y")
    """
    config = config or OracleConfig()
    if n < 0:
        raise InvalidArgumentException(f"n={n} must be nonnegative")
    _check_cells(2 * (2 * n + 1), "nu x y", config)
    return DistributionGrid(axes=("nu", "y"), origin_offset=(0, n), mass=skeleton_law(n))


def _signed_pmf(kind: GeomKind, sign: int, k_max: int) -> Tuple[np.ndarray, int]:
    """Probability vector of sign * xi and the array index of value 0."""
    values = np.zeros(2 * k_max + 2)
    start = 1 if kind is GeomKind.ODD else 0
    for k in range(k_max + 1):
        values[2 * k + start] = pmf(kind, k)
    if sign > 0:
        return values, 0
    return values[::-1].copy(), len(values) - 1


def path_x_distribution(stats: PathStats, k_max: int = 32) -> DistributionGrid:
    """
    Law of X given the jump counts, by direct convolution of the signed jump laws.

    Each law is cut after k_max + 1 support points (lost mass 4^-(k_max+1) per jump).

    Returns:
        DistributionGrid with axis ("x",)
    """
    dist = np.array([1.0])
    zero = 0
    groups = ((stats.n_o_plus, GeomKind.ODD, 1), (stats.n_o_minus, GeomKind.ODD, -1),
              (stats.n_e_plus, GeomKind.EVEN, 1), (stats.n_e_minus, GeomKind.EVEN, -1))
    for count, kind, sign in groups:
        law, law_zero = _signed_pmf(kind, sign, k_max)
        for _ in range(count):
            dist = np.convolve(dist, law)
            zero += law_zero
    return DistributionGrid(axes=("x",), origin_offset=(zero,), mass=dist,
                            deficit=max(0.0, 1.0 - float(dist.sum())))


def bridge_confinement_exact(n: int, level: int) -> float:
    """
    P(max_k |Y_k| < level | Y_2n = 0) for k = 0..2n.

    Args:
        n: half horizon
        level: confinement level, >= 1

    Returns:
        conditional probability
    """
    if level < 1:
        raise InvalidArgumentException(f"level={level} must be >= 1")
    width = 2 * n
    ys = np.arange(-width, width + 1)
    outside = np.abs(ys) >= level
    plus = np.zeros(ys.size)
    minus = np.zeros(ys.size)
    plus[width] = 1.0
    for _ in range(width):
        plus, minus = _step(plus, minus)
        plus[outside] = 0.0
        minus[outside] = 0.0
    law = skeleton_law(width)
    return float((plus[width] + minus[width]) / (law[0, width] + law[1, width]))


def expected_low_visits_exact(n: int, L: int) -> float:
    """
    E(#{i < 2n : |Y_i| <= L} | (Y, nu) at 2n-1 is (-1, -1) and at 2n is (0, +1)).

    Forward laws on |y| <= L are stored and paired with the backward probabilities of reaching
    (-1, -1) at time 2n - 1; the final step to (0, +1) has a fixed probability and cancels.
    """
    if n < 1 or L < 0:
        raise InvalidArgumentException("need n >= 1 and L >= 0")
    horizon = 2 * n - 1
    offset = horizon + 1
    width = 2 * horizon + 3
    band = slice(max(offset - L, 0), min(offset + L + 1, width))

    plus = np.zeros(width)
    minus = np.zeros(width)
    plus[offset] = 1.0
    stored = [np.stack([plus[band], minus[band]])]
    for _ in range(horizon):
        plus, minus = _step(plus, minus)
        stored.append(np.stack([plus[band], minus[band]]))
    z_mass = minus[offset - 1]

    back = np.zeros((2, width))
    back[1, offset - 1] = 1.0
    total = float((stored[horizon] * back[:, band]).sum())
    for i in range(horizon - 1, -1, -1):
        nxt = back
        back = np.zeros((2, width))
        back[0, 1:-1] = PERSISTENCE * nxt[0, 2:] + REVERSAL * nxt[1, :-2]
        back[1, 1:-1] = PERSISTENCE * nxt[1, :-2] + REVERSAL * nxt[0, 2:]
        total += float((stored[i] * back[:, band]).sum())
    return total / z_mass


@dataclass(eq=False)
class WbarLaw:
    """
    模 Q 配对链的分布

    States are (ybar, nu, ybar', nu') with ybar' = ybar + nu' mod Q.
    """
    period: int
    f_table: Tuple[int, ...]
    n: int
    states: List[Tuple[int, int, int, int]]
    law: np.ndarray
    law_next: np.ndarray
    stationary: np.ndarray

    @property
    def total_mass(self) -> float:
        return float(self.law.sum())

    @property
    def tv_averaged(self) -> float:
        """Total variation between the average of the laws at n and n+1 and the stationary law."""
        return 0.5 * float(np.abs(0.5 * (self.law + self.law_next) - self.stationary).sum())

    def stationary_means(self) -> Tuple[float, float, float]:
        """
        Stationary means of the increments of S_e, S_o and Y.

        Returns:
            (u.pi, v.pi, w.pi), all zero for a zero-sum table
        """
        f = np.array([self.f_table[s[0]] for s in self.states], dtype=float)
        change = np.array([s[1] != s[3] for s in self.states])
        nu_next = np.array([s[3] for s in self.states], dtype=float)
        return (float(np.dot(f * change, self.stationary)),
                float(np.dot(f * ~change, self.stationary)),
                float(np.dot(nu_next, self.stationary)))


def wbar_states(period: int) -> List[Tuple[int, int, int, int]]:
    """Reachable states (ybar, nu, ybar', nu') of the pair chain, in a fixed order."""
    return [(ybar, nu, (ybar + nxt) % period, nxt) for ybar in range(period) for nu in (1, -1) for nxt in (1, -1)]


def wbar_stationary(states: Sequence[Tuple[int, int, int, int]], period: int) -> np.ndarray:
    """Stationary weights: 2/3 / 2Q on direction-changing states, 1/3 / 2Q on persisting ones."""
    return np.array([(PERSISTENCE if s[1] == s[3] else REVERSAL) / (2 * period) for s in states])


def wbar_distribution_exact(period: int, f_table: Sequence[int], n: int) -> WbarLaw:
    """
    Exact law of the pair chain reduced mod Q, started from ((Q-1, -1), (0, +1)).

    Args:
        period: Q, even and > 1
        f_table: zero-sum table of Q entries ±1
        n: number of steps, >= 1

    Returns:
        WbarLaw (laws at n and n + 1 plus the stationary law)
    """
    if period <= 1 or period % 2:
        raise InvalidPeriodException(f"period Q={period} must be an even integer > 1")
    f_table = tuple(int(v) for v in f_table)
    if len(f_table) != period or any(v not in (-1, 1) for v in f_table):
        raise InvalidParamException("table must hold Q entries of +1 or -1")
    if sum(f_table):
        raise NonZeroSumException(f"table sums to {sum(f_table)}, expected 0")
    if n < 1:
        raise InvalidArgumentException(f"n={n} must be >= 1")

    states = wbar_states(period)
    index = {s: i for i, s in enumerate(states)}
    size = len(states)
    transition = np.zeros((size, size))
    for i, (ybar, nu, ybar2, nu2) in enumerate(states):
        for nu3 in (1, -1):
            prob = PERSISTENCE if nu3 == nu2 else REVERSAL
            transition[i, index[(ybar2, nu2, (ybar2 + nu3) % period, nu3)]] += prob
    stationary = wbar_stationary(states, period)

    law = np.zeros(size)
    law[index[(period - 1, -1, 0, 1)]] = 1.0
    for _ in range(n):
        law = law @ transition
    return WbarLaw(period=period, f_table=f_table, n=n, states=states, law=law,
                   law_next=law @ transition, stationary=stationary)
