"""
Events, functionals and recurrence diagnostics.

Paths are skeleton paths of horizon 2n started at (0, +1). The pair event Z_n asks the path to
end by going (-1, -1) -> (0, +1), the same pair it notionally started from.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sps

from .config import EventConfig, OracleConfig, SimulationConfig
from .embedded import M_E, M_O, PathStats, Support, gaussian_approx, path_stats, path_stats_batch, \
    return_prob_inversion
from .environment import EnvironmentSpec, Regime, orientations, perturbed_levels, validate
from .exception import (
    InvalidArgumentException,
    InvariantViolationException,
    LTooSmallException,
    ZeroAcceptanceException,
)
from .oracle import bridge_confinement_exact, expected_low_visits_exact, joint_pn_series, wbar_states, \
    wbar_stationary
from .result import ExperimentResult, Method, ResultTable
from .skeleton import REVERSAL, SkeletonPath, return_prob_exact, sample_bridges, simulate_skeleton_batch, \
    skeleton_law
from .streams import SeedLike, as_generator, task_generator

log = logging.getLogger(__name__)

# W_0 = (Y_-1, nu_-1; Y_0, nu_0)
W0 = ((-1, -1), (0, 1))


def _half_horizon(path: SkeletonPath) -> int:
    if path.horizon < 2 or path.horizon % 2:
        raise InvalidArgumentException(f"path horizon {path.horizon} must be a positive even number")
    return path.horizon // 2


def _periodic(period: int, f_table: Sequence[int]) -> EnvironmentSpec:
    spec = EnvironmentSpec(Regime.PERIODIC, period=period, f_table=tuple(f_table))
    validate(spec)
    return spec


# ---------------------------------------------------------------------------------------------
# events A_n and B_n
# ---------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class EventRecord:
    """
    事件指示

    a1: max_{k<=2n} |Y_k| < n^(1/2+delta1); a2: max_y eta_{2n-1}(y) < n^(1/2+delta2);
    b: a1 and a2 and |drift| > n^(1/2+delta3).
    """
    n: int
    a1: bool
    a2: bool
    b: bool
    drift: float
    max_abs_y: int
    max_eta: int

    def __post_init__(self):
        if self.b and not (self.a1 and self.a2):
            raise InvariantViolationException("B_n must be contained in A_n")

    @property
    def a(self) -> bool:
        return self.a1 and self.a2


def _thresholds(n: int, cfg: EventConfig) -> Tuple[float, float, float]:
    root = math.sqrt(n)
    return root * n ** cfg.delta1, root * n ** cfg.delta2, root * n ** cfg.delta3


def classify_events(path: SkeletonPath, spec: EnvironmentSpec, cfg: Optional[EventConfig] = None) -> EventRecord:
    """
    Evaluate A_{n,1}, A_{n,2} and B_n on one path.

    Args:
        path: skeleton path of horizon 2n
        spec: environment giving the row signs of the drift
        cfg: event parameters

    Returns:
        EventRecord
    """
    cfg = cfg or EventConfig()
    n = _half_horizon(path)
    t1, t2, t3 = _thresholds(n, cfg)
    max_abs_y = int(np.abs(path.y).max())
    _, counts = np.unique(path.y[:-1], return_counts=True)
    max_eta = int(counts.max())
    drift = path_stats(path, spec).drift
    a1 = max_abs_y < t1
    a2 = max_eta < t2
    return EventRecord(n=n, a1=a1, a2=a2, b=a1 and a2 and abs(drift) > t3, drift=drift,
                       max_abs_y=max_abs_y, max_eta=max_eta)


def _max_occupation(levels: np.ndarray) -> np.ndarray:
    shifted = levels - levels.min(axis=1, keepdims=True)
    counts = np.zeros((levels.shape[0], int(shifted.max()) + 1), dtype=np.int64)
    np.add.at(counts, (np.arange(levels.shape[0])[:, None], shifted), 1)
    return counts.max(axis=1)


def classify_events_batch(y: np.ndarray, nu: np.ndarray, spec: EnvironmentSpec,
                          cfg: Optional[EventConfig] = None) -> Dict[str, np.ndarray]:
    """
    Vectorised classify_events over rows of (n_paths, 2n + 1) arrays.

    Returns:
        {"a1", "a2", "b"} boolean arrays and the "drift" float array
    """
    cfg = cfg or EventConfig()
    n = (y.shape[1] - 1) // 2
    t1, t2, t3 = _thresholds(n, cfg)
    nop, nom, nep, nem = path_stats_batch(y, nu, spec)
    drift = M_O * (nop - nom) + M_E * (nep - nem)
    a1 = np.abs(y).max(axis=1) < t1
    a2 = _max_occupation(y[:, :-1]) < t2
    return {"a1": a1, "a2": a2, "b": a1 & a2 & (np.abs(drift) > t3), "drift": drift}


def a1_failure_exact(n: int, delta1: float) -> float:
    """P(A_{n,1}^c | Y_2n = 0) from the killed skeleton DP."""
    level = int(math.ceil(n ** (0.5 + delta1)))
    return 1.0 - bridge_confinement_exact(n, level)


# ---------------------------------------------------------------------------------------------
# functionals S_e, S_o
# ---------------------------------------------------------------------------------------------

def s_functionals_batch(y: np.ndarray, nu: np.ndarray, period: int,
                        f_table: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """(S_e, S_o) per row: f(Y_{i-1} mod Q) summed over direction changes and persistences."""
    f = np.asarray(f_table, dtype=np.int64)[np.mod(y[..., :-1], period)]
    change = nu[..., :-1] != nu[..., 1:]
    return np.sum(f * change, axis=-1), np.sum(f * ~change, axis=-1)


def s_functionals(path: SkeletonPath, period: int, f_table: Sequence[int]) -> Tuple[int, int]:
    """
    S_e and S_o of one path.

    Args:
        path: skeleton path
        period: Q
        f_table: zero-sum table of Q entries +1/-1

    Returns:
        (S_e, S_o)
    """
    _periodic(period, f_table)
    s_e, s_o = s_functionals_batch(path.y, path.nu, period, f_table)
    return int(s_e), int(s_o)


@dataclass(frozen=True)
class PerturbedFunctionals:
    """
    扰动泛函

    s_bar_* use the realized row signs, s_* the periodic table; low_level_visits counts
    i = 0..2n-1 with |Y_i| <= L, the levels the terms are read at.
    """
    s_bar_e: int
    s_bar_o: int
    low_level_visits: int
    s_e: int
    s_o: int


def _perturbation_cutoff(spec: EnvironmentSpec, y: np.ndarray, L: int) -> None:
    levels = perturbed_levels(spec, int(y.min()), int(y.max()))
    beyond = levels[np.abs(levels) > L]
    if beyond.size:
        raise LTooSmallException(f"perturbed level {int(beyond[0])} lies beyond L={L}",
                                 data={"levels": beyond.tolist()})


def s_functionals_perturbed_batch(y: np.ndarray, nu: np.ndarray, spec: EnvironmentSpec,
                                  L: int) -> Dict[str, np.ndarray]:
    """
    Perturbed and periodic functionals over rows of a path batch.

    Raises:
        LTooSmallException: a perturbed level beyond L falls inside the paths' range
        InvariantViolationException: |S_bar| <= 2 low_level_visits + |S| fails on some row
    """
    if spec.f_table is None:
        raise InvalidArgumentException("functionals need a periodic table")
    if L < 0:
        raise InvalidArgumentException(f"L={L} must be nonnegative")
    _perturbation_cutoff(spec, y, L)
    signs = orientations(spec, y[..., :-1])
    change = nu[..., :-1] != nu[..., 1:]
    s_bar_e = np.sum(signs * change, axis=-1)
    s_bar_o = np.sum(signs * ~change, axis=-1)
    s_e, s_o = s_functionals_batch(y, nu, spec.period, spec.f_table)
    low = np.sum(np.abs(y[..., :-1]) <= L, axis=-1)
    bad = (np.abs(s_bar_e) > 2 * low + np.abs(s_e)) | (np.abs(s_bar_o) > 2 * low + np.abs(s_o))
    if np.any(bad):
        raise InvariantViolationException(f"cutoff inequality fails on {int(np.sum(bad))} path(s)")
    return {"s_bar_e": s_bar_e, "s_bar_o": s_bar_o, "low_level_visits": low, "s_e": s_e, "s_o": s_o}


def s_functionals_perturbed(path: SkeletonPath, spec: EnvironmentSpec, L: int) -> PerturbedFunctionals:
    """
    S_bar_e, S_bar_o and the low-level visit count of one path.

    Args:
        path: skeleton path of horizon 2n
        spec: perturbed (or periodic) environment
        L: cutoff level, at least every perturbed |y| met by the path

    Returns:
        PerturbedFunctionals
    """
    validate(spec)
    out = s_functionals_perturbed_batch(path.y, path.nu, spec, L)
    return PerturbedFunctionals(**{key: int(value) for key, value in out.items()})


def default_cutoff(spec: EnvironmentSpec, reach: int) -> int:
    """Largest perturbed |y| within [-reach, reach]; 0 when there is none."""
    levels = perturbed_levels(spec, -reach, reach)
    return int(np.abs(levels).max()) if levels.size else 0


# ---------------------------------------------------------------------------------------------
# Z_n conditioning
# ---------------------------------------------------------------------------------------------

def z_event_mask(y: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """W_{2n} = W_0 per row."""
    (y1, nu1), (y2, nu2) = W0
    return (y[..., -2] == y1) & (nu[..., -2] == nu1) & (y[..., -1] == y2) & (nu[..., -1] == nu2)


def z_event_reduced_mask(y: np.ndarray, nu: np.ndarray, period: int) -> np.ndarray:
    """W-bar_{2n} = W-bar_0 and Y_2n = 0 per row; equal to z_event_mask on every path."""
    (y1, nu1), (y2, nu2) = W0
    return ((np.mod(y[..., -2], period) == y1 % period) & (nu[..., -2] == nu1)
            & (np.mod(y[..., -1], period) == y2 % period) & (nu[..., -1] == nu2) & (y[..., -1] == 0))


def z_probability_exact(n: int) -> float:
    """P(Z_n): reach (-1, -1) at 2n - 1, then reverse."""
    horizon = 2 * n - 1
    return float(skeleton_law(horizon)[1, horizon - 1] * REVERSAL)


@dataclass(eq=False)
class ZSample:
    """
    Z_n 条件路径样本
    """
    n: int
    y: np.ndarray
    nu: np.ndarray
    n_proposed: int
    method: str

    @property
    def n_accepted(self) -> int:
        return int(self.y.shape[0])

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.n_proposed if self.n_proposed else 0.0

    def paths(self) -> List[SkeletonPath]:
        return [SkeletonPath(self.y[i], self.nu[i]) for i in range(self.n_accepted)]


def sample_z_paths(n: int, n_draws: int, seed: SeedLike = None, method: str = "bridge",
                   config: Optional[SimulationConfig] = None) -> ZSample:
    """
    Skeleton paths of horizon 2n conditioned on Z_n.

    Args:
        n: half horizon, >= 1
        n_draws: bridge paths to draw, or proposals for rejection
        seed: integer seed or generator
        method: "bridge" (exact backward sampling, n_draws paths) or "rejection" (n_draws
            unconditioned proposals, the Z_n hits kept)
        config: simulation settings

    Returns:
        ZSample
    """
    if n < 1:
        raise InvalidArgumentException(f"n={n} must be >= 1")
    config = config or SimulationConfig()
    rng = as_generator(seed)
    horizon = 2 * n
    if method == "bridge":
        y, nu = sample_bridges(horizon - 1, [W0[0]], n_draws, rng, config.bridge_max_cells)
        y = np.hstack([y, np.zeros((n_draws, 1), dtype=np.int64)])
        nu = np.hstack([nu, np.ones((n_draws, 1), dtype=np.int64)])
        return ZSample(n=n, y=y, nu=nu, n_proposed=n_draws, method=method)
    if method != "rejection":
        raise InvalidArgumentException(f"unknown sampling method {method!r}")
    kept_y, kept_nu = [], []
    remaining = n_draws
    while remaining > 0:
        size = min(config.batch_size, remaining)
        y, nu = simulate_skeleton_batch(horizon, size, rng)
        hit = z_event_mask(y, nu)
        kept_y.append(y[hit])
        kept_nu.append(nu[hit])
        remaining -= size
    empty = np.zeros((0, horizon + 1), dtype=np.int64)
    return ZSample(n=n, y=np.vstack(kept_y) if kept_y else empty, nu=np.vstack(kept_nu) if kept_nu else empty,
                   n_proposed=n_draws, method=method)


@dataclass(frozen=True)
class SProbability:
    """
    条件概率估计
    """
    estimate: float
    stderr: float
    acceptance_rate: float   # Z_n 命中率 (桥采样时为精确概率)
    n_accepted: int


def conditional_s_probability(period: int, f_table: Sequence[int], n: int, C: float, n_samples: int,
                              seed: SeedLike = None, method: str = "rejection",
                              config: Optional[SimulationConfig] = None) -> SProbability:
    """
    Estimate P(|S_e| + |S_o| <= C sqrt(n) | Z_n).

    Args:
        period: Q
        f_table: zero-sum periodic table
        n: half horizon
        C: functional scale
        n_samples: proposals (rejection) or conditioned paths (bridge)
        seed: integer seed or generator
        method: "rejection" or "bridge"

    Returns:
        SProbability

    Raises:
        ZeroAcceptanceException: no proposal hit Z_n
    """
    _periodic(period, f_table)
    if C <= 0:
        raise InvalidArgumentException(f"C={C} must be positive")
    sample = sample_z_paths(n, n_samples, seed, method, config)
    if sample.n_accepted == 0:
        raise ZeroAcceptanceException(f"no Z_{n} path among {n_samples} proposals")
    s_e, s_o = s_functionals_batch(sample.y, sample.nu, period, f_table)
    inside = np.abs(s_e) + np.abs(s_o) <= C * math.sqrt(n)
    p = float(inside.mean())
    rate = sample.acceptance_rate if method == "rejection" else z_probability_exact(n)
    log.info("S-probability n=%d C=%g: %.4f from %d paths (acceptance %.4g)", n, C, p, sample.n_accepted, rate)
    return SProbability(estimate=p, stderr=math.sqrt(p * (1 - p) / sample.n_accepted), acceptance_rate=rate,
                        n_accepted=sample.n_accepted)


def constrained_path_filter(path: SkeletonPath, period: int, f_table: Sequence[int], C: float) -> bool:
    """
    Membership in the constrained path set: boundary pairs equal to W_0 at both ends and
    |S_e| + |S_o| <= C sqrt(n).
    """
    if path.horizon < 2 or path.horizon % 2:
        return False
    n = path.horizon // 2
    if (int(path.y[0]), int(path.nu[0])) != W0[1]:
        return False
    if not bool(z_event_mask(path.y, path.nu)):
        return False
    s_e, s_o = s_functionals(path, period, f_table)
    return abs(s_e) + abs(s_o) <= C * math.sqrt(n)


def s_functional_means(period: int, f_table: Sequence[int], n: int, n_samples: int,
                       seed: SeedLike = None) -> Tuple[float, float, float, float]:
    """
    Means of S_e / sqrt(n) and S_o / sqrt(n) over unconditioned paths.

    Returns:
        (mean_e, stderr_e, mean_o, stderr_o)
    """
    _periodic(period, f_table)
    y, nu = simulate_skeleton_batch(2 * n, n_samples, as_generator(seed))
    s_e, s_o = s_functionals_batch(y, nu, period, f_table)
    scale = math.sqrt(n)
    e, o = s_e / scale, s_o / scale
    root = math.sqrt(n_samples)
    return float(e.mean()), float(e.std(ddof=1) / root), float(o.mean()), float(o.std(ddof=1) / root)


# ---------------------------------------------------------------------------------------------
# quenched return probabilities along paths
# ---------------------------------------------------------------------------------------------

def x_zero_probability(stats: PathStats, cache: Optional[Dict[Tuple[int, ...], float]] = None,
                       oracle_config: Optional[OracleConfig] = None) -> float:
    """P(X = 0 | path); zero when the number of odd jumps is odd."""
    if stats.sigma_o % 2:
        return 0.0
    key = (stats.n_o_plus, stats.n_o_minus, stats.n_e_plus, stats.n_e_minus)
    if cache is not None and key in cache:
        return cache[key]
    value = max(0.0, return_prob_inversion(stats, Support.EVEN_INTEGERS, config=oracle_config).probability)
    if cache is not None:
        cache[key] = value
    return value


def x_zero_probability_batch(y: np.ndarray, nu: np.ndarray, spec: EnvironmentSpec,
                             oracle_config: Optional[OracleConfig] = None) -> np.ndarray:
    """x_zero_probability per row, one inversion per distinct set of jump counts."""
    counts = np.stack(path_stats_batch(y, nu, spec), axis=1)
    unique, inverse = np.unique(counts, axis=0, return_inverse=True)
    values = np.array([x_zero_probability(PathStats(*(int(c) for c in row)), oracle_config=oracle_config)
                       for row in unique])
    return values[np.ravel(inverse)]


# ---------------------------------------------------------------------------------------------
# recurrence diagnostic
# ---------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentFit:
    """
    衰减指数拟合

    p_n ~ n^(-exponent), fitted on the upper half of the grid.
    """
    exponent: float
    stderr: float
    ci_low: float
    ci_high: float
    n_points: int


def fit_decay_exponent(ns: Sequence[int], ps: Sequence[float], confidence: float = 0.95) -> ExponentFit:
    """
    Least-squares slope of log p_n against log n on the upper half of the grid.

    Args:
        ns: increasing grid
        ps: positive estimates
        confidence: two-sided level of the interval

    Returns:
        ExponentFit (interval is nan with fewer than three points)
    """
    ns = np.asarray(ns, dtype=np.float64)
    ps = np.asarray(ps, dtype=np.float64)
    start = len(ns) // 2 if len(ns) >= 4 else 0
    ns, ps = ns[start:], ps[start:]
    keep = ps > 0
    ns, ps = ns[keep], ps[keep]
    if len(ns) < 2:
        raise InvalidArgumentException("need at least two positive points to fit an exponent")
    fit = sps.linregress(np.log(ns), np.log(ps))
    exponent = -float(fit.slope)
    if len(ns) < 3:
        log.warning("exponent fitted on %d points, no confidence interval", len(ns))
        return ExponentFit(exponent, float("nan"), float("nan"), float("nan"), len(ns))
    half = float(sps.t.ppf(0.5 + confidence / 2, len(ns) - 2)) * float(fit.stderr)
    return ExponentFit(exponent, float(fit.stderr), exponent - half, exponent + half, len(ns))


@dataclass(eq=False)
class DiagnosticResult:
    """
    递归性诊断结果
    """
    spec: EnvironmentSpec
    table: ResultTable
    fit: Optional[ExponentFit] = None
    seed: Optional[int] = None
    extra: Dict[str, float] = field(default_factory=dict)


def _monte_carlo_pn(spec: EnvironmentSpec, n: int, n_samples: int, master_seed: int,
                    config: SimulationConfig, oracle_config: Optional[OracleConfig]) -> Tuple[float, float]:
    rng = task_generator(master_seed, n)
    y, nu = sample_bridges(2 * n, [(0, 1), (0, -1)], n_samples, rng, config.bridge_max_cells)
    q = x_zero_probability_batch(y, nu, spec, oracle_config)
    p_y = return_prob_exact(n)
    stderr = p_y * float(q.std(ddof=1)) / math.sqrt(n_samples) if n_samples > 1 else float("nan")
    return p_y * float(q.mean()), stderr


def recurrence_diagnostic(spec: EnvironmentSpec, n_grid: Sequence[int], method=Method.EXACT_DP,
                          seed: int = 0, n_samples: int = 2000, tail_tol: Optional[float] = None,
                          config: Optional[SimulationConfig] = None,
                          oracle_config: Optional[OracleConfig] = None) -> DiagnosticResult:
    """
    p_n over a grid and the fitted decay exponent.

    ExactDP reads every n from one joint DP run. MonteCarlo draws skeleton bridges to
    Y_2n = 0 and averages the quenched P(X_2n = 0 | path), scaled by the exact P(Y_2n = 0).

    Args:
        spec: environment
        n_grid: strictly increasing n values
        method: Method or its string value
        seed: master seed of the Monte Carlo streams
        n_samples: bridges per n (MonteCarlo)
        tail_tol: DP truncation tolerance (ExactDP), oracle_config.tail_tol when None
        config: simulation settings (MonteCarlo)
        oracle_config: DP limits and quadrature tolerances

    Returns:
        DiagnosticResult
    """
    validate(spec)
    method = Method.parse(method)
    n_grid = [int(n) for n in n_grid]
    if not n_grid or any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise InvalidArgumentException("n_grid must be a strictly increasing list of positive integers")
    config = config or SimulationConfig()
    digest = spec.digest()
    env_seed = spec.seed if spec.regime.uses_seed else None
    table = ResultTable()
    if method is Method.EXACT_DP:
        series = joint_pn_series(spec, n_grid[-1], tail_tol, oracle_config)
        for n in n_grid:
            table.add_result(ExperimentResult.exact(n, float(series.p[n]), digest, env_seed,
                                                    float(series.deficit[n])))
    else:
        for n in n_grid:
            p, stderr = _monte_carlo_pn(spec, n, n_samples, seed, config, oracle_config)
            table.add_result(ExperimentResult.monte_carlo(n, p, stderr, digest, env_seed))
            log.info("n=%d p=%.4g +- %.2g", n, p, stderr)
    fit = None
    try:
        fit = fit_decay_exponent([r.n for r in table.results], [r.estimate for r in table.results])
    except InvalidArgumentException as e:
        log.warning("no exponent fit: %s", e)
    if fit is not None:
        log.info("%s exponent %.4f", spec.regime.value, fit.exponent)
    return DiagnosticResult(spec=spec, table=table, fit=fit, seed=env_seed)


@dataclass(frozen=True)
class SeparationResult:
    """
    分离检验结果
    """
    median: float
    p_value: float
    n: int


def separation_test(reference_exponent: float, exponents: Sequence[float]) -> SeparationResult:
    """
    One-sided Wilcoxon signed-rank test that the exponents exceed a reference exponent.

    Args:
        reference_exponent: e.g. the periodic exponent
        exponents: per-environment exponents

    Returns:
        SeparationResult (median exponent and p-value)
    """
    values = np.asarray(exponents, dtype=np.float64)
    if values.size < 2:
        raise InvalidArgumentException("need at least two exponents")
    result = sps.wilcoxon(values - reference_exponent, alternative="greater")
    return SeparationResult(median=float(np.median(values)), p_value=float(result.pvalue), n=int(values.size))


# ---------------------------------------------------------------------------------------------
# supplementary diagnostics
# ---------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalCltRecord:
    """
    局部极限定理检查 (单条路径)
    """
    a_n: float
    b_n: float
    p_inversion: float
    residual: float   # |B_n p - 2/sqrt(2 pi) exp(-(A_n/B_n)^2 / 2)|


def local_clt_check(period: int, f_table: Sequence[int], n: int, n_paths: int, seed: SeedLike = None,
                    C: float = 4.0, max_rounds: int = 20,
                    config: Optional[SimulationConfig] = None) -> List[LocalCltRecord]:
    """
    Compare B_n P(X_2n = 0 | path) with its Gaussian limit on constrained Z_n paths.

    Args:
        period, f_table: periodic environment
        n: half horizon
        n_paths: constrained paths to evaluate
        seed: integer seed or generator
        C: functional scale of the constraint
        max_rounds: bridge batches drawn before giving up

    Returns:
        up to n_paths LocalCltRecord
    """
    spec = _periodic(period, f_table)
    rng = as_generator(seed)
    limit = C * math.sqrt(n)
    records: List[LocalCltRecord] = []
    for _ in range(max_rounds):
        sample = sample_z_paths(n, max(n_paths, 16), rng, "bridge", config)
        s_e, s_o = s_functionals_batch(sample.y, sample.nu, period, f_table)
        for i in np.flatnonzero(np.abs(s_e) + np.abs(s_o) <= limit):
            stats = path_stats(SkeletonPath(sample.y[i], sample.nu[i]), spec, check=False)
            approx = gaussian_approx(stats)
            p = x_zero_probability(stats)
            records.append(LocalCltRecord(a_n=approx.a_n, b_n=approx.b_n, p_inversion=p,
                                          residual=abs(approx.b_n * (p - approx.p_approx))))
            if len(records) == n_paths:
                return records
    log.warning("only %d constrained paths found for n=%d", len(records), n)
    return records


@dataclass(frozen=True)
class PnDecomposition:
    """
    p_n = p_{n,1} + p_{n,2} + p_{n,3} over B_n, A_n minus B_n and A_n^c
    """
    n: int
    p_y: float
    parts: Tuple[float, float, float]
    stderr: Tuple[float, float, float]
    freq_a_minus_b: float    # P(A_n \ B_n | Y_2n = 0)
    freq_a1_fail: float      # P(A_{n,1}^c | Y_2n = 0)
    freq_a2_fail: float      # P(A_{n,2}^c | Y_2n = 0)

    @property
    def total(self) -> float:
        return float(sum(self.parts))


def pn_decomposition(spec: EnvironmentSpec, n: int, cfg: Optional[EventConfig] = None, n_samples: int = 2000,
                     seed: SeedLike = None, config: Optional[SimulationConfig] = None) -> PnDecomposition:
    """
    Monte Carlo split of p_n by the events B_n, A_n \\ B_n and A_n^c.

    Bridges to Y_2n = 0 carry the quenched P(X_2n = 0 | path); each part is P(Y_2n = 0) times the
    mean of that probability restricted to the event.
    """
    validate(spec)
    cfg = cfg or EventConfig()
    config = config or SimulationConfig()
    y, nu = sample_bridges(2 * n, [(0, 1), (0, -1)], n_samples, as_generator(seed), config.bridge_max_cells)
    events = classify_events_batch(y, nu, spec, cfg)
    q = x_zero_probability_batch(y, nu, spec)
    p_y = return_prob_exact(n)
    a = events["a1"] & events["a2"]
    masks = (events["b"], a & ~events["b"], ~a)
    parts = tuple(p_y * float(np.mean(q * m)) for m in masks)
    root = math.sqrt(n_samples)
    stderr = tuple(p_y * float(np.std(q * m, ddof=1)) / root for m in masks)
    return PnDecomposition(n=n, p_y=p_y, parts=parts, stderr=stderr, freq_a_minus_b=float(masks[1].mean()),
                           freq_a1_fail=float(np.mean(~events["a1"])), freq_a2_fail=float(np.mean(~events["a2"])))


def _wbar_codes(y_prev: np.ndarray, nu_prev: np.ndarray, y_next: np.ndarray, nu_next: np.ndarray,
                period: int) -> np.ndarray:
    return (((np.mod(y_prev, period) * 2 + (1 - nu_prev) // 2) * period + np.mod(y_next, period)) * 2
            + (1 - nu_next) // 2)


def wbar_empirical_tv(period: int, n: int, n_samples: int, seed: SeedLike = None,
                      config: Optional[SimulationConfig] = None) -> float:
    """
    Total variation between the averaged empirical laws of W-bar_n, W-bar_{n+1} and the
    stationary law.
    """
    if n < 1:
        raise InvalidArgumentException(f"n={n} must be >= 1")
    config = config or SimulationConfig()
    states = wbar_states(period)
    lookup = np.full(4 * period * period, -1, dtype=np.int64)
    for i, (ybar, nu, ybar2, nu2) in enumerate(states):
        lookup[_wbar_codes(np.int64(ybar), np.int64(nu), np.int64(ybar2), np.int64(nu2), period)] = i
    rng = as_generator(seed)
    counts = np.zeros(len(states))
    remaining = n_samples
    while remaining > 0:
        size = min(config.batch_size, remaining)
        y, nu = simulate_skeleton_batch(n + 1, size, rng)
        for k in (n, n + 1):
            codes = _wbar_codes(y[:, k - 1], nu[:, k - 1], y[:, k], nu[:, k], period)
            counts += np.bincount(lookup[codes], minlength=len(states))
        remaining -= size
    empirical = counts / (2 * n_samples)
    return 0.5 * float(np.abs(empirical - wbar_stationary(states, period)).sum())


@dataclass(frozen=True)
class LowVisitRow:
    """
    低层访问次数 (Z_n 条件下)
    """
    n: int
    mean: float
    stderr: float
    exact: Optional[float]

    @property
    def scaled(self) -> float:
        return self.mean / math.sqrt(self.n)


def low_level_visit_profile(spec: EnvironmentSpec, n_values: Sequence[int], L: Optional[int] = None,
                            n_samples: int = 2000, seed: SeedLike = None, exact: bool = True,
                            config: Optional[SimulationConfig] = None) -> List[LowVisitRow]:
    """
    E(#{i < 2n : |Y_i| <= L} | Z_n) by bridge sampling, next to the forward/backward DP value.

    Args:
        spec: environment; L defaults to its largest perturbed |y| within reach
        n_values: horizons
        L: cutoff level
        n_samples: bridges per n
        seed: integer seed or generator
        exact: also compute the DP value

    Returns:
        one LowVisitRow per n
    """
    validate(spec)
    if L is None:
        L = default_cutoff(spec, 2 * max(n_values))
    rng = as_generator(seed)
    rows = []
    for n in n_values:
        sample = sample_z_paths(n, n_samples, rng, "bridge", config)
        visits = np.sum(np.abs(sample.y[:, :-1]) <= L, axis=1)
        rows.append(LowVisitRow(n=n, mean=float(visits.mean()),
                                stderr=float(visits.std(ddof=1)) / math.sqrt(n_samples),
                                exact=expected_low_visits_exact(n, L) if exact else None))
    return rows
