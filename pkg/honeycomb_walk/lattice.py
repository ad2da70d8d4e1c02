"""
Honeycomb geometry and the full random walk.

Every vertex keeps all horizontal edges and exactly one vertical edge: up when x + y is odd,
down when it is even. Horizontal edges on row y all point the way the environment orients
that row, so each vertex has out-degree two and the walk picks either edge with probability 1/2.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .config import SimulationConfig
from .environment import EnvironmentSpec, orientations, validate
from .skeleton import SkeletonPath
from .streams import SeedLike, as_generator, derive_seed, task_generator

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Vertex:
    """
    格点
    """
    x: int
    y: int


ORIGIN = Vertex(0, 0)


def vertical_neighbor(v: Vertex) -> Vertex:
    """(x, y+1) when x + y is odd, (x, y-1) when it is even."""
    if (v.x + v.y) % 2:
        return Vertex(v.x, v.y + 1)
    return Vertex(v.x, v.y - 1)


def out_edges(v: Vertex, spec: EnvironmentSpec) -> Tuple[Vertex, Vertex]:
    """
    The two targets reachable from v.

    Returns:
        (horizontal target along the row orientation, vertical neighbour)
    """
    eps = int(orientations(spec, v.y))
    return Vertex(v.x + eps, v.y), vertical_neighbor(v)


@dataclass(eq=False)
class WalkTrace:
    """
    游走轨迹

    Vertical step k (1-based) completes at step index vertical_step_times[k-1]. The skeleton
    path and embedded values start with the notional state at time 0, so index k of either
    is the position right after the k-th vertical step. Long walks keep only the summary
    counters; their array fields are None.
    """
    spec: EnvironmentSpec
    seed: int
    n_steps: int
    start: Vertex = ORIGIN
    n_vertical: int = 0
    n_returns: int = 0
    first_return: Optional[int] = None
    final: Vertex = ORIGIN
    returns_to_origin: Optional[np.ndarray] = None
    vertical_step_times: Optional[np.ndarray] = None
    skeleton_path: Optional[SkeletonPath] = None
    embedded_values: Optional[np.ndarray] = None
    moves: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def recorded(self) -> bool:
        return self.vertical_step_times is not None

    def summary(self) -> Dict[str, Any]:
        """
        JSON-lines 摘要

        Returns:
            {"seed", "n_steps", "n_returns", "first_return", "n_vertical"}
        """
        return {
            "seed": self.seed,
            "n_steps": self.n_steps,
            "n_returns": self.n_returns,
            "first_return": self.first_return,
            "n_vertical": self.n_vertical,
        }


class _Recorder:
    """Accumulates per-chunk arrays when the trace is short enough to keep."""

    def __init__(self, keep: bool):
        self.keep = keep
        self.moves, self.times, self.ys, self.nus, self.xs, self.returns = [], [], [], [], [], []

    def add(self, **parts: np.ndarray) -> None:
        if self.keep:
            for name, value in parts.items():
                getattr(self, name).append(value)

    @staticmethod
    def join(parts, head=None) -> np.ndarray:
        arrays = ([np.array([head], dtype=np.int64)] if head is not None else []) + list(parts)
        if not arrays:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(arrays).astype(np.int64)


def _segment_returns(row: np.ndarray, eps: np.ndarray, x0: np.ndarray, count: np.ndarray,
                     t0: np.ndarray) -> np.ndarray:
    """Times at which horizontal segments on row 0 pass through x = 0."""
    j = -eps * x0
    hit = (row == 0) & (j >= 1) & (j <= count)
    return (t0 + j)[hit]


def simulate_walk(spec: EnvironmentSpec, n_steps: int, walk_seed: int,
                  config: Optional[SimulationConfig] = None) -> WalkTrace:
    """
    Run the walk from (0, 0) for n_steps steps.

    Moves are drawn in vectorised chunks. Inside a chunk the horizontal runs between vertical
    steps are resolved at once: an odd run keeps the vertical direction, an even one reverses it.

    Args:
        spec: environment
        n_steps: number of steps
        walk_seed: seed of the walk's own stream
        config: simulation settings (record limit, chunk size)

    Returns:
        WalkTrace
    """
    validate(spec)
    config = config or SimulationConfig()
    rng = task_generator(walk_seed, 0)
    recorder = _Recorder(n_steps <= config.record_limit)

    x, y, nu, t, run = 0, 0, 1, 0, 0
    n_vertical, n_returns, first_return = 0, 0, None
    remaining = n_steps
    while remaining > 0:
        m = min(config.chunk_size, remaining)
        vertical = rng.random(m) < 0.5
        vi = np.flatnonzero(vertical)
        if vi.size == 0:
            eps = int(orientations(spec, y))
            hits = _segment_returns(np.array([y]), np.array([eps]), np.array([x]), np.array([m]), np.array([t]))
            x += eps * m
            run += m
        else:
            counts = np.empty(vi.size, dtype=np.int64)
            counts[0] = vi[0]
            counts[1:] = np.diff(vi) - 1
            runs = counts.copy()
            runs[0] += run
            nus = nu * np.cumprod(np.where(runs % 2 == 1, 1, -1))
            ys_after = y + np.cumsum(nus)
            rows = np.concatenate([[y], ys_after[:-1]])
            eps_rows = orientations(spec, rows)
            xs_after = x + np.cumsum(eps_rows * counts)
            seg_x0 = np.concatenate([[x], xs_after[:-1]])
            seg_t0 = t + np.concatenate([[0], vi[:-1] + 1])
            times = t + vi + 1

            tail = m - 1 - int(vi[-1])
            tail_eps = int(orientations(spec, ys_after[-1]))
            hits = np.concatenate([
                _segment_returns(rows, eps_rows, seg_x0, counts, seg_t0),
                times[(xs_after == 0) & (ys_after == 0)],
                _segment_returns(np.array([ys_after[-1]]), np.array([tail_eps]), np.array([xs_after[-1]]),
                                 np.array([tail]), np.array([times[-1]])),
            ])
            hits.sort()
            recorder.add(times=times, ys=ys_after, nus=nus, xs=xs_after)
            x = int(xs_after[-1]) + tail_eps * tail
            y, nu = int(ys_after[-1]), int(nus[-1])
            run = tail
            n_vertical += vi.size
        if hits.size:
            if first_return is None:
                first_return = int(hits[0])
            n_returns += hits.size
        recorder.add(moves=vertical, returns=hits)
        t += m
        remaining -= m

    trace = WalkTrace(spec=spec, seed=int(walk_seed), n_steps=n_steps, n_vertical=n_vertical,
                      n_returns=n_returns, first_return=first_return, final=Vertex(x, y))
    if recorder.keep:
        trace.moves = np.concatenate(recorder.moves) if recorder.moves else np.zeros(0, dtype=bool)
        trace.returns_to_origin = _Recorder.join(recorder.returns)
        trace.vertical_step_times = _Recorder.join(recorder.times)
        trace.skeleton_path = SkeletonPath(_Recorder.join(recorder.ys, 0), _Recorder.join(recorder.nus, 1))
        trace.embedded_values = _Recorder.join(recorder.xs, 0)
    log.debug("walk seed=%d steps=%d vertical=%d returns=%d", walk_seed, n_steps, n_vertical, n_returns)
    return trace


def decompose_check(trace: WalkTrace) -> bool:
    """
    Replay the walk edge by edge and compare with the decomposition fields.

    For a recorded trace the position after every vertical step is rebuilt from the stored
    moves using vertical_neighbor and the row orientations; it must equal
    (embedded_values[k], skeleton_path.y[k]). In every case Y_k - Y_{k-1} = nu_k must hold.

    Args:
        trace: trace from simulate_walk

    Returns:
        True when every check passes
    """
    if not trace.recorded:
        return True
    path = trace.skeleton_path
    if len(path) == 0 or path.y[0] != 0 or path.nu[0] != 1:
        return False
    if not np.array_equal(np.diff(path.y), path.nu[1:]):
        return False
    times = trace.vertical_step_times
    if len(times) != len(path) - 1 or len(trace.embedded_values) != len(path):
        return False
    if trace.moves is None:
        return bool(np.all(np.diff(times) > 0)) if len(times) else True

    if not np.array_equal(np.flatnonzero(trace.moves) + 1, times):
        return False
    bound = len(times) + 1
    table = orientations(trace.spec, np.arange(-bound, bound + 1))
    v = ORIGIN
    previous = 0
    for k, time in enumerate(times, start=1):
        run = int(time) - previous - 1
        v = Vertex(v.x + int(table[v.y + bound]) * run, v.y)
        v = vertical_neighbor(v)
        if v.x != trace.embedded_values[k] or v.y != path.y[k]:
            return False
        previous = int(time)
    return True


def coupling_check(spec: EnvironmentSpec, n_traces: int, n_steps: int, seed: int,
                   config: Optional[SimulationConfig] = None) -> int:
    """
    Run decompose_check on independent traces.

    Returns:
        number of traces that failed
    """
    failures = 0
    for index in range(n_traces):
        trace = simulate_walk(spec, n_steps, derive_seed(seed, index), config)
        if not decompose_check(trace):
            failures += 1
            log.warning("decomposition check failed for trace %d", index)
    return failures


def sample_positions_at_vertical_time(spec: EnvironmentSpec, k: int, n_walks: int,
                                      seed: SeedLike = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Simulate many walks step by step and stop each at its k-th vertical step.

    Unlike simulate_walk this follows the edges directly, so it is an independent check of
    the skeleton and embedded laws.

    Args:
        spec: environment
        k: number of vertical steps, k >= 1
        n_walks: number of walks
        seed: integer seed or generator

    Returns:
        (x, y) int64 arrays of the positions
    """
    validate(spec)
    rng = as_generator(seed)
    bound = k + 1
    table = orientations(spec, np.arange(-bound, bound + 1))
    x = np.zeros(n_walks, dtype=np.int64)
    y = np.zeros(n_walks, dtype=np.int64)
    count = np.zeros(n_walks, dtype=np.int64)
    done = np.zeros(n_walks, dtype=bool)
    out_x = np.zeros(n_walks, dtype=np.int64)
    out_y = np.zeros(n_walks, dtype=np.int64)
    while not done.all():
        active = ~done
        vertical = rng.random(n_walks) < 0.5
        move_h = active & ~vertical
        move_v = active & vertical
        x = x + np.where(move_h, table[y + bound], 0)
        up = (x + y) % 2 == 1
        y = y + np.where(move_v, np.where(up, 1, -1), 0)
        count += move_v
        arrived = move_v & (count == k)
        out_x[arrived] = x[arrived]
        out_y[arrived] = y[arrived]
        done |= arrived
    return out_x, out_y
