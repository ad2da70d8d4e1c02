"""
Command-line front end.

    honeycomb-walk env --periodic --Q 2 --f +1,-1 --out env.json
    honeycomb-walk simulate --env env.json --steps 1e6 --walks 100 --seed 1
    honeycomb-walk exact --what pn --env env.json --n 200
    honeycomb-walk experiment --config periodic.json

Data goes to stdout or the named files; logs go to stderr. Exit codes: 2 invalid input or
configuration, 3 I/O failure, 4 resource limit, 1 any other error.
"""
import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .builder import EnvironmentBuilder
from .config import ExperimentConfig, OracleConfig, SimulationConfig
from .environment import EnvironmentSpec, materialize, validate
from .exception import (
    ConfigException,
    HoneycombException,
    InvalidArgumentException,
    ResourceLimitException,
    ValidationException,
)
from .experiments import conditional_s_probability, recurrence_diagnostic
from .lattice import simulate_walk
from .oracle import full_walk_distribution, joint_pn_series, wbar_distribution_exact
from .result import ExperimentResult, Method, ResultTable, RunManifest, clean_float, fmt
from .skeleton import return_prob_series
from .streams import derive_seed

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_RESOURCE = 4


def _count(text: str) -> int:
    """Nonnegative integer, also written as 1e6."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text}")
    if value < 0 or value != int(value):
        raise argparse.ArgumentTypeError(f"not a nonnegative integer: {text}")
    return int(value)


def _table(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"table must be comma-separated integers: {text}")


def _range(text: str) -> Tuple[int, int]:
    lo, sep, hi = text.rpartition(":")
    try:
        if not sep:
            raise ValueError
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like -100:100, got {text}")


def _digest(payload: Dict[str, Any]) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _manifest(args: argparse.Namespace, payload: Dict[str, Any], master_seed: int = 0) -> RunManifest:
    return RunManifest.create(args.command, _digest(payload), master_seed, __version__)


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return _Stdout()
    return open(path, "w", encoding="utf-8")


class _Stdout:
    """Context manager around sys.stdout that leaves it open."""

    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _map_tasks(fn: Callable, payloads: Sequence[Any], workers: int) -> List[Any]:
    """Run fn over payloads, serially or in worker processes; results keep payload order."""
    if workers <= 1 or len(payloads) <= 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))


# ---------------------------------------------------------------------------------------------
# env
# ---------------------------------------------------------------------------------------------

def _spec_from_args(args: argparse.Namespace) -> EnvironmentSpec:
    builder = EnvironmentBuilder.builder()
    if args.rademacher:
        builder.rademacher(args.seed)
    elif args.periodic:
        if args.f is None:
            raise InvalidArgumentException("--periodic needs --f")
        builder.periodic(args.f, args.Q)
    else:
        if args.f is None:
            raise InvalidArgumentException("--perturbed needs --f")
        builder.perturbed(args.f, args.c, args.beta, args.seed, args.Q)
    return builder.build()


def cmd_env(args: argparse.Namespace) -> int:
    """Write an environment JSON file and optionally its materialized rows."""
    spec = _spec_from_args(args)
    if args.materialize is not None and not (args.out or args.csv):
        raise InvalidArgumentException("--materialize needs --out or --csv so stdout carries one format")
    if args.out:
        spec.to_file(args.out)
    else:
        sys.stdout.write(json.dumps(spec.to_dict(), sort_keys=True) + "\n")
    if args.materialize is not None:
        lo, hi = args.materialize
        table = materialize(spec, lo, hi)
        manifest = _manifest(args, {"env": spec.to_dict(), "range": [lo, hi]}, spec.seed)
        with _open_out(args.csv) as f:
            f.write("\n".join(manifest.comment_lines()) + "\n")
            f.write(table.to_csv())
    return EXIT_OK


# ---------------------------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------------------------

def _simulate_task(payload: Tuple[Dict[str, Any], int, int, int, int]) -> Dict[str, Any]:
    env, steps, master_seed, index, record_limit = payload
    spec = EnvironmentSpec.from_dict(env)
    trace = simulate_walk(spec, steps, derive_seed(master_seed, index), SimulationConfig(record_limit=record_limit))
    summary = trace.summary()
    summary["final"] = [trace.final.x, trace.final.y]
    return {"task": index, **summary}


def cmd_simulate(args: argparse.Namespace) -> int:
    """Emit one JSON line per independent walk after a manifest line."""
    spec = EnvironmentSpec.from_file(args.env)
    validate(spec)
    payloads = [(spec.to_dict(), args.steps, args.seed, i, args.record_limit) for i in range(args.walks)]
    manifest = _manifest(args, {"env": spec.to_dict(), "steps": args.steps, "walks": args.walks}, args.seed)
    results = _map_tasks(_simulate_task, payloads, args.workers)
    results.sort(key=lambda r: r["task"])
    with _open_out(args.out) as f:
        f.write(manifest.to_json() + "\n")
        for record in results:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------------------------
# exact
# ---------------------------------------------------------------------------------------------

def _alternating(period: int) -> List[int]:
    return [1 if i % 2 == 0 else -1 for i in range(period)]


def _exact_rows(args: argparse.Namespace) -> Tuple[str, Iterable[str], Dict[str, Any]]:
    limits = {"max_cells": args.max_cells} if args.max_cells else {}
    config = OracleConfig(tail_tol=args.tail_tol, **limits)
    if args.what == "yreturn":
        series = return_prob_series(args.n)
        return "n,p", (f"{n},{fmt(series[n])}" for n in range(1, args.n + 1)), {}
    if args.what == "wbar":
        period = args.Q or 2
        f_table = args.f or _alternating(period)
        law = wbar_distribution_exact(period, f_table, args.n)
        row = f"{args.n},{fmt(law.tv_averaged)},{fmt(law.total_mass)}"
        return "n,tv_to_stationary,total_mass", [row], {"Q": period, "f": f_table}
    if args.env is None:
        raise InvalidArgumentException(f"--what {args.what} needs --env")
    spec = EnvironmentSpec.from_file(args.env)
    if args.what == "pn":
        series = joint_pn_series(spec, args.n, config=config)
        rows = (f"{n},{fmt(series.p[n])},{fmt(series.deficit[n])}" for n in range(1, args.n + 1))
        return "n,p,deficit", rows, {"env": spec.to_dict()}
    probs = full_walk_distribution(spec, args.n, config)
    return "t,p", (f"{t},{fmt(p)}" for t, p in enumerate(probs)), {"env": spec.to_dict()}


def cmd_exact(args: argparse.Namespace) -> int:
    """Dispatch to an exact oracle and emit CSV under a manifest header."""
    if args.n < 1:
        raise InvalidArgumentException("--n must be >= 1")
    header, rows, extra = _exact_rows(args)
    payload = {"what": args.what, "n": args.n, "tail_tol": args.tail_tol, **extra}
    manifest = _manifest(args, payload)
    with _open_out(args.out) as f:
        f.write("\n".join(manifest.comment_lines()) + "\n")
        f.write(header + "\n")
        for row in rows:
            f.write(row + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------------------------

def _recurrence_task(payload: Tuple[Dict[str, Any], int]) -> Dict[str, Any]:
    data, index = payload
    config = ExperimentConfig.from_dict(data)
    spec = config.environment_spec()
    if config.seeds and spec.regime.uses_seed:
        spec = EnvironmentSpec.from_dict({**spec.to_dict(), "seed": config.seeds[index]})
    result = recurrence_diagnostic(spec, config.n_grid, config.method, derive_seed(config.master_seed, index),
                                   config.n_samples, oracle_config=OracleConfig(tail_tol=config.tail_tol))
    fit = result.fit
    return {
        "task": index,
        "rows": [(r.n, r.estimate, r.stderr, r.method.value, r.env_digest, r.seed, r.deficit)
                 for r in result.table.results],
        "seed": result.seed,
        "exponent": fit.exponent if fit else None,
        "ci": [fit.ci_low, fit.ci_high] if fit else None,
    }


def _run_recurrence(config: ExperimentConfig) -> Tuple[ResultTable, Dict[str, Any]]:
    spec = config.environment_spec()
    n_tasks = len(config.seeds) if config.seeds and spec.regime.uses_seed else 1
    payloads = [(config.to_dict(), i) for i in range(n_tasks)]
    outcomes = sorted(_map_tasks(_recurrence_task, payloads, config.workers), key=lambda o: o["task"])
    table = ResultTable()
    for outcome in outcomes:
        for n, estimate, stderr, method, digest, seed, deficit in outcome["rows"]:
            table.add_result(ExperimentResult(n=n, estimate=estimate, stderr=stderr,
                                              method=Method.parse(method), env_digest=digest, seed=seed,
                                              deficit=deficit))
    exponents = [o["exponent"] for o in outcomes if o["exponent"] is not None]
    summary = {
        "kind": "recurrence",
        "regime": spec.regime.value,
        "environments": [{"seed": o["seed"], "exponent": clean_float(o["exponent"]),
                          "ci": [clean_float(v) for v in o["ci"]] if o["ci"] else None} for o in outcomes],
        "median_exponent": clean_float(float(np.median(exponents))) if exponents else None,
    }
    if len(outcomes) == 1:
        summary["exponent"] = summary["environments"][0]["exponent"]
        summary["ci"] = summary["environments"][0]["ci"]
    return table, summary


def _run_s_probability(config: ExperimentConfig) -> Tuple[ResultTable, Dict[str, Any]]:
    spec = config.environment_spec()
    digest = spec.digest()
    table = ResultTable()
    rates = {}
    for i, n in enumerate(config.n_grid):
        est = conditional_s_probability(spec.period, spec.f_table, n, config.events.C, config.n_samples,
                                        derive_seed(config.master_seed, i))
        table.add_result(ExperimentResult.monte_carlo(n, est.estimate, est.stderr, digest))
        rates[str(n)] = est.acceptance_rate
    return table, {"kind": "s_probability", "C": config.events.C, "acceptance_rate": rates}


def cmd_experiment(args: argparse.Namespace) -> int:
    """Run a configured experiment; CSV table plus a JSON summary."""
    config = ExperimentConfig.from_file(args.config)
    if args.workers:
        config.workers = args.workers
    if config.kind == "recurrence":
        table, summary = _run_recurrence(config)
    else:
        table, summary = _run_s_probability(config)
    manifest = RunManifest.create(args.command, config.digest(), config.master_seed, __version__)
    with _open_out(args.out) as f:
        f.write(table.to_csv(manifest))
    text = json.dumps({"manifest": manifest.to_dict(), **summary}, sort_keys=True)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        sys.stderr.write(text + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="honeycomb-walk",
                                     description="Random walks on oriented honeycomb lattices")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress (INFO)")
    parser.add_argument("--debug", action="store_true", help="log everything (DEBUG)")
    sub = parser.add_subparsers(dest="command", required=True)

    env = sub.add_parser("env", help="write an environment file")
    regime = env.add_mutually_exclusive_group(required=True)
    regime.add_argument("--rademacher", action="store_true")
    regime.add_argument("--periodic", action="store_true")
    regime.add_argument("--perturbed", action="store_true")
    env.add_argument("--Q", type=int, help="period (defaults to the table length)")
    env.add_argument("--f", type=_table, help="periodic table, e.g. +1,-1 (use --f=-1,+1 for a leading minus)")
    env.add_argument("--c", type=float, default=0.0, help="perturbation strength")
    env.add_argument("--beta", type=float, default=1.0, help="perturbation decay exponent")
    env.add_argument("--seed", type=int, default=0)
    env.add_argument("--out", help="environment JSON path (default stdout)")
    env.add_argument("--materialize", type=_range, metavar="LO:HI",
                     help="also write the rows in [LO, HI] (needs --out or --csv)")
    env.add_argument("--csv", help="path of the materialized CSV (default stdout)")
    env.set_defaults(func=cmd_env)

    sim = sub.add_parser("simulate", help="simulate independent walks")
    sim.add_argument("--env", required=True)
    sim.add_argument("--steps", type=_count, required=True)
    sim.add_argument("--walks", type=_count, default=1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--record-limit", type=_count, default=0, help="keep full traces up to this many steps")
    sim.add_argument("--out", help="JSON-lines path (default stdout)")
    sim.set_defaults(func=cmd_simulate)

    exact = sub.add_parser("exact", help="exact dynamic-programming oracles")
    exact.add_argument("--what", choices=("pn", "yreturn", "wbar", "fullwalk"), required=True)
    exact.add_argument("--env")
    exact.add_argument("--n", type=_count, required=True, help="largest n (t_max for fullwalk)")
    exact.add_argument("--tail-tol", type=float, default=1e-12)
    exact.add_argument("--Q", type=int)
    exact.add_argument("--f", type=_table)
    exact.add_argument("--max-cells", type=_count)
    exact.add_argument("--out")
    exact.set_defaults(func=cmd_exact)

    exp = sub.add_parser("experiment", help="run a configured experiment")
    exp.add_argument("--config", required=True)
    exp.add_argument("--workers", type=int)
    exp.add_argument("--out", help="CSV path (default stdout)")
    exp.add_argument("--summary", help="summary JSON path (default stderr)")
    exp.set_defaults(func=cmd_experiment)
    return parser


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.debug else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args)
    try:
        return args.func(args)
    except (ValidationException, ConfigException, InvalidArgumentException) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID
    except ResourceLimitException as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_RESOURCE
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_IO
    except HoneycombException as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
