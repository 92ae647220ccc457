"""Command-line front end.

Subcommands: gen | solve | validate | bench | reduce | check.
Exit codes: 0 ok, 1 verification failure, 2 usage/IO error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from .generate import GenConfig, TOPOLOGIES, demo_instance, generate_instance
from .lp import (
    build_interval_lp,
    build_time_indexed_lp,
    extract_fractional,
    horizon_upper_bound,
    interval_grid_for,
)
from .model import RoutingModel, completion_times, validate_instance
from .mps import read_mps, save_mps
from .openshop import reduce_open_shop
from .pipeline import STRATEGIES, SolveFailure, VerificationFailure, run_pipeline
from .serialize import (
    FormatError,
    dumps,
    instance_to_dict,
    load_instance,
    load_schedule,
    load_shop,
    save_schedule,
)
from .solver import SolveOptions, SolveStatus, solve
from .verify import check_identity_on_vectors, continuous_interpolation_checks, verify_schedule

OK, VERIFY_FAIL, USAGE, SOLVER_FAIL = 0, 1, 2, 3


class _Usage(Exception):
    pass


def _load_instance(path: str):
    p = Path(path)
    if not p.exists():
        raise _Usage(f"instance not found: {path}")
    try:
        return load_instance(p)
    except (FormatError, ValueError) as exc:
        raise _Usage(f"cannot read instance {path}: {exc}")


def _solve_options(spec: str) -> tuple[SolveOptions, str | None]:
    """Parse --solver: builtin | highs | mps:<path> (export, then solve
    the exported file with the HiGHS backend)."""
    if spec in ("builtin", "highs"):
        return SolveOptions(backend=spec), None
    if spec.startswith("mps:"):
        return SolveOptions(backend="highs"), spec[4:]
    raise _Usage(f"unknown solver {spec!r} (builtin | highs | mps:<path>)")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="coflownet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance file")
    p.add_argument("--topology", choices=TOPOLOGIES, default="swan-like")
    p.add_argument("--model", choices=[m.value for m in RoutingModel], default="single_path")
    p.add_argument("--jobs", type=int, default=10)
    p.add_argument("--flows-min", type=int, default=1)
    p.add_argument("--flows-max", type=int, default=3)
    p.add_argument("--demand-min", type=float, default=0.5)
    p.add_argument("--demand-max", type=float, default=3.0)
    p.add_argument("--weight-min", type=float, default=1.0)
    p.add_argument("--weight-max", type=float, default=100.0)
    p.add_argument("--release-mean", type=float, default=0.0)
    p.add_argument("--slot-length", type=float, default=1.0)
    p.add_argument("--nodes", type=int, default=8)
    p.add_argument("--links", type=int, default=12)
    p.add_argument("--cap", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("solve", help="solve an instance end to end")
    p.add_argument("instance")
    p.add_argument("--strategy", choices=STRATEGIES, default="stretch")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--solver", type=str, default="builtin")
    _add_common(p)

    p = sub.add_parser("validate", help="validate an instance (and optionally a schedule)")
    p.add_argument("instance")
    p.add_argument("--schedule", type=str, default=None)

    p = sub.add_parser("bench", help="benchmark sweep to CSV")
    p.add_argument("--topology", choices=TOPOLOGIES, default="swan-like")
    p.add_argument("--model", choices=[m.value for m in RoutingModel], default="single_path")
    p.add_argument("--jobs", type=int, default=6)
    p.add_argument("--instances", type=int, default=3)
    p.add_argument("--strategies", type=str, default="stretch,heuristic")
    p.add_argument("--epsilon", type=str, default="0.2")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--release-mean", type=float, default=0.0)
    p.add_argument("--slot-length", type=float, default=1.0)
    p.add_argument("--solver", type=str, default="highs")
    p.add_argument("--workers", type=int, default=4)
    _add_common(p)

    p = sub.add_parser("reduce", help="reduce an open-shop file to a coflow instance")
    p.add_argument("shop")
    p.add_argument("--model", choices=[m.value for m in RoutingModel], default="single_path")
    _add_common(p)

    p = sub.add_parser("check", help="run the analysis identity checks")
    p.add_argument("--instance", type=str, default=None)
    p.add_argument("--model", choices=[m.value for m in RoutingModel], default="single_path")
    p.add_argument("--solver", type=str, default="builtin")
    _add_common(p)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except _Usage as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except SolveFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return SOLVER_FAIL
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return VERIFY_FAIL


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dispatch(args) -> int:
    if args.command == "gen":
        config = GenConfig(
            topology=args.topology,
            model=RoutingModel(args.model),
            jobs=args.jobs,
            flows_per_job=(args.flows_min, args.flows_max),
            demand_range=(args.demand_min, args.demand_max),
            weight_range=(args.weight_min, args.weight_max),
            release_mean=args.release_mean,
            slot_length=args.slot_length,
            nodes=args.nodes,
            links=args.links,
            cap=args.cap,
            seed=args.seed,
        )
        instance = generate_instance(config)
        _emit(dumps(instance_to_dict(instance)), args.out)
        return OK

    if args.command == "solve":
        instance = _load_instance(args.instance)
        problems = validate_instance(instance)
        if problems:
            raise _Usage(f"invalid instance: {problems[0]} (+{len(problems) - 1} more)"
                         if len(problems) > 1 else f"invalid instance: {problems[0]}")
        options, mps_path = _solve_options(args.solver)
        if mps_path:
            _export_mps(instance, mps_path, args.strategy, args.epsilon)
        result = run_pipeline(
            instance,
            strategy=args.strategy,
            trials=args.trials,
            seed=args.seed,
            epsilon=args.epsilon,
            options=options,
        )
        print(f"lp_objective      {result.lp_objective:.6f}")
        print(f"schedule_objective {result.report.objective:.6f}")
        print(f"ratio             {result.report.objective / result.lp_objective:.4f}")
        print(f"best_lambda       {result.best_lambda:.6f}")
        print(f"completions       {list(result.report.completions)}")
        if args.out:
            save_schedule(result.schedule, args.out)
            print(f"schedule written to {args.out}")
        return OK

    if args.command == "validate":
        instance = _load_instance(args.instance)
        problems = validate_instance(instance)
        for msg in problems:
            print(f"instance: {msg}")
        if problems:
            return VERIFY_FAIL
        print("instance ok")
        if args.schedule:
            spath = Path(args.schedule)
            if not spath.exists():
                raise _Usage(f"schedule not found: {args.schedule}")
            schedule = load_schedule(spath)
            violations = verify_schedule(schedule, instance)
            for v in violations:
                print(f"schedule: {v}")
            if violations:
                return VERIFY_FAIL
            report = completion_times(schedule, instance)
            print(f"schedule ok, objective {report.objective:.6f}")
        return OK

    if args.command == "bench":
        strategies = tuple(s.strip() for s in args.strategies.split(",") if s.strip())
        for s in strategies:
            if s not in STRATEGIES:
                raise _Usage(f"unknown strategy {s!r}")
        epsilons = tuple(float(e) for e in args.epsilon.split(",") if e.strip())
        config = bench_mod.BenchConfig(
            gen=GenConfig(
                topology=args.topology,
                model=RoutingModel(args.model),
                jobs=args.jobs,
                release_mean=args.release_mean,
                slot_length=args.slot_length,
                seed=args.seed,
            ),
            instances=args.instances,
            strategies=strategies,
            epsilons=epsilons,
            trials=args.trials,
            seed=args.seed,
            backend="highs" if args.solver.startswith("mps:") else args.solver,
            workers=args.workers,
        )
        rows = bench_mod.run_bench(config)
        for row in rows:
            if row.error:
                print(f"row failed ({row.strategy}, seed {row.seed}): {row.error}", file=sys.stderr)
        _emit(bench_mod.rows_to_csv(rows), args.out)
        return OK

    if args.command == "reduce":
        spath = Path(args.shop)
        if not spath.exists():
            raise _Usage(f"shop file not found: {args.shop}")
        try:
            shop = load_shop(spath)
        except (FormatError, ValueError) as exc:
            raise _Usage(f"cannot read shop {args.shop}: {exc}")
        instance = reduce_open_shop(shop, RoutingModel(args.model))
        _emit(dumps(instance_to_dict(instance)), args.out)
        return OK

    if args.command == "check":
        return _run_checks(args)

    raise _Usage(f"unknown command {args.command!r}")


def _export_mps(instance, path: str, strategy: str, epsilon: float) -> None:
    """Export the relaxation the strategy will solve, then re-parse it as
    a syntax self-check."""
    if strategy == "interval-stretch":
        problem = build_interval_lp(instance, interval_grid_for(instance, epsilon))
    else:
        problem = build_time_indexed_lp(instance, horizon_upper_bound(instance))
    save_mps(problem, path)
    read_mps(Path(path).read_text())


def _run_checks(args) -> int:
    rng = np.random.default_rng(args.seed)
    worst_identity = check_identity_on_vectors(rng, trials=100)
    print(f"prefix-sum identity residual (100 random vectors): {worst_identity:.3e}")
    failed = worst_identity > 1e-12

    if args.instance:
        instance = _load_instance(args.instance)
    else:
        instance = demo_instance(RoutingModel(args.model))
    options, _ = _solve_options(args.solver)
    horizon = horizon_upper_bound(instance)
    problem = build_time_indexed_lp(instance, horizon)
    solution = solve(problem, options)
    if solution.status is not SolveStatus.OPTIMAL:
        raise SolveFailure(solution.status)
    fractional = extract_fractional(problem, solution.x, instance, horizon)
    for j, report in enumerate(continuous_interpolation_checks(fractional)):
        print(
            f"coflow {j + 1}: integral {report.integral:.6f} "
            f"identity {report.identity_residual:.3e} "
            f"completion slack {report.completion_slack:+.3e} "
            f"quadrature {report.quadrature_residual:.3e}"
        )
        failed = failed or report.identity_residual > 1e-9
        failed = failed or (report.completion_slack is not None and report.completion_slack < -1e-9)
        failed = failed or report.quadrature_residual > 1e-4
    print("check failed" if failed else "check ok")
    return VERIFY_FAIL if failed else OK


if __name__ == "__main__":
    sys.exit(main())
