"""End-to-end solve pipeline: build, solve, round, compact, verify.

The pipeline refuses to hand back a schedule that fails verification;
callers (CLI, bench) map the dedicated exceptions to exit codes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lp import (
    build_interval_lp,
    build_time_indexed_lp,
    extract_fractional,
    extract_interval_solution,
    horizon_upper_bound,
    interval_grid_for,
)
from .model import CompletionReport, FractionalSchedule, Instance, RateSchedule, as_fractional
from .rounding import StretchTrial, expand_interval_schedule, lp_heuristic, run_stretch
from .solver import LPSolution, SolveOptions, SolveStatus, solve
from .verify import verify_schedule

STRATEGIES = ("stretch", "heuristic", "interval-stretch")


class SolveFailure(RuntimeError):
    """The LP backend did not return an optimal solution."""

    def __init__(self, status: SolveStatus):
        self.status = status
        super().__init__(f"solver finished with status {status.value}")


class VerificationFailure(RuntimeError):
    """The rounded schedule failed independent verification."""

    def __init__(self, violations):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations[:5])
        super().__init__(f"{len(violations)} violation(s): {lines}")


@dataclass(frozen=True)
class PipelineResult:
    instance: Instance
    strategy: str
    epsilon: float | None
    lp_objective: float
    fractional: FractionalSchedule
    schedule: RateSchedule
    report: CompletionReport
    best_lambda: float | None
    average_objective: float | None
    trial_count: int


def solve_lp(
    instance: Instance, options: SolveOptions | None = None, horizon: int | None = None
) -> tuple[FractionalSchedule, LPSolution]:
    """Build and solve the slot-indexed relaxation, returning the
    extracted fractional schedule alongside the raw solution."""
    horizon = horizon if horizon is not None else horizon_upper_bound(instance)
    problem = build_time_indexed_lp(instance, horizon)
    solution = solve(problem, options)
    if solution.status is not SolveStatus.OPTIMAL:
        raise SolveFailure(solution.status)
    return extract_fractional(problem, solution.x, instance, horizon), solution


def run_pipeline(
    instance: Instance,
    strategy: str = "stretch",
    trials: int = 20,
    seed: int = 0,
    epsilon: float | None = None,
    options: SolveOptions | None = None,
) -> PipelineResult:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r} (one of {STRATEGIES})")

    if strategy == "interval-stretch":
        eps = 0.2 if epsilon is None else epsilon
        grid = interval_grid_for(instance, eps)
        problem = build_interval_lp(instance, grid)
        solution = solve(problem, options)
        if solution.status is not SolveStatus.OPTIMAL:
            raise SolveFailure(solution.status)
        interval = extract_interval_solution(problem, solution.x, instance, grid)
        fractional = as_fractional(expand_interval_schedule(interval, instance), instance)
        lp_objective = solution.objective
    else:
        eps = None
        fractional, solution = solve_lp(instance, options)
        lp_objective = solution.objective

    if strategy == "heuristic":
        trial = lp_heuristic(instance, fractional)
        best_lambda = trial.lam.value
        average = None
        chosen: StretchTrial = trial
    else:
        result = run_stretch(instance, fractional, trials=trials, seed=seed)
        chosen = result.best
        best_lambda = chosen.lam.value
        average = result.average_objective

    violations = verify_schedule(chosen.schedule, instance)
    if violations:
        raise VerificationFailure(violations)
    return PipelineResult(
        instance=instance,
        strategy=strategy,
        epsilon=eps,
        lp_objective=lp_objective,
        fractional=fractional,
        schedule=chosen.schedule,
        report=chosen.report,
        best_lambda=best_lambda,
        average_objective=average,
        trial_count=1 if strategy == "heuristic" else trials,
    )
