"""LP solving front end: built-in simplex or scipy's HiGHS, re-verified.

Whichever backend answers, an ``optimal`` result is re-checked against
the original problem (row residuals, bounds, objective recomputation) so
backend identity never affects correctness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .lp import LPProblem
from .simplex import solve_simplex

BACKENDS = ("builtin", "highs")


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


class SolverError(RuntimeError):
    """A backend reported optimal but the solution fails re-verification."""


@dataclass(frozen=True)
class SolveOptions:
    tolerance: float = 1e-7
    iteration_limit: int = 100_000
    backend: str = "builtin"


@dataclass(frozen=True)
class LPSolution:
    status: SolveStatus
    objective: float
    x: np.ndarray | None


def solve(problem: LPProblem, options: SolveOptions | None = None) -> LPSolution:
    """Minimize ``problem``. Deterministic given identical inputs/options.

    Infeasible/unbounded come back as statuses, not exceptions; an
    iteration-limited solve carries the best-known point.
    """
    options = options or SolveOptions()
    if options.backend == "builtin":
        status, x, obj = solve_simplex(
            problem, tolerance=options.tolerance, iteration_limit=options.iteration_limit
        )
    elif options.backend == "highs":
        status, x, obj = _solve_highs(problem, options)
    else:
        raise ValueError(f"unknown backend {options.backend!r} (expected one of {BACKENDS})")
    solution = LPSolution(status=SolveStatus(status), objective=obj, x=x)
    if solution.status is SolveStatus.OPTIMAL:
        failures = check_solution(problem, solution, tol=options.tolerance)
        if failures:
            raise SolverError(
                f"backend {options.backend!r} returned a non-verifying optimum: "
                + "; ".join(failures[:5])
            )
    return solution


def _solve_highs(problem: LPProblem, options: SolveOptions):
    a_ub_rows, a_ub_rhs, a_eq_rows, a_eq_rhs = [], [], [], []
    for r in range(problem.num_rows):
        row = (problem.row_cols[r], problem.row_vals[r])
        rel = problem.relations[r]
        if rel == "=":
            a_eq_rows.append(row)
            a_eq_rhs.append(problem.rhs[r])
        elif rel == "<=":
            a_ub_rows.append(row)
            a_ub_rhs.append(problem.rhs[r])
        else:
            a_ub_rows.append((row[0], -row[1]))
            a_ub_rhs.append(-problem.rhs[r])

    def matrix(rows):
        data, ri, ci = [], [], []
        for k, (cols, vals) in enumerate(rows):
            ri.extend([k] * len(cols))
            ci.extend(cols.tolist())
            data.extend(vals.tolist())
        return sp.csr_matrix((data, (ri, ci)), shape=(len(rows), problem.num_cols))

    res = linprog(
        c=problem.objective,
        A_ub=matrix(a_ub_rows) if a_ub_rows else None,
        b_ub=np.array(a_ub_rhs) if a_ub_rhs else None,
        A_eq=matrix(a_eq_rows) if a_eq_rows else None,
        b_eq=np.array(a_eq_rhs) if a_eq_rhs else None,
        bounds=list(zip(problem.col_lower, np.where(np.isinf(problem.col_upper), None, problem.col_upper))),
        method="highs",
        options={"maxiter": options.iteration_limit},
    )
    status = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded"}.get(
        res.status, "infeasible"
    )
    x = res.x if res.x is not None else None
    obj = float(res.fun) if res.fun is not None else math.nan
    return status, x, obj


def check_solution(problem: LPProblem, solution: LPSolution, tol: float = 1e-7) -> list[str]:
    """Residual report for a claimed-optimal solution (empty = clean)."""
    if solution.x is None:
        return ["no point to check"]
    x = solution.x
    failures = []
    if x.shape != (problem.num_cols,):
        return [f"point has shape {x.shape}, expected ({problem.num_cols},)"]
    low = problem.col_lower - x
    if low.max(initial=0.0) > tol:
        k = int(np.argmax(low))
        failures.append(f"column {problem.col_names[k]} below lower bound by {low[k]:.3e}")
    high = x - problem.col_upper
    if high.max(initial=0.0) > tol:
        k = int(np.argmax(high))
        failures.append(f"column {problem.col_names[k]} above upper bound by {high[k]:.3e}")
    for r in range(problem.num_rows):
        lhs = float(problem.row_vals[r] @ x[problem.row_cols[r]])
        rhs = problem.rhs[r]
        rel = problem.relations[r]
        resid = 0.0
        if rel == "<=":
            resid = lhs - rhs
        elif rel == ">=":
            resid = rhs - lhs
        else:
            resid = abs(lhs - rhs)
        if resid > tol:
            failures.append(f"row {problem.row_names[r]} violated by {resid:.3e}")
    recomputed = float(problem.objective @ x)
    scale = max(1.0, abs(recomputed))
    if abs(recomputed - solution.objective) > tol * scale:
        failures.append(
            f"objective mismatch: reported {solution.objective!r}, recomputed {recomputed!r}"
        )
    return failures
