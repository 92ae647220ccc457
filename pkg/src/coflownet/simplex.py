"""Bounded-variable revised simplex with a dense basis inverse.

Deterministic by construction (fixed tie-breaking, no randomized
pivoting), which is what the test suite leans on. Dantzig pricing with a
permanent switch to Bland's rule once the objective stalls, two phases
with artificial columns, and periodic refactorization of the basis
inverse to keep the product-form updates honest. Dense basis algebra is
fine at desk scale (a few thousand rows); bigger problems should go
through the HiGHS backend instead.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

_PIVOT_TOL = 1e-9
_DUAL_TOL = 1e-9
_STALL_LIMIT = 200
_REFACTOR_EVERY = 100


def solve_simplex(problem, tolerance: float = 1e-7, iteration_limit: int = 50_000):
    """Minimize the LPProblem. Returns ``(status, x, objective)`` with
    status one of ``optimal | infeasible | unbounded | iteration_limit``;
    ``x`` is the structural column vector (best-known point on limit)."""
    n = problem.num_cols
    m = problem.num_rows
    if not np.all(np.isfinite(problem.col_lower)):
        raise ValueError("free variables are not supported")

    if m == 0:
        x = np.where(problem.objective < 0, problem.col_upper, problem.col_lower)
        if not np.all(np.isfinite(x)):
            return "unbounded", None, -math.inf
        return "optimal", x, float(problem.objective @ x)

    # Standard form: append one slack per inequality row, then one
    # artificial per row that cannot start with a feasible slack.
    rows_ind: list[np.ndarray] = list(problem.row_cols)
    rows_val: list[np.ndarray] = list(problem.row_vals)
    lb = list(problem.col_lower)
    ub = list(problem.col_upper)
    slack_of = {}
    for r, rel in enumerate(problem.relations):
        if rel == "=":
            continue
        idx = n + len(slack_of)
        slack_of[r] = idx
        coeff = 1.0 if rel == "<=" else -1.0
        rows_ind[r] = np.append(rows_ind[r], idx)
        rows_val[r] = np.append(rows_val[r], coeff)
        lb.append(0.0)
        ub.append(math.inf)
    n_slack = len(slack_of)

    x = np.array(lb[: n + n_slack])
    b = problem.rhs.copy()
    residual = b.copy()
    for r in range(m):
        residual[r] -= rows_val[r] @ x[rows_ind[r]]

    basis = np.empty(m, dtype=np.int64)
    art_cols: list[int] = []
    art_rows: list[int] = []
    art_sign: list[float] = []
    for r, rel in enumerate(problem.relations):
        s = slack_of.get(r)
        if rel == "<=" and residual[r] >= 0:
            basis[r] = s
        elif rel == ">=" and residual[r] <= 0:
            basis[r] = s
        else:
            idx = n + n_slack + len(art_cols)
            basis[r] = idx
            art_cols.append(idx)
            art_rows.append(r)
            art_sign.append(1.0 if residual[r] >= 0 else -1.0)
    n_art = len(art_cols)
    total = n + n_slack + n_art
    lb = np.array(lb + [0.0] * n_art)
    ub = np.array(ub + [math.inf] * n_art)

    data, ri, ci = [], [], []
    for r in range(m):
        ri.extend([r] * len(rows_ind[r]))
        ci.extend(rows_ind[r].tolist())
        data.extend(rows_val[r].tolist())
    ri.extend(art_rows)
    ci.extend(art_cols)
    data.extend(art_sign)
    A = sp.csc_matrix((data, (ri, ci)), shape=(m, total))

    c2 = np.zeros(total)
    c2[:n] = problem.objective
    c1 = np.zeros(total)
    c1[n + n_slack :] = 1.0

    state = _State(A, b, lb, ub, basis, n)
    status = state.run(c1, iteration_limit, allow_unbounded=False)
    if status == "iteration_limit":
        return status, state.x[:n].copy(), float(problem.objective @ state.x[:n])
    if state.objective(c1) > max(tolerance, 1e-7):
        return "infeasible", None, math.nan
    # Phase 2: artificials are pinned to zero and carry no cost.
    state.ub[n + n_slack :] = 0.0
    state.x[n + n_slack :] = np.clip(state.x[n + n_slack :], 0.0, 0.0)
    status = state.run(c2, iteration_limit, allow_unbounded=True)
    xs = state.x[:n].copy()
    obj = float(problem.objective @ xs)
    if status == "unbounded":
        return "unbounded", None, -math.inf
    return status, xs, obj


class _State:
    def __init__(self, A, b, lb, ub, basis, n_structural):
        self.A = A
        self.b = b
        self.lb = lb
        self.ub = ub
        self.basis = basis
        self.n_structural = n_structural
        self.total = A.shape[1]
        self.m = A.shape[0]
        self.in_basis = np.zeros(self.total, dtype=bool)
        self.in_basis[basis] = True
        self.at_upper = np.zeros(self.total, dtype=bool)
        self.x = np.where(np.isfinite(lb), lb, 0.0)
        self.binv = None
        self.refactorize()

    def refactorize(self):
        dense = self.A[:, self.basis].toarray()
        self.binv = np.linalg.inv(dense)
        self.recompute_basics()

    def recompute_basics(self):
        nb = ~self.in_basis
        rhs = self.b - self.A[:, nb] @ self.x[nb]
        self.x[self.basis] = self.binv @ rhs

    def objective(self, c) -> float:
        return float(c @ self.x)

    def run(self, c, iteration_limit: int, allow_unbounded: bool) -> str:
        bland = False
        stall = 0
        best = self.objective(c)
        since_refactor = 0
        for _ in range(iteration_limit):
            y = c[self.basis] @ self.binv
            d = c - self.A.T @ y
            nb = ~self.in_basis
            movable = nb & (self.ub - self.lb > _PIVOT_TOL)
            lower_viol = movable & ~self.at_upper & (d < -_DUAL_TOL)
            upper_viol = movable & self.at_upper & (d > _DUAL_TOL)
            candidates = np.nonzero(lower_viol | upper_viol)[0]
            if candidates.size == 0:
                self.refactorize()
                return "optimal"
            if bland:
                q = int(candidates[0])
            else:
                q = int(candidates[np.argmax(np.abs(d[candidates]))])
            sigma = -1.0 if self.at_upper[q] else 1.0

            w = self.binv @ self.A[:, q].toarray().ravel()
            t_best = self.ub[q] - self.lb[q]  # bound flip distance
            leave = -1
            xb = self.x[self.basis]
            lo = self.lb[self.basis]
            hi = self.ub[self.basis]
            step = sigma * w
            with np.errstate(divide="ignore", invalid="ignore"):
                down = np.where(step > _PIVOT_TOL, (xb - lo) / step, np.inf)
                up = np.where(step < -_PIVOT_TOL, (xb - hi) / step, np.inf)
            ratios = np.minimum(down, up)
            r_min = ratios.min() if ratios.size else np.inf
            if r_min < t_best - 1e-12:
                t_best = max(r_min, 0.0)
                ties = np.nonzero(ratios <= r_min + 1e-12)[0]
                if bland:
                    leave = int(ties[np.argmin(self.basis[ties])])
                else:
                    leave = int(ties[np.argmax(np.abs(w[ties]))])
            if not np.isfinite(t_best):
                if allow_unbounded:
                    return "unbounded"
                raise ArithmeticError("unbounded direction in a bounded phase")

            self.x[self.basis] = xb - t_best * step
            self.x[q] += sigma * t_best
            if leave < 0:
                self.at_upper[q] = ~self.at_upper[q]
            else:
                out = self.basis[leave]
                self.in_basis[out] = False
                self.at_upper[out] = abs(self.x[out] - self.ub[out]) < abs(
                    self.x[out] - self.lb[out]
                )
                self.x[out] = self.ub[out] if self.at_upper[out] else self.lb[out]
                self.basis[leave] = q
                self.in_basis[q] = True
                eta = -w / w[leave]
                eta[leave] = 1.0 / w[leave]
                self.binv += np.outer(eta - _unit(self.m, leave), self.binv[leave])
                since_refactor += 1
                if since_refactor >= _REFACTOR_EVERY:
                    self.refactorize()
                    since_refactor = 0

            obj = self.objective(c)
            if obj < best - 1e-12:
                best = obj
                stall = 0
            else:
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
        return "iteration_limit"


def _unit(m: int, r: int) -> np.ndarray:
    e = np.zeros(m)
    e[r] = 1.0
    return e
