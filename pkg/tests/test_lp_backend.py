import math

import numpy as np
import pytest

from coflownet import (
    LPProblem,
    SolveOptions,
    SolveStatus,
    build_time_indexed_lp,
    horizon_upper_bound,
    solve,
)
from coflownet.mps import read_mps, write_mps
from coflownet.solver import check_solution

BACKENDS = ("builtin", "highs")


def problem(objective, rows, lower=None, upper=None, names=None):
    n = len(objective)
    return LPProblem(
        objective=np.array(objective, dtype=float),
        col_lower=np.array(lower if lower is not None else [0.0] * n),
        col_upper=np.array(upper if upper is not None else [math.inf] * n),
        col_names=tuple(names if names is not None else (f"v{k}" for k in range(n))),
        row_names=tuple(f"r{k}" for k in range(len(rows))),
        row_cols=tuple(np.array(cols, dtype=np.int64) for cols, _, _, _ in rows),
        row_vals=tuple(np.array(vals, dtype=float) for _, vals, _, _ in rows),
        relations=tuple(rel for _, _, rel, _ in rows),
        rhs=np.array([rhs for _, _, _, rhs in rows]),
    )


@pytest.mark.parametrize("backend", BACKENDS)
def test_minimize_with_lower_bound_row(backend):
    p = problem([1.0], [([0], [1.0], ">=", 3.0)])
    sol = solve(p, SolveOptions(backend=backend))
    assert sol.status is SolveStatus.OPTIMAL
    assert sol.objective == pytest.approx(3.0, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_objective_is_the_contract_not_the_vertex(backend):
    p = problem(
        [1.0, 1.0],
        [([0, 1], [1.0, 1.0], ">=", 2.0)],
        upper=[0.5, math.inf],
    )
    sol = solve(p, SolveOptions(backend=backend))
    assert sol.status is SolveStatus.OPTIMAL
    assert sol.objective == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible_reported_as_status(backend):
    p = problem([1.0], [([0], [1.0], ">=", 2.0)], upper=[1.0])
    sol = solve(p, SolveOptions(backend=backend))
    assert sol.status is SolveStatus.INFEASIBLE


@pytest.mark.parametrize("backend", BACKENDS)
def test_unbounded_reported_as_status(backend):
    p = problem([-1.0], [([0], [1.0], ">=", 0.0)])
    sol = solve(p, SolveOptions(backend=backend))
    assert sol.status is SolveStatus.UNBOUNDED


@pytest.mark.parametrize("backend", BACKENDS)
def test_equality_and_mixed_rows(backend):
    # min 2x + y  s.t.  x + y = 1, x - y <= 0.2, y <= 0.8
    p = problem(
        [2.0, 1.0],
        [
            ([0, 1], [1.0, 1.0], "=", 1.0),
            ([0, 1], [1.0, -1.0], "<=", 0.2),
        ],
        upper=[math.inf, 0.8],
    )
    sol = solve(p, SolveOptions(backend=backend))
    assert sol.status is SolveStatus.OPTIMAL
    assert sol.objective == pytest.approx(1.2, abs=1e-9)
    assert sol.x[0] == pytest.approx(0.2, abs=1e-9)


def test_iteration_limit_carries_point():
    p = problem([1.0, 1.0], [([0, 1], [1.0, 1.0], ">=", 2.0)])
    sol = solve(p, SolveOptions(backend="builtin", iteration_limit=1))
    assert sol.status is SolveStatus.ITERATION_LIMIT
    assert sol.x is not None


def test_builtin_deterministic(solved_free):
    p, _, _ = solved_free
    a = solve(p, SolveOptions(backend="builtin"))
    b = solve(p, SolveOptions(backend="builtin"))
    assert np.array_equal(a.x, b.x)
    assert a.objective == b.objective


@pytest.mark.parametrize("backend", BACKENDS)
def test_row_permutation_invariance(backend, solved_free, rng):
    p, base, _ = solved_free
    for _ in range(3):
        perm = rng.permutation(p.num_rows)
        sol = solve(p.permuted_rows(perm), SolveOptions(backend=backend))
        assert sol.objective == pytest.approx(base.objective, abs=1e-9)


def test_check_solution_catches_corruption(solved_single):
    p, sol, _ = solved_single
    assert check_solution(p, sol) == []
    bad = sol.x.copy()
    bad[p.name_map["x_1_1_1"]] += 0.5
    from coflownet.solver import LPSolution

    failures = check_solution(p, LPSolution(sol.status, sol.objective, bad))
    assert failures


def test_backends_agree_on_golden_lps(demo_single, demo_free):
    for inst in (demo_single, demo_free):
        p = build_time_indexed_lp(inst, horizon_upper_bound(inst))
        a = solve(p, SolveOptions(backend="builtin"))
        b = solve(p, SolveOptions(backend="highs"))
        assert a.objective == pytest.approx(b.objective, abs=1e-7)


# ---------------------------------------------------------------------------
# MPS round trip and the independent-solver escape hatch


def test_mps_round_trip_preserves_problem(solved_free):
    p, _, _ = solved_free
    back = read_mps(write_mps(p))
    assert back.col_names == p.col_names
    assert back.row_names == p.row_names
    assert back.relations == p.relations
    np.testing.assert_allclose(back.rhs, p.rhs, atol=1e-12)
    np.testing.assert_allclose(back.objective, p.objective, atol=1e-12)
    np.testing.assert_allclose(back.col_lower, p.col_lower, atol=1e-12)
    np.testing.assert_allclose(back.col_upper, p.col_upper, atol=1e-12)


def test_exported_mps_cross_checks_builtin(demo_free, tmp_path):
    # dual route: builder + builtin simplex vs exported MPS + HiGHS
    p = build_time_indexed_lp(demo_free, horizon_upper_bound(demo_free))
    builtin = solve(p, SolveOptions(backend="builtin"))
    path = tmp_path / "golden.mps"
    path.write_text(write_mps(p))
    reparsed = read_mps(path.read_text())
    external = solve(reparsed, SolveOptions(backend="highs"))
    assert external.status is SolveStatus.OPTIMAL
    assert external.objective <= 5.0 + 1e-6
    assert builtin.objective == pytest.approx(external.objective, abs=1e-6)
