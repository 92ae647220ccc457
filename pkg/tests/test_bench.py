import pytest

import coflownet as cn
from coflownet.bench import BenchConfig, CSV_HEADER, rows_to_csv, run_bench
from coflownet.generate import GenConfig, generate_instance
from coflownet.pipeline import SolveFailure, run_pipeline
from coflownet.solver import LPSolution, SolveOptions, SolveStatus


def test_reduced_instances_best_lambda_within_factor_two(rng):
    # ten reduced shop instances: best-of-20 stays within 2.05x of the bound
    for k in range(10):
        shop = cn.random_shop(rng, max_jobs=5, max_machines=3)
        inst = cn.reduce_open_shop(shop)
        result = run_pipeline(
            inst, strategy="stretch", trials=20, seed=k, options=SolveOptions(backend="highs")
        )
        ratio = result.report.objective / result.lp_objective
        assert ratio <= 2.0 + 0.05


def _interval_lp_value(inst, eps):
    grid = cn.interval_grid_for(inst, eps)
    sol = cn.solve(cn.build_interval_lp(inst, grid), SolveOptions(backend="highs"))
    return sol.objective


def test_epsilon_sweep_released_instances_monotone():
    # with trace-like releases, coarse grids quantize starts/finishes harder,
    # so the relaxation value drops as epsilon drops
    for seed in range(4):
        cfg = GenConfig(
            topology="swan-like",
            model=cn.RoutingModel.SINGLE_PATH,
            jobs=5,
            seed=seed,
            release_mean=5.0,
        )
        inst = generate_instance(cfg)
        assert _interval_lp_value(inst, 0.2) <= _interval_lp_value(inst, 0.5436) + 1e-6


def test_epsilon_sweep_release_free_instances_tighten():
    # without releases the finer grid relaxes less, so its value is larger
    for seed in range(4):
        cfg = GenConfig(
            topology="swan-like", model=cn.RoutingModel.SINGLE_PATH, jobs=5, seed=seed
        )
        inst = generate_instance(cfg)
        assert _interval_lp_value(inst, 0.2) >= _interval_lp_value(inst, 0.5436) - 1e-6


def test_run_bench_rows_and_ratio():
    config = BenchConfig(
        gen=GenConfig(topology="swan-like", model=cn.RoutingModel.FREE_PATH, jobs=3),
        instances=2,
        strategies=("stretch", "heuristic", "interval-stretch"),
        epsilons=(0.2, 0.5436),
        trials=4,
        seed=11,
    )
    rows = run_bench(config)
    assert len(rows) == 2 * (2 + 2)
    for row in rows:
        assert row.error is None
        assert row.ratio >= 1.0 - 1e-9
        if row.strategy == "interval-stretch":
            assert row.epsilon in (0.2, 0.5436)
        else:
            assert row.epsilon is None


def test_bench_records_row_failures_and_continues(monkeypatch):
    import coflownet.bench as bench_mod

    calls = {"n": 0}
    real = bench_mod.run_pipeline

    def flaky(instance, **kwargs):
        calls["n"] += 1
        if calls["n"] == 1:
            raise RuntimeError("synthetic row failure")
        return real(instance, **kwargs)

    monkeypatch.setattr(bench_mod, "run_pipeline", flaky)
    config = BenchConfig(
        gen=GenConfig(topology="swan-like", model=cn.RoutingModel.FREE_PATH, jobs=2),
        instances=2,
        strategies=("heuristic",),
        trials=1,
        seed=5,
        workers=1,
    )
    rows = run_bench(config)
    assert len(rows) == 2
    assert rows[0].error is not None and "synthetic" in rows[0].error
    assert rows[1].error is None
    csv_text = rows_to_csv(rows)
    lines = csv_text.strip().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].split(",")[4] == ""  # failed row leaves lp_objective empty


def test_pipeline_surfaces_solver_failure(monkeypatch, demo_single):
    import coflownet.pipeline as pipe

    def fake_solve(problem, options=None):
        return LPSolution(status=SolveStatus.ITERATION_LIMIT, objective=float("nan"), x=None)

    monkeypatch.setattr(pipe, "solve", fake_solve)
    with pytest.raises(SolveFailure):
        pipe.run_pipeline(demo_single, strategy="heuristic")


def test_cli_exit_3_on_solver_failure(monkeypatch, tmp_path):
    import coflownet.pipeline as pipe
    from coflownet.cli import main
    from coflownet.serialize import save_instance
    from coflownet.generate import demo_instance

    def fake_solve(problem, options=None):
        return LPSolution(status=SolveStatus.ITERATION_LIMIT, objective=float("nan"), x=None)

    monkeypatch.setattr(pipe, "solve", fake_solve)
    path = tmp_path / "inst.json"
    save_instance(demo_instance(cn.RoutingModel.SINGLE_PATH), path)
    assert main(["solve", str(path), "--strategy", "heuristic"]) == 3
