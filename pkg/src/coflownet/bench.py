"""Benchmark sweeps: generated instances x strategies x grid epsilons,
one CSV row each.

Rows are dispatched to a thread pool but collected and written in
submission order, so re-running with the same seed reproduces the CSV
bit for bit (wall_ms excepted). Per-row failures are recorded in the row
and the sweep keeps going.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from .generate import GenConfig, generate_instance
from .pipeline import run_pipeline
from .solver import SolveOptions

CSV_HEADER = ("seed", "model", "strategy", "epsilon", "lp_objective", "schedule_objective", "ratio", "wall_ms")


@dataclass(frozen=True)
class BenchConfig:
    gen: GenConfig = field(default_factory=GenConfig)
    instances: int = 3
    strategies: tuple[str, ...] = ("stretch", "heuristic")
    epsilons: tuple[float, ...] = (0.2,)
    trials: int = 20
    seed: int = 0
    backend: str = "highs"
    workers: int = 4


@dataclass(frozen=True)
class BenchRow:
    seed: int
    model: str
    strategy: str
    epsilon: float | None
    lp_objective: float | None
    schedule_objective: float | None
    wall_ms: float
    error: str | None = None

    @property
    def ratio(self) -> float | None:
        if self.lp_objective and self.schedule_objective is not None:
            return self.schedule_objective / self.lp_objective
        return None


def _run_row(instance, strategy: str, epsilon: float | None, config: BenchConfig, seed: int) -> BenchRow:
    start = time.perf_counter()
    try:
        result = run_pipeline(
            instance,
            strategy=strategy,
            trials=config.trials,
            seed=config.seed,
            epsilon=epsilon,
            options=SolveOptions(backend=config.backend),
        )
        return BenchRow(
            seed=seed,
            model=instance.model.value,
            strategy=strategy,
            epsilon=epsilon,
            lp_objective=result.lp_objective,
            schedule_objective=result.report.objective,
            wall_ms=(time.perf_counter() - start) * 1000.0,
        )
    except Exception as exc:  # per-row failures must not kill the sweep
        return BenchRow(
            seed=seed,
            model=instance.model.value,
            strategy=strategy,
            epsilon=epsilon,
            lp_objective=None,
            schedule_objective=None,
            wall_ms=(time.perf_counter() - start) * 1000.0,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_bench(config: BenchConfig) -> list[BenchRow]:
    tasks = []
    for k in range(config.instances):
        seed = config.seed + k
        instance = generate_instance(replace(config.gen, seed=seed))
        for strategy in config.strategies:
            if strategy == "interval-stretch":
                for eps in config.epsilons:
                    tasks.append((instance, strategy, eps, seed))
            else:
                tasks.append((instance, strategy, None, seed))
    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        futures = [
            pool.submit(_run_row, instance, strategy, eps, config, seed)
            for instance, strategy, eps, seed in tasks
        ]
        return [f.result() for f in futures]


def _num(value: float | None) -> str:
    return "" if value is None else f"{value:.9g}"


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                row.seed,
                row.model,
                row.strategy,
                _num(row.epsilon),
                _num(row.lp_objective),
                _num(row.schedule_objective),
                _num(row.ratio),
                f"{row.wall_ms:.3f}",
            ]
        )
    return buf.getvalue()
