"""Concurrent open-shop instances, their network reduction, and the
exact permutation oracle used to certify small instances.

A shop job owns independent work on every machine and completes when all
machines have finished it. Mapping each machine to a private unit edge
turns a shop into a coflow instance whose optimum is the shop optimum,
and on shops an optimal schedule can always be realized by one job
permutation applied to every machine, so exhaustive permutation search
is an exact oracle at small job counts.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .model import Coflow, Edge, Flow, Instance, Network, RateSchedule, RoutingModel


@dataclass(frozen=True)
class OpenShopInstance:
    machines: int
    processing: tuple[tuple[float, ...], ...]  # processing[j][i]: job j on machine i
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.processing) != len(self.weights):
            raise ValueError("one weight per job required")
        for j, row in enumerate(self.processing):
            if len(row) != self.machines:
                raise ValueError(f"job {j + 1}: expected {self.machines} processing times")
            if any(p < 0 for p in row):
                raise ValueError(f"job {j + 1}: negative processing time")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")

    @property
    def job_count(self) -> int:
        return len(self.processing)


def reduce_open_shop(
    shop: OpenShopInstance, model: RoutingModel = RoutingModel.SINGLE_PATH
) -> Instance:
    """Map the shop onto disjoint unit edges, one per machine.

    Machine i becomes edge ``m{i}`` from ``x{i}`` to ``y{i}``; job j
    becomes a coflow with one flow of demand ``p[j][i]`` per machine it
    actually uses. Each pair has exactly one route, so the same instance
    is valid in either routing model. Releases are all zero.
    """
    nodes = []
    edges = []
    for i in range(shop.machines):
        nodes.extend([f"x{i + 1}", f"y{i + 1}"])
        edges.append(Edge(id=f"m{i + 1}", src=f"x{i + 1}", dst=f"y{i + 1}", cap=1.0))
    coflows = []
    for j, row in enumerate(shop.processing):
        flows = tuple(
            Flow(
                src=f"x{i + 1}",
                dst=f"y{i + 1}",
                demand=p,
                release=0,
                path=(f"m{i + 1}",),
            )
            for i, p in enumerate(row)
            if p > 0
        )
        if not flows:
            raise ValueError(f"job {j + 1} has no positive processing time")
        coflows.append(Coflow(flows=flows, weight=shop.weights[j]))
    return Instance(
        network=Network(nodes=tuple(nodes), edges=tuple(edges)),
        coflows=tuple(coflows),
        model=model,
    )


def permutation_objective(shop: OpenShopInstance, order) -> float:
    """Weighted completion under one job order applied to every machine.

    Machines process back to back in ``order``; a job completes when the
    last machine it has work on finishes that work.
    """
    loads = [0.0] * shop.machines
    completion = [0.0] * shop.job_count
    for j in order:
        row = shop.processing[j]
        done = 0.0
        for i in range(shop.machines):
            if row[i] > 0:
                loads[i] += row[i]
                done = max(done, loads[i])
        completion[j] = done
    return math.fsum(w * c for w, c in zip(shop.weights, completion))


def open_shop_optimal(shop: OpenShopInstance, limit: int = 8) -> tuple[float, tuple[int, ...]]:
    """Exact minimum weighted completion time and a witnessing permutation."""
    if shop.job_count > limit:
        raise ValueError(f"{shop.job_count} jobs exceeds the enumeration limit {limit}")
    best = math.inf
    best_order: tuple[int, ...] | None = None
    for order in itertools.permutations(range(shop.job_count)):
        value = permutation_objective(shop, order)
        if value < best - 1e-12:
            best = value
            best_order = order
    return best, best_order


def permutation_schedule(shop: OpenShopInstance, order, instance: Instance) -> RateSchedule:
    """Replay a permutation on the reduced instance as a rate schedule.

    Machine work runs back to back at unit rate, so each slot moves a
    ``1/demand`` fraction. Requires integer processing times.
    """
    horizon = max(1, int(math.ceil(max(math.fsum(row[i] for row in shop.processing) for i in range(shop.machines)))))
    amounts: list[list[np.ndarray]] = []
    for j, row in enumerate(shop.processing):
        amounts.append([np.zeros(horizon) for p in row if p > 0])
    starts = [0.0] * shop.machines
    for j in order:
        row = shop.processing[j]
        flow_idx = 0
        for i in range(shop.machines):
            if row[i] <= 0:
                continue
            p = int(row[i])
            if p != row[i]:
                raise ValueError("permutation replay needs integer processing times")
            begin = int(starts[i])
            for t in range(begin, begin + p):
                amounts[j][flow_idx][t] = 1.0 / p
            starts[i] += p
            flow_idx += 1
    return RateSchedule(
        slot_count=horizon,
        amounts=tuple(tuple(flows) for flows in amounts),
        edge_amounts=None,
    )


def check_lp_lower_bound(
    instance: Instance, lp_objective: float, exact_objective: float, tol: float = 1e-6
) -> str | None:
    """None if the relaxation value sits below the exact optimum, else a
    message describing the violation (which indicates an LP-builder bug).
    """
    if lp_objective <= exact_objective + tol:
        return None
    return (
        f"relaxation value {lp_objective} exceeds exact optimum "
        f"{exact_objective} by {lp_objective - exact_objective:.3e}"
    )


def random_shop(
    rng: np.random.Generator,
    max_jobs: int = 6,
    max_machines: int = 4,
    max_time: int = 5,
    max_weight: int = 10,
) -> OpenShopInstance:
    """A random shop with integer data; every job gets at least one
    positive processing time so the reduction is well formed."""
    jobs = int(rng.integers(1, max_jobs + 1))
    machines = int(rng.integers(1, max_machines + 1))
    processing = []
    for _ in range(jobs):
        row = rng.integers(0, max_time + 1, size=machines)
        if not np.any(row > 0):
            row[int(rng.integers(0, machines))] = int(rng.integers(1, max_time + 1))
        processing.append(tuple(float(p) for p in row))
    weights = tuple(float(rng.integers(1, max_weight + 1)) for _ in range(jobs))
    return OpenShopInstance(machines=machines, processing=tuple(processing), weights=weights)
