"""Randomized stretch rounding of fractional schedules.

The pipeline: draw a factor ``lambda`` in (0, 1] (density 2v, so larger
factors are likelier), replay the fractional schedule with time dilated
by ``1/lambda`` at preserved rates, truncate every flow once its demand
is met, then compact idle slots forward. Each dilated slot is a convex
combination of at most two original slots (the overlap weights sum to
one), and truncation only ever scales a flow's slot contribution down,
so feasibility survives the whole chain.

``expand_interval_schedule`` turns an interval-grid solution back into
per-slot rates (uniform speed within each interval) so the same rounding
machinery applies to interval relaxations.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .lp import IntervalSolution
from .model import (
    AMOUNT_EPS,
    CompletionReport,
    FractionalSchedule,
    Instance,
    RateSchedule,
    completion_times,
)

#: Remaining demand fractions below this are treated as already met.
_DONE_EPS = 1e-12


@dataclass(frozen=True)
class Lambda:
    """A stretch factor in (0, 1]. The schedule is dilated by 1/value."""

    value: float

    def __post_init__(self):
        if not 0.0 < self.value <= 1.0:
            raise ValueError(f"lambda must lie in (0, 1], got {self.value}")


@dataclass(frozen=True)
class StretchTrial:
    """One rounded schedule: the draw, the result, and both reports.

    ``pre_compaction`` is the completion report of the truncated stretch
    before idle slots were compacted; the per-coflow ceiling guarantee is
    stated against it.
    """

    lam: Lambda
    schedule: RateSchedule
    report: CompletionReport
    pre_compaction: CompletionReport


@dataclass(frozen=True)
class StretchResult:
    best: StretchTrial
    average_objective: float
    trials: tuple[StretchTrial, ...]


class StretchBoundError(AssertionError):
    """A trial violated the per-coflow completion ceiling (a bug)."""


def sample_lambda(u: float) -> Lambda:
    """Map a uniform draw ``u`` in (0, 1] through the inverse CDF of the
    density 2v, i.e. return sqrt(u). Deterministic in ``u``."""
    if not 0.0 < u <= 1.0:
        raise ValueError(f"uniform draw must lie in (0, 1], got {u}")
    return Lambda(math.sqrt(u))


def _spread_uniform(
    out: np.ndarray, a: float, bnd: float, rate: float, out_slots: int
) -> None:
    """Add ``rate`` per unit time over the real interval [a, bnd] onto the
    1-based slot grid, pro-rating boundary slots."""
    first = int(math.floor(a)) + 1
    last = min(int(math.ceil(bnd)), out_slots)
    if last < first:
        return
    ks = np.arange(first, last + 1, dtype=float)
    overlap = np.minimum(ks, bnd) - np.maximum(ks - 1.0, a)
    np.clip(overlap, 0.0, None, out=overlap)
    out[first - 1 : last] += rate * overlap


def _stretch_series(series: np.ndarray, lam: float, out_slots: int) -> np.ndarray:
    """Dilate a per-slot series by 1/lam at preserved rate: output slot k
    collects ``series[t] * |[k-1, k] cut [(t-1)/lam, t/lam]|``."""
    out = np.zeros(out_slots)
    for t in np.nonzero(series > AMOUNT_EPS)[0]:
        _spread_uniform(out, t / lam, (t + 1) / lam, series[t], out_slots)
    return out


def stretch_schedule(fractional: FractionalSchedule, lam: Lambda, instance: Instance) -> RateSchedule:
    """Dilate ``fractional`` by 1/lam, then truncate each flow at demand.

    Truncation happens at slot boundaries: once a flow's cumulative raw
    amount would pass 1, the whole slot contribution is scaled by the
    remaining fraction, and (free-path) the slot's per-edge amounts are
    scaled identically so conservation is untouched. Rejects ``lam``
    below ``1/(10 * slot_count)`` to bound the dilated horizon.
    """
    horizon = fractional.slot_count
    if lam.value < 1.0 / (10.0 * horizon):
        raise ValueError(f"lambda {lam.value} below the 1/(10*{horizon}) memory guard")
    out_slots = int(math.ceil(horizon / lam.value - 1e-12))
    amounts = []
    edge_amounts = [] if fractional.edge_fractions is not None else None
    for j, cf in enumerate(instance.coflows):
        flow_amounts = []
        flow_edges = []
        for i in range(len(cf.flows)):
            raw = _stretch_series(fractional.fractions[j][i], lam.value, out_slots)
            taken = np.zeros(out_slots)
            factors = np.zeros(out_slots)
            remaining = 1.0
            for k in np.nonzero(raw > AMOUNT_EPS)[0]:
                if remaining <= _DONE_EPS:
                    break
                take = min(raw[k], remaining)
                taken[k] = take
                factors[k] = take / raw[k]
                remaining -= take
            flow_amounts.append(taken)
            if edge_amounts is not None:
                edges = {}
                for eid, series in fractional.edge_fractions[j][i].items():
                    stretched = _stretch_series(series, lam.value, out_slots)
                    scaled = stretched * factors
                    if np.any(scaled > AMOUNT_EPS):
                        edges[eid] = scaled
                flow_edges.append(edges)
        amounts.append(tuple(flow_amounts))
        if edge_amounts is not None:
            edge_amounts.append(tuple(flow_edges))
    return RateSchedule(
        slot_count=out_slots,
        amounts=tuple(amounts),
        edge_amounts=tuple(edge_amounts) if edge_amounts is not None else None,
    )


def compact_idle_slots(schedule: RateSchedule, instance: Instance) -> RateSchedule:
    """Move each busy slot's entire content to the earliest idle slot all
    its flows have been released before (strictly). Scans slots in
    ascending order; freed slots become candidates for later content.
    Never delays any flow, so no coflow's completion time can grow.
    """
    slots = schedule.slot_count
    amounts = [[a.copy() for a in flows] for flows in schedule.amounts]
    edges = None
    if schedule.edge_amounts is not None:
        edges = [
            [{eid: s.copy() for eid, s in flow.items()} for flow in flows]
            for flows in schedule.edge_amounts
        ]

    users_by_slot: dict[int, list[tuple[int, int]]] = {}
    for j, flows in enumerate(amounts):
        for i, series in enumerate(flows):
            for t in np.nonzero(series > AMOUNT_EPS)[0]:
                users_by_slot.setdefault(int(t) + 1, []).append((j, i))
    busy = sorted(users_by_slot)
    idle = [t for t in range(1, slots + 1) if t not in users_by_slot]
    for t in busy:
        users = users_by_slot[t]
        min_slot = 1 + max(
            instance.coflows[j].flows[i].release for j, i in users
        )  # strictly after every release
        pos = bisect.bisect_left(idle, min_slot)
        if pos >= len(idle) or idle[pos] >= t:
            continue
        target = idle.pop(pos)
        for j, i in users:
            amounts[j][i][target - 1] = amounts[j][i][t - 1]
            amounts[j][i][t - 1] = 0.0
            if edges is not None:
                for series in edges[j][i].values():
                    series[target - 1] = series[t - 1]
                    series[t - 1] = 0.0
        bisect.insort(idle, t)

    last_busy = 1
    for flows in amounts:
        for series in flows:
            pos = np.nonzero(series > AMOUNT_EPS)[0]
            if pos.size:
                last_busy = max(last_busy, int(pos[-1]) + 1)
    return RateSchedule(
        slot_count=last_busy,
        amounts=tuple(tuple(a[:last_busy] for a in flows) for flows in amounts),
        edge_amounts=tuple(
            tuple({eid: s[:last_busy] for eid, s in flow.items()} for flow in flows)
            for flows in edges
        )
        if edges is not None
        else None,
    )


def expand_interval_schedule(solution: IntervalSolution, instance: Instance) -> RateSchedule:
    """Spread each interval's fraction over its slots at uniform speed.

    An interval of length L carrying fraction y contributes rate y/L to
    every slot it overlaps, pro-rated on boundary slots, so per-slot edge
    loads inherit feasibility from the length-scaled interval capacities.
    """
    grid = solution.grid
    out_slots = int(math.ceil(grid.horizon - 1e-9))

    def spread(series: np.ndarray) -> np.ndarray:
        out = np.zeros(out_slots)
        for k in np.nonzero(series > AMOUNT_EPS)[0]:
            a, bnd = grid.boundaries[k], grid.boundaries[k + 1]
            _spread_uniform(out, a, bnd, series[k] / (bnd - a), out_slots)
        return out

    amounts = []
    edge_amounts = [] if solution.edge_fractions is not None else None
    for j, cf in enumerate(instance.coflows):
        flow_amounts = []
        flow_edges = []
        for i in range(len(cf.flows)):
            flow_amounts.append(spread(solution.fractions[j][i]))
            if edge_amounts is not None:
                flow_edges.append(
                    {
                        eid: spread(series)
                        for eid, series in solution.edge_fractions[j][i].items()
                    }
                )
        amounts.append(tuple(flow_amounts))
        if edge_amounts is not None:
            edge_amounts.append(tuple(flow_edges))
    return RateSchedule(
        slot_count=out_slots,
        amounts=tuple(amounts),
        edge_amounts=tuple(edge_amounts) if edge_amounts is not None else None,
    )


# ---------------------------------------------------------------------------
# lambda points and the per-trial completion ceiling


def lambda_point(fractional: FractionalSchedule, coflow: int, lam: float) -> float:
    """Earliest continuous time by which a ``lam`` fraction of every flow
    of the coflow is scheduled, under uniform rates within each slot."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    levels = np.concatenate([[0.0], fractional.cumulative[coflow]])
    levels = np.maximum.accumulate(levels)  # guard solver dust
    k = int(np.searchsorted(levels, lam, side="left"))
    if k >= levels.size:
        if levels[-1] >= lam - 1e-9:
            return float(levels.size - 1)
        raise ValueError(f"coflow {coflow + 1} never reaches fraction {lam}")
    rise = levels[k] - levels[k - 1]
    return float(k - 1 + (lam - levels[k - 1]) / rise)


def completion_ceilings(fractional: FractionalSchedule, lam: Lambda) -> tuple[int, ...]:
    """Per-coflow bound ceil(lambda_point / lambda) that every stretched,
    truncated (pre-compaction) schedule must respect."""
    return tuple(
        int(math.ceil(lambda_point(fractional, j, lam.value) / lam.value - 1e-9))
        for j in range(len(fractional.cumulative))
    )


def _check_ceilings(
    fractional: FractionalSchedule, lam: Lambda, pre: CompletionReport
) -> None:
    bounds = completion_ceilings(fractional, lam)
    for j, (got, bound) in enumerate(zip(pre.completions, bounds)):
        if got > bound:
            raise StretchBoundError(
                f"coflow {j + 1} finished in slot {got} > ceiling {bound} "
                f"at lambda {lam.value}"
            )


# ---------------------------------------------------------------------------
# trial protocols


def run_stretch(
    instance: Instance,
    fractional: FractionalSchedule,
    trials: int,
    seed: int,
) -> StretchResult:
    """Run ``trials`` independent stretch roundings and fold the results.

    One splittable seed drives everything: trial ``k`` draws from
    substream ``k``, so best/average are reproducible and trials could be
    evaluated in parallel without changing the outcome. Sampled factors
    are floored at the stretch memory guard (an event with probability
    below 1e-4 at desk scale).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    floor = 1.0 / (10.0 * fractional.slot_count)
    out: list[StretchTrial] = []
    for child in np.random.SeedSequence(seed).spawn(trials):
        rng = np.random.default_rng(child)
        u = 1.0 - rng.random()
        lam = sample_lambda(u)
        if lam.value < floor:
            lam = Lambda(floor)
        out.append(_one_trial(instance, fractional, lam))
    best = min(range(trials), key=lambda k: (out[k].report.objective, k))
    average = float(np.mean([t.report.objective for t in out]))
    return StretchResult(best=out[best], average_objective=average, trials=tuple(out))


def _one_trial(instance: Instance, fractional: FractionalSchedule, lam: Lambda) -> StretchTrial:
    stretched = stretch_schedule(fractional, lam, instance)
    pre = completion_times(stretched, instance)
    _check_ceilings(fractional, lam, pre)
    compacted = compact_idle_slots(stretched, instance)
    report = completion_times(compacted, instance)
    return StretchTrial(lam=lam, schedule=compacted, report=report, pre_compaction=pre)


def lp_heuristic(instance: Instance, fractional: FractionalSchedule) -> StretchTrial:
    """Take the fractional schedule as-is (stretch factor 1) and compact.

    Its objective is not bounded by the relaxation value in the worst
    case, but it is a strong heuristic in practice.
    """
    return _one_trial(instance, fractional, Lambda(1.0))
