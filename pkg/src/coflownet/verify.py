"""Independent schedule verification and continuous-time analysis checks.

``verify_schedule`` re-derives feasibility straight from the instance:
per-slot edge loads against capacities, flow conservation (free path),
release respect, and demand satisfaction. It shares no code with the LP
builders or the rounding chain, so it can referee both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    FEAS_TOL,
    FractionalSchedule,
    Instance,
    RateSchedule,
    RoutingModel,
)


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    slot: int | None
    magnitude: float

    def __str__(self) -> str:
        where = f" slot {self.slot}" if self.slot is not None else ""
        return f"{self.kind}: {self.subject}{where} (by {self.magnitude:.3e})"


def verify_schedule(
    schedule: RateSchedule, instance: Instance, tol: float = FEAS_TOL
) -> list[Violation]:
    """All feasibility violations of ``schedule`` on ``instance`` (empty = ok)."""
    out: list[Violation] = []
    if len(schedule.amounts) != len(instance.coflows):
        return [Violation("shape", "coflow count mismatch", None, 0.0)]
    for j, cf in enumerate(instance.coflows):
        if len(schedule.amounts[j]) != len(cf.flows):
            return [Violation("shape", f"coflow {j + 1} flow count mismatch", None, 0.0)]
        for i, series in enumerate(schedule.amounts[j]):
            if len(series) != schedule.slot_count:
                return [Violation("shape", f"coflow {j + 1} flow {i + 1} slot count", None, 0.0)]

    for j, i, cf, fl in instance.iter_flows():
        tag = f"coflow {j + 1} flow {i + 1}"
        series = schedule.amounts[j][i]
        prefix = np.cumsum(series)
        over = prefix.max(initial=0.0) - (1.0 + tol)
        if over > 0:
            out.append(Violation("demand", f"{tag} cumulative exceeds demand", None, over))
        short = abs(prefix[-1] - 1.0) if len(prefix) else 1.0
        if short > tol:
            out.append(Violation("demand", f"{tag} final cumulative != 1", None, short))
        early = np.nonzero(series[: min(fl.release, schedule.slot_count)] > tol)[0]
        for t in early:
            out.append(
                Violation("release", f"{tag} transmits before release", int(t) + 1, float(series[t]))
            )

    if instance.model is RoutingModel.SINGLE_PATH:
        out.extend(_check_single_path(schedule, instance, tol))
    else:
        out.extend(_check_free_path(schedule, instance, tol))
    return out


def _check_single_path(schedule, instance, tol) -> list[Violation]:
    out = []
    loads: dict[str, np.ndarray] = {e.id: np.zeros(schedule.slot_count) for e in instance.network.edges}
    for j, i, cf, fl in instance.iter_flows():
        series = schedule.amounts[j][i]
        for eid in fl.path:
            loads[eid] += series * fl.demand
        if schedule.edge_amounts is not None:
            # Optional per-edge data must sit exactly on the declared path.
            on_path = set(fl.path)
            for eid, edge_series in schedule.edge_amounts[j][i].items():
                if eid not in on_path:
                    worst = float(np.max(edge_series, initial=0.0))
                    if worst > tol:
                        out.append(
                            Violation(
                                "path",
                                f"coflow {j + 1} flow {i + 1} uses off-path edge {eid}",
                                int(np.argmax(edge_series)) + 1,
                                worst,
                            )
                        )
                else:
                    gap = float(np.max(np.abs(edge_series - series), initial=0.0))
                    if gap > tol:
                        out.append(
                            Violation(
                                "path",
                                f"coflow {j + 1} flow {i + 1} edge {eid} differs from flow amount",
                                int(np.argmax(np.abs(edge_series - series))) + 1,
                                gap,
                            )
                        )
    for e in instance.network.edges:
        excess = loads[e.id] - e.cap
        for t in np.nonzero(excess > tol)[0]:
            out.append(Violation("capacity", f"edge {e.id} overloaded", int(t) + 1, float(excess[t])))
    return out


def _check_free_path(schedule, instance, tol) -> list[Violation]:
    out = []
    if schedule.edge_amounts is None:
        return [Violation("shape", "free-path schedule lacks per-edge amounts", None, 0.0)]
    loads: dict[str, np.ndarray] = {e.id: np.zeros(schedule.slot_count) for e in instance.network.edges}
    for j, i, cf, fl in instance.iter_flows():
        tag = f"coflow {j + 1} flow {i + 1}"
        series = schedule.amounts[j][i]
        per_edge = schedule.edge_amounts[j][i]
        for eid, edge_series in per_edge.items():
            if eid not in loads:
                return [Violation("shape", f"{tag} references unknown edge {eid}", None, 0.0)]
            loads[eid] += edge_series * fl.demand
        net_flow: dict[str, np.ndarray] = {}
        for eid, edge_series in per_edge.items():
            e = instance.network.edge_by_id[eid]
            net_flow.setdefault(e.src, np.zeros(schedule.slot_count))
            net_flow.setdefault(e.dst, np.zeros(schedule.slot_count))
            net_flow[e.src] += edge_series
            net_flow[e.dst] -= edge_series
        src_out = np.zeros(schedule.slot_count)
        snk_in = np.zeros(schedule.slot_count)
        for eid, edge_series in per_edge.items():
            e = instance.network.edge_by_id[eid]
            if e.src == fl.src:
                src_out += edge_series
            if e.dst == fl.dst:
                snk_in += edge_series
        for name, total in (("source out-flow", src_out), ("sink in-flow", snk_in)):
            gap = np.abs(total - series)
            for t in np.nonzero(gap > tol)[0]:
                out.append(
                    Violation("conservation", f"{tag} {name} != slot amount", int(t) + 1, float(gap[t]))
                )
        for v, balance in net_flow.items():
            if v in (fl.src, fl.dst):
                continue
            bad = np.abs(balance)
            for t in np.nonzero(bad > tol)[0]:
                out.append(
                    Violation("conservation", f"{tag} imbalance at node {v}", int(t) + 1, float(bad[t]))
                )
    for e in instance.network.edges:
        excess = loads[e.id] - e.cap
        for t in np.nonzero(excess > tol)[0]:
            out.append(Violation("capacity", f"edge {e.id} overloaded", int(t) + 1, float(excess[t])))
    return out


# ---------------------------------------------------------------------------
# continuous-time interpolation checks


@dataclass(frozen=True)
class InterpolationReport:
    """Per-coflow residuals tying the discrete progress sums to their
    continuous counterparts.

    - ``integral``: area under ``1 - X(tau)`` with X piecewise linear
    - ``identity_residual``: |integral - (discrete bound - 1/2)|, an exact
      algebraic identity up to float noise
    - ``completion_slack``: ``lp_completion - 1/2 - integral`` (must be
      >= -1e-9 on solver output; None without LP completions)
    - ``quadrature_residual``: |mean of the inverse progress curve over
      the unit interval - integral|, an independent change-of-variables
      route to the same area
    """

    integral: float
    identity_residual: float
    completion_slack: float | None
    quadrature_residual: float


def continuous_interpolation_checks(
    fractional: FractionalSchedule, quadrature_points: int = 400_001
) -> list[InterpolationReport]:
    reports = []
    horizon = fractional.slot_count
    for j, levels in enumerate(fractional.cumulative):
        padded = np.concatenate([[0.0], np.maximum.accumulate(levels)])
        trapezoid = float(horizon - (0.5 * (padded[0] + padded[-1]) + padded[1:-1].sum()))
        discrete = 1.0 + float(np.sum(1.0 - padded[1:-1]))
        identity_residual = abs(trapezoid - (discrete - 0.5))
        slack = None
        if fractional.lp_completion is not None:
            slack = fractional.lp_completion[j] - 0.5 - trapezoid
        lams = (np.arange(quadrature_points) + 0.5) / quadrature_points
        inverse = _lambda_points_vector(padded, lams)
        quadrature = float(inverse.mean())
        reports.append(
            InterpolationReport(
                integral=trapezoid,
                identity_residual=identity_residual,
                completion_slack=slack,
                quadrature_residual=abs(quadrature - trapezoid),
            )
        )
    return reports


def _lambda_points_vector(levels: np.ndarray, lams: np.ndarray) -> np.ndarray:
    """Vectorized earliest time at which the progress curve reaches each
    requested fraction (same semantics as ``rounding.lambda_point``)."""
    top = levels[-1]
    lams = np.minimum(lams, top)
    ks = np.searchsorted(levels, lams, side="left")
    ks = np.clip(ks, 1, levels.size - 1)
    lo = levels[ks - 1]
    hi = levels[ks]
    rise = np.where(hi > lo, hi - lo, 1.0)
    return (ks - 1) + (lams - lo) / rise


def check_identity_on_vectors(rng: np.random.Generator, trials: int = 100, max_len: int = 40) -> float:
    """Max residual of the prefix-sum identity
    ``sum_t t*x(t) == 1 + sum_{t<T} (1 - X(t))`` over random unit vectors.
    """
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, max_len + 1))
        x = rng.random(n)
        x /= x.sum()
        prefix = np.cumsum(x)
        lhs = float(np.sum((np.arange(n) + 1) * x))
        rhs = 1.0 + float(np.sum(1.0 - prefix[:-1]))
        worst = max(worst, abs(lhs - rhs))
    return worst
