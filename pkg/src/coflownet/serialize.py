"""Versioned JSON file formats for instances, schedules, and shop inputs.

All writers emit ``"format": 1`` and sort object keys, so identical data
produces byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import (
    AMOUNT_EPS,
    Coflow,
    Edge,
    Flow,
    Instance,
    Network,
    RateSchedule,
    RoutingModel,
)

FORMAT_VERSION = 1


class FormatError(ValueError):
    """Raised when a file does not match the expected schema/version."""


def _check_version(data: dict, what: str) -> None:
    if data.get("format") != FORMAT_VERSION:
        raise FormatError(f"{what}: unsupported format {data.get('format')!r}")


# ---------------------------------------------------------------------------
# instances


def instance_to_dict(instance: Instance) -> dict:
    coflows = []
    for cf in instance.coflows:
        flows = []
        for fl in cf.flows:
            rec = {
                "src": fl.src,
                "dst": fl.dst,
                "demand": fl.demand,
                "release": fl.release,
            }
            if fl.path is not None:
                rec["path"] = list(fl.path)
            flows.append(rec)
        coflows.append({"weight": cf.weight, "flows": flows})
    return {
        "format": FORMAT_VERSION,
        "model": instance.model.value,
        "nodes": list(instance.network.nodes),
        "edges": [
            {"id": e.id, "src": e.src, "dst": e.dst, "cap": e.cap}
            for e in instance.network.edges
        ],
        "coflows": coflows,
    }


def instance_from_dict(data: dict) -> Instance:
    _check_version(data, "instance")
    try:
        model = RoutingModel(data["model"])
        network = Network(
            nodes=tuple(data["nodes"]),
            edges=tuple(
                Edge(id=e["id"], src=e["src"], dst=e["dst"], cap=float(e["cap"]))
                for e in data["edges"]
            ),
        )
        coflows = tuple(
            Coflow(
                flows=tuple(
                    Flow(
                        src=f["src"],
                        dst=f["dst"],
                        demand=float(f["demand"]),
                        release=int(f.get("release", 0)),
                        path=tuple(f["path"]) if "path" in f else None,
                    )
                    for f in cf["flows"]
                ),
                weight=float(cf["weight"]),
            )
            for cf in data["coflows"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"instance: malformed record ({exc})") from exc
    return Instance(network=network, coflows=coflows, model=model)


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_dict(instance)))


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# schedules


def _sparse(series: np.ndarray) -> list[list[float]]:
    return [[int(t) + 1, float(v)] for t, v in enumerate(series) if v > AMOUNT_EPS]


def _dense(pairs, slots: int) -> np.ndarray:
    out = np.zeros(slots)
    for t, v in pairs:
        if not 1 <= int(t) <= slots:
            raise FormatError(f"schedule: slot {t} outside 1..{slots}")
        out[int(t) - 1] = float(v)
    return out


def schedule_to_dict(schedule: RateSchedule) -> dict:
    coflows = []
    for j, flows in enumerate(schedule.amounts):
        out_flows = []
        for i, amounts in enumerate(flows):
            rec: dict = {"amounts": _sparse(amounts)}
            if schedule.edge_amounts is not None:
                rec["edge_amounts"] = {
                    eid: _sparse(series)
                    for eid, series in sorted(schedule.edge_amounts[j][i].items())
                    if np.any(series > AMOUNT_EPS)
                }
            out_flows.append(rec)
        coflows.append({"flows": out_flows})
    return {
        "format": FORMAT_VERSION,
        "slot_count": schedule.slot_count,
        "coflows": coflows,
    }


def schedule_from_dict(data: dict) -> RateSchedule:
    _check_version(data, "schedule")
    slots = int(data["slot_count"])
    amounts = []
    edge_amounts = []
    has_edges = False
    for cf in data["coflows"]:
        flow_amounts = []
        flow_edges = []
        for fl in cf["flows"]:
            flow_amounts.append(_dense(fl["amounts"], slots))
            edges = {
                eid: _dense(pairs, slots) for eid, pairs in fl.get("edge_amounts", {}).items()
            }
            has_edges = has_edges or bool(edges)
            flow_edges.append(edges)
        amounts.append(tuple(flow_amounts))
        edge_amounts.append(tuple(flow_edges))
    return RateSchedule(
        slot_count=slots,
        amounts=tuple(amounts),
        edge_amounts=tuple(edge_amounts) if has_edges else None,
    )


def save_schedule(schedule: RateSchedule, path: str | Path) -> None:
    Path(path).write_text(dumps(schedule_to_dict(schedule)))


def load_schedule(path: str | Path) -> RateSchedule:
    return schedule_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# open-shop inputs


def shop_to_dict(shop) -> dict:
    return {
        "format": FORMAT_VERSION,
        "machines": shop.machines,
        "jobs": [
            {"weight": w, "p": list(p)} for w, p in zip(shop.weights, shop.processing)
        ],
    }


def shop_from_dict(data: dict):
    from .openshop import OpenShopInstance

    _check_version(data, "shop")
    machines = int(data["machines"])
    processing = []
    weights = []
    for job in data["jobs"]:
        p = tuple(float(v) for v in job["p"])
        if len(p) != machines:
            raise FormatError("shop: job processing vector length != machines")
        processing.append(p)
        weights.append(float(job["weight"]))
    return OpenShopInstance(
        machines=machines, processing=tuple(processing), weights=tuple(weights)
    )


def load_shop(path: str | Path):
    return shop_from_dict(json.loads(Path(path).read_text()))


def dumps(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"
