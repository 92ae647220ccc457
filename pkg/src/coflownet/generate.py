"""Instance generation: WAN-style topology presets, random workloads, and
a small hand-built demo instance with known optima for both models.

Generation is deterministic per seed; writing the same config twice
produces byte-identical instance files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphs import reachable_from, sample_shortest_path
from .model import Coflow, Edge, Flow, Instance, Network, RateSchedule, RoutingModel

#: Five sites, seven bidirectional inter-site links.
_SWAN_LIKE_LINKS = (
    ("dc1", "dc2"), ("dc1", "dc3"), ("dc2", "dc3"), ("dc2", "dc4"),
    ("dc3", "dc5"), ("dc4", "dc5"), ("dc1", "dc4"),
)

#: Twelve sites, nineteen bidirectional links (ring plus chords).
_GSCALE_LIKE_LINKS = (
    ("dc1", "dc2"), ("dc2", "dc3"), ("dc3", "dc4"), ("dc4", "dc5"),
    ("dc5", "dc6"), ("dc6", "dc7"), ("dc7", "dc8"), ("dc8", "dc9"),
    ("dc9", "dc10"), ("dc10", "dc11"), ("dc11", "dc12"), ("dc12", "dc1"),
    ("dc1", "dc4"), ("dc2", "dc7"), ("dc3", "dc9"), ("dc5", "dc11"),
    ("dc6", "dc10"), ("dc8", "dc12"), ("dc4", "dc8"),
)

TOPOLOGIES = ("swan-like", "gscale-like", "ring", "random")


def _bidirected(links, cap: float) -> Network:
    nodes: list[str] = []
    for u, v in links:
        for n in (u, v):
            if n not in nodes:
                nodes.append(n)
    edges = []
    for u, v in links:
        edges.append(Edge(id=f"{u}-{v}", src=u, dst=v, cap=cap))
        edges.append(Edge(id=f"{v}-{u}", src=v, dst=u, cap=cap))
    return Network(nodes=tuple(nodes), edges=tuple(edges))


def swan_like(cap: float = 1.0) -> Network:
    return _bidirected(_SWAN_LIKE_LINKS, cap)


def gscale_like(cap: float = 1.0) -> Network:
    return _bidirected(_GSCALE_LIKE_LINKS, cap)


def ring(n_nodes: int, cap: float = 1.0) -> Network:
    if n_nodes < 3:
        raise ValueError("a ring needs at least 3 nodes")
    links = [(f"n{k + 1}", f"n{(k + 1) % n_nodes + 1}") for k in range(n_nodes)]
    return _bidirected(links, cap)


def random_topology(rng: np.random.Generator, n_nodes: int, n_links: int, cap: float = 1.0) -> Network:
    """Connected random bidirected topology: a random spanning tree plus
    uniformly sampled extra links."""
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    min_links = n_nodes - 1
    if n_links < min_links:
        raise ValueError(f"{n_links} links cannot connect {n_nodes} nodes")
    names = [f"n{k + 1}" for k in range(n_nodes)]
    links: set[tuple[str, str]] = set()
    order = rng.permutation(n_nodes)
    for a, b in zip(order, order[1:]):
        u, v = sorted((names[a], names[b]))
        links.add((u, v))
    pairs = [(names[a], names[b]) for a in range(n_nodes) for b in range(a + 1, n_nodes)]
    while len(links) < min(n_links, len(pairs)):
        u, v = pairs[int(rng.integers(0, len(pairs)))]
        links.add((u, v))
    return _bidirected(sorted(links), cap)


@dataclass(frozen=True)
class GenConfig:
    """Workload generator knobs. ``slot_length`` scales link capacities
    (data per slot = rate * slot length); releases come from exponential
    inter-arrivals with the given mean, 0 meaning everything is released
    at the start."""

    topology: str = "swan-like"
    model: RoutingModel = RoutingModel.SINGLE_PATH
    jobs: int = 10
    flows_per_job: tuple[int, int] = (1, 3)
    demand_range: tuple[float, float] = (0.5, 3.0)
    weight_range: tuple[float, float] = (1.0, 100.0)
    release_mean: float = 0.0
    slot_length: float = 1.0
    nodes: int = 8
    links: int = 12
    cap: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.jobs < 1:
            raise ValueError("need at least one job")
        if self.weight_range[0] <= 0 or self.weight_range[1] < self.weight_range[0]:
            raise ValueError("weight range must be positive and ordered")
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"unknown topology {self.topology!r} (one of {TOPOLOGIES})")


def build_topology(config: GenConfig, rng: np.random.Generator) -> Network:
    cap = config.cap * config.slot_length
    if config.topology == "swan-like":
        return swan_like(cap)
    if config.topology == "gscale-like":
        return gscale_like(cap)
    if config.topology == "ring":
        return ring(config.nodes, cap)
    return random_topology(rng, config.nodes, config.links, cap)


def generate_instance(config: GenConfig) -> Instance:
    """Deterministic random instance for ``config``.

    Random topologies are resampled (bounded attempts) until every drawn
    endpoint pair is routable.
    """
    rng = np.random.default_rng(config.seed)
    for _ in range(100):
        network = build_topology(config, rng)
        instance = _draw_jobs(config, network, rng)
        if instance is not None:
            return instance
        if config.topology != "random":
            raise ValueError(f"{config.topology} topology left endpoints unroutable")
    raise ValueError("failed to draw a routable topology in 100 attempts")


def _draw_jobs(config: GenConfig, network: Network, rng: np.random.Generator) -> Instance | None:
    nodes = list(network.nodes)
    reach = {v: reachable_from(network, v) for v in nodes}
    coflows = []
    arrival = 0.0
    for _ in range(config.jobs):
        if config.release_mean > 0:
            arrival += rng.exponential(config.release_mean)
        release = int(math.ceil(arrival))
        n_flows = int(rng.integers(config.flows_per_job[0], config.flows_per_job[1] + 1))
        flows = []
        for _ in range(n_flows):
            src, dst = (nodes[k] for k in rng.choice(len(nodes), size=2, replace=False))
            if dst not in reach[src]:
                return None  # unroutable pair: caller regenerates the edge set
            demand = float(rng.uniform(*config.demand_range))
            path = None
            if config.model is RoutingModel.SINGLE_PATH:
                path = sample_shortest_path(network, src, dst, rng)
            flows.append(Flow(src=src, dst=dst, demand=demand, release=release, path=path))
        weight = float(rng.uniform(*config.weight_range))
        coflows.append(Coflow(flows=tuple(flows), weight=weight))
    return Instance(network=network, coflows=tuple(coflows), model=config.model)


# ---------------------------------------------------------------------------
# the hand-built demo instance


def demo_network() -> Network:
    """Five-node relay: source ``s`` and sink ``t`` joined through relays
    ``v1..v3`` by unit-capacity bidirected edges."""
    links = [("s", "v1"), ("s", "v2"), ("s", "v3"), ("v1", "t"), ("v2", "t"), ("v3", "t")]
    return _bidirected(links, 1.0)


def demo_instance(model: RoutingModel) -> Instance:
    """Four unit-weight coflows on the relay network: three unit demands
    from the relays to ``t`` plus one demand of 3 from ``s`` to ``t``.

    With single-path routing the big flow is pinned through ``v2`` and
    shares an edge with the ``v2`` unit flow; the best schedule then
    costs 7. With free-path routing the big flow can fan out over all
    three relays in one slot and the optimum drops to 5.
    """
    paths = {
        "red": ("v1-t",),
        "green": ("v2-t",),
        "orange": ("v3-t",),
        "blue": ("s-v2", "v2-t"),
    }
    single = model is RoutingModel.SINGLE_PATH
    coflows = (
        Coflow((Flow("v1", "t", 1.0, 0, paths["red"] if single else None),), 1.0),
        Coflow((Flow("v2", "t", 1.0, 0, paths["green"] if single else None),), 1.0),
        Coflow((Flow("v3", "t", 1.0, 0, paths["orange"] if single else None),), 1.0),
        Coflow((Flow("s", "t", 3.0, 0, paths["blue"] if single else None),), 1.0),
    )
    return Instance(network=demo_network(), coflows=coflows, model=model)


def demo_optimal_schedule(model: RoutingModel) -> RateSchedule:
    """A hand-checked optimal schedule for :func:`demo_instance`.

    Single path: the three unit flows go in slot 1; the big flow needs
    its shared edge alone, so it runs in slots 2-4 (objective 7). Free
    path: unit flows in slot 1, the big flow splits over all three
    relays in slot 2 (objective 5).
    """
    if model is RoutingModel.SINGLE_PATH:
        third = np.array([0.0, 1 / 3, 1 / 3, 1 / 3])
        one = np.array([1.0, 0.0, 0.0, 0.0])
        return RateSchedule(
            slot_count=4,
            amounts=((one,), (one,), (one,), (third,)),
            edge_amounts=None,
        )
    one = np.array([1.0, 0.0])
    blue = np.array([0.0, 1.0])
    split = np.array([0.0, 1 / 3])
    return RateSchedule(
        slot_count=2,
        amounts=((one,), (one,), (one,), (blue,)),
        edge_amounts=(
            ({"v1-t": one},),
            ({"v2-t": one},),
            ({"v3-t": one},),
            (
                {
                    "s-v1": split, "v1-t": split,
                    "s-v2": split, "v2-t": split,
                    "s-v3": split, "v3-t": split,
                },
            ),
        ),
    )
