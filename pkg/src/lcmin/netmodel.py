"""Core domain types: networks of duplex port groups, traffic, utilization.

A physical link between two routers is one :class:`ArcPair`: a bundle of
parallel ports whose activation is shared by both directed arcs.  Activating
port ``p`` of a pair means one physical port at each endpoint, so a vertex's
port count is the sum of active ports over its incident pairs, and the
capacity of either direction is the sum of active port capacities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import InfeasibleStateError, ModelError


class Arc(NamedTuple):
    """One directed arc of an arc pair (``forward`` is tail==pair.u)."""

    index: int
    pair: int
    tail: object
    head: object
    forward: bool


@dataclass(frozen=True)
class PortGroup:
    """Parallel ports of one duplex link; one activation slot per port."""

    capacities: tuple

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(float(c) for c in self.capacities))
        if not self.capacities:
            raise ModelError("port group must contain at least one port")
        if any(c <= 0 or not math.isfinite(c) for c in self.capacities):
            raise ModelError("port capacities must be positive and finite")

    def __len__(self):
        return len(self.capacities)

    @property
    def uniform(self) -> bool:
        return len(set(self.capacities)) == 1

    @property
    def total_capacity(self) -> float:
        return sum(self.capacities)


@dataclass(frozen=True)
class ArcPair:
    """Duplex link u<->v. ``oneway`` restricts traffic to the u->v direction.

    Both directions always share the one port group (symmetric capacity);
    ``oneway`` exists for DAG-style instances where the reverse direction
    carries no traffic at all.
    """

    u: object
    v: object
    port_group: PortGroup
    igp_weight: int = 1
    oneway: bool = False

    def __post_init__(self):
        if self.u == self.v:
            raise ModelError(f"arc pair endpoints must differ, got {self.u!r} twice")

    @property
    def ports(self) -> tuple:
        return self.port_group.capacities


class Network:
    """Immutable directed multigraph of routers joined by arc pairs."""

    def __init__(self, vertices: Iterable, arc_pairs: Iterable[ArcPair],
                 customer_ports: Mapping | None = None):
        self.vertices = tuple(vertices)
        self.arc_pairs = tuple(arc_pairs)
        self.customer_ports = dict(customer_ports or {})
        self._vertex_index = {v: i for i, v in enumerate(self.vertices)}
        if len(self._vertex_index) != len(self.vertices):
            raise ModelError("duplicate vertex ids")

        arcs = []
        for pid, pair in enumerate(self.arc_pairs):
            arcs.append(Arc(len(arcs), pid, pair.u, pair.v, True))
            if not pair.oneway:
                arcs.append(Arc(len(arcs), pid, pair.v, pair.u, False))
        self.arcs = tuple(arcs)

        self._out = {v: [] for v in self.vertices}
        self._in = {v: [] for v in self.vertices}
        self._incident_pairs = {v: [] for v in self.vertices}
        for arc in self.arcs:
            if arc.tail in self._out:
                self._out[arc.tail].append(arc)
            if arc.head in self._in:
                self._in[arc.head].append(arc)
        for pid, pair in enumerate(self.arc_pairs):
            if pair.u in self._incident_pairs:
                self._incident_pairs[pair.u].append(pid)
            if pair.v in self._incident_pairs:
                self._incident_pairs[pair.v].append(pid)

    def vertex_index(self, v) -> int:
        return self._vertex_index[v]

    def has_vertex(self, v) -> bool:
        return v in self._vertex_index

    def out_arcs(self, v) -> Sequence[Arc]:
        return self._out[v]

    def in_arcs(self, v) -> Sequence[Arc]:
        return self._in[v]

    def incident_pairs(self, v) -> Sequence[int]:
        """Indices of arc pairs touching vertex v."""
        return self._incident_pairs[v]

    def backbone_ports(self, v) -> int:
        """Total backbone port slots at v (one per port per incident pair)."""
        return sum(len(self.arc_pairs[p].port_group) for p in self._incident_pairs[v])

    def full_masks(self) -> dict:
        """All-ports-active masks, keyed by arc pair index."""
        return {pid: (1,) * len(pair.port_group) for pid, pair in enumerate(self.arc_pairs)}

    def __repr__(self):
        return (f"Network({len(self.vertices)} vertices, {len(self.arc_pairs)} pairs, "
                f"{len(self.arcs)} arcs)")


@dataclass(frozen=True)
class TrafficMatrix:
    """Demands d[x, y] >= 0 between ordered, distinct router pairs."""

    demands: Mapping

    def __post_init__(self):
        clean = {}
        for (x, y), d in dict(self.demands).items():
            d = float(d)
            if x == y:
                raise ModelError(f"self-demand {x!r}->{y!r} not allowed")
            if d < 0 or not math.isfinite(d):
                raise ModelError(f"demand {x!r}->{y!r} must be finite and >= 0, got {d}")
            if d > 0:
                clean[(x, y)] = d
        object.__setattr__(self, "demands", clean)

    def pairs(self):
        """Nonzero demand entries as ((x, y), volume)."""
        return self.demands.items()

    def volume(self, x, y) -> float:
        return self.demands.get((x, y), 0.0)

    def total(self) -> float:
        return sum(self.demands.values())

    def sources(self):
        return sorted({x for (x, _y) in self.demands}, key=repr)


@dataclass(frozen=True)
class LinecardConfig:
    """Ports per linecard."""

    k: int = 8

    def __post_init__(self):
        if self.k < 1:
            raise ModelError("linecard size k must be >= 1")


@dataclass
class ArcLoads:
    """Total routed volume per directed arc index."""

    loads: dict = field(default_factory=dict)

    def __post_init__(self):
        for a, f in self.loads.items():
            if f < -1e-9:
                raise ModelError(f"negative load {f} on arc {a}")
        self.loads = {a: max(0.0, float(f)) for a, f in self.loads.items()}

    def get(self, arc_index: int) -> float:
        return self.loads.get(arc_index, 0.0)

    def items(self):
        return self.loads.items()


def _check_mask(pair: ArcPair, mask: Sequence) -> tuple:
    mask = tuple(1 if bool(b) else 0 for b in mask)
    if len(mask) != len(pair.port_group):
        raise ModelError(
            f"mask length {len(mask)} != port count {len(pair.port_group)}")
    return mask


def arc_capacity(network: Network, pair: ArcPair | int, active_port_mask: Sequence) -> float:
    """Capacity of either direction of a pair under the given activation mask."""
    if isinstance(pair, int):
        pair = network.arc_pairs[pair]
    mask = _check_mask(pair, active_port_mask)
    return sum(c for c, b in zip(pair.port_group.capacities, mask) if b)


def vertex_active_linecards(network: Network, vertex,
                            active_port_masks: Mapping, k: int) -> int:
    """ceil(active backbone ports at vertex / k), reconfigurable mapping.

    ``active_port_masks`` must cover exactly the arc pairs incident to the
    vertex (keyed by pair index); extra or missing pairs are model errors.
    """
    incident = set(network.incident_pairs(vertex))
    given = set(active_port_masks)
    if given != incident:
        raise ModelError(
            f"masks for vertex {vertex!r} cover pairs {sorted(given)}, "
            f"expected {sorted(incident)}")
    active = 0
    for pid in incident:
        active += sum(_check_mask(network.arc_pairs[pid], active_port_masks[pid]))
    return -(-active // k) if k else 0


def active_linecards(network: Network, active_port_masks: Mapping, k: int) -> int:
    """Network-wide active linecard count for full per-pair masks."""
    total = 0
    for v in network.vertices:
        masks = {pid: active_port_masks[pid] for pid in network.incident_pairs(v)}
        total += vertex_active_linecards(network, v, masks, k)
    return total


def mlu(network: Network, arc_loads: ArcLoads, active_port_masks: Mapping) -> float:
    """Max over directed arcs of load / active capacity.

    Arcs with zero load and zero active capacity are skipped; positive load
    on a dead arc is an infeasible state.
    """
    worst = 0.0
    for arc in network.arcs:
        load = arc_loads.get(arc.index)
        cap = arc_capacity(network, arc.pair, active_port_masks[arc.pair])
        if cap <= 0.0:
            if load > 1e-9:
                raise InfeasibleStateError(
                    f"load {load} on arc {arc.tail!r}->{arc.head!r} with no active capacity")
            continue
        worst = max(worst, load / cap)
    return worst


def validate_network(network: Network) -> list:
    """All invariant violations as human-readable strings; [] when sound."""
    violations = []
    seen = set(network.vertices)
    for pid, pair in enumerate(network.arc_pairs):
        if pair.u not in seen or pair.v not in seen:
            violations.append(f"pair {pid}: dangling endpoint {pair.u!r}-{pair.v!r}")
        if pair.igp_weight <= 0 or int(pair.igp_weight) != pair.igp_weight:
            violations.append(f"pair {pid}: IGP weight must be a positive integer, "
                              f"got {pair.igp_weight!r}")
        # PortGroup construction already rejects nonpositive capacities;
        # re-check here so hand-built groups cannot sneak by.
        if any(c <= 0 for c in pair.port_group.capacities):
            violations.append(f"pair {pid}: nonpositive port capacity")
    for v, n in network.customer_ports.items():
        if v not in seen:
            violations.append(f"customer ports on unknown vertex {v!r}")
        if n < 0:
            violations.append(f"negative customer port count on {v!r}")
    return violations
