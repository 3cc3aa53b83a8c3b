"""Shortest-path routing with ECMP splitting.

Computes, for ordered vertex pairs (u, w), the fraction of a unit u->w
flow carried by each directed arc when traffic splits evenly over all
outgoing shortest-path arcs at every hop (parallel equal-cost arcs count
separately).  These fractions feed the 2-segment-routing load coefficients

    g[u,v,w](a) = d[u,v] * (F[u,w](a) + F[w,v](a))

with F[u,u] identically zero, so w == v encodes the plain one-segment route.

Fractions are exact :class:`fractions.Fraction` values by default; a float
mode exists for large instances (documented accuracy 1e-12).
"""

from __future__ import annotations

import hashlib
import heapq
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import ModelError
from .netmodel import ArcLoads, Network, TrafficMatrix


def _dijkstra(network: Network, source, reverse: bool = False) -> dict:
    """Exact integer distances from source (or to it, when reverse)."""
    dist = {source: 0}
    heap = [(0, 0, source)]
    order = {source: 0}
    counter = 1
    while heap:
        d, _, x = heapq.heappop(heap)
        if d > dist.get(x, float("inf")):
            continue
        arcs = network.in_arcs(x) if reverse else network.out_arcs(x)
        for arc in arcs:
            y = arc.tail if reverse else arc.head
            nd = d + network.arc_pairs[arc.pair].igp_weight
            if nd < dist.get(y, float("inf")):
                dist[y] = nd
                if y not in order:
                    order[y] = counter
                    counter += 1
                heapq.heappush(heap, (nd, order[y], y))
    return dist


def all_pairs_distances(network: Network) -> dict:
    """dist[x][y] for all reachable pairs (missing key = unreachable)."""
    return {v: _dijkstra(network, v) for v in network.vertices}


def _ecmp_row(network: Network, u, w, dist_from: dict, dist_to: dict, exact: bool) -> dict:
    """Per-arc fractions of a unit u->w flow; {} when unreachable or u == w.

    Vertices on the u->w shortest-path DAG are swept in increasing distance
    from u (a topological order); at each one the accumulated mass divides
    evenly over the arcs continuing a shortest path toward w.
    """
    if u == w or w not in dist_from:
        return {}
    total = dist_from[w]
    one = Fraction(1) if exact else 1.0
    on_path = [x for x, d in dist_from.items()
               if x in dist_to and d + dist_to[x] == total]
    on_path.sort(key=lambda x: dist_from[x])
    mass = {u: one}
    frac = {}
    for x in on_path:
        if x == w or x not in mass:
            continue
        nexthops = [arc for arc in network.out_arcs(x)
                    if arc.head in dist_to
                    and network.arc_pairs[arc.pair].igp_weight + dist_to[arc.head]
                    == dist_to[x]]
        share = mass[x] / len(nexthops)
        for arc in nexthops:
            frac[arc.index] = frac.get(arc.index, 0) + share
            mass[arc.head] = mass.get(arc.head, 0) + share
    return frac


def ecmp_fractions(network: Network, u, exact: bool = True) -> dict:
    """F[w][arc] for all destinations w reachable from u."""
    dist_from = _dijkstra(network, u)
    out = {}
    for w in network.vertices:
        if w == u or w not in dist_from:
            continue
        dist_to = _dijkstra(network, w, reverse=True)
        out[w] = _ecmp_row(network, u, w, dist_from, dist_to, exact)
    return out


@dataclass(frozen=True)
class SpDag:
    """Shortest-path DAG out of one source.

    ``members`` holds every directed arc lying on some shortest path from
    the source; ``splits[w][arc]`` are the per-destination ECMP fractions.
    """

    source: object
    dist: Mapping
    members: frozenset
    splits: Mapping

    def reaches(self, w) -> bool:
        return w in self.dist


def shortest_path_dag(network: Network, source, exact: bool = True) -> SpDag:
    dist_from = _dijkstra(network, source)
    members = frozenset(
        arc.index for arc in network.arcs
        if arc.tail in dist_from
        and dist_from[arc.tail] + network.arc_pairs[arc.pair].igp_weight
        == dist_from.get(arc.head))
    return SpDag(source, dist_from, members, ecmp_fractions(network, source, exact))


@dataclass
class FractionTable:
    """F[u][w][arc]: unit-flow ECMP fractions, frozen on the full topology.

    A table may be restricted at build time to the row families actually
    needed (all rows out of given sources plus all rows into given sinks);
    ``reachable``/``row`` are only meaningful inside those families.
    """

    fractions: dict
    exact: bool = True

    @classmethod
    def compute(cls, network: Network, exact: bool = True,
                sources=None, sinks=None) -> "FractionTable":
        if sources is None and sinks is None:
            row_sources = set(network.vertices)
            row_sinks = set()
        else:
            row_sources = set(sources or ())
            row_sinks = set(sinks or ())
        dist_from = {}
        dist_to = {}
        needed = set()
        for u in row_sources:
            for w in network.vertices:
                if u != w:
                    needed.add((u, w))
        for w in row_sinks:
            for u in network.vertices:
                if u != w:
                    needed.add((u, w))
        table = {}
        for u, w in sorted(needed, key=lambda p: (repr(p[0]), repr(p[1]))):
            if u not in dist_from:
                dist_from[u] = _dijkstra(network, u)
            if w not in dist_from[u]:
                continue
            if w not in dist_to:
                dist_to[w] = _dijkstra(network, w, reverse=True)
            row = _ecmp_row(network, u, w, dist_from[u], dist_to[w], exact)
            table.setdefault(u, {})[w] = row
        return cls(table, exact)

    def reachable(self, u, w) -> bool:
        return u == w or w in self.fractions.get(u, {})

    def row(self, u, w) -> Mapping:
        """Per-arc fractions for the u->w unit flow ({} when u == w)."""
        if u == w:
            return {}
        try:
            return self.fractions[u][w]
        except KeyError:
            raise ModelError(f"no shortest-path fractions for {u!r}->{w!r} "
                             "(unreachable or outside the computed rows)") from None

    def fraction(self, u, w, arc_index: int):
        return self.row(u, w).get(arc_index, 0)


def g_coefficient(tm: TrafficMatrix, table: FractionTable, u, v, w, arc_index: int) -> float:
    """Load on one arc from routing the (u, v) demand via intermediate w."""
    if not (table.reachable(u, w) and table.reachable(w, v)):
        raise ModelError(f"intermediate {w!r} unusable for {u!r}->{v!r}")
    d = tm.volume(u, v)
    return d * float(table.fraction(u, w, arc_index) + table.fraction(w, v, arc_index))


def policy_arc_loads(network: Network, tm: TrafficMatrix, policy: Mapping,
                     table: FractionTable) -> ArcLoads:
    """Total per-arc load of a 2-segment policy.

    ``policy`` maps each demand (u, v) to [(w, fraction), ...]; fractions of
    a demand must sum to 1.
    """
    loads = {}
    for (u, v), entries in policy.items():
        d = tm.volume(u, v)
        total = 0.0
        for w, x in entries:
            total += x
            if x == 0:
                continue
            if not (table.reachable(u, w) and table.reachable(w, v)):
                raise ModelError(f"policy for {u!r}->{v!r} routes via unreachable {w!r}")
            for arc, f in table.row(u, w).items():
                loads[arc] = loads.get(arc, 0.0) + d * x * float(f)
            for arc, f in table.row(w, v).items():
                loads[arc] = loads.get(arc, 0.0) + d * x * float(f)
        if entries and abs(total - 1.0) > 1e-6:
            raise ModelError(f"policy fractions for {u!r}->{v!r} sum to {total}, not 1")
    return ArcLoads(loads)


def _instance_key(network: Network) -> str:
    blob = json.dumps(
        [[repr(p.u), repr(p.v), p.igp_weight, p.oneway, list(p.port_group.capacities)]
         for p in network.arc_pairs]
        + [[repr(v)] for v in network.vertices],
        separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def save_fraction_cache(path, network: Network, table: FractionTable) -> None:
    doc = {"instance": _instance_key(network), "exact": table.exact, "rows": {}}
    for u, per_w in table.fractions.items():
        for w, row in per_w.items():
            key = f"{network.vertex_index(u)}>{network.vertex_index(w)}"
            if table.exact:
                doc["rows"][key] = {str(a): f"{f.numerator}/{f.denominator}"
                                    for a, f in row.items()}
            else:
                doc["rows"][key] = {str(a): f for a, f in row.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)


def load_fraction_cache(path, network: Network) -> FractionTable | None:
    """Cached table for this exact instance, or None on any mismatch."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, ValueError):
        return None
    if doc.get("instance") != _instance_key(network):
        return None
    exact = bool(doc.get("exact", True))
    fractions = {}
    for key, row in doc["rows"].items():
        ui, wi = key.split(">")
        u = network.vertices[int(ui)]
        w = network.vertices[int(wi)]
        if exact:
            parsed = {int(a): Fraction(f) for a, f in row.items()}
        else:
            parsed = {int(a): float(f) for a, f in row.items()}
        fractions.setdefault(u, {})[w] = parsed
    return FractionTable(fractions, exact)
