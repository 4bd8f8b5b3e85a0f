"""Immutable domain types for robust network design instances.

An instance couples an undirected capacitated graph, a set of commodities,
and a polyhedral demand uncertainty set given as the projection of a lifted
row system ``A d + B psi (<=|=) b`` onto the demand coordinates.

All numeric data are exact rationals (`fractions.Fraction`).  Infinite edge
capacity is the distinct sentinel :data:`INF`, never a large number; it is
excluded exactly from congestion maximization by the solvers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

INF = float("inf")

Capacity = Union[Fraction, float]  # float is only ever INF

SENSE_LE = "<="
SENSE_EQ = "="


def rat(value: Union[int, str, Fraction]) -> Fraction:
    """Parse an exact rational from an int, a Fraction, or a "p/q" string.

    Decimal notation is rejected on purpose: every interface of this package
    is exact end to end.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text or "E" in text:
            raise ValueError(f"decimal notation not accepted for rationals: {value!r}")
        if "/" in text:
            num, _, den = text.partition("/")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def rat_str(value: Fraction) -> str:
    """Canonical string form of a rational ("p/q", or "p" for integers)."""
    return str(value)


def cap_from_str(text: str) -> Capacity:
    return INF if text.strip() == "inf" else rat(text)


def cap_str(value: Capacity) -> str:
    return "inf" if value == INF else rat_str(value)


def is_finite_cap(value: Capacity) -> bool:
    return value != INF


@dataclass(frozen=True)
class Edge:
    """Undirected edge with endpoints ``s``/``t`` and a positive capacity."""

    s: int
    t: int
    capacity: Capacity


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph; parallel edges are allowed."""

    node_count: int
    edges: tuple[Edge, ...]

    def degrees(self) -> list[int]:
        deg = [0] * self.node_count
        for e in self.edges:
            deg[e.s] += 1
            deg[e.t] += 1
        return deg

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)


@dataclass(frozen=True)
class Commodity:
    """Point-to-point traffic; ``allowed_paths`` restricts routing.

    ``allowed_paths`` is either None (unrestricted fractional routing) or a
    tuple of paths, each path a tuple of edge indices forming a simple path
    from ``s`` to ``t``.
    """

    s: int
    t: int
    allowed_paths: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class PolytopeRow:
    """One row ``a . d + g . psi (<=|=) rhs`` of the lifted system."""

    a: tuple[Fraction, ...]
    g: tuple[Fraction, ...]
    sense: str
    rhs: Fraction


@dataclass(frozen=True)
class DemandPolytope:
    """Demand uncertainty set as projection of a lifted polytope.

    The lifted polytope lives over ``demand_dim + aux_dim`` coordinates; the
    demand set is its projection onto the first ``demand_dim`` coordinates.
    ``vertex_hints``, when present, lists exactly the demand projections of
    the lifted polytope's vertices (sorted lexicographically, deduplicated).
    """

    demand_dim: int
    aux_dim: int
    rows: tuple[PolytopeRow, ...]
    vertex_hints: tuple[tuple[Fraction, ...], ...] | None = None

    @property
    def lifted_dim(self) -> int:
        return self.demand_dim + self.aux_dim


@dataclass(frozen=True, eq=False)
class Instance:
    """A robust network design instance (graph, commodities, demand set).

    ``meta`` holds free-form JSON-native tags (generator parameters, naming
    tables); it never influences solving.  Instances are immutable after
    construction and safe to share across concurrent solver calls.
    """

    graph: Graph
    commodities: tuple[Commodity, ...]
    polytope: DemandPolytope
    meta: Mapping[str, object] = field(default_factory=dict)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.graph == other.graph
            and self.commodities == other.commodities
            and self.polytope == other.polytope
            and dict(self.meta) == dict(other.meta)
        )


# ---------------------------------------------------------------------------
# JSON interchange
#
# Rationals are strings "p/q" (integers may drop the "/q"); infinite capacity
# is the string "inf".  This format is shared by every CLI subcommand.
# ---------------------------------------------------------------------------


def graph_to_obj(graph: Graph) -> dict:
    return {
        "node_count": graph.node_count,
        "edges": [{"s": e.s, "t": e.t, "capacity": cap_str(e.capacity)} for e in graph.edges],
    }


def graph_from_obj(obj: Mapping) -> Graph:
    edges = tuple(
        Edge(int(e["s"]), int(e["t"]), cap_from_str(str(e["capacity"]))) for e in obj["edges"]
    )
    return Graph(node_count=int(obj["node_count"]), edges=edges)


def commodity_to_obj(c: Commodity) -> dict:
    return {
        "s": c.s,
        "t": c.t,
        "allowed_paths": None if c.allowed_paths is None else [list(p) for p in c.allowed_paths],
    }


def commodity_from_obj(obj: Mapping) -> Commodity:
    paths = obj.get("allowed_paths")
    return Commodity(
        s=int(obj["s"]),
        t=int(obj["t"]),
        allowed_paths=None if paths is None else tuple(tuple(int(i) for i in p) for p in paths),
    )


def polytope_to_obj(p: DemandPolytope) -> dict:
    return {
        "demand_dim": p.demand_dim,
        "aux_dim": p.aux_dim,
        "rows": [
            {
                "a": [rat_str(x) for x in row.a],
                "g": [rat_str(x) for x in row.g],
                "sense": row.sense,
                "rhs": rat_str(row.rhs),
            }
            for row in p.rows
        ],
        "vertex_hints": None
        if p.vertex_hints is None
        else [[rat_str(x) for x in v] for v in p.vertex_hints],
    }


def polytope_from_obj(obj: Mapping) -> DemandPolytope:
    rows = tuple(
        PolytopeRow(
            a=tuple(rat(x) for x in row["a"]),
            g=tuple(rat(x) for x in row["g"]),
            sense=str(row["sense"]),
            rhs=rat(row["rhs"]),
        )
        for row in obj["rows"]
    )
    hints = obj.get("vertex_hints")
    return DemandPolytope(
        demand_dim=int(obj["demand_dim"]),
        aux_dim=int(obj["aux_dim"]),
        rows=rows,
        vertex_hints=None if hints is None else tuple(tuple(rat(x) for x in v) for v in hints),
    )


def instance_to_obj(instance: Instance) -> dict:
    return {
        "graph": graph_to_obj(instance.graph),
        "commodities": [commodity_to_obj(c) for c in instance.commodities],
        "polytope": polytope_to_obj(instance.polytope),
        "meta": dict(instance.meta),
    }


def instance_from_obj(obj: Mapping) -> Instance:
    return Instance(
        graph=graph_from_obj(obj["graph"]),
        commodities=tuple(commodity_from_obj(c) for c in obj["commodities"]),
        polytope=polytope_from_obj(obj["polytope"]),
        meta=dict(obj.get("meta", {})),
    )


def instance_to_json(instance: Instance, indent: int | None = 2) -> str:
    return json.dumps(instance_to_obj(instance), indent=indent, sort_keys=True)


def instance_from_json(text: str) -> Instance:
    return instance_from_obj(json.loads(text))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _path_is_simple(graph: Graph, c: Commodity, path: Sequence[int]) -> bool:
    if not path:
        return False
    node = c.s
    visited = {node}
    for ei in path:
        if not (0 <= ei < len(graph.edges)):
            return False
        e = graph.edges[ei]
        if e.s == node:
            node = e.t
        elif e.t == node:
            node = e.s
        else:
            return False
        if node in visited:
            return False
        visited.add(node)
    return node == c.t


def validate(instance: Instance) -> list[str]:
    """Check all type invariants; returns a list of violation descriptions.

    An empty list means the instance is well formed.  Violations are data,
    not failures: the function never raises on bad instances.  Boundedness
    and nonnegativity of the lifted polytope are established by solving
    ``2 * (demand_dim + aux_dim)`` exact LPs (max/min of each coordinate).
    """
    from . import polytope as _ptools

    out: list[str] = []
    g = instance.graph
    if g.node_count < 1:
        out.append("graph has no nodes")
    for i, e in enumerate(g.edges):
        if not (0 <= e.s < g.node_count and 0 <= e.t < g.node_count):
            out.append(f"edge {i} endpoints out of range")
        elif e.s == e.t:
            out.append(f"edge {i} is a self-loop")
        if e.capacity != INF and not (isinstance(e.capacity, Fraction) and e.capacity > 0):
            out.append(f"edge {i} capacity not positive")

    for i, c in enumerate(instance.commodities):
        if not (0 <= c.s < g.node_count and 0 <= c.t < g.node_count):
            out.append(f"commodity {i} endpoints out of range")
            continue
        if c.s == c.t:
            out.append(f"degenerate commodity {i}")
        if c.allowed_paths is not None:
            if len(c.allowed_paths) == 0:
                out.append(f"commodity {i} has an empty allowed-path list")
            for j, path in enumerate(c.allowed_paths):
                if not _path_is_simple(g, c, path):
                    out.append(f"commodity {i} path {j} is not a simple s-t path")

    p = instance.polytope
    if p.demand_dim != len(instance.commodities):
        out.append(
            f"demand dimension {p.demand_dim} != commodity count {len(instance.commodities)}"
        )
    rows_ok = True
    for i, row in enumerate(p.rows):
        if len(row.a) != p.demand_dim or len(row.g) != p.aux_dim:
            out.append(f"polytope row {i} has inconsistent dimensions")
            rows_ok = False
        if row.sense not in (SENSE_LE, SENSE_EQ):
            out.append(f"polytope row {i} has unknown sense {row.sense!r}")
            rows_ok = False
    if not rows_ok:
        return out

    if not _ptools.is_nonempty(p):
        out.append("lifted polytope empty")
        return out

    for idx in range(p.lifted_dim):
        name = f"d_{idx}" if idx < p.demand_dim else f"psi_{idx - p.demand_dim}"
        lo, hi = _ptools.coordinate_range(p, idx)
        if hi is None:
            out.append(f"coordinate {name} unbounded")
        if lo is None:
            out.append(f"coordinate {name} unbounded below")
        elif lo < 0:
            out.append(f"coordinate {name} not bounded below by 0")

    if p.vertex_hints is not None:
        for i, hint in enumerate(p.vertex_hints):
            if len(hint) != p.demand_dim:
                out.append(f"vertex hint {i} has wrong dimension")
            elif not _ptools.contains(p, hint):
                out.append(f"vertex hint {i} outside the demand polytope")

    return out


def zero_demand(instance: Instance) -> tuple[Fraction, ...]:
    return tuple(Fraction(0) for _ in instance.commodities)


def format_vector(v: Iterable[Fraction]) -> list[str]:
    return [rat_str(x) for x in v]
