"""Multicommodity flow LPs for a single fixed demand vector.

Unrestricted commodities use the edge-flow (node-arc) formulation with two
directed flow variables per undirected edge; the capacity constraint applies
to the sum of both directions.  Commodities with ``allowed_paths`` use a
path-flow formulation over exactly those paths.  Infinite-capacity edges
impose no congestion constraint.

Infeasible routings come with a metric-inequality certificate: nonnegative
edge weights ``w`` with ``sum_e w_e u_e < sum_h d_h dist_w(s(h), t(h))``,
where the distance of a path-restricted commodity is the shortest allowed
path.  Certificates are rebuilt arithmetically and checkable without any LP.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import lp
from .model import INF, Capacity, Commodity, Graph, is_finite_cap

ZERO = Fraction(0)


class FlowError(Exception):
    pass


class InfeasibleDemandError(FlowError):
    """A positive demand cannot be routed at any congestion (disconnected)."""


@dataclass(frozen=True)
class FlowSolution:
    """Per-commodity directed edge flows plus the achieved congestion.

    ``flows[h][e]`` is the pair (flow in edge direction s->t, flow t->s).
    """

    flows: tuple[tuple[tuple[Fraction, Fraction], ...], ...]
    congestion: Fraction


@dataclass(frozen=True)
class MetricCertificate:
    """Witness that a demand cannot be routed within a reservation."""

    weights: tuple[Fraction, ...]
    distances: tuple[Fraction, ...]
    reserved_side: Fraction
    demand_side: Fraction


@dataclass(frozen=True)
class RoutableResult:
    feasible: bool
    flow: FlowSolution | None
    certificate: MetricCertificate | None


def edge_loads(graph: Graph, flows: Sequence[Sequence[tuple[Fraction, Fraction]]]) -> list[Fraction]:
    loads = [ZERO] * len(graph.edges)
    for per_edge in flows:
        for e, (fwd, rev) in enumerate(per_edge):
            loads[e] += fwd + rev
    return loads


def shortest_distance(
    graph: Graph, weights: Sequence[Fraction], source: int, target: int
) -> Fraction | None:
    """Exact Dijkstra over nonnegative rational edge weights."""
    n = graph.node_count
    adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(n)]
    for e, w in zip(graph.edges, weights):
        adj[e.s].append((e.t, w))
        adj[e.t].append((e.s, w))
    dist: list[Fraction | None] = [None] * n
    done = [False] * n
    dist[source] = ZERO
    for _ in range(n):
        u = -1
        for v in range(n):
            if not done[v] and dist[v] is not None and (u < 0 or dist[v] < dist[u]):
                u = v
        if u < 0:
            break
        done[u] = True
        for v, w in adj[u]:
            cand = dist[u] + w
            if dist[v] is None or cand < dist[v]:
                dist[v] = cand
    return dist[target]


def commodity_distance(
    graph: Graph, commodity: Commodity, weights: Sequence[Fraction]
) -> Fraction | None:
    if commodity.allowed_paths is None:
        return shortest_distance(graph, weights, commodity.s, commodity.t)
    best: Fraction | None = None
    for path in commodity.allowed_paths:
        length = sum((weights[e] for e in path), ZERO)
        if best is None or length < best:
            best = length
    return best


def _path_directions(graph: Graph, commodity: Commodity, path: Sequence[int]) -> list[bool]:
    """True per edge if the path traverses it in its native s->t direction."""
    node = commodity.s
    out = []
    for ei in path:
        e = graph.edges[ei]
        if e.s == node:
            out.append(True)
            node = e.t
        else:
            out.append(False)
            node = e.s
    return out


class FlowBlock:
    """Flow variables and conservation rows for one per-commodity value vector.

    Adds to an existing builder the variables routing ``values[h]`` units for
    every commodity with a positive value (edge-flow formulation when the
    commodity is unrestricted, path-flow over ``allowed_paths`` otherwise).
    ``load_vars[e]`` lists the variables loading edge ``e``; used by callers
    to attach capacity, reservation, or congestion rows.
    """

    def __init__(
        self,
        builder: lp.LpBuilder,
        graph: Graph,
        commodities: Sequence[Commodity],
        values: Sequence[Fraction],
        tag: str = "",
    ):
        if len(values) != len(commodities):
            raise FlowError("value vector length does not match commodity count")
        if any(d < 0 for d in values):
            raise FlowError("per-commodity values must be nonnegative")
        self.graph = graph
        self.commodities = commodities
        self.values = tuple(values)
        self.active = [h for h, d in enumerate(values) if d > 0]
        self.edge_vars: dict[int, list[tuple[int, int]]] = {}
        self.path_vars: dict[int, list[int]] = {}
        m = len(graph.edges)
        self.load_vars: list[list[int]] = [[] for _ in range(m)]
        self.comm_load_vars: dict[int, list[list[int]]] = {}
        incident: list[list[tuple[int, int]]] = [[] for _ in range(graph.node_count)]
        for e, edge in enumerate(graph.edges):
            incident[edge.s].append((e, 1))
            incident[edge.t].append((e, -1))
        for h in self.active:
            c = commodities[h]
            if c.allowed_paths is None:
                cols = []
                per_edge: list[list[int]] = [[] for _ in range(m)]
                for e in range(m):
                    fwd = builder.add_var(f"{tag}f{h}e{e}+")
                    rev = builder.add_var(f"{tag}f{h}e{e}-")
                    cols.append((fwd, rev))
                    self.load_vars[e] += [fwd, rev]
                    per_edge[e] = [fwd, rev]
                self.edge_vars[h] = cols
                self.comm_load_vars[h] = per_edge
                for v in range(graph.node_count):
                    if v == c.t:
                        continue
                    coeffs: dict[int, Fraction] = {}
                    for e, orient in incident[v]:
                        fwd, rev = cols[e]
                        coeffs[fwd] = Fraction(orient)
                        coeffs[rev] = Fraction(-orient)
                    rhs = values[h] if v == c.s else ZERO
                    builder.add_row(coeffs, lp.EQ, rhs)
            else:
                cols = []
                per_edge = [[] for _ in range(m)]
                for pi, path in enumerate(c.allowed_paths):
                    var = builder.add_var(f"{tag}p{h}_{pi}")
                    cols.append(var)
                    for e in path:
                        self.load_vars[e].append(var)
                        per_edge[e].append(var)
                self.path_vars[h] = cols
                self.comm_load_vars[h] = per_edge
                builder.add_row({v: Fraction(1) for v in cols}, lp.EQ, values[h])

    def extract_flows(
        self, x: Sequence[Fraction]
    ) -> tuple[tuple[tuple[Fraction, Fraction], ...], ...]:
        m = len(self.graph.edges)
        flows = [[(ZERO, ZERO)] * m for _ in self.commodities]
        for h, cols in self.edge_vars.items():
            flows[h] = [(x[fwd], x[rev]) for fwd, rev in cols]
        for h, cols in self.path_vars.items():
            per_edge = [[ZERO, ZERO] for _ in range(m)]
            c = self.commodities[h]
            for var, path in zip(cols, c.allowed_paths or ()):
                value = x[var]
                if value == 0:
                    continue
                for ei, forward in zip(path, _path_directions(self.graph, c, path)):
                    per_edge[ei][0 if forward else 1] += value
            flows[h] = [(f, r) for f, r in per_edge]
        return tuple(tuple(row) for row in flows)


class _FlowLp:
    """Single-demand LP: congestion minimization or fixed-reservation routing."""

    def __init__(
        self,
        graph: Graph,
        commodities: Sequence[Commodity],
        demand: Sequence[Fraction],
        capacities: Sequence[Capacity],
        minimize_beta: bool,
    ):
        if len(capacities) != len(graph.edges):
            raise FlowError("capacity vector length does not match edge count")
        b = lp.LpBuilder(lp.MIN)
        self.beta: int | None = None
        if minimize_beta:
            self.beta = b.add_var("beta", objective=Fraction(1))
        self.block = FlowBlock(b, graph, commodities, demand)
        self.active = self.block.active
        self.capacity_row_of_edge: dict[int, int] = {}
        for e, cap in enumerate(capacities):
            if not is_finite_cap(cap):
                continue
            coeffs = {v: Fraction(1) for v in self.block.load_vars[e]}
            if minimize_beta:
                coeffs[self.beta] = -cap
                self.capacity_row_of_edge[e] = b.add_row(coeffs, lp.LE, ZERO)
            else:
                self.capacity_row_of_edge[e] = b.add_row(coeffs, lp.LE, cap)
        self.program = b.build()

    def extract_flows(self, x):
        return self.block.extract_flows(x)


def _first_disconnected(graph: Graph, commodities, demand) -> int | None:
    for h, d in enumerate(demand):
        if d <= 0 or commodities[h].allowed_paths is not None:
            continue
        seen = {commodities[h].s}
        stack = [commodities[h].s]
        while stack:
            v = stack.pop()
            for e in graph.edges:
                for a, bnode in ((e.s, e.t), (e.t, e.s)):
                    if a == v and bnode not in seen:
                        seen.add(bnode)
                        stack.append(bnode)
        if commodities[h].t not in seen:
            return h
    return None


def min_congestion(
    graph: Graph,
    commodities: Sequence[Commodity],
    demand: Sequence[Fraction],
    capacities: Sequence[Capacity] | None = None,
) -> tuple[Fraction, FlowSolution]:
    """Exact minimum congestion routing of one demand vector.

    ``capacities`` defaults to the graph's; passing a reservation vector
    instead evaluates congestion against that reservation.
    """
    caps = tuple(e.capacity for e in graph.edges) if capacities is None else tuple(capacities)
    model = _FlowLp(graph, commodities, demand, caps, minimize_beta=True)
    if not model.active:
        empty = tuple(tuple((ZERO, ZERO) for _ in graph.edges) for _ in commodities)
        return ZERO, FlowSolution(flows=empty, congestion=ZERO)
    res = lp.solve(model.program)
    if res.status == lp.INFEASIBLE:
        h = _first_disconnected(graph, commodities, demand)
        raise InfeasibleDemandError(
            f"commodity {h} has positive demand but its endpoints are disconnected"
            if h is not None
            else "demand cannot be routed at any congestion"
        )
    assert res.status == lp.OPTIMAL and res.x is not None
    beta = res.x[model.beta]  # type: ignore[index]
    return beta, FlowSolution(flows=model.extract_flows(res.x), congestion=beta)


def routable(
    graph: Graph,
    commodities: Sequence[Commodity],
    demand: Sequence[Fraction],
    reservation: Sequence[Capacity],
) -> RoutableResult:
    """Feasibility of routing ``demand`` within the reservation ``u``.

    Feasible: returns a routing whose congestion against ``u`` is at most 1.
    Infeasible: returns a violated metric inequality derived from the Farkas
    ray of the feasibility LP, verified arithmetically before returning.
    """
    if any(u != INF and u < 0 for u in reservation):
        raise FlowError("reservations must be nonnegative")
    model = _FlowLp(graph, commodities, demand, tuple(reservation), minimize_beta=False)
    res = lp.solve(model.program)
    if res.status == lp.OPTIMAL:
        assert res.x is not None
        flows = model.extract_flows(res.x)
        loads = edge_loads(graph, flows)
        beta = ZERO
        for e, u in enumerate(reservation):
            if is_finite_cap(u) and u > 0:
                beta = max(beta, loads[e] / u)
        return RoutableResult(feasible=True, flow=FlowSolution(flows, beta), certificate=None)
    assert res.status == lp.INFEASIBLE and res.farkas_ray is not None
    weights = [ZERO] * len(graph.edges)
    for e, row_idx in model.capacity_row_of_edge.items():
        w = res.farkas_ray[row_idx]
        weights[e] = max(w, ZERO)
    cert = build_metric_certificate(graph, commodities, demand, reservation, weights)
    if cert is None:
        raise lp.LpInternalError("derived metric certificate failed verification")
    return RoutableResult(feasible=False, flow=None, certificate=cert)


def build_metric_certificate(
    graph: Graph,
    commodities: Sequence[Commodity],
    demand: Sequence[Fraction],
    reservation: Sequence[Capacity],
    weights: Sequence[Fraction],
) -> MetricCertificate | None:
    """Assemble and verify a metric-inequality certificate from edge weights.

    Returns None when the weights do not certify infeasibility, i.e. when
    ``sum w_e u_e >= sum d_h dist_w(h)``.
    """
    if any(w < 0 for w in weights):
        return None
    reserved = ZERO
    for u, w in zip(reservation, weights):
        if w != 0:
            if not is_finite_cap(u):
                return None
            reserved += w * u
    dists = []
    demand_side = ZERO
    for h, c in enumerate(commodities):
        d = commodity_distance(graph, c, weights)
        dists.append(d if d is not None else ZERO)
        if demand[h] > 0:
            if d is None:
                return None
            demand_side += demand[h] * d
    if reserved >= demand_side:
        return None
    return MetricCertificate(
        weights=tuple(weights),
        distances=tuple(dists),
        reserved_side=reserved,
        demand_side=demand_side,
    )


def check_metric_certificate(
    graph: Graph,
    commodities: Sequence[Commodity],
    demand: Sequence[Fraction],
    reservation: Sequence[Capacity],
    cert: MetricCertificate,
) -> bool:
    """Recompute both sides of the metric inequality from scratch."""
    rebuilt = build_metric_certificate(graph, commodities, demand, reservation, cert.weights)
    return (
        rebuilt is not None
        and rebuilt.reserved_side == cert.reserved_side
        and rebuilt.demand_side == cert.demand_side
    )


def check_flow(
    graph: Graph,
    commodities: Sequence[Commodity],
    demand: Sequence[Fraction],
    solution: FlowSolution,
    capacities: Sequence[Capacity] | None = None,
) -> bool:
    """Verify conservation, nonnegativity, and the congestion bound exactly."""
    caps = tuple(e.capacity for e in graph.edges) if capacities is None else tuple(capacities)
    if len(solution.flows) != len(commodities):
        return False
    for h, c in enumerate(commodities):
        per_edge = solution.flows[h]
        if len(per_edge) != len(graph.edges):
            return False
        net = [ZERO] * graph.node_count
        for e, (fwd, rev) in zip(graph.edges, per_edge):
            if fwd < 0 or rev < 0:
                return False
            net[e.s] += fwd - rev
            net[e.t] += rev - fwd
        for v in range(graph.node_count):
            expect = demand[h] if v == c.s else (-demand[h] if v == c.t else ZERO)
            if net[v] != expect:
                return False
    loads = edge_loads(graph, solution.flows)
    for e, cap in enumerate(caps):
        if is_finite_cap(cap) and loads[e] > solution.congestion * cap:
            return False
    return True
