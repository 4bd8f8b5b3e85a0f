"""Generators mapping 3-SAT formulas to robust network design instances.

Three gadget families plus a hose-model generator:

* ``gen_gamma1``: per clause a chain of three unit-capacity edges between a
  shared source and sink, one commodity per edge plus one source-sink
  commodity; demands are tied to literal indicator variables.
* ``gen_recursive``: level ``gamma`` gadget obtained by substituting every
  edge of the level-1 gadget with a fresh copy of the level ``gamma - 1``
  gadget, demand blocks scaled by the corresponding literal indicator.
* ``gen_two_path``: the two-allowed-paths variant with a shortcut edge of
  capacity ``m * rho`` and per-clause unit commodities pinned to two paths.
* ``gen_hose``: symmetric hose uncertainty on a user graph.

Naming scheme (stored under ``meta``): level-1 nodes are ``s1``, ``t1``,
``c{i}a``, ``c{i}b``; a level-``g`` copy on clause ``i`` position ``j``
prefixes inner names with ``g{g}.e{i}.{j}/``.  All indices in names are
1-based; all ids in data are 0-based.  Instances are reproducible byte for
byte: identical inputs give identical JSON.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import (
    INF,
    Commodity,
    DemandPolytope,
    Edge,
    Graph,
    Instance,
    PolytopeRow,
    SENSE_EQ,
    SENSE_LE,
    rat_str,
)

ZERO = Fraction(0)
ONE = Fraction(1)

VAL_VAR_LIMIT = 24
DEFAULT_HINT_BUDGET = 20_000


class GadgetError(Exception):
    pass


class DimacsError(GadgetError):
    """DIMACS syntax or clause-arity error; carries a line number."""


class VariableLimitError(GadgetError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    """3-SAT formula: exactly three (possibly repeated) literals per clause."""

    variable_count: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.variable_count < 1:
            raise ValueError("formula must declare at least one variable")
        if len(self.clauses) < 1:
            raise ValueError("formula must have at least one clause")
        for ci, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise ValueError(f"clause {ci} must have exactly 3 literals")
            for lit in clause:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise ValueError(f"clause {ci} references undeclared variable {lit}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF; clauses with other than 3 literals are rejected."""
    variable_count = None
    declared_clauses = None
    clauses: list[tuple[int, int, int]] = []
    pending: list[int] = []
    pending_line = 0
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {ln}: malformed problem line {line!r}")
            variable_count, declared_clauses = int(parts[2]), int(parts[3])
            continue
        if variable_count is None:
            raise DimacsError(f"line {ln}: clause before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError as exc:
                raise DimacsError(f"line {ln}: bad token {tok!r}") from exc
            if lit == 0:
                if len(pending) != 3:
                    raise DimacsError(
                        f"line {ln}: clause has {len(pending)} literals, expected exactly 3"
                    )
                clauses.append((pending[0], pending[1], pending[2]))
                pending = []
            else:
                if not pending:
                    pending_line = ln
                if abs(lit) > variable_count:
                    raise DimacsError(f"line {ln}: literal {lit} out of declared range")
                pending.append(lit)
    if pending:
        raise DimacsError(f"line {pending_line}: unterminated clause")
    if variable_count is None:
        raise DimacsError("line 0: missing problem line")
    if declared_clauses is not None and declared_clauses != len(clauses):
        raise DimacsError(
            f"line 0: header declares {declared_clauses} clauses, found {len(clauses)}"
        )
    return CnfFormula(variable_count=variable_count, clauses=tuple(clauses))


def literal_true(lit: int, assignment: int) -> bool:
    bit = (assignment >> (abs(lit) - 1)) & 1
    return bool(bit) if lit > 0 else not bit


def satisfied_clauses(phi: CnfFormula, assignment: int) -> int:
    return sum(1 for cl in phi.clauses if any(literal_true(l, assignment) for l in cl))


def satisfying_assignment(phi: CnfFormula) -> int | None:
    """Smallest satisfying assignment bitmask, or None."""
    if phi.variable_count > VAL_VAR_LIMIT:
        raise VariableLimitError(f"brute force capped at {VAL_VAR_LIMIT} variables")
    m = phi.num_clauses
    for a in range(1 << phi.variable_count):
        if satisfied_clauses(phi, a) == m:
            return a
    return None


def compute_val(phi: CnfFormula) -> Fraction:
    """Exact maximum fraction of simultaneously satisfiable clauses."""
    if phi.variable_count > VAL_VAR_LIMIT:
        raise VariableLimitError(f"brute force capped at {VAL_VAR_LIMIT} variables")
    best = max(satisfied_clauses(phi, a) for a in range(1 << phi.variable_count))
    return Fraction(best, phi.num_clauses)


def _aux_index(lit: int) -> int:
    """Indicator layout: variable k occupies slots 2(k-1) (positive literal)
    and 2(k-1)+1 (negated literal)."""
    return 2 * (abs(lit) - 1) + (0 if lit > 0 else 1)


def _literal_names(r: int) -> list[str]:
    out = []
    for k in range(1, r + 1):
        out.append(f"x{k}")
        out.append(f"!x{k}")
    return out


def _check_rho(rho: Fraction) -> None:
    if not (0 < rho < 1):
        raise GadgetError("rho must lie strictly between 0 and 1")


# ---------------------------------------------------------------------------
# Level-1 gadget
# ---------------------------------------------------------------------------


def gen_gamma1(phi: CnfFormula, rho: Fraction, hint_budget: int = DEFAULT_HINT_BUDGET) -> Instance:
    """Level-1 gadget: one 3-edge chain per clause between shared ``s1``/``t1``.

    Demand coordinates: slot (i, j) at index ``3 i + j`` (0-based), then the
    source-sink commodity last.  Auxiliary coordinates are the 2r literal
    indicators.  Vertex hints enumerate every truth assignment crossed with
    the source-sink demand at 0 or its upper bound.
    """
    _check_rho(rho)
    m, r = phi.num_clauses, phi.variable_count
    edges = []
    node_names = ["s1", "t1"]
    edge_names = []
    commodities = []
    commodity_names = []
    for i in range(m):
        a, b = 2 + 2 * i, 3 + 2 * i
        node_names += [f"c{i + 1}a", f"c{i + 1}b"]
        for j, (u, v) in enumerate(((0, a), (a, b), (b, 1))):
            edges.append(Edge(u, v, ONE))
            edge_names.append(f"e{i + 1}.{j + 1}")
            commodities.append(Commodity(u, v))
            commodity_names.append(f"h{i + 1}.{j + 1}")
    commodities.append(Commodity(0, 1))
    commodity_names.append("h0")
    graph = Graph(node_count=2 + 2 * m, edges=tuple(edges))

    demand_dim = 3 * m + 1
    aux_dim = 2 * r
    h0 = 3 * m
    h0_bound = m * (1 - rho)
    rows: list[PolytopeRow] = []

    def row(a_pairs, g_pairs, sense, rhs):
        a = [ZERO] * demand_dim
        g = [ZERO] * aux_dim
        for idx, v in a_pairs:
            a[idx] = v
        for idx, v in g_pairs:
            g[idx] = v
        rows.append(PolytopeRow(tuple(a), tuple(g), sense, rhs))

    row([(h0, ONE)], [], SENSE_LE, h0_bound)
    row([(h0, -ONE)], [], SENSE_LE, ZERO)
    for s in range(3 * m):
        row([(s, -ONE)], [], SENSE_LE, ZERO)
    for s in range(3 * m):
        row([(s, ONE)], [], SENSE_LE, ONE)
    for l in range(aux_dim):
        row([], [(l, -ONE)], SENSE_LE, ZERO)
    for l in range(aux_dim):
        row([], [(l, ONE)], SENSE_LE, ONE)
    for k in range(r):
        row([], [(2 * k, ONE), (2 * k + 1, ONE)], SENSE_EQ, ONE)
    for i in range(m):
        for j in range(3):
            row([(3 * i + j, ONE)], [(_aux_index(phi.clauses[i][j]), -ONE)], SENSE_EQ, ZERO)

    hints = None
    if 2 * (1 << r) <= hint_budget:
        seen = set()
        for a in range(1 << r):
            base = [ONE if literal_true(phi.clauses[i][j], a) else ZERO for i in range(m) for j in range(3)]
            for h0v in (ZERO, h0_bound):
                seen.add(tuple(base) + (h0v,))
        hints = tuple(sorted(seen))

    polytope = DemandPolytope(demand_dim, aux_dim, tuple(rows), hints)
    meta = {
        "family": "gamma",
        "gamma": 1,
        "m": m,
        "r": r,
        "rho": rat_str(rho),
        "node_names": node_names,
        "edge_names": edge_names,
        "commodity_names": commodity_names,
        "aux_names": _literal_names(r),
    }
    if hints is None:
        meta["vertex_hints_omitted"] = 2 * (1 << r)
    return Instance(graph=graph, commodities=tuple(commodities), polytope=polytope, meta=meta)


# ---------------------------------------------------------------------------
# Recursive gadget
# ---------------------------------------------------------------------------


def copy_node_base(m: int, prev_nodes: int, copy_idx: int) -> int:
    """First fresh node id of copy ``copy_idx`` (copies in clause-major order)."""
    return 2 + 2 * m + copy_idx * (prev_nodes - 2)


def skeleton_endpoints(i: int, j: int) -> tuple[int, int]:
    """Endpoints in the level-1 skeleton of the edge at clause i, position j."""
    a, b = 2 + 2 * i, 3 + 2 * i
    return ((0, a), (a, b), (b, 1))[j]


def map_copy_node(m: int, prev_nodes: int, copy_idx: int, i: int, j: int, p: int) -> int:
    """Top-level id of node ``p`` of the copy at clause ``i``, position ``j``."""
    u, v = skeleton_endpoints(i, j)
    if p == 0:
        return u
    if p == 1:
        return v
    return copy_node_base(m, prev_nodes, copy_idx) + (p - 2)


def _expanded_le_rows(p: DemandPolytope) -> list[tuple[tuple[Fraction, ...], tuple[Fraction, ...], Fraction]]:
    """Row system with equalities expanded into <= pairs (listing order)."""
    out = []
    for row in p.rows:
        out.append((row.a, row.g, row.rhs))
        if row.sense == SENSE_EQ:
            out.append((tuple(-v for v in row.a), tuple(-v for v in row.g), -row.rhs))
    return out


def recursive_hint_count(phi: CnfFormula, prev_hint_count: int) -> int:
    total = 0
    for a in range(1 << phi.variable_count):
        combos = 1
        for clause in phi.clauses:
            for lit in clause:
                if literal_true(lit, a):
                    combos *= prev_hint_count
        total += 2 * combos
    return total


def gen_recursive(
    phi: CnfFormula,
    rho: Fraction,
    gamma: int,
    hint_budget: int = DEFAULT_HINT_BUDGET,
) -> Instance:
    """Level ``gamma >= 2`` gadget by edge substitution into the level-1 one.

    Every edge of the level-1 skeleton becomes a fresh copy of the level
    ``gamma - 1`` gadget, its endpoints identified with the skeleton edge's.
    A copy's full row system (equalities expanded to <= pairs) is embedded
    with its right-hand side moved onto the copy's literal indicator column,
    so a zero indicator forces the whole copy's demand block to zero.

    Vertex hints are built recursively (truth assignment at the top level,
    active copies ranging over their own hint lists, inactive copies zero,
    source-sink coordinates at 0 or their bound) and omitted with a meta
    note when the family exceeds ``hint_budget``.
    """
    if gamma < 2:
        raise GadgetError("gen_recursive requires gamma >= 2; use gen_gamma1 for level 1")
    _check_rho(rho)
    prev = (
        gen_gamma1(phi, rho, hint_budget)
        if gamma == 2
        else gen_recursive(phi, rho, gamma - 1, hint_budget)
    )
    m, r = phi.num_clauses, phi.variable_count
    prev_nodes = prev.graph.node_count
    prev_edges = prev.graph.edges
    dprev = prev.polytope.demand_dim
    aprev = prev.polytope.aux_dim

    node_names = [f"s{gamma}", f"t{gamma}"]
    for i in range(m):
        node_names += [f"g{gamma}.i{i + 1}.a", f"g{gamma}.i{i + 1}.b"]
    prev_node_names = prev.meta["node_names"]
    prev_edge_names = prev.meta["edge_names"]
    prev_comm_names = prev.meta["commodity_names"]

    edges: list[Edge] = []
    edge_names: list[str] = []
    commodities: list[Commodity] = []
    commodity_names: list[str] = []
    copies = [(i, j) for i in range(m) for j in range(3)]
    for c, (i, j) in enumerate(copies):
        prefix = f"g{gamma}.e{i + 1}.{j + 1}/"
        mapping = [map_copy_node(m, prev_nodes, c, i, j, p) for p in range(prev_nodes)]
        for p in range(2, prev_nodes):
            node_names.append(prefix + prev_node_names[p])
        for e in prev_edges:
            edges.append(Edge(mapping[e.s], mapping[e.t], e.capacity))
        edge_names += [prefix + name for name in prev_edge_names]
        for comm in prev.commodities:
            commodities.append(Commodity(mapping[comm.s], mapping[comm.t]))
        commodity_names += [prefix + name for name in prev_comm_names]
    commodities.append(Commodity(0, 1))
    commodity_names.append(f"h0.{gamma}")
    graph = Graph(node_count=2 + 2 * m + 3 * m * (prev_nodes - 2), edges=tuple(edges))

    demand_dim = 3 * m * dprev + 1
    aux_dim = 2 * r + 3 * m * aprev
    h0 = demand_dim - 1
    h0_bound = Fraction(m) ** gamma * (1 - rho)
    rows: list[PolytopeRow] = []

    def top_row(a_pairs, g_pairs, sense, rhs):
        a = [ZERO] * demand_dim
        g = [ZERO] * aux_dim
        for idx, v in a_pairs:
            a[idx] = v
        for idx, v in g_pairs:
            g[idx] = v
        rows.append(PolytopeRow(tuple(a), tuple(g), sense, rhs))

    top_row([(h0, ONE)], [], SENSE_LE, h0_bound)
    top_row([(h0, -ONE)], [], SENSE_LE, ZERO)
    for l in range(2 * r):
        top_row([], [(l, -ONE)], SENSE_LE, ZERO)
    for k in range(r):
        top_row([], [(2 * k, ONE), (2 * k + 1, ONE)], SENSE_LE, ONE)
    for k in range(r):
        top_row([], [(2 * k, -ONE), (2 * k + 1, -ONE)], SENSE_LE, -ONE)

    prev_rows_le = _expanded_le_rows(prev.polytope)
    for c, (i, j) in enumerate(copies):
        d_off = c * dprev
        g_off = 2 * r + c * aprev
        xi_col = _aux_index(phi.clauses[i][j])
        for a_prev, g_prev, rhs_prev in prev_rows_le:
            a = [ZERO] * demand_dim
            g = [ZERO] * aux_dim
            for idx, v in enumerate(a_prev):
                if v != 0:
                    a[d_off + idx] = v
            for idx, v in enumerate(g_prev):
                if v != 0:
                    g[g_off + idx] = v
            if rhs_prev != 0:
                g[xi_col] += -rhs_prev
            rows.append(PolytopeRow(tuple(a), tuple(g), SENSE_LE, ZERO))

    hints = None
    hint_count = None
    if prev.polytope.vertex_hints is not None:
        hint_count = recursive_hint_count(phi, len(prev.polytope.vertex_hints))
        if hint_count <= hint_budget:
            zero_prev = (ZERO,) * dprev
            seen = set()
            for a in range(1 << r):
                blocks = [
                    prev.polytope.vertex_hints
                    if literal_true(phi.clauses[i][j], a)
                    else ((zero_prev),)
                    for (i, j) in copies
                ]
                for combo in itertools.product(*blocks):
                    base = tuple(x for block in combo for x in block)
                    for h0v in (ZERO, h0_bound):
                        seen.add(base + (h0v,))
            hints = tuple(sorted(seen))

    polytope = DemandPolytope(demand_dim, aux_dim, tuple(rows), hints)
    aux_names = _literal_names(r)
    for c, (i, j) in enumerate(copies):
        prefix = f"g{gamma}.e{i + 1}.{j + 1}/"
        aux_names += [prefix + name for name in prev.meta["aux_names"]]
    meta = {
        "family": "gamma",
        "gamma": gamma,
        "m": m,
        "r": r,
        "rho": rat_str(rho),
        "node_names": node_names,
        "edge_names": edge_names,
        "commodity_names": commodity_names,
        "aux_names": aux_names,
    }
    if hints is None:
        meta["vertex_hints_omitted"] = hint_count if hint_count is not None else -1
    return Instance(graph=graph, commodities=tuple(commodities), polytope=polytope, meta=meta)


def gen_gadget(phi: CnfFormula, rho: Fraction, gamma: int, hint_budget: int = DEFAULT_HINT_BUDGET) -> Instance:
    """Level dispatch: ``gen_gamma1`` for level 1, ``gen_recursive`` above."""
    if gamma < 1:
        raise GadgetError("gamma must be at least 1")
    if gamma == 1:
        return gen_gamma1(phi, rho, hint_budget)
    return gen_recursive(phi, rho, gamma, hint_budget)


# ---------------------------------------------------------------------------
# Two-path gadget
# ---------------------------------------------------------------------------


def gen_two_path(phi: CnfFormula, rho: Fraction, hint_budget: int = DEFAULT_HINT_BUDGET) -> Instance:
    """Two-allowed-paths gadget with a shortcut edge of capacity ``m rho``.

    Per clause: a 3-edge unit-capacity chain, infinite-capacity connectors
    to the shared shortcut endpoints, three single-edge commodities tied to
    literal indicators, and one unit commodity restricted to either its own
    chain or the shortcut path.
    """
    _check_rho(rho)
    m, r = phi.num_clauses, phi.variable_count
    edges = [Edge(0, 1, m * rho)]
    edge_names = ["e0"]
    node_names = ["s1", "t1"]
    commodities: list[Commodity] = []
    commodity_names: list[str] = []
    for i in range(m):
        p0 = 2 + 4 * i
        p1, p2, p3 = p0 + 1, p0 + 2, p0 + 3
        node_names += [f"c{i + 1}p0", f"c{i + 1}p1", f"c{i + 1}p2", f"c{i + 1}p3"]
        chain_base = len(edges)
        for j, (u, v) in enumerate(((p0, p1), (p1, p2), (p2, p3))):
            edges.append(Edge(u, v, ONE))
            edge_names.append(f"e{i + 1}.{j + 1}")
        conn_s = len(edges)
        edges.append(Edge(p0, 0, INF))
        edge_names.append(f"conn{i + 1}.s")
        conn_t = len(edges)
        edges.append(Edge(1, p3, INF))
        edge_names.append(f"conn{i + 1}.t")
        for j in range(3):
            u, v = edges[chain_base + j].s, edges[chain_base + j].t
            commodities.append(Commodity(u, v, allowed_paths=((chain_base + j,),)))
            commodity_names.append(f"h{i + 1}.{j + 1}")
        chain_path = (chain_base, chain_base + 1, chain_base + 2)
        shortcut_path = (conn_s, 0, conn_t)
        commodities.append(Commodity(p0, p3, allowed_paths=(chain_path, shortcut_path)))
        commodity_names.append(f"h{i + 1}.0")
    graph = Graph(node_count=2 + 4 * m, edges=tuple(edges))

    demand_dim = 4 * m
    aux_dim = 2 * r
    rows: list[PolytopeRow] = []

    def row(a_pairs, g_pairs, sense, rhs):
        a = [ZERO] * demand_dim
        g = [ZERO] * aux_dim
        for idx, v in a_pairs:
            a[idx] = v
        for idx, v in g_pairs:
            g[idx] = v
        rows.append(PolytopeRow(tuple(a), tuple(g), sense, rhs))

    for s in range(demand_dim):
        row([(s, -ONE)], [], SENSE_LE, ZERO)
    for i in range(m):
        for j in range(3):
            row([(4 * i + j, ONE)], [], SENSE_LE, ONE)
        row([(4 * i + 3, ONE)], [], SENSE_EQ, ONE)
    for l in range(aux_dim):
        row([], [(l, -ONE)], SENSE_LE, ZERO)
    for l in range(aux_dim):
        row([], [(l, ONE)], SENSE_LE, ONE)
    for k in range(r):
        row([], [(2 * k, ONE), (2 * k + 1, ONE)], SENSE_EQ, ONE)
    for i in range(m):
        for j in range(3):
            row([(4 * i + j, ONE)], [(_aux_index(phi.clauses[i][j]), -ONE)], SENSE_EQ, ZERO)

    hints = None
    if (1 << r) <= hint_budget:
        seen = set()
        for a in range(1 << r):
            vec = []
            for i in range(m):
                for j in range(3):
                    vec.append(ONE if literal_true(phi.clauses[i][j], a) else ZERO)
                vec.append(ONE)
            seen.add(tuple(vec))
        hints = tuple(sorted(seen))

    polytope = DemandPolytope(demand_dim, aux_dim, tuple(rows), hints)
    meta = {
        "family": "two_path",
        "m": m,
        "r": r,
        "rho": rat_str(rho),
        "node_names": node_names,
        "edge_names": edge_names,
        "commodity_names": commodity_names,
        "aux_names": _literal_names(r),
    }
    return Instance(graph=graph, commodities=tuple(commodities), polytope=polytope, meta=meta)


# ---------------------------------------------------------------------------
# Hose model
# ---------------------------------------------------------------------------


def gen_hose(graph: Graph, bounds: Sequence[Fraction | None]) -> Instance:
    """Symmetric hose uncertainty: per-terminal caps on total incident demand.

    ``bounds[v]`` is the terminal bound of node ``v`` or None for
    non-terminals; commodities are all unordered terminal pairs.
    """
    if len(bounds) != graph.node_count:
        raise GadgetError("bounds length must match the node count")
    terminals = [v for v, b in enumerate(bounds) if b is not None]
    if len(terminals) < 2:
        raise GadgetError("hose model needs at least two terminals")
    for v in terminals:
        if bounds[v] < 0:
            raise GadgetError(f"terminal {v} has a negative bound")
    commodities = []
    commodity_names = []
    for a in range(len(terminals)):
        for b in range(a + 1, len(terminals)):
            commodities.append(Commodity(terminals[a], terminals[b]))
            commodity_names.append(f"h{terminals[a]}-{terminals[b]}")
    demand_dim = len(commodities)
    rows: list[PolytopeRow] = []
    for h in range(demand_dim):
        a = [ZERO] * demand_dim
        a[h] = -ONE
        rows.append(PolytopeRow(tuple(a), (), SENSE_LE, ZERO))
    for v in terminals:
        a = [ZERO] * demand_dim
        for h, c in enumerate(commodities):
            if v in (c.s, c.t):
                a[h] = ONE
        rows.append(PolytopeRow(tuple(a), (), SENSE_LE, bounds[v]))
    polytope = DemandPolytope(demand_dim, 0, tuple(rows), None)
    meta = {
        "family": "hose",
        "terminals": terminals,
        "bounds": [None if b is None else rat_str(b) for b in bounds],
        "commodity_names": commodity_names,
    }
    return Instance(graph=graph, commodities=tuple(commodities), polytope=polytope, meta=meta)


# ---------------------------------------------------------------------------
# Size formulas
# ---------------------------------------------------------------------------


def expected_sizes(m: int, gamma: int) -> dict[str, int]:
    """Closed-form node/edge/commodity counts and the endpoint degree."""
    three_m = 3 * m
    nodes = 2 + 2 * m * (three_m**gamma - 1) // (three_m - 1)
    edges = three_m**gamma
    commodities = 1
    for _ in range(gamma):
        commodities = 1 + three_m * commodities
    return {
        "nodes": nodes,
        "edges": edges,
        "commodities": commodities,
        "endpoint_degree": m**gamma,
    }
