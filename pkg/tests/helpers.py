"""Independent oracles used by the test suite (no solver code shared)."""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from itertools import combinations

from robustnd.model import Graph, DemandPolytope, SENSE_EQ, SENSE_LE

ZERO = Fraction(0)


def max_flow(graph: Graph, source: int, sink: int) -> Fraction:
    """Edmonds-Karp over exact rationals (undirected edges as arc pairs)."""
    n = graph.node_count
    cap: dict[tuple[int, int], Fraction] = {}
    adj: list[set[int]] = [set() for _ in range(n)]
    for e in graph.edges:
        for a, b in ((e.s, e.t), (e.t, e.s)):
            cap[a, b] = cap.get((a, b), ZERO) + e.capacity
            adj[a].add(b)
            adj[b].add(a)
    total = ZERO
    while True:
        parent = {source: source}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if v not in parent and cap.get((u, v), ZERO) > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            return total
        bottleneck = None
        v = sink
        while v != source:
            u = parent[v]
            c = cap[u, v]
            bottleneck = c if bottleneck is None else min(bottleneck, c)
            v = u
        v = sink
        while v != source:
            u = parent[v]
            cap[u, v] -= bottleneck
            cap[v, u] = cap.get((v, u), ZERO) + bottleneck
            v = u
        total += bottleneck


def naive_vertices(p: DemandPolytope) -> set[tuple[Fraction, ...]]:
    """Brute-force vertex enumeration without equality pre-elimination.

    Tries every n-subset of rows (equalities included as candidate tight
    rows) and keeps unique feasible solutions.  Exponential; only for tiny
    cross-check polytopes.
    """
    n = p.demand_dim + p.aux_dim
    dense = []
    for row in p.rows:
        dense.append((list(row.a) + list(row.g), row.sense, row.rhs))

    def solve_subset(idx):
        mat = [list(dense[i][0]) + [dense[i][2]] for i in idx]
        cols = n
        r = 0
        where = [-1] * cols
        for c in range(cols):
            pr = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
            if pr is None:
                continue
            mat[r], mat[pr] = mat[pr], mat[r]
            pv = mat[r][c]
            mat[r] = [v / pv for v in mat[r]]
            for i in range(len(mat)):
                if i != r and mat[i][c] != 0:
                    f = mat[i][c]
                    mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
            where[c] = r
            r += 1
        if r < cols:
            return None
        for i in range(r, len(mat)):
            if mat[i][cols] != 0:
                return None
        return tuple(mat[where[c]][cols] for c in range(cols))

    def feasible(x):
        for coeffs, sense, rhs in dense:
            val = sum((c * v for c, v in zip(coeffs, x)), ZERO)
            if sense == SENSE_EQ and val != rhs:
                return False
            if sense == SENSE_LE and val > rhs:
                return False
        return True

    out = set()
    for idx in combinations(range(len(dense)), n):
        x = solve_subset(idx)
        if x is not None and feasible(x):
            out.add(x[: p.demand_dim])
    return out
