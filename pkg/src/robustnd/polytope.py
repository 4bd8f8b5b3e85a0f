"""Vertex enumeration and linear optimization over demand polytopes.

The demand set is the projection of a lifted polytope onto the demand
coordinates.  Enumeration works in the lifted space: equality rows are
eliminated once by exact Gaussian elimination, then all bases of tight
inequality rows are tried in the reduced space.  This is exponential and
guarded by a dimension cap; gadget instances ship exact vertex hints, so
generic enumeration serves as a cross-check oracle.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

from . import lp
from .model import SENSE_EQ, SENSE_LE, DemandPolytope

ZERO = Fraction(0)

DEFAULT_DIM_CAP = 12


class PolytopeError(Exception):
    pass


class DimensionCapError(PolytopeError):
    """Lifted dimension exceeds the enumeration cap; supply vertex hints."""


class EmptyPolytopeError(PolytopeError):
    pass


class UnboundedPolytopeError(PolytopeError):
    pass


def _lifted_program(p: DemandPolytope, objective: Sequence[Fraction], sense: str) -> lp.LinearProgram:
    n = p.lifted_dim
    builder = lp.LpBuilder(sense)
    for j in range(n):
        builder.add_var(f"z{j}", lower=None)
    for row in p.rows:
        coeffs = {j: v for j, v in enumerate(row.a) if v != 0}
        for j, v in enumerate(row.g):
            if v != 0:
                coeffs[p.demand_dim + j] = v
        builder.add_row(coeffs, lp.EQ if row.sense == SENSE_EQ else lp.LE, row.rhs)
    program = builder.build()
    if any(objective):
        program = lp.LinearProgram(
            sense=sense,
            objective=tuple(objective),
            rows=program.rows,
            lower=program.lower,
            upper=program.upper,
        )
    return program


def is_nonempty(p: DemandPolytope) -> bool:
    program = _lifted_program(p, [ZERO] * p.lifted_dim, lp.MIN)
    return lp.solve(program).status == lp.OPTIMAL


def coordinate_range(p: DemandPolytope, idx: int) -> tuple[Fraction | None, Fraction | None]:
    """Exact (min, max) of one lifted coordinate; None marks unboundedness."""
    obj = [ZERO] * p.lifted_dim
    obj[idx] = Fraction(1)
    lo_res = lp.solve(_lifted_program(p, obj, lp.MIN))
    hi_res = lp.solve(_lifted_program(p, obj, lp.MAX))
    if lo_res.status == lp.INFEASIBLE or hi_res.status == lp.INFEASIBLE:
        raise EmptyPolytopeError("lifted polytope is empty")
    lo = lo_res.objective if lo_res.status == lp.OPTIMAL else None
    hi = hi_res.objective if hi_res.status == lp.OPTIMAL else None
    return lo, hi


def contains(p: DemandPolytope, demand: Sequence[Fraction]) -> bool:
    """Membership of a demand vector in the projection (exact)."""
    if len(demand) != p.demand_dim:
        return False
    if p.aux_dim == 0:
        for row in p.rows:
            val = sum((v * demand[j] for j, v in enumerate(row.a)), ZERO)
            if row.sense == SENSE_EQ and val != row.rhs:
                return False
            if row.sense == SENSE_LE and val > row.rhs:
                return False
        return True
    builder = lp.LpBuilder(lp.MIN)
    for j in range(p.aux_dim):
        builder.add_var(f"psi{j}", lower=None)
    for row in p.rows:
        shift = sum((v * demand[j] for j, v in enumerate(row.a)), ZERO)
        coeffs = {j: v for j, v in enumerate(row.g) if v != 0}
        builder.add_row(coeffs, lp.EQ if row.sense == SENSE_EQ else lp.LE, row.rhs - shift)
    return lp.solve(builder.build()).status == lp.OPTIMAL


def maximize_linear(
    p: DemandPolytope, w: Sequence[Fraction]
) -> tuple[Fraction, tuple[Fraction, ...]]:
    """Exact maximum of ``w . d`` over the demand polytope.

    One LP on the lifted system; the argmax is the demand projection of a
    vertex of the lifted polytope.
    """
    if len(w) != p.demand_dim:
        raise ValueError("weight vector length does not match demand dimension")
    obj = list(w) + [ZERO] * p.aux_dim
    res = lp.solve(_lifted_program(p, obj, lp.MAX))
    if res.status == lp.INFEASIBLE:
        raise EmptyPolytopeError("lifted polytope is empty")
    if res.status == lp.UNBOUNDED:
        raise UnboundedPolytopeError("objective unbounded over the lifted polytope")
    assert res.x is not None and res.objective is not None
    return res.objective, tuple(res.x[: p.demand_dim])


def _gauss_eliminate(rows: list[list[Fraction]], n: int) -> tuple[list[Fraction], list[list[Fraction]]] | None:
    """Solve the equality block; returns (particular solution, nullspace basis).

    ``rows`` are length n+1 (rhs last).  Returns None if inconsistent.
    """
    mat = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if pr is None:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        pv = mat[r][c]
        if pv != 1:
            mat[r] = [v / pv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    for i in range(r, len(mat)):
        if mat[i][n] != 0:
            return None
    x0 = [ZERO] * n
    for i, c in enumerate(pivots):
        x0[c] = mat[i][n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [ZERO] * n
        vec[fc] = Fraction(1)
        for i, c in enumerate(pivots):
            vec[c] = -mat[i][fc]
        basis.append(vec)
    return x0, basis


def _solve_square(rows: list[list], k: int) -> list | None:
    """Exact solve of a k x k system (rhs in last slot); None if singular."""
    mat = [list(r) for r in rows]
    for c in range(k):
        pr = next((i for i in range(c, k) if mat[i][c]), None)
        if pr is None:
            return None
        mat[c], mat[pr] = mat[pr], mat[c]
        pv = mat[c][c]
        for i in range(k):
            if i != c and mat[i][c]:
                f = mat[i][c] / pv
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[c])]
    return [mat[i][k] / mat[i][i] for i in range(k)]


def enumerate_vertices(
    p: DemandPolytope, dim_cap: int = DEFAULT_DIM_CAP
) -> tuple[tuple[Fraction, ...], ...]:
    """All demand projections of the lifted polytope's vertices.

    Results are deduplicated and sorted lexicographically.  The maximum of
    any linear function over the demand polytope is attained on the returned
    list.  Requires the lifted polytope to be bounded and nonempty, and its
    dimension to be at most ``dim_cap``.
    """
    n = p.lifted_dim
    if n > dim_cap:
        raise DimensionCapError(
            f"lifted dimension {n} exceeds cap {dim_cap}; use vertex_hints instead"
        )

    eq_rows: list[list[Fraction]] = []
    ineq_rows: list[list[Fraction]] = []
    for row in p.rows:
        dense = list(row.a) + list(row.g) + [row.rhs]
        (eq_rows if row.sense == SENSE_EQ else ineq_rows).append(dense)

    if eq_rows:
        solved = _gauss_eliminate(eq_rows, n)
        if solved is None:
            raise EmptyPolytopeError("equality rows are inconsistent")
        x0, null_basis = solved
    else:
        x0, null_basis = [ZERO] * n, [
            [Fraction(1) if i == j else ZERO for j in range(n)] for i in range(n)
        ]
    k = len(null_basis)

    # Inequalities in the reduced space: g . z <= h.
    red = []
    for dense in ineq_rows:
        a, b = dense[:n], dense[n]
        g = [sum((a[i] * vec[i] for i in range(n)), ZERO) for vec in null_basis]
        h = b - sum((a[i] * x0[i] for i in range(n)), ZERO)
        red.append((g, h))

    def lift(z: Sequence[Fraction]) -> tuple[Fraction, ...]:
        pt = list(x0)
        for zc, vec in zip(z, null_basis):
            if zc:
                for i in range(n):
                    pt[i] += zc * vec[i]
        return tuple(pt)

    def feasible(z: Sequence[Fraction]) -> bool:
        for g, h in red:
            if sum((gi * zi for gi, zi in zip(g, z)), ZERO) > h:
                return False
        return True

    points: set[tuple[Fraction, ...]] = set()
    if k == 0:
        if feasible(()):
            points.add(lift(()))
    else:
        qred = [([_Q(v.numerator, v.denominator) for v in g], _Q(h.numerator, h.denominator)) for g, h in red]
        for combo in combinations(range(len(qred)), k):
            rows = [qred[i][0] + [qred[i][1]] for i in combo]
            z = _solve_square(rows, k)
            if z is None:
                continue
            zf = tuple(Fraction(int(v.numerator), int(v.denominator)) for v in z)
            if feasible(zf):
                points.add(lift(zf))

    projected = sorted({pt[: p.demand_dim] for pt in points})
    if not projected:
        raise EmptyPolytopeError("lifted polytope has no vertices (empty or degenerate)")
    return tuple(projected)


def pareto_maximal(
    vectors: Sequence[tuple[Fraction, ...]],
) -> tuple[tuple[Fraction, ...], ...]:
    """Componentwise-maximal subset, sorted lexicographically.

    For any coordinatewise-monotone objective (congestion and worst-case
    edge loads are such), the maximum over a vertex list is attained on this
    subset: a dominated demand vector routes by scaling down a routing of a
    dominating one.
    """
    ordered = sorted(set(vectors), key=lambda v: (sum(v), v), reverse=True)
    front: list[tuple[Fraction, ...]] = []
    for v in ordered:
        if not any(all(a <= b for a, b in zip(v, w)) for w in front):
            front.append(v)
    return tuple(sorted(front))
