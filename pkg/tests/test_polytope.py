from fractions import Fraction

import pytest

from helpers import naive_vertices
from robustnd.gadgets import CnfFormula, gen_gamma1
from robustnd.model import DemandPolytope, PolytopeRow, SENSE_LE
from robustnd.polytope import (
    DimensionCapError,
    enumerate_vertices,
    maximize_linear,
    pareto_maximal,
)

F = Fraction


def unit_box(dim):
    rows = []
    for i in range(dim):
        a = [F(0)] * dim
        a[i] = F(-1)
        rows.append(PolytopeRow(tuple(a), (), SENSE_LE, F(0)))
        a = [F(0)] * dim
        a[i] = F(1)
        rows.append(PolytopeRow(tuple(a), (), SENSE_LE, F(1)))
    return DemandPolytope(demand_dim=dim, aux_dim=0, rows=tuple(rows))


def d1_polytope(rho=F(1, 2)):
    phi = CnfFormula(3, ((1, 2, 3),))
    return gen_gamma1(phi, rho).polytope


def test_unit_square_vertices():
    verts = enumerate_vertices(unit_box(2))
    assert set(verts) == {(F(0), F(0)), (F(0), F(1)), (F(1), F(0)), (F(1), F(1))}


def test_unit_square_matches_naive_oracle():
    p = unit_box(2)
    assert set(enumerate_vertices(p)) == naive_vertices(p)


def test_d1_sixteen_vertices():
    p = d1_polytope()
    verts = enumerate_vertices(p)
    assert len(verts) == 16
    assert set(verts) == set(p.vertex_hints)
    h0_values = {v[3] for v in verts}
    assert h0_values == {F(0), F(1, 2)}


def test_vertices_have_full_tight_rank():
    p = d1_polytope()
    n = p.lifted_dim
    # Re-derive each vertex's lifted point by checking a full-rank tight set
    # exists among rows satisfied with equality at some lift of the vertex.
    # The demand projection alone suffices here because the aux block of the
    # gadget polytope is affinely determined by the demand coordinates.
    for v in enumerate_vertices(p):
        xi = []
        for k in range(3):
            xi += [v[k], 1 - v[k]]
        point = list(v) + xi
        tight = []
        for row in p.rows:
            val = sum(
                (c * x for c, x in zip(list(row.a) + list(row.g), point)), F(0)
            )
            if row.sense == SENSE_LE and val == row.rhs:
                tight.append(list(row.a) + list(row.g))
            elif row.sense != SENSE_LE and val == row.rhs:
                tight.append(list(row.a) + list(row.g))
        assert _rank(tight) == n


def _rank(rows):
    mat = [list(r) for r in rows]
    rank = 0
    cols = len(mat[0]) if mat else 0
    for c in range(cols):
        pr = next((i for i in range(rank, len(mat)) if mat[i][c] != 0), None)
        if pr is None:
            continue
        mat[rank], mat[pr] = mat[pr], mat[rank]
        pv = mat[rank][c]
        mat[rank] = [v / pv for v in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def test_maximize_linear_unit_square():
    value, arg = maximize_linear(unit_box(2), (F(1), F(1)))
    assert value == F(2)
    assert arg == (F(1), F(1))


def test_maximize_linear_d1_h0_bound():
    p = d1_polytope()
    w = (F(0), F(0), F(0), F(1))
    value, _ = maximize_linear(p, w)
    assert value == F(1, 2)


def test_maximize_linear_d1_slot_forced():
    p = d1_polytope()
    w = (F(1), F(0), F(0), F(0))
    value, _ = maximize_linear(p, w)
    assert value == F(1)


def test_maximize_matches_vertex_max():
    p = d1_polytope()
    verts = enumerate_vertices(p)
    weights = [
        (F(1), F(1), F(1), F(1)),
        (F(2), F(-1), F(0), F(3)),
        (F(0), F(0), F(0), F(-1)),
        (F(-1, 3), F(5), F(1, 7), F(2)),
    ]
    for w in weights:
        value, _ = maximize_linear(p, w)
        assert value == max(sum((wi * vi for wi, vi in zip(w, v)), F(0)) for v in verts)


def test_dim_cap_refusal():
    with pytest.raises(DimensionCapError):
        enumerate_vertices(unit_box(5), dim_cap=4)


def test_pareto_maximal():
    pts = [
        (F(1), F(0)),
        (F(0), F(1)),
        (F(1), F(1)),
        (F(1, 2), F(1, 2)),
    ]
    assert pareto_maximal(pts) == ((F(1), F(1)),)
    antichain = [(F(1), F(0)), (F(0), F(1))]
    assert set(pareto_maximal(antichain)) == set(antichain)
