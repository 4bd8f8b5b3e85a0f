from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from robustnd.model import (
    INF,
    Commodity,
    DemandPolytope,
    Edge,
    Graph,
    Instance,
    PolytopeRow,
    SENSE_EQ,
    SENSE_LE,
    instance_from_json,
    instance_to_json,
    rat,
    rat_str,
    validate,
)

F = Fraction


def box_polytope(upper):
    rows = []
    dim = len(upper)
    for i, u in enumerate(upper):
        a = [F(0)] * dim
        a[i] = F(-1)
        rows.append(PolytopeRow(tuple(a), (), SENSE_LE, F(0)))
        if u is not None:
            a = [F(0)] * dim
            a[i] = F(1)
            rows.append(PolytopeRow(tuple(a), (), SENSE_LE, u))
    return DemandPolytope(demand_dim=dim, aux_dim=0, rows=tuple(rows))


def minimal_instance():
    graph = Graph(node_count=2, edges=(Edge(0, 1, F(1)),))
    return Instance(
        graph=graph,
        commodities=(Commodity(0, 1),),
        polytope=box_polytope([F(1)]),
        meta={"tag": "minimal"},
    )


def test_rat_parsing():
    assert rat("3/2") == F(3, 2)
    assert rat("-7") == F(-7)
    assert rat(5) == F(5)
    assert rat_str(F(6, 4)) == "3/2"
    with pytest.raises(ValueError):
        rat("0.5")
    with pytest.raises(ValueError):
        rat("1e-3")


def test_validate_minimal_ok():
    assert validate(minimal_instance()) == []


def test_validate_unbounded_coordinate():
    graph = Graph(node_count=2, edges=(Edge(0, 1, F(1)),))
    inst = Instance(
        graph=graph,
        commodities=(Commodity(0, 1), Commodity(1, 0)),
        polytope=box_polytope([F(1), None]),
        meta={},
    )
    assert "coordinate d_1 unbounded" in validate(inst)


def test_validate_degenerate_commodity():
    graph = Graph(node_count=2, edges=(Edge(0, 1, F(1)),))
    inst = Instance(
        graph=graph,
        commodities=(Commodity(0, 0),),
        polytope=box_polytope([F(1)]),
        meta={},
    )
    assert "degenerate commodity 0" in validate(inst)


def test_validate_is_pure():
    inst = minimal_instance()
    assert validate(inst) == validate(inst)


def test_validate_bad_hint_and_paths():
    graph = Graph(node_count=3, edges=(Edge(0, 1, F(1)), Edge(1, 2, F(1))))
    poly = DemandPolytope(
        demand_dim=1,
        aux_dim=0,
        rows=box_polytope([F(1)]).rows,
        vertex_hints=((F(2),),),
    )
    inst = Instance(
        graph=graph,
        commodities=(Commodity(0, 2, allowed_paths=((0, 1), (1, 0))),),
        polytope=poly,
        meta={},
    )
    problems = validate(inst)
    assert "vertex hint 0 outside the demand polytope" in problems
    assert any("path 1" in p for p in problems)


def test_roundtrip_bit_exact():
    graph = Graph(node_count=4, edges=(Edge(0, 1, F(3, 7)), Edge(1, 2, INF), Edge(2, 3, F(5))))
    poly = DemandPolytope(
        demand_dim=2,
        aux_dim=1,
        rows=(
            PolytopeRow((F(1), F(0)), (F(-2, 3),), SENSE_LE, F(7, 5)),
            PolytopeRow((F(0), F(1)), (F(1),), SENSE_EQ, F(1)),
            PolytopeRow((F(-1), F(0)), (F(0),), SENSE_LE, F(0)),
            PolytopeRow((F(0), F(-1)), (F(0),), SENSE_LE, F(0)),
        ),
        vertex_hints=((F(0), F(1, 2)), (F(7, 5), F(0))),
    )
    inst = Instance(
        graph=graph,
        commodities=(Commodity(0, 3, allowed_paths=((0, 1, 2),)), Commodity(1, 2)),
        polytope=poly,
        meta={"names": ["a", "b"], "rho": "2/3", "k": 4},
    )
    text = instance_to_json(inst)
    again = instance_from_json(text)
    assert again == inst
    assert instance_to_json(again) == text


@given(st.integers(-10**12, 10**12), st.integers(1, 10**12))
def test_rational_string_roundtrip(p, q):
    x = F(p, q)
    assert rat(rat_str(x)) == x
