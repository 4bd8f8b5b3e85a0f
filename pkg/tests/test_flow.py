from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import max_flow
from robustnd.flow import (
    InfeasibleDemandError,
    check_flow,
    check_metric_certificate,
    edge_loads,
    min_congestion,
    routable,
)
from robustnd.gadgets import CnfFormula, gen_gamma1, gen_two_path
from robustnd.model import INF, Commodity, Edge, Graph

F = Fraction


def single_edge():
    return Graph(2, (Edge(0, 1, F(1)),)), (Commodity(0, 1),)


def test_single_edge_unit_demand():
    g, comms = single_edge()
    beta, fs = min_congestion(g, comms, (F(1),))
    assert beta == F(1)
    assert check_flow(g, comms, (F(1),), fs)


def test_parallel_edges_split():
    g = Graph(2, (Edge(0, 1, F(1)), Edge(0, 1, F(1))))
    comms = (Commodity(0, 1),)
    beta, fs = min_congestion(g, comms, (F(1),))
    assert beta == F(1, 2)
    assert check_flow(g, comms, (F(1),), fs)
    loads = edge_loads(g, fs.flows)
    assert loads[0] == loads[1] == F(1, 2)


def test_two_path_gadget_vertex():
    phi = CnfFormula(3, ((1, 2, 3),))
    inst = gen_two_path(phi, F(1, 2))
    demand = (F(1), F(0), F(0), F(1))  # x true, y and z false, unit pinned demand
    beta, fs = min_congestion(inst.graph, inst.commodities, demand)
    assert beta == F(4, 3)
    assert check_flow(inst.graph, inst.commodities, demand, fs)


def test_zero_demand_routable():
    g, comms = single_edge()
    res = routable(g, comms, (F(0),), (F(1),))
    assert res.feasible
    assert res.flow.congestion == F(0)


def test_single_edge_overload_certificate():
    g, comms = single_edge()
    res = routable(g, comms, (F(2),), (F(1),))
    assert not res.feasible
    cert = res.certificate
    assert cert.reserved_side < cert.demand_side
    assert check_metric_certificate(g, comms, (F(2),), (F(1),), cert)


def test_gamma1_certificate_on_saturated_cut():
    phi = CnfFormula(3, ((1, 2, 3),))
    inst = gen_gamma1(phi, F(1, 2))
    demand = (F(1), F(0), F(0), F(1, 2))
    reservation = tuple(e.capacity for e in inst.graph.edges)
    res = routable(inst.graph, inst.commodities, demand, reservation)
    assert not res.feasible
    assert check_metric_certificate(inst.graph, inst.commodities, demand, reservation, res.certificate)
    # the hand-built cut metric also certifies: weight 1 on the first edge
    from robustnd.flow import build_metric_certificate

    manual = build_metric_certificate(
        inst.graph, inst.commodities, demand, reservation, (F(1), F(0), F(0))
    )
    assert manual is not None
    assert manual.reserved_side == F(1)
    assert manual.demand_side == F(3, 2)


def test_routable_iff_congestion_at_most_one():
    g = Graph(3, (Edge(0, 1, F(2)), Edge(1, 2, F(1)), Edge(0, 2, F(1))))
    comms = (Commodity(0, 2), Commodity(1, 2))
    for demand in [(F(1), F(1)), (F(2), F(1)), (F(3), F(0)), (F(1, 2), F(1, 4))]:
        u = tuple(e.capacity for e in g.edges)
        beta, _ = min_congestion(g, comms, demand, capacities=u)
        assert routable(g, comms, demand, u).feasible == (beta <= 1)


def test_single_commodity_equals_maxflow_ratio():
    graphs = [
        Graph(2, (Edge(0, 1, F(1)), Edge(0, 1, F(3, 2)))),
        Graph(4, (Edge(0, 1, F(1)), Edge(1, 3, F(2)), Edge(0, 2, F(1, 2)), Edge(2, 3, F(4)))),
        Graph(3, (Edge(0, 1, F(5, 3)), Edge(1, 2, F(1)), Edge(0, 2, F(2)))),
    ]
    for g in graphs:
        comms = (Commodity(0, g.node_count - 1),)
        demand = (F(7, 3),)
        beta, _ = min_congestion(g, comms, demand)
        assert beta == demand[0] / max_flow(g, 0, g.node_count - 1)


def test_infinite_capacity_edges_unconstrained():
    g = Graph(2, (Edge(0, 1, INF),))
    comms = (Commodity(0, 1),)
    beta, _ = min_congestion(g, comms, (F(100),))
    assert beta == F(0)


def test_disconnected_raises():
    g = Graph(3, (Edge(0, 1, F(1)),))
    comms = (Commodity(0, 2),)
    with pytest.raises(InfeasibleDemandError):
        min_congestion(g, comms, (F(1),))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9))
def test_congestion_positively_homogeneous(p, q):
    t = F(p, q)
    phi = CnfFormula(3, ((1, 2, 3),))
    inst = gen_gamma1(phi, F(1, 2))
    base = (F(1), F(1), F(0), F(1, 2))
    beta1, _ = min_congestion(inst.graph, inst.commodities, base)
    beta2, _ = min_congestion(inst.graph, inst.commodities, tuple(t * d for d in base))
    assert beta2 == t * beta1
