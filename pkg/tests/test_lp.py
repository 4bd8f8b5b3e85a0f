from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robustnd.lp import (
    EQ,
    GE,
    LE,
    MAX,
    MIN,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LinearProgram,
    LpBuilder,
    LpFormatError,
    LpRow,
    ParametricSolver,
    check_certificate,
    solve,
)

F = Fraction


def lp_min_x_ge_1():
    b = LpBuilder(MIN)
    x = b.add_var("x", lower=None, objective=F(1))
    b.add_row({x: F(1)}, GE, F(1))
    return b.build()


def test_min_x_ge_1():
    res = solve(lp_min_x_ge_1())
    assert res.status == OPTIMAL
    assert res.x == (F(1),)
    assert res.objective == F(1)
    assert res.dual == (F(1),)


def test_max_box():
    b = LpBuilder(MAX)
    x = b.add_var("x", objective=F(1))
    y = b.add_var("y", objective=F(1))
    b.add_row({x: F(1)}, LE, F(2))
    b.add_row({y: F(1)}, LE, F(3))
    res = solve(b.build())
    assert res.status == OPTIMAL
    assert res.objective == F(5)
    assert res.x == (F(2), F(3))


def test_infeasible_with_ray():
    b = LpBuilder(MIN)
    x = b.add_var("x", lower=None)
    b.add_row({x: F(1)}, LE, F(0))
    b.add_row({x: F(1)}, GE, F(1))
    res = solve(b.build())
    assert res.status == INFEASIBLE
    assert res.farkas_ray is not None
    assert check_certificate(b.build(), res)


def test_infeasible_via_bounds_vs_row():
    b = LpBuilder(MIN)
    x = b.add_var("x", lower=F(0), upper=F(2))
    b.add_row({x: F(1)}, GE, F(3))
    lp = b.build()
    res = solve(lp)
    assert res.status == INFEASIBLE
    assert check_certificate(lp, res)


def test_infeasible_empty_box():
    b = LpBuilder(MIN)
    b.add_var("x", lower=F(1), upper=F(0))
    lp = b.build()
    res = solve(lp)
    assert res.status == INFEASIBLE
    assert check_certificate(lp, res)


def test_unbounded():
    b = LpBuilder(MAX)
    x = b.add_var("x", objective=F(1))
    y = b.add_var("y")
    b.add_row({x: F(1), y: F(-1)}, LE, F(1))
    lp = b.build()
    res = solve(lp)
    assert res.status == UNBOUNDED
    assert check_certificate(lp, res)


def test_equality_and_negative_rhs():
    b = LpBuilder(MIN)
    x = b.add_var("x", lower=None, objective=F(2))
    y = b.add_var("y", objective=F(3))
    b.add_row({x: F(1), y: F(1)}, EQ, F(-2))
    b.add_row({x: F(1)}, GE, F(-5))
    lp = b.build()
    res = solve(lp)
    assert res.status == OPTIMAL
    assert res.x is not None and res.x[0] + res.x[1] == F(-2)
    assert res.objective == F(-4)


def test_free_split_and_upper_only():
    b = LpBuilder(MIN)
    x = b.add_var("x", lower=None, upper=F(4), objective=F(-1))
    y = b.add_var("y", lower=None, objective=F(1))
    b.add_row({x: F(1), y: F(-1)}, LE, F(1))
    b.add_row({y: F(1)}, GE, F(-3))
    lp = b.build()
    res = solve(lp)
    assert res.status == OPTIMAL
    assert res.objective == F(-1)
    assert check_certificate(lp, res)


def test_degenerate_fixed_variable():
    b = LpBuilder(MAX)
    x = b.add_var("x", lower=F(2), upper=F(2), objective=F(1))
    y = b.add_var("y", upper=F(1), objective=F(1))
    b.add_row({x: F(1), y: F(1)}, LE, F(3))
    res = solve(b.build())
    assert res.status == OPTIMAL
    assert res.x == (F(2), F(1))


def test_wrong_claim_rejected():
    lp = lp_min_x_ge_1()
    res = solve(lp)
    fake = type(res)(status=OPTIMAL, x=(F(0),), objective=F(0), dual=(F(1),))
    assert not check_certificate(lp, fake)


def test_dimension_mismatch_raises():
    lp = LinearProgram(
        sense=MIN,
        objective=(F(1),),
        rows=(LpRow(((3, F(1)),), LE, F(1)),),
        lower=(F(0),),
        upper=(None,),
    )
    with pytest.raises(LpFormatError):
        solve(lp)


def test_parametric_reoptimize():
    b = LpBuilder(MIN)
    x = b.add_var("x", objective=F(1))
    y = b.add_var("y", objective=F(1))
    b.add_row({x: F(1), y: F(1)}, GE, F(2))
    solver = ParametricSolver(b.build())
    r1 = solver.solve()
    assert r1.objective == F(2)
    r2 = solver.solve(objective=(F(3), F(1)))
    assert r2.objective == F(2)
    assert r2.x == (F(0), F(2))
    r3 = solver.solve(objective=(F(1), F(3)))
    assert r3.x == (F(2), F(0))


def _random_lp(draw_ints, n, m, sense):
    b = LpBuilder(sense)
    for j in range(n):
        lo = draw_ints[f"l{j}"]
        up = draw_ints[f"u{j}"]
        lower = None if lo is None else F(lo)
        upper = None if up is None else F(up)
        b.add_var(f"x{j}", lower=lower, upper=upper, objective=F(draw_ints[f"c{j}"]))
    for i in range(m):
        coeffs = {j: F(draw_ints[f"a{i}_{j}"]) for j in range(n)}
        sense_i = [LE, GE, EQ][draw_ints[f"s{i}"]]
        b.add_row(coeffs, sense_i, F(draw_ints[f"b{i}"]))
    return b.build()


@st.composite
def small_lps(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 3))
    sense = draw(st.sampled_from([MIN, MAX]))
    vals = {}
    for j in range(n):
        vals[f"l{j}"] = draw(st.one_of(st.none(), st.integers(-3, 3)))
        vals[f"u{j}"] = draw(st.one_of(st.none(), st.integers(-3, 3)))
        vals[f"c{j}"] = draw(st.integers(-3, 3))
    for i in range(m):
        for j in range(n):
            vals[f"a{i}_{j}"] = draw(st.integers(-3, 3))
        vals[f"s{i}"] = draw(st.integers(0, 2))
        vals[f"b{i}"] = draw(st.integers(-4, 4))
    return _random_lp(vals, n, m, sense)


@settings(max_examples=150, deadline=None)
@given(small_lps())
def test_random_lps_self_certify(lp):
    res = solve(lp)
    assert check_certificate(lp, res)


@settings(max_examples=60, deadline=None)
@given(small_lps(), st.integers(1, 5), st.integers(1, 5))
def test_objective_scaling_is_exact(lp, p, q):
    scale = F(p, q)
    res = solve(lp)
    scaled = LinearProgram(
        sense=lp.sense,
        objective=tuple(scale * c for c in lp.objective),
        rows=lp.rows,
        lower=lp.lower,
        upper=lp.upper,
    )
    res2 = solve(scaled)
    assert res.status == res2.status
    if res.status == OPTIMAL:
        assert res2.objective == scale * res.objective
