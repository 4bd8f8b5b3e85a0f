"""Executable checks of the gadget mechanics on generated instances.

Every certified quantity (cut capacities, crossing demand, duality
identities) is recomputed here by independent arithmetic rather than
trusted from solver outputs; these checks are the test oracles of the
package.  Reports serialize exact rationals as "p/q" strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import polytope as ptools
from .gadgets import (
    CnfFormula,
    compute_val,
    expected_sizes,
    gen_gadget,
    literal_true,
    map_copy_node,
    satisfying_assignment,
)
from .model import Instance, rat_str
from .solvers import InstanceSolver, solver_for

ZERO = Fraction(0)
ONE = Fraction(1)


class WitnessError(Exception):
    pass


@dataclass(frozen=True)
class DichotomyReport:
    val: Fraction
    rho: Fraction
    gamma: int
    branch: str  # "satisfiable" | "low" | "no_claim"
    beta: Fraction
    bound: Fraction | None
    passed: bool

    def to_obj(self) -> dict:
        return {
            "check": "dichotomy",
            "val": rat_str(self.val),
            "rho": rat_str(self.rho),
            "gamma": self.gamma,
            "branch": self.branch,
            "beta": rat_str(self.beta),
            "bound": None if self.bound is None else rat_str(self.bound),
            "passed": self.passed,
        }


def check_dichotomy(
    phi: CnfFormula,
    rho: Fraction,
    gamma: int,
    instance: Instance | None = None,
    dim_cap: int = ptools.DEFAULT_DIM_CAP,
) -> DichotomyReport:
    """Build the gadget, solve the dynamic congestion, assert the implied
    branch exactly: satisfiable formulas must reach ``1 + gamma (1 - rho)``,
    formulas with value below ``rho`` must stay at congestion at most 1.
    Formulas in between carry no claim and are reported as such."""
    val = compute_val(phi)
    if instance is None:
        instance = gen_gadget(phi, rho, gamma)
    beta = solver_for(instance, dim_cap).cong_dynamic().beta
    if val == 1:
        bound = 1 + gamma * (1 - rho)
        return DichotomyReport(val, rho, gamma, "satisfiable", beta, bound, beta >= bound)
    if val < rho:
        return DichotomyReport(val, rho, gamma, "low", beta, ONE, beta <= 1)
    return DichotomyReport(val, rho, gamma, "no_claim", beta, None, True)


@dataclass(frozen=True)
class CutWitness:
    node_set: tuple[int, ...]
    demand: tuple[Fraction, ...]
    cut_edges: tuple[int, ...]
    cut_capacity: Fraction
    crossing_demand: Fraction
    required_crossing: Fraction
    implied_congestion_bound: Fraction

    def to_obj(self) -> dict:
        return {
            "check": "cut_witness",
            "node_set": list(self.node_set),
            "cut_edges": list(self.cut_edges),
            "cut_capacity": rat_str(self.cut_capacity),
            "crossing_demand": rat_str(self.crossing_demand),
            "required_crossing": rat_str(self.required_crossing),
            "implied_congestion_bound": rat_str(self.implied_congestion_bound),
            "demand": [rat_str(x) for x in self.demand],
        }


def _witness_demand(phi: CnfFormula, assignment: int, rho: Fraction, gamma: int) -> list[Fraction]:
    m = phi.num_clauses
    if gamma == 1:
        vec = [
            ONE if literal_true(phi.clauses[i][j], assignment) else ZERO
            for i in range(m)
            for j in range(3)
        ]
        vec.append(m * (1 - rho))
        return vec
    inner = _witness_demand(phi, assignment, rho, gamma - 1)
    zeros = [ZERO] * len(inner)
    vec = []
    for i in range(m):
        for j in range(3):
            vec.extend(inner if literal_true(phi.clauses[i][j], assignment) else zeros)
    vec.append(Fraction(m) ** gamma * (1 - rho))
    return vec


def _picks(phi: CnfFormula, assignment: int) -> list[int]:
    picks = []
    for i, clause in enumerate(phi.clauses):
        j = next((j for j in range(3) if literal_true(clause[j], assignment)), None)
        if j is None:
            raise WitnessError(f"assignment does not satisfy clause {i}")
        picks.append(j)
    return picks


def _witness_cut_nodes(phi: CnfFormula, assignment: int, gamma: int) -> set[int]:
    m = phi.num_clauses
    picks = _picks(phi, assignment)
    nodes = {0}
    if gamma == 1:
        for i, jp in enumerate(picks):
            if jp >= 1:
                nodes.add(2 + 2 * i)
            if jp >= 2:
                nodes.add(3 + 2 * i)
        return nodes
    prev_nodes = expected_sizes(m, gamma - 1)["nodes"]
    inner = _witness_cut_nodes(phi, assignment, gamma - 1)
    for i, jp in enumerate(picks):
        if jp >= 1:
            nodes.add(2 + 2 * i)
        if jp >= 2:
            nodes.add(3 + 2 * i)
        for j in range(3):
            c = 3 * i + j
            if j < jp:
                for p in range(2, prev_nodes):
                    nodes.add(map_copy_node(m, prev_nodes, c, i, j, p))
            elif j == jp:
                for p in inner:
                    if p >= 2:
                        nodes.add(map_copy_node(m, prev_nodes, c, i, j, p))
    return nodes


def build_cut_witness(
    phi: CnfFormula,
    assignment: int,
    rho: Fraction,
    gamma: int,
    instance: Instance | None = None,
) -> CutWitness:
    """Source-side node set and demand vector whose cut crossing certifies
    the congestion lower bound of satisfiable gadgets.

    The cut has exactly ``m ** gamma`` unit-capacity edges; the demand lies
    in the uncertainty set (checked by lifted-polytope membership) and its
    crossing total is recomputed arithmetically.
    """
    satisfied = all(any(literal_true(l, assignment) for l in cl) for cl in phi.clauses)
    if not satisfied:
        raise WitnessError("assignment does not satisfy the formula")
    if instance is None:
        instance = gen_gadget(phi, rho, gamma)
    m = phi.num_clauses
    demand = _witness_demand(phi, assignment, rho, gamma)
    nodes = _witness_cut_nodes(phi, assignment, gamma)
    g = instance.graph

    cut_edges = [
        e for e, edge in enumerate(g.edges) if (edge.s in nodes) != (edge.t in nodes)
    ]
    expected_cut = m**gamma
    if len(cut_edges) != expected_cut:
        raise WitnessError(f"cut has {len(cut_edges)} edges, expected {expected_cut}")
    for e in cut_edges:
        if g.edges[e].capacity != 1:
            raise WitnessError(f"cut edge {e} does not have unit capacity")
    if 0 not in nodes or 1 in nodes:
        raise WitnessError("cut does not separate the gadget endpoints")

    crossing = ZERO
    for h, c in enumerate(instance.commodities):
        if (c.s in nodes) != (c.t in nodes):
            crossing += demand[h]
    required = Fraction(m) ** gamma * (1 + gamma * (1 - rho))
    if crossing < required:
        raise WitnessError(
            f"crossing demand {crossing} below the required {required}"
        )
    if not ptools.contains(instance.polytope, demand):
        raise WitnessError("witness demand is outside the uncertainty set")
    cut_capacity = Fraction(len(cut_edges))
    return CutWitness(
        node_set=tuple(sorted(nodes)),
        demand=tuple(demand),
        cut_edges=tuple(cut_edges),
        cut_capacity=cut_capacity,
        crossing_demand=crossing,
        required_crossing=required,
        implied_congestion_bound=crossing / cut_capacity,
    )


@dataclass(frozen=True)
class LagrangeGapReport:
    beta_star: Fraction
    exact_beta: Fraction
    exact_iterations: int
    wrapped: tuple[tuple[Fraction, Fraction, int], ...]  # (alpha, beta_tilde, iterations)
    passed: bool

    def to_obj(self) -> dict:
        return {
            "check": "lagrange_gap",
            "beta_star": rat_str(self.beta_star),
            "exact_beta_tilde": rat_str(self.exact_beta),
            "exact_iterations": self.exact_iterations,
            "wrapped": [
                {"alpha": rat_str(a), "beta_tilde": rat_str(b), "iterations": n}
                for a, b, n in self.wrapped
            ],
            "passed": self.passed,
        }


def check_lagrange_gap(
    instance: Instance,
    alphas: Sequence[Fraction] = (Fraction(3, 2), Fraction(2)),
    dim_cap: int = ptools.DEFAULT_DIM_CAP,
) -> LagrangeGapReport:
    """No-duality-gap check: the exact oracle must reproduce the dynamic
    congestion bit for bit; reservation oracles inflated by a known factor
    must land inside the approximation sandwich."""
    solver = solver_for(instance, dim_cap)
    beta_star = solver.cong_dynamic().beta
    exact_beta, exact_trace = solver.cong_lagrange()
    ok = exact_beta == beta_star
    wrapped = []
    for alpha in alphas:
        exact = solver.exact_oracle()

        def inflated(lam, _exact=exact, _alpha=alpha):
            return tuple(_alpha * ue for ue in _exact(lam))

        beta_a, trace_a = solver.cong_lagrange(oracle=inflated, alpha=alpha)
        ok = ok and beta_star <= beta_a <= alpha * beta_star
        wrapped.append((alpha, beta_a, len(trace_a.iterations)))
    return LagrangeGapReport(
        beta_star=beta_star,
        exact_beta=exact_beta,
        exact_iterations=len(exact_trace.iterations),
        wrapped=tuple(wrapped),
        passed=ok,
    )


@dataclass(frozen=True)
class StaticMachineryReport:
    lambda_stat: tuple[Fraction, ...]
    normalization: Fraction
    cong_static: Fraction
    lin_static_at_stat: Fraction
    lin_dynamic_at_stat: Fraction
    cong_dynamic: Fraction
    gap_ratio: Fraction | None
    passed: bool

    def to_obj(self) -> dict:
        return {
            "check": "static_machinery",
            "lambda_stat": [rat_str(x) for x in self.lambda_stat],
            "normalization": rat_str(self.normalization),
            "cong_static": rat_str(self.cong_static),
            "lin_static_at_stat": rat_str(self.lin_static_at_stat),
            "lin_dynamic_at_stat": rat_str(self.lin_dynamic_at_stat),
            "cong_dynamic": rat_str(self.cong_dynamic),
            "gap_ratio": None if self.gap_ratio is None else rat_str(self.gap_ratio),
            "passed": self.passed,
        }


def check_static_machinery(
    instance: Instance, dim_cap: int = ptools.DEFAULT_DIM_CAP
) -> StaticMachineryReport:
    """Static-dual identities: the extracted cost vector is normalized
    against capacities, prices the static design at exactly the static
    congestion, and weakly separates dynamic from static."""
    solver = solver_for(instance, dim_cap)
    lam = solver.extract_lambda_stat()
    g = instance.graph
    norm = sum(
        (l * e.capacity for l, e in zip(lam, g.edges) if l != 0),
        ZERO,
    )
    beta_static = solver.cong_static().beta
    beta_dynamic = solver.cong_dynamic().beta
    lin_stat = solver.lin_static(lam).value
    lin_dyn = solver.lin_dynamic(lam).value
    ok = (
        norm == 1
        and all(l >= 0 for l in lam)
        and lin_stat == beta_static
        and lin_dyn <= beta_dynamic <= beta_static
    )
    gap = None if lin_dyn == 0 else lin_stat / lin_dyn
    return StaticMachineryReport(
        lambda_stat=lam,
        normalization=norm,
        cong_static=beta_static,
        lin_static_at_stat=lin_stat,
        lin_dynamic_at_stat=lin_dyn,
        cong_dynamic=beta_dynamic,
        gap_ratio=gap,
        passed=ok,
    )


def size_metrics(instance: Instance) -> dict:
    """Size table row: counts, max degree, and the log ratio of nodes to
    degree (reported only; the closed-form degree is asymptotic)."""
    g = instance.graph
    degree = g.max_degree()
    out = {
        "nodes": g.node_count,
        "edges": len(g.edges),
        "commodities": len(instance.commodities),
        "max_degree": degree,
        "log_nodes_over_degree": math.log(g.node_count / degree) if degree else None,
    }
    meta = instance.meta
    if meta.get("family") == "gamma":
        m, gamma = int(meta["m"]), int(meta["gamma"])
        out["formula_degree"] = m**gamma
        out["gamma_log3_plus_log_two_thirds"] = gamma * math.log(3) + math.log(2 / 3)
    return out


def default_assignment(phi: CnfFormula) -> int:
    a = satisfying_assignment(phi)
    if a is None:
        raise WitnessError("formula is unsatisfiable; no cut witness exists")
    return a
