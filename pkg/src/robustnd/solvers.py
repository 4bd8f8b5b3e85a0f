"""Robust design solvers over the demand uncertainty set.

All optimizations reduce over the demand polytope's vertices (hints when
present, generic enumeration otherwise).  Since minimum congestion and
worst-case edge loads are coordinatewise monotone in the demand and every
reservation supporting a demand vector supports any componentwise-smaller
one, only the componentwise-maximal vertices are ever binding; solvers work
on that Pareto subset, which is an exact reduction.

The cutting-plane reduction from congestion to linear-cost design keeps one
re-optimizing LP per instance: the monolithic linear-cost program is built
once and re-solved from its previous basis when only the cost vector moves.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from . import lp
from .flow import FlowBlock, FlowSolution, InfeasibleDemandError, edge_loads, min_congestion as _min_congestion
from .model import Capacity, Instance, is_finite_cap
from .polytope import (
    DEFAULT_DIM_CAP,
    DimensionCapError,
    enumerate_vertices,
    maximize_linear,
    pareto_maximal,
)

ZERO = Fraction(0)
ONE = Fraction(1)

DEFAULT_MAX_ITERS = 1000

Oracle = Callable[[tuple[Fraction, ...]], Sequence[Fraction]]


class SolverError(Exception):
    pass


class VertexUnavailableError(SolverError):
    """No vertex list available: raise dim_cap or supply vertex hints."""


class PathRestrictionError(SolverError):
    pass


class IterationLimitError(SolverError):
    """Cutting-plane iteration cap exceeded; carries the trace so far."""

    def __init__(self, message: str, trace: "LagrangeTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class CongestionResult:
    beta: Fraction
    worst_vertex: tuple[Fraction, ...]
    flows_by_vertex: tuple[tuple[tuple[Fraction, ...], FlowSolution], ...]


@dataclass(frozen=True)
class LinearDesignResult:
    value: Fraction
    reservation: tuple[Fraction, ...]
    flows_by_vertex: tuple[tuple[tuple[Fraction, ...], FlowSolution], ...]


@dataclass(frozen=True)
class StaticCongestionResult:
    beta: Fraction
    template: tuple[tuple[tuple[Fraction, Fraction], ...], ...]


@dataclass(frozen=True)
class LinearStaticResult:
    value: Fraction
    template: tuple[tuple[tuple[Fraction, Fraction], ...], ...]
    reservation: tuple[Fraction, ...]


@dataclass(frozen=True)
class LagrangeIteration:
    lam: tuple[Fraction, ...]
    reservation: tuple[Fraction, ...]
    master_value: Fraction
    oracle_value: Fraction


@dataclass(frozen=True)
class LagrangeTrace:
    """Cutting-plane log: one entry per master round, plus the outcome."""

    iterations: tuple[LagrangeIteration, ...]
    beta_tilde: Fraction
    alpha: Fraction


class InstanceSolver:
    """Caches vertices, flow systems, and re-optimizable LPs per instance."""

    def __init__(self, instance: Instance, dim_cap: int = DEFAULT_DIM_CAP):
        self.instance = instance
        self.dim_cap = dim_cap
        self._vertices: tuple[tuple[Fraction, ...], ...] | None = None
        self._active: tuple[tuple[Fraction, ...], ...] | None = None
        self._cong_dynamic: CongestionResult | None = None
        self._cong_static: StaticCongestionResult | None = None
        self._lambda_stat: tuple[Fraction, ...] | None = None
        self._lin_dyn_solver = None
        self._lin_dyn_blocks = None
        self._lin_dyn_uvars = None
        self._lin_dyn_memo: dict[tuple[Fraction, ...], LinearDesignResult] = {}
        self._lin_stat_solver = None
        self._lin_stat_block = None
        self._lin_stat_uvars = None
        self._lin_stat_memo: dict[tuple[Fraction, ...], LinearStaticResult] = {}
        self._static_solver = None
        self._static_block = None
        self._static_parts = None

    # -- vertex handling ----------------------------------------------

    def vertices(self) -> tuple[tuple[Fraction, ...], ...]:
        """Demand projections of all lifted vertices (hints or enumeration)."""
        if self._vertices is None:
            hints = self.instance.polytope.vertex_hints
            if hints is not None:
                self._vertices = tuple(sorted(set(hints)))
            else:
                try:
                    self._vertices = enumerate_vertices(self.instance.polytope, self.dim_cap)
                except DimensionCapError as exc:
                    raise VertexUnavailableError(
                        f"{exc}; raise dim_cap or supply vertex_hints"
                    ) from exc
        return self._vertices

    def active_vertices(self) -> tuple[tuple[Fraction, ...], ...]:
        if self._active is None:
            self._active = pareto_maximal(self.vertices())
        return self._active

    def _finite_edges(self) -> list[int]:
        return [e for e, edge in enumerate(self.instance.graph.edges) if is_finite_cap(edge.capacity)]

    # -- dynamic congestion ---------------------------------------------

    def cong_dynamic(self) -> CongestionResult:
        """Exact max over demand vertices of the min-congestion routing."""
        if self._cong_dynamic is None:
            g, comms = self.instance.graph, self.instance.commodities
            best: Fraction | None = None
            best_vertex: tuple[Fraction, ...] | None = None
            per_vertex = []
            for v in self.active_vertices():
                beta, flow = _min_congestion(g, comms, v)
                per_vertex.append((v, flow))
                if best is None or beta > best:
                    best, best_vertex = beta, v
            if best is None:  # empty vertex list cannot happen for valid polytopes
                raise VertexUnavailableError("demand polytope yielded no vertices")
            self._cong_dynamic = CongestionResult(
                beta=best, worst_vertex=best_vertex, flows_by_vertex=tuple(per_vertex)
            )
        return self._cong_dynamic

    # -- linear-cost design under dynamic routing -------------------------

    def _ensure_lin_dynamic(self) -> None:
        if self._lin_dyn_solver is not None:
            return
        g, comms = self.instance.graph, self.instance.commodities
        b = lp.LpBuilder(lp.MIN)
        uvars = [b.add_var(f"u{e}") for e in range(len(g.edges))]
        blocks = []
        for k, v in enumerate(self.active_vertices()):
            block = FlowBlock(b, g, comms, v, tag=f"v{k}.")
            blocks.append((v, block))
            for e in range(len(g.edges)):
                coeffs = {var: ONE for var in block.load_vars[e]}
                if coeffs:
                    coeffs[uvars[e]] = -ONE
                    b.add_row(coeffs, lp.LE, ZERO)
        self._lin_dyn_solver = lp.ParametricSolver(b.build())
        self._lin_dyn_blocks = blocks
        self._lin_dyn_uvars = uvars

    def lin_dynamic(self, lam: Sequence[Fraction]) -> LinearDesignResult:
        """Minimum-cost reservation supporting every demand vertex.

        One monolithic LP: shared reservation variables plus one full flow
        system per maximal demand vertex.  A reservation supporting those
        supports all of the demand polytope (scaling and convexity).
        """
        lam = self._check_lambda(lam)
        cached = self._lin_dyn_memo.get(lam)
        if cached is not None:
            return cached
        self._ensure_lin_dynamic()
        n = self._lin_dyn_solver.lp.num_vars
        objective = [ZERO] * n
        for e, var in enumerate(self._lin_dyn_uvars):
            objective[var] = lam[e]
        res = self._lin_dyn_solver.solve(objective=objective)
        if res.status != lp.OPTIMAL:
            raise InfeasibleDemandError(
                "a demand vertex cannot be routed (disconnected commodity endpoints)"
            )
        u = tuple(res.x[var] for var in self._lin_dyn_uvars)
        flows = []
        for v, block in self._lin_dyn_blocks:
            fs = block.extract_flows(res.x)
            loads = edge_loads(self.instance.graph, fs)
            if any(load > ue for load, ue in zip(loads, u)):
                raise lp.LpInternalError("reservation does not cover a vertex routing")
            beta = max(
                (load / ue for load, ue in zip(loads, u) if ue > 0),
                default=ZERO,
            )
            flows.append((v, FlowSolution(flows=fs, congestion=beta)))
        result = LinearDesignResult(value=res.objective, reservation=u, flows_by_vertex=tuple(flows))
        self._lin_dyn_memo[lam] = result
        return result

    def _check_lambda(self, lam: Sequence[Fraction]) -> tuple[Fraction, ...]:
        lam = tuple(lam)
        if len(lam) != len(self.instance.graph.edges):
            raise SolverError("cost vector length does not match edge count")
        if any(l < 0 for l in lam):
            raise SolverError("cost vector must be nonnegative")
        return lam

    # -- Lagrange cutting plane -------------------------------------------

    def exact_oracle(self) -> Oracle:
        return lambda lam: self.lin_dynamic(lam).reservation

    def cong_lagrange(
        self,
        oracle: Oracle | None = None,
        alpha: Fraction = ONE,
        max_iters: int = DEFAULT_MAX_ITERS,
    ) -> tuple[Fraction, LagrangeTrace]:
        """Cutting-plane solve of the congestion dual via a design oracle.

        The master maximizes ``beta`` subject to ``sum lam_e c_e = 1`` and one
        cut ``beta <= lam . u`` per oracle reservation; a round either adds a
        strictly violated cut or stops.  With an exact oracle the returned
        value equals the dynamic congestion; an alpha-approximate oracle
        yields a value within [beta*, alpha beta*].
        """
        if oracle is None:
            oracle = self.exact_oracle()
        g = self.instance.graph
        finite = self._finite_edges()
        if not finite:
            return ZERO, LagrangeTrace(iterations=(), beta_tilde=ZERO, alpha=alpha)

        uniform = tuple(ONE if e in set(finite) else ZERO for e in range(len(g.edges)))
        cuts: list[tuple[Fraction, ...]] = [tuple(oracle(uniform))]
        iterations: list[LagrangeIteration] = []
        prev_master: Fraction | None = None
        for _ in range(max_iters):
            beta_p, lam_p = self._solve_master(finite, cuts)
            if prev_master is not None and beta_p > prev_master:
                raise lp.LpInternalError("master value increased across cut additions")
            prev_master = beta_p
            u = tuple(oracle(lam_p))
            val = sum((l * ue for l, ue in zip(lam_p, u)), ZERO)
            iterations.append(
                LagrangeIteration(lam=lam_p, reservation=u, master_value=beta_p, oracle_value=val)
            )
            if beta_p > val:
                cuts.append(u)
            else:
                return beta_p, LagrangeTrace(
                    iterations=tuple(iterations), beta_tilde=beta_p, alpha=alpha
                )
        raise IterationLimitError(
            f"cutting plane did not converge within {max_iters} iterations",
            LagrangeTrace(
                iterations=tuple(iterations),
                beta_tilde=prev_master if prev_master is not None else ZERO,
                alpha=alpha,
            ),
        )

    def _solve_master(
        self, finite: list[int], cuts: list[tuple[Fraction, ...]]
    ) -> tuple[Fraction, tuple[Fraction, ...]]:
        g = self.instance.graph
        b = lp.LpBuilder(lp.MAX)
        beta = b.add_var("beta", lower=None, objective=ONE)
        lam_vars = {e: b.add_var(f"lam{e}") for e in finite}
        b.add_row({lam_vars[e]: g.edges[e].capacity for e in finite}, lp.EQ, ONE)
        for u in cuts:
            coeffs = {beta: ONE}
            for e in finite:
                if u[e] != 0:
                    coeffs[lam_vars[e]] = -u[e]
            b.add_row(coeffs, lp.LE, ZERO)
        res = lp.solve(b.build())
        if res.status != lp.OPTIMAL:
            raise lp.LpInternalError(f"master LP ended {res.status}")
        lam_full = [ZERO] * len(g.edges)
        for e, var in lam_vars.items():
            lam_full[e] = res.x[var]
        return res.x[beta], tuple(lam_full)

    # -- static (oblivious) routing ---------------------------------------

    def _ensure_static(self) -> None:
        """Static congestion LP in reservation form: template x, loads <= u,
        u <= c beta on finite-capacity edges; duals of the latter rows give
        the normalized cost vector of the static congestion dual."""
        if self._static_solver is not None:
            return
        g, comms = self.instance.graph, self.instance.commodities
        b = lp.LpBuilder(lp.MIN)
        beta = b.add_var("beta", lower=None, objective=ONE)
        uvars = [b.add_var(f"u{e}") for e in range(len(g.edges))]
        block = FlowBlock(b, g, comms, tuple(ONE for _ in comms), tag="x.")
        for v in self.active_vertices():
            for e in range(len(g.edges)):
                coeffs: dict[int, Fraction] = {}
                for h in block.active:
                    if v[h] == 0:
                        continue
                    for var in block.comm_load_vars[h][e]:
                        coeffs[var] = coeffs.get(var, ZERO) + v[h]
                if coeffs:
                    coeffs[uvars[e]] = -ONE
                    b.add_row(coeffs, lp.LE, ZERO)
        cap_rows = {}
        for e in self._finite_edges():
            cap_rows[e] = b.add_row({uvars[e]: ONE, beta: -g.edges[e].capacity}, lp.LE, ZERO)
        self._static_solver = lp.ParametricSolver(b.build())
        self._static_block = block
        self._static_parts = (beta, uvars, cap_rows)

    def cong_static(self) -> StaticCongestionResult:
        """Best congestion of a single routing template against all vertices."""
        if self._cong_static is None:
            self._ensure_static()
            res = self._static_solver.solve()
            if res.status != lp.OPTIMAL:
                raise InfeasibleDemandError("no unit routing template exists")
            beta_var, _, cap_rows = self._static_parts
            template = self._static_block.extract_flows(res.x)
            self._cong_static = StaticCongestionResult(beta=res.x[beta_var], template=template)
            duals = res.dual
            lam = [ZERO] * len(self.instance.graph.edges)
            for e, row in cap_rows.items():
                lam[e] = max(-duals[row], ZERO)
            total = sum(
                (lam[e] * self.instance.graph.edges[e].capacity for e in cap_rows), ZERO
            )
            if total != 1:
                # Degenerate zero-congestion case: normalize on the first
                # finite-capacity edge (any normalized lambda is optimal).
                if self._cong_static.beta != 0 or not cap_rows:
                    raise lp.LpInternalError("static dual is not normalized")
                lam = [ZERO] * len(lam)
                e0 = next(iter(cap_rows))
                lam[e0] = ONE / self.instance.graph.edges[e0].capacity
            self._lambda_stat = tuple(lam)
        return self._cong_static

    def extract_lambda_stat(self) -> tuple[Fraction, ...]:
        """Optimal dual cost vector of the static congestion program:
        nonnegative, normalized against capacities, and supported on
        finite-capacity edges."""
        self.cong_static()
        assert self._lambda_stat is not None
        return self._lambda_stat

    def _ensure_lin_static(self) -> None:
        if self._lin_stat_solver is not None:
            return
        g, comms = self.instance.graph, self.instance.commodities
        b = lp.LpBuilder(lp.MIN)
        uvars = [b.add_var(f"u{e}") for e in range(len(g.edges))]
        block = FlowBlock(b, g, comms, tuple(ONE for _ in comms), tag="x.")
        for v in self.active_vertices():
            for e in range(len(g.edges)):
                coeffs: dict[int, Fraction] = {}
                for h in block.active:
                    if v[h] == 0:
                        continue
                    for var in block.comm_load_vars[h][e]:
                        coeffs[var] = coeffs.get(var, ZERO) + v[h]
                if coeffs:
                    coeffs[uvars[e]] = -ONE
                    b.add_row(coeffs, lp.LE, ZERO)
        self._lin_stat_solver = lp.ParametricSolver(b.build())
        self._lin_stat_block = block
        self._lin_stat_uvars = uvars

    def lin_static(self, lam: Sequence[Fraction]) -> LinearStaticResult:
        """Minimum-cost reservation covering a single template's worst loads."""
        lam = self._check_lambda(lam)
        cached = self._lin_stat_memo.get(lam)
        if cached is not None:
            return cached
        self._ensure_lin_static()
        n = self._lin_stat_solver.lp.num_vars
        objective = [ZERO] * n
        for e, var in enumerate(self._lin_stat_uvars):
            objective[var] = lam[e]
        res = self._lin_stat_solver.solve(objective=objective)
        if res.status != lp.OPTIMAL:
            raise InfeasibleDemandError("no unit routing template exists")
        u = tuple(res.x[var] for var in self._lin_stat_uvars)
        result = LinearStaticResult(
            value=res.objective, template=self._lin_stat_block.extract_flows(res.x), reservation=u
        )
        self._lin_stat_memo[lam] = result
        return result

    # -- one path per commodity -------------------------------------------

    def cong_one_path(self) -> Fraction:
        """Closed-form congestion when every commodity has exactly one path:
        per edge, the maximum total demand of the commodities crossing it,
        scaled by the capacity."""
        g, comms = self.instance.graph, self.instance.commodities
        for h, c in enumerate(comms):
            if c.allowed_paths is None or len(c.allowed_paths) != 1:
                raise PathRestrictionError(
                    f"commodity {h} does not have exactly one allowed path"
                )
        best = ZERO
        for e in self._finite_edges():
            w = [ONE if e in comms[h].allowed_paths[0] else ZERO for h in range(len(comms))]
            value, _ = maximize_linear(self.instance.polytope, w)
            ratio = value / g.edges[e].capacity
            if ratio > best:
                best = ratio
        return best


_REGISTRY: dict[int, InstanceSolver] = {}


def solver_for(instance: Instance, dim_cap: int = DEFAULT_DIM_CAP) -> InstanceSolver:
    """Shared per-instance solver (identity-keyed; holds the instance alive)."""
    found = _REGISTRY.get(id(instance))
    if found is not None and found.instance is instance:
        return found
    solver = InstanceSolver(instance, dim_cap)
    _REGISTRY[id(instance)] = solver
    return solver


def clear_solver_cache() -> None:
    _REGISTRY.clear()


def cong_dynamic(instance: Instance, dim_cap: int = DEFAULT_DIM_CAP) -> CongestionResult:
    return solver_for(instance, dim_cap).cong_dynamic()


def lin_dynamic(
    instance: Instance, lam: Sequence[Fraction], dim_cap: int = DEFAULT_DIM_CAP
) -> LinearDesignResult:
    return solver_for(instance, dim_cap).lin_dynamic(lam)


def cong_lagrange(
    instance: Instance,
    oracle: Oracle | None = None,
    alpha: Fraction = ONE,
    max_iters: int = DEFAULT_MAX_ITERS,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> tuple[Fraction, LagrangeTrace]:
    return solver_for(instance, dim_cap).cong_lagrange(oracle, alpha, max_iters)


def cong_static(instance: Instance, dim_cap: int = DEFAULT_DIM_CAP) -> StaticCongestionResult:
    return solver_for(instance, dim_cap).cong_static()


def lin_static(
    instance: Instance, lam: Sequence[Fraction], dim_cap: int = DEFAULT_DIM_CAP
) -> LinearStaticResult:
    return solver_for(instance, dim_cap).lin_static(lam)


def extract_lambda_stat(instance: Instance, dim_cap: int = DEFAULT_DIM_CAP) -> tuple[Fraction, ...]:
    return solver_for(instance, dim_cap).extract_lambda_stat()


def cong_one_path(instance: Instance, dim_cap: int = DEFAULT_DIM_CAP) -> Fraction:
    return solver_for(instance, dim_cap).cong_one_path()
