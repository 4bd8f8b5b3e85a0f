"""Robust network design under polyhedral demand uncertainty.

Exact rational tooling to build, solve, and verify minimum-congestion and
linear-cost reservation problems with dynamic or static fractional routing,
including 3-SAT gadget instance generators and a cutting-plane reduction
from congestion to linear-cost design.
"""

from .model import (
    INF,
    Commodity,
    DemandPolytope,
    Edge,
    Graph,
    Instance,
    PolytopeRow,
    instance_from_json,
    instance_to_json,
    rat,
    rat_str,
    validate,
)
from .flow import (
    FlowSolution,
    InfeasibleDemandError,
    MetricCertificate,
    RoutableResult,
    min_congestion,
    routable,
)
from .polytope import enumerate_vertices, maximize_linear
from .gadgets import (
    CnfFormula,
    compute_val,
    gen_gamma1,
    gen_hose,
    gen_recursive,
    gen_two_path,
    parse_dimacs,
)
from .solvers import (
    InstanceSolver,
    LagrangeTrace,
    cong_dynamic,
    cong_lagrange,
    cong_one_path,
    cong_static,
    extract_lambda_stat,
    lin_dynamic,
    lin_static,
)

__all__ = [
    "INF",
    "Commodity",
    "DemandPolytope",
    "Edge",
    "Graph",
    "Instance",
    "PolytopeRow",
    "CnfFormula",
    "FlowSolution",
    "InfeasibleDemandError",
    "InstanceSolver",
    "LagrangeTrace",
    "MetricCertificate",
    "RoutableResult",
    "compute_val",
    "cong_dynamic",
    "cong_lagrange",
    "cong_one_path",
    "cong_static",
    "enumerate_vertices",
    "extract_lambda_stat",
    "gen_gamma1",
    "gen_hose",
    "gen_recursive",
    "gen_two_path",
    "instance_from_json",
    "instance_to_json",
    "lin_dynamic",
    "lin_static",
    "maximize_linear",
    "min_congestion",
    "parse_dimacs",
    "rat",
    "rat_str",
    "routable",
    "validate",
]

__version__ = "0.1.0"
