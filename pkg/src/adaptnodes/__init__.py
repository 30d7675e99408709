"""Adaptive collocation nodes for star-shaped 2D domains.

Nodes are equidistributed in a (theta, r) rectangle and mapped onto the
physical domain; a thin-plate-spline collocation solver for the Poisson
problem measures their effect on accuracy.
"""

from .collocation import (
    TPS4,
    CollocationSystem,
    RbfSolution,
    SingularSystemError,
    assemble,
    evaluate,
    solve,
    tps4,
    tps4_laplacian,
)
from .domain import (
    NodeSet,
    ParametricBoundary,
    RefinementPlan,
    get_boundary,
    plan_refinement,
    to_physical,
    uniform_nodes,
)
from .equidist import MonitorSamples, Partition1D, cumulative_arclength, equidistribute, reposition_on_polyline
from .harness import RunReport, chain_rule_monitors, get_problem, rms_error, run_case, run_table
from .rectmesh import adapt

__version__ = "0.1.0"
