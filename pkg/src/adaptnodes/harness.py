"""Test problems, solution-based monitors and uniform/adaptive comparison runs."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import collocation
from .domain import NodeSet, ParametricBoundary, get_boundary, plan_refinement, to_computational, to_physical, uniform_nodes
from .rectmesh import adapt

logger = logging.getLogger(__name__)

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]
Gradient = Callable[[np.ndarray, np.ndarray], tuple]

RESIDUAL_LIMIT = 1e-8


@dataclass(frozen=True)
class Problem:
    """Dirichlet Poisson problem ``Laplace u = f``, ``u = g`` on the boundary."""

    name: str
    boundary: ParametricBoundary
    f: Field
    g: Field
    u_exact: Field | None = None
    grad_u_exact: Gradient | None = None
    description: str = ""


def _ex1() -> Problem:
    def u(x, y):
        return np.exp(x * x + y * y)

    return Problem(
        name="ex1",
        boundary=get_boundary("ellipse-a1-b0.5"),
        f=lambda x, y: 4.0 * u(x, y) + 4.0 * (x * x + y * y) * u(x, y),
        g=u,
        u_exact=u,
        grad_u_exact=lambda x, y: (2.0 * x * u(x, y), 2.0 * y * u(x, y)),
        description="u = exp(x^2 + y^2) inside x^2 + 4y^2 = 1",
    )


def _ex2() -> Problem:
    def u(x, y):
        return np.exp(4.0 - x * x - y * y)

    return Problem(
        name="ex2",
        boundary=get_boundary("ellipse-a1-b0.5"),
        f=lambda x, y: -4.0 * u(x, y) + 4.0 * (x * x + y * y) * u(x, y),
        g=u,
        u_exact=u,
        grad_u_exact=lambda x, y: (-2.0 * x * u(x, y), -2.0 * y * u(x, y)),
        description="u = exp(4 - x^2 - y^2) inside x^2 + 4y^2 = 1",
    )


def _ex3() -> Problem:
    def u(x, y):
        return x * x + y * y

    return Problem(
        name="ex3",
        boundary=get_boundary("star"),
        f=lambda x, y: np.full(np.shape(x), 4.0),
        g=u,
        u_exact=u,
        grad_u_exact=lambda x, y: (2.0 * x, 2.0 * y),
        description="u = x^2 + y^2 inside the 'star' curve",
    )


def _const() -> Problem:
    def one(x, y):
        return np.ones(np.shape(x))

    return Problem(
        name="const",
        boundary=get_boundary("ellipse-a1-b0.5"),
        f=lambda x, y: np.zeros(np.shape(x)),
        g=one,
        u_exact=one,
        grad_u_exact=lambda x, y: (np.zeros(np.shape(x)), np.zeros(np.shape(x))),
        description="u = 1 inside x^2 + 4y^2 = 1",
    )


PROBLEMS: dict[str, Callable[[], Problem]] = {
    "ex1": _ex1,
    "ex2": _ex2,
    "ex3": _ex3,
    "const": _const,
}

TABLE_COLUMNS: dict[str, list[tuple[int, int]]] = {
    "ex1": [(25, 4), (31, 5), (37, 6), (43, 7), (50, 8), (56, 9), (63, 10), (69, 11)],
    "ex2": [(25, 4), (31, 5), (37, 6), (43, 7), (50, 8), (56, 9), (63, 10), (69, 11)],
    "ex3": [(25, 4), (30, 5), (45, 8), (55, 9), (65, 11), (75, 12)],
}

# published node totals and RMS errors, for side-by-side display
REFERENCE_TABLES: dict[str, dict[str, list[float]]] = {
    "ex1": {
        "n": [60, 86, 124, 162, 212, 266, 328, 398],
        "adaptive": [1.04e-3, 8.47e-5, 5.15e-5, 2.31e-6, 4.81e-6, 5.14e-7, 4.75e-7, 7.67e-8],
        "uniform": [2.53e-3, 9.24e-4, 3.42e-4, 1.36e-4, 5.57e-5, 2.37e-5, 1.09e-5, 4.80e-6],
    },
    "ex2": {
        "n": [60, 86, 124, 162, 212, 266, 328, 398],
        "adaptive": [3.055e-4, 3.76e-4, 1.42e-4, 6.32e-5, 1.91e-5, 7.23e-6, 2.50e-6, 8.43e-7],
        "uniform": [2.89e-4, 3.75e-4, 2.26e-4, 1.03e-4, 4.32e-5, 1.78e-5, 7.83e-6, 3.13e-6],
    },
    "ex3": {
        "n": [60, 78, 142, 262, 366, 460],
        "adaptive": [1.13e-3, 3.80e-5, 2.54e-5, 3.21e-6, 3.80e-7, 1.81e-7],
        "uniform": [1.85e-3, 7.62e-4, 5.40e-5, 2.27e-5, 5.34e-6, 2.46e-6],
    },
}


def get_problem(problem_id: str) -> Problem:
    if not problem_id:
        raise ValueError("a problem id is required")
    try:
        return PROBLEMS[problem_id]()
    except KeyError:
        raise KeyError(f"unknown problem {problem_id!r}; known: {sorted(PROBLEMS)}") from None


def chain_rule_monitors(grad_u: Gradient, boundary: ParametricBoundary):
    """Arc-length monitors in the theta and r directions.

    ``u_theta = u_x r g1'(theta) + u_y r g2'(theta)`` and
    ``u_r = u_x g1(theta) + u_y g2(theta)``; each monitor is
    ``sqrt(1 + derivative**2)``.
    """
    if grad_u is None:
        raise ValueError("monitors need the solution gradient")

    def monitor_theta(theta, r):
        theta = np.asarray(theta, dtype=float)
        r = np.asarray(r, dtype=float)
        x, y = to_physical(theta, r, boundary)
        ux, uy = grad_u(x, y)
        u_theta = r * (ux * boundary.dg1(theta) + uy * boundary.dg2(theta))
        return np.sqrt(1.0 + u_theta**2)

    def monitor_r(theta, r):
        theta = np.asarray(theta, dtype=float)
        r = np.asarray(r, dtype=float)
        x, y = to_physical(theta, r, boundary)
        ux, uy = grad_u(x, y)
        u_r = ux * boundary.g1(theta) + uy * boundary.g2(theta)
        return np.sqrt(1.0 + u_r**2)

    return monitor_theta, monitor_r


def rbf_gradient(solution: collocation.RbfSolution) -> Gradient:
    """Gradient callable of an RBF expansion, for solution-driven monitors."""

    def grad(x, y):
        x = np.asarray(x, dtype=float)
        pts = np.column_stack([np.ravel(x), np.ravel(np.broadcast_to(y, x.shape))])
        gr = collocation.evaluate_gradient(solution, pts)
        return gr[:, 0].reshape(x.shape), gr[:, 1].reshape(x.shape)

    return grad


def sample_test_points(
    boundary: ParametricBoundary,
    count: int,
    seed: int,
    nodes: np.ndarray | None = None,
    min_distance: float = 1e-9,
) -> np.ndarray:
    """Uniform random points in the physical domain, away from the nodes.

    Candidates are drawn in the bounding box and kept when their
    computational radius is at most 1.
    """
    if count < 1:
        raise ValueError("need at least one test point")
    rng = np.random.default_rng(seed)
    dense = boundary.point(np.linspace(0.0, 2.0 * np.pi, 2048, endpoint=False))
    lo, hi = dense.min(axis=0), dense.max(axis=0)
    tree = cKDTree(nodes) if nodes is not None and len(nodes) else None
    kept: list[np.ndarray] = []
    have = 0
    while have < count:
        cand = rng.uniform(lo, hi, size=(max(2 * count, 64), 2))
        _, r = to_computational(cand[:, 0], cand[:, 1], boundary)
        cand = cand[r <= 1.0]
        if tree is not None and len(cand):
            d, _ = tree.query(cand)
            cand = cand[d > min_distance]
        kept.append(cand)
        have += len(cand)
    return np.vstack(kept)[:count]


def rms_error(
    approx: Callable[[np.ndarray], np.ndarray],
    problem: Problem,
    n_test: int = 200,
    seed: int = 0,
    nodes: np.ndarray | None = None,
) -> float:
    """Root-mean-square error of ``approx`` over random interior test points."""
    if problem.u_exact is None:
        raise ValueError(f"problem {problem.name!r} has no exact solution")
    pts = sample_test_points(problem.boundary, n_test, seed, nodes)
    err = np.asarray(approx(pts)) - problem.u_exact(pts[:, 0], pts[:, 1])
    return float(np.sqrt(np.sum(err**2) / len(pts)))


class RunError(RuntimeError):
    """A run failed; ``stage`` names where."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunReport:
    problem: str
    mode: str
    n_theta: int
    n_r: int
    n_total: int
    rms: float
    residual: float
    cond_estimate: float
    seed: int
    elapsed_ms: float
    monitor: str = "exact"
    n_test: int = 200
    relative_residual: float = 0.0
    ill_conditioned: bool = False
    nodes: NodeSet | None = field(default=None, repr=False, compare=False)
    solution: collocation.RbfSolution | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("nodes")
        out.pop("solution")
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def build_nodes(
    problem: Problem,
    n_theta: int,
    n_r: int | None = None,
    mode: str = "adaptive",
    monitor: str = "exact",
    include_origin: bool = False,
    recompute_plan: bool = False,
    augment: bool = False,
) -> NodeSet:
    """Uniform or adaptive collocation nodes for ``problem``."""
    boundary = problem.boundary
    plan = plan_refinement(boundary, n_theta, n_r)
    if mode == "uniform":
        return uniform_nodes(boundary, n_theta, plan=plan, include_origin=include_origin)
    if mode != "adaptive":
        raise ValueError(f"mode must be 'uniform' or 'adaptive', got {mode!r}")
    if monitor == "exact":
        grad = problem.grad_u_exact
        if grad is None:
            raise ValueError(f"problem {problem.name!r} has no exact gradient")
    elif monitor == "iterative":
        # one solve on the uniform nodes drives the monitors
        pilot = uniform_nodes(boundary, n_theta, plan=plan, include_origin=include_origin)
        sol = collocation.solve(collocation.assemble(pilot, problem.f, problem.g, augment=augment))
        grad = rbf_gradient(sol)
    else:
        raise ValueError(f"monitor must be 'exact' or 'iterative', got {monitor!r}")
    m_theta, m_r = chain_rule_monitors(grad, boundary)
    return adapt(
        boundary,
        m_theta,
        m_r,
        n_theta,
        plan=plan,
        recompute_plan=recompute_plan,
        include_origin=include_origin,
    )


def run_case(
    problem_id: str,
    n_theta: int,
    n_r: int | None = None,
    mode: str = "adaptive",
    monitor: str = "exact",
    seed: int = 0,
    n_test: int = 200,
    include_origin: bool = False,
    recompute_plan: bool = False,
    augment: bool = False,
) -> RunReport:
    """Generate nodes, solve by collocation and measure the RMS error."""
    problem = get_problem(problem_id)
    start = time.perf_counter()
    try:
        n_r = plan_refinement(problem.boundary, n_theta, n_r).n_r
        nodes = build_nodes(problem, n_theta, n_r, mode, monitor, include_origin, recompute_plan, augment)
    except Exception as exc:
        raise RunError("nodes", exc) from exc
    try:
        system = collocation.assemble(nodes, problem.f, problem.g, augment=augment)
    except Exception as exc:
        raise RunError("assemble", exc) from exc
    try:
        sol = collocation.solve(system)
    except Exception as exc:
        raise RunError("solve", exc) from exc
    try:
        rms = rms_error(sol, problem, n_test=n_test, seed=seed, nodes=nodes.points)
    except Exception as exc:
        raise RunError("rms", exc) from exc
    elapsed = 1e3 * (time.perf_counter() - start)

    rel = sol.diagnostics["relative_residual"]
    if rel > RESIDUAL_LIMIT:
        logger.warning("%s %s (%d, %s): relative residual %.2e", problem_id, mode, n_theta, n_r, rel)
    return RunReport(
        problem=problem.name,
        mode=mode,
        n_theta=int(n_theta),
        n_r=int(n_r),
        n_total=nodes.n_total,
        rms=rms,
        residual=sol.residual,
        cond_estimate=sol.cond_estimate,
        seed=int(seed),
        elapsed_ms=elapsed,
        monitor=monitor,
        n_test=int(n_test),
        relative_residual=rel,
        ill_conditioned=bool(rel > RESIDUAL_LIMIT),
        nodes=nodes,
        solution=sol,
    )


MODES = ("adaptive", "uniform")


@dataclass
class ComparisonTable:
    problem: str
    columns: list[tuple[int, int]]
    cells: dict[str, list[RunReport | None]]
    errors: dict[str, list[str | None]]

    def to_dict(self) -> dict:
        rows = {}
        for mode in MODES:
            rows[mode] = [
                rep.to_dict() if rep is not None else {"error": err}
                for rep, err in zip(self.cells[mode], self.errors[mode])
            ]
        return {"problem": self.problem, "columns": [list(c) for c in self.columns], "rows": rows}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def to_text(self, reference: bool = True) -> str:
        """Aligned text: a header of (n_theta, n_r), the node totals and one RMS row per mode."""
        head = ["n_theta, n_r"] + [f"{a},{b}" for a, b in self.columns]
        totals = []
        for k in range(len(self.columns)):
            rep = self.cells["adaptive"][k] or self.cells["uniform"][k]
            totals.append(str(rep.n_total) if rep is not None else "-")
        lines = [head, ["n"] + totals]
        for mode in MODES:
            lines.append(
                [mode.capitalize()]
                + [f"{rep.rms:.2E}" if rep is not None else "FAILED" for rep in self.cells[mode]]
            )
        ref = REFERENCE_TABLES.get(self.problem)
        if reference and ref is not None and len(ref["n"]) == len(self.columns):
            lines.append(["ref n"] + [str(v) for v in ref["n"]])
            for mode in MODES:
                lines.append([f"ref {mode}"] + [f"{v:.2E}" for v in ref[mode]])
        widths = [max(len(row[c]) for row in lines) for c in range(len(head))]
        return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in lines)


def run_table(
    problem_id: str,
    columns: Sequence[tuple[int, int]] | None = None,
    **kwargs,
) -> ComparisonTable:
    """Run both modes for every ``(n_theta, n_r)`` column; failed cells are recorded."""
    problem = get_problem(problem_id)
    if columns is None:
        columns = TABLE_COLUMNS.get(problem.name)
    columns = [tuple(int(v) for v in c) for c in (columns or [])]
    if not columns:
        raise ValueError("at least one (n_theta, n_r) column is required")
    cells: dict[str, list] = {m: [] for m in MODES}
    errors: dict[str, list] = {m: [] for m in MODES}
    for n_theta, n_r in columns:
        for mode in MODES:
            try:
                cells[mode].append(run_case(problem.name, n_theta, n_r, mode=mode, **kwargs))
                errors[mode].append(None)
            except RunError as exc:
                logger.error("cell (%d, %d) %s: %s", n_theta, n_r, mode, exc)
                cells[mode].append(None)
                errors[mode].append(str(exc))
    return ComparisonTable(problem.name, columns, cells, errors)
