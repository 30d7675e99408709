"""Three-stage adaptive node placement in the computational rectangle.

Grid curves are stored per horizontal curve ``j``. Curve ``j = 0`` is the
axis ``r = 0``; it takes part in the vertical stage as the fixed start of
every vertical polyline but is not emitted as a node. Curve ``j = m`` is the
boundary ``r = 1``.

Stages
------
1. equidistribute ``M_theta`` in theta along every horizontal line;
2. equidistribute ``M_r`` along the arc of every vertical grid curve;
3. equidistribute ``M_theta`` along the arc of every closed horizontal grid
   curve, using the refined per-curve node counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .domain import (
    TWO_PI,
    ComputationalGrid,
    NodeSet,
    ParametricBoundary,
    RefinementPlan,
    _round_half_up,
    nodes_from_curves,
    plan_refinement,
    to_physical,
)
from .equidist import MonitorSamples, cumulative_arclength, equidistribute, reposition_on_polyline

Monitor = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class StageGrid:
    """Node coordinates ``(theta, r)`` per horizontal curve ``j = 0..m``."""

    theta: tuple[np.ndarray, ...]
    r: tuple[np.ndarray, ...]
    stage: str = "uniform"

    @property
    def m(self) -> int:
        return len(self.theta) - 1

    @property
    def counts(self) -> tuple[int, ...]:
        """Node count on each curve ``j = 1..m``."""
        return tuple(t.size for t in self.theta[1:])

    @property
    def is_tensor(self) -> bool:
        return len(set(t.size for t in self.theta)) == 1

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(m + 1, n)`` arrays of theta and r; tensor stages only."""
        if not self.is_tensor:
            raise ValueError("grid no longer has a tensor structure")
        return np.vstack(self.theta), np.vstack(self.r)


def uniform_grid(n_theta: int, n_r: int) -> StageGrid:
    grid = ComputationalGrid(n_theta, n_r)
    radii = np.concatenate(([0.0], grid.radii))
    theta = tuple(grid.theta.copy() for _ in radii)
    r = tuple(np.full(n_theta, rr) for rr in radii)
    return StageGrid(theta=theta, r=r, stage="uniform")


def _closed_line(theta, r):
    """Append the seam node shifted by one period."""
    return np.concatenate((theta, [theta[0] + TWO_PI])), np.concatenate((r, [r[0]]))


def stage1_horizontal(grid: StageGrid, monitor_theta: Monitor) -> StageGrid:
    """Equidistribute ``monitor_theta`` in theta on each line, keeping ``r``."""
    th_all, r_all = grid.as_arrays()
    n = th_all.shape[1]
    new_theta = []
    for th, r in zip(th_all, r_all):
        if np.ptp(r) != 0.0:
            raise ValueError("stage 1 expects straight horizontal lines")
        t, rr = _closed_line(th, r)
        # period anchored at the seam node
        if t[0] != 0.0:
            raise ValueError("seam node must sit at theta = 0")
        vals = np.asarray(monitor_theta(t, rr), dtype=float)
        part = equidistribute(MonitorSamples(t, vals), n)
        new_theta.append(part.points[:-1])
    return StageGrid(theta=tuple(new_theta), r=tuple(r.copy() for r in r_all), stage="stage1")


def stage2_vertical(grid: StageGrid, monitor_r: Monitor) -> StageGrid:
    """Equidistribute ``monitor_r`` along the arc of each vertical grid curve."""
    th_all, r_all = grid.as_arrays()
    m = th_all.shape[0] - 1
    new_th = np.empty_like(th_all)
    new_r = np.empty_like(r_all)
    for i in range(th_all.shape[1]):
        poly = np.column_stack([th_all[:, i], r_all[:, i]])
        s = cumulative_arclength(poly)
        if np.any(np.diff(s) <= 0):
            raise ValueError(f"vertical grid curve {i} has a zero-length segment")
        vals = np.asarray(monitor_r(poly[:, 0], poly[:, 1]), dtype=float)
        part = equidistribute(MonitorSamples(s, vals), m)
        moved = reposition_on_polyline(poly, part.points)
        # ends stay put exactly
        moved[0], moved[-1] = poly[0], poly[-1]
        new_th[:, i], new_r[:, i] = moved[:, 0], moved[:, 1]
    return StageGrid(theta=tuple(new_th), r=tuple(new_r), stage="stage2")


def stage3_horizontal_refined(
    grid: StageGrid, monitor_theta: Monitor, counts: Sequence[int]
) -> StageGrid:
    """Distribute ``counts[j-1]`` nodes along the arc of closed curve ``j``.

    The seam node of each curve stays where it is; the axis curve ``j = 0``
    is passed through untouched.
    """
    counts = [int(c) for c in counts]
    if len(counts) != grid.m:
        raise ValueError(f"expected {grid.m} per-curve counts, got {len(counts)}")
    if min(counts) < 3:
        raise ValueError("every closed curve needs at least three nodes")
    new_theta = [grid.theta[0].copy()]
    new_r = [grid.r[0].copy()]
    for th, r, count in zip(grid.theta[1:], grid.r[1:], counts):
        t, rr = _closed_line(th, r)
        poly = np.column_stack([t, rr])
        s = cumulative_arclength(poly)
        if np.any(np.diff(s) <= 0):
            raise ValueError("horizontal grid curve has a zero-length segment")
        vals = np.asarray(monitor_theta(t, rr), dtype=float)
        part = equidistribute(MonitorSamples(s, vals), count)
        moved = reposition_on_polyline(poly, part.points[:-1])
        moved[0] = poly[0]
        new_theta.append(moved[:, 0])
        new_r.append(moved[:, 1])
    return StageGrid(theta=tuple(new_theta), r=tuple(new_r), stage="stage3")


def recompute_counts(grid: StageGrid, boundary: ParametricBoundary, plan: RefinementPlan) -> tuple[int, ...]:
    """Per-curve counts from the physical perimeters of the current grid curves."""
    counts = []
    for th, r in zip(grid.theta[1:], grid.r[1:]):
        x, y = to_physical(th, r, boundary)
        closed = np.column_stack([np.append(x, x[0]), np.append(y, y[0])])
        perim = cumulative_arclength(closed)[-1]
        counts.append(max(int(_round_half_up(perim / plan.delta_s)), 3))
    counts[-1] = plan.n_theta
    return tuple(counts)


def adapt_grid(
    n_theta: int,
    n_r: int,
    monitor_theta: Monitor,
    monitor_r: Monitor,
    counts: Sequence[int] | None = None,
    stages: int = 3,
) -> StageGrid:
    """Run the stages in the rectangle; ``counts`` default to ``n_theta`` per curve."""
    if stages not in (0, 1, 2, 3):
        raise ValueError("stages must be 0, 1, 2 or 3")
    grid = uniform_grid(n_theta, n_r)
    if stages >= 1:
        grid = stage1_horizontal(grid, monitor_theta)
    if stages >= 2:
        grid = stage2_vertical(grid, monitor_r)
    if stages >= 3:
        if counts is None:
            counts = [n_theta] * n_r
        grid = stage3_horizontal_refined(grid, monitor_theta, counts)
    return grid


def adapt(
    boundary: ParametricBoundary,
    monitor_theta: Monitor,
    monitor_r: Monitor,
    n_theta: int,
    n_r: int | None = None,
    stages: int = 3,
    plan: RefinementPlan | None = None,
    recompute_plan: bool = False,
    include_origin: bool = False,
) -> NodeSet:
    """Adaptive physical nodes for ``boundary``.

    Parameters
    ----------
    monitor_theta, monitor_r : callable
        ``(theta, r) -> values`` in computational coordinates.
    stages : int
        Number of stages to run. With fewer than three stages the
        (clustered) tensor grid is mapped as is.
    recompute_plan : bool
        Recount the nodes per curve from the perimeters of the curves left
        by the first two stages instead of reusing the initial plan.
    """
    if plan is None:
        plan = plan_refinement(boundary, n_theta, n_r)
    n_theta, n_r = plan.n_theta, plan.n_r
    grid = adapt_grid(n_theta, n_r, monitor_theta, monitor_r, stages=min(stages, 2))
    if stages >= 3:
        counts = recompute_counts(grid, boundary, plan) if recompute_plan else plan.n_theta_per_curve
        grid = stage3_horizontal_refined(grid, monitor_theta, counts)
    return grid_to_nodes(grid, boundary, include_origin=include_origin)


def grid_to_nodes(grid: StageGrid, boundary: ParametricBoundary, include_origin: bool = False) -> NodeSet:
    """Map curves ``j = 1..m`` of a stage grid to tagged physical nodes."""
    return nodes_from_curves(list(grid.theta[1:]), list(grid.r[1:]), boundary, include_origin=include_origin)

