"""Star-shaped boundaries and the polar-type map from the (theta, r) rectangle.

A point ``(theta, r)`` of the computational rectangle ``[0, 2pi) x [0, 1]``
is sent to ``(r * g1(theta), r * g2(theta))``; the line ``r = 1`` traces the
boundary curve.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi

CurveFn = Callable[[np.ndarray], np.ndarray]


def _central_difference(fn: CurveFn, h: float = 1e-6) -> CurveFn:
    def deriv(theta):
        theta = np.asarray(theta, dtype=float)
        return (fn(theta + h) - fn(theta - h)) / (2.0 * h)

    return deriv


@dataclass(frozen=True)
class ParametricBoundary:
    """Closed curve ``theta -> (g1(theta), g2(theta))`` around the origin.

    Derivatives fall back to central differences when not supplied.
    """

    g1: CurveFn
    g2: CurveFn
    dg1: CurveFn | None = None
    dg2: CurveFn | None = None
    name: str = "custom"
    _check_samples: int = field(default=720, repr=False, compare=False)

    def __post_init__(self):
        if self.dg1 is None:
            object.__setattr__(self, "dg1", _central_difference(self.g1))
        if self.dg2 is None:
            object.__setattr__(self, "dg2", _central_difference(self.g2))
        start = self.point(0.0)
        end = self.point(TWO_PI)
        if np.max(np.abs(start - end)) > 1e-12:
            raise ValueError(f"boundary {self.name!r} is not closed")
        theta = np.linspace(0.0, TWO_PI, self._check_samples, endpoint=False)
        if np.min(self.radius(theta)) <= 0.0:
            raise ValueError(f"boundary {self.name!r} passes through the origin")

    def point(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.stack([self.g1(theta), self.g2(theta)], axis=-1)

    def tangent(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        return np.stack([self.dg1(theta), self.dg2(theta)], axis=-1)

    def radius(self, theta) -> np.ndarray:
        """Length of the position vector of the boundary point at ``theta``."""
        theta = np.asarray(theta, dtype=float)
        return np.hypot(self.g1(theta), self.g2(theta))

    def scaled(self, factor: float) -> "ParametricBoundary":
        g1, g2, dg1, dg2 = self.g1, self.g2, self.dg1, self.dg2
        return ParametricBoundary(
            g1=lambda t: factor * g1(t),
            g2=lambda t: factor * g2(t),
            dg1=lambda t: factor * dg1(t),
            dg2=lambda t: factor * dg2(t),
            name=f"{self.name}*{factor:g}",
        )


def circle(radius: float = 1.0) -> ParametricBoundary:
    return ParametricBoundary(
        g1=lambda t: radius * np.cos(t),
        g2=lambda t: radius * np.sin(t),
        dg1=lambda t: -radius * np.sin(t),
        dg2=lambda t: radius * np.cos(t),
        name="circle",
    )


def ellipse(a: float = 1.0, b: float = 0.5) -> ParametricBoundary:
    return ParametricBoundary(
        g1=lambda t: a * np.cos(t),
        g2=lambda t: b * np.sin(t),
        dg1=lambda t: -a * np.sin(t),
        dg2=lambda t: b * np.cos(t),
        name=f"ellipse-a{a:g}-b{b:g}",
    )


def star() -> ParametricBoundary:
    """``x = cos t sqrt(1 - cos(t)/2)``, ``y = sin t sqrt(1 - sin(t)/2)``."""

    def g1(t):
        return np.cos(t) * np.sqrt(1.0 - 0.5 * np.cos(t))

    def g2(t):
        return np.sin(t) * np.sqrt(1.0 - 0.5 * np.sin(t))

    def dg1(t):
        root = np.sqrt(1.0 - 0.5 * np.cos(t))
        return -np.sin(t) * root + np.cos(t) * np.sin(t) / (4.0 * root)

    def dg2(t):
        root = np.sqrt(1.0 - 0.5 * np.sin(t))
        return np.cos(t) * root - np.sin(t) * np.cos(t) / (4.0 * root)

    return ParametricBoundary(g1=g1, g2=g2, dg1=dg1, dg2=dg2, name="star")


BOUNDARIES: dict[str, Callable[[], ParametricBoundary]] = {
    "circle": circle,
    "ellipse-a1-b0.5": lambda: ellipse(1.0, 0.5),
    "star": star,
}


def get_boundary(key: str) -> ParametricBoundary:
    try:
        return BOUNDARIES[key]()
    except KeyError:
        raise KeyError(f"unknown boundary {key!r}; known: {sorted(BOUNDARIES)}") from None


def boundary_from_table(theta, x, y, name: str = "table") -> ParametricBoundary:
    """Periodic piecewise-linear boundary through tabulated ``(theta, x, y)``.

    ``theta`` must be strictly increasing inside ``[0, 2pi)``; the curve is
    closed by joining the last row back to the first.
    """
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if theta.ndim != 1 or not (theta.shape == x.shape == y.shape):
        raise ValueError("boundary table columns must have equal length")
    if theta.size < 3:
        raise ValueError("boundary table needs at least three rows")
    if np.any(np.diff(theta) <= 0) or theta[0] < 0 or theta[-1] >= TWO_PI:
        raise ValueError("theta must be strictly increasing within [0, 2pi)")
    tt = np.concatenate((theta, [theta[0] + TWO_PI]))
    xx = np.concatenate((x, [x[0]]))
    yy = np.concatenate((y, [y[0]]))

    def g1(t):
        return np.interp(np.mod(np.asarray(t, dtype=float) - tt[0], TWO_PI) + tt[0], tt, xx)

    def g2(t):
        return np.interp(np.mod(np.asarray(t, dtype=float) - tt[0], TWO_PI) + tt[0], tt, yy)

    return ParametricBoundary(g1=g1, g2=g2, name=name)


def read_boundary_csv(path) -> ParametricBoundary:
    """Load a boundary table with header ``theta,x,y`` (radians)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"theta", "x", "y"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header with columns theta,x,y")
        rows = [(float(r["theta"]), float(r["x"]), float(r["y"])) for r in reader]
    if not rows:
        raise ValueError(f"{path}: empty boundary table")
    theta, x, y = map(np.array, zip(*rows))
    return boundary_from_table(theta, x, y, name=path.stem)


def to_physical(theta, r, boundary: ParametricBoundary):
    """Map computational coordinates to the physical plane."""
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    r = np.asarray(r, dtype=float)
    return r * boundary.g1(theta), r * boundary.g2(theta)


def to_computational(x, y, boundary: ParametricBoundary, samples: int = 8192):
    """Inverse of :func:`to_physical` for a star-shaped boundary.

    The boundary's polar angle is tabulated against ``theta`` and inverted by
    linear interpolation, so the result is accurate to the table resolution.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tt = np.linspace(0.0, TWO_PI, samples + 1)
    gx, gy = boundary.g1(tt), boundary.g2(tt)
    ang = np.unwrap(np.arctan2(gy, gx))
    if ang[-1] < ang[0]:
        raise ValueError("boundary must be traversed anticlockwise")
    if np.any(np.diff(ang) <= 0):
        raise ValueError("boundary is not star-shaped about the origin")
    phi = np.mod(np.arctan2(y, x) - ang[0], TWO_PI) + ang[0]
    theta = np.interp(phi, ang, tt)
    rad = boundary.radius(theta)
    return np.mod(theta, TWO_PI), np.hypot(x, y) / rad


@dataclass(frozen=True)
class ComputationalGrid:
    """Tensor grid ``theta_j = j 2pi/n`` (j < n) by ``r_i = i/m`` (1 <= i <= m)."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("need at least three theta divisions")
        if self.m < 1:
            raise ValueError("need at least one radial division")

    @property
    def theta(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n) / self.n

    @property
    def radii(self) -> np.ndarray:
        r = np.arange(1, self.m + 1) / self.m
        r[-1] = 1.0
        return r


def curve_radius_estimates(grid: ComputationalGrid, boundary: ParametricBoundary) -> np.ndarray:
    """Mean position-vector length of the mapped nodes on each curve ``r = r_i``."""
    theta = grid.theta
    x, y = to_physical(theta[None, :], grid.radii[:, None], boundary)
    return np.mean(np.hypot(x, y), axis=1)


def polygon_perimeter(points) -> float:
    pts = np.asarray(points, dtype=float)
    closed = np.vstack([pts, pts[:1]])
    return float(np.sum(np.hypot(*np.diff(closed, axis=0).T)))


def _round_half_up(v) -> np.ndarray:
    return np.floor(np.asarray(v, dtype=float) + 0.5).astype(int)


@dataclass(frozen=True)
class RefinementPlan:
    """Per-curve node counts for the closed curves ``r = r_i``.

    ``n_theta_per_curve[i]`` belongs to the curve with radius ``(i + 1)/n_r``;
    the last entry is the boundary count.
    """

    delta_s: float
    min_spacing: float
    perimeter: float
    mean_radius: float
    n_theta: int
    n_r: int
    n_theta_per_curve: tuple[int, ...]

    @property
    def n_total(self) -> int:
        return int(sum(self.n_theta_per_curve))


def plan_refinement(
    boundary: ParametricBoundary,
    n_theta_boundary: int,
    n_r: int | None = None,
    spacing: str = "mean",
) -> RefinementPlan:
    """Choose the radial division count and per-curve node counts.

    Parameters
    ----------
    boundary : ParametricBoundary
    n_theta_boundary : int
        Nodes on the boundary curve, equally spaced in theta.
    n_r : int, optional
        Radial division count. When omitted it is chosen so that
        ``p / R = n_theta / n_r`` with ``p`` the polygonal perimeter of the
        boundary nodes and ``R`` their mean radius.
    spacing : {"mean", "min"}
        Target adjacent spacing ``delta_s``: the mean boundary spacing
        ``p / n_theta`` or the minimum adjacent boundary spacing.

    Notes
    -----
    Curve ``i`` gets ``round(2 pi R_i / delta_s)`` nodes (at least 3); the
    boundary curve always keeps ``n_theta_boundary``.
    """
    if int(n_theta_boundary) != n_theta_boundary or n_theta_boundary < 3:
        raise ValueError("need at least three boundary nodes")
    n_theta = int(n_theta_boundary)
    theta = TWO_PI * np.arange(n_theta) / n_theta
    pts = boundary.point(theta)
    gaps = np.hypot(*np.diff(np.vstack([pts, pts[:1]]), axis=0).T)
    perimeter = float(gaps.sum())
    min_spacing = float(gaps.min())
    mean_radius = float(np.mean(np.hypot(pts[:, 0], pts[:, 1])))
    if spacing == "mean":
        delta_s = perimeter / n_theta
    elif spacing == "min":
        delta_s = min_spacing
    else:
        raise ValueError(f"spacing must be 'mean' or 'min', got {spacing!r}")
    if min_spacing <= 0:
        raise ValueError("coincident boundary nodes")

    if n_r is None:
        n_r = max(int(_round_half_up(n_theta * mean_radius / perimeter)), 1)
    elif n_r < 1:
        raise ValueError("need at least one radial division")

    radii_est = curve_radius_estimates(ComputationalGrid(n_theta, n_r), boundary)
    counts = np.maximum(_round_half_up(TWO_PI * radii_est / delta_s), 3)
    counts[-1] = n_theta
    return RefinementPlan(
        delta_s=delta_s,
        min_spacing=min_spacing,
        perimeter=perimeter,
        mean_radius=mean_radius,
        n_theta=n_theta,
        n_r=int(n_r),
        n_theta_per_curve=tuple(int(c) for c in counts),
    )


@dataclass(frozen=True)
class NodeSet:
    """Scattered nodes with a boundary flag; boundary nodes come last."""

    points: np.ndarray
    is_boundary: np.ndarray

    @property
    def n_total(self) -> int:
        return int(self.points.shape[0])

    @property
    def n_boundary(self) -> int:
        return int(np.count_nonzero(self.is_boundary))

    @property
    def n_interior(self) -> int:
        return self.n_total - self.n_boundary

    @property
    def interior(self) -> np.ndarray:
        return self.points[~self.is_boundary]

    @property
    def boundary(self) -> np.ndarray:
        return self.points[self.is_boundary]

    def min_distance(self) -> float:
        """Smallest pairwise distance between nodes."""
        from scipy.spatial import cKDTree

        if self.n_total < 2:
            return math.inf
        dist, _ = cKDTree(self.points).query(self.points, k=2)
        return float(dist[:, 1].min())


def nodes_from_curves(curves_theta, radii, boundary: ParametricBoundary, include_origin: bool = False) -> NodeSet:
    """Map per-curve (theta, r) samples to a tagged physical node set.

    ``curves_theta[i]`` and ``radii[i]`` hold the computational coordinates on
    curve ``i``; the last curve is the boundary.
    """
    interior, bnd = [], None
    for k, (th, rr) in enumerate(zip(curves_theta, radii)):
        x, y = to_physical(th, np.broadcast_to(rr, np.shape(th)), boundary)
        xy = np.column_stack([x, y])
        if k == len(curves_theta) - 1:
            bnd = xy
        else:
            interior.append(xy)
    if include_origin:
        interior.insert(0, np.zeros((1, 2)))
    inner = np.vstack(interior) if interior else np.zeros((0, 2))
    points = np.vstack([inner, bnd])
    flags = np.zeros(points.shape[0], dtype=bool)
    flags[inner.shape[0]:] = True
    nodes = NodeSet(points=points, is_boundary=flags)
    if nodes.min_distance() <= 0.0:
        raise ValueError("duplicate nodes generated; boundary may be degenerate")
    return nodes


def uniform_nodes(
    boundary: ParametricBoundary,
    n_theta_boundary: int,
    n_r: int | None = None,
    plan: RefinementPlan | None = None,
    include_origin: bool = False,
) -> NodeSet:
    """Roughly uniform nodes: curve ``i`` gets its planned count, equally spaced in theta."""
    if plan is None:
        plan = plan_refinement(boundary, n_theta_boundary, n_r)
    radii = ComputationalGrid(plan.n_theta, plan.n_r).radii
    thetas = [TWO_PI * np.arange(c) / c for c in plan.n_theta_per_curve]
    return nodes_from_curves(thetas, radii, boundary, include_origin=include_origin)


def tensor_nodes(boundary: ParametricBoundary, n_theta: int, n_r: int) -> NodeSet:
    """The unrefined image of the full ``n_theta x n_r`` tensor grid."""
    grid = ComputationalGrid(n_theta, n_r)
    thetas = [grid.theta] * n_r
    return nodes_from_curves(thetas, grid.radii, boundary)
