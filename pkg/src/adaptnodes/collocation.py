"""Unsymmetric (Kansa) RBF collocation for the Dirichlet Poisson problem.

The solution is expanded as ``u(x) = sum_k alpha_k phi(|x - x_k|)`` over all
nodes. Interior nodes enforce ``Laplace u = f`` and boundary nodes enforce
``u = g``, which gives a dense, non-symmetric square system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist

from .domain import NodeSet


class SingularSystemError(np.linalg.LinAlgError):
    """The collocation matrix is singular to working precision."""

    def __init__(self, message, pivot=None, cond_estimate=None):
        super().__init__(message)
        self.pivot = pivot
        self.cond_estimate = cond_estimate


def tps4(r):
    """Generalized thin plate spline ``r**4 log r`` (0 at ``r = 0``)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radial argument must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, r**4 * np.log(r), 0.0)
    return out


def tps4_laplacian(r):
    """2D Laplacian of ``r**4 log r``: ``16 r**2 log r + 8 r**2``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radial argument must be non-negative")
    r2 = r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, 16.0 * r2 * np.log(r) + 8.0 * r2, 0.0)
    return out


def tps4_dphi_over_r(r):
    """``phi'(r) / r = 4 r**2 log r + r**2``, the gradient factor."""
    r = np.asarray(r, dtype=float)
    r2 = r * r
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(r > 0, 4.0 * r2 * np.log(r) + r2, 0.0)
    return out


@dataclass(frozen=True)
class Kernel:
    name: str
    phi: Callable
    laplacian_phi: Callable
    dphi_over_r: Callable


TPS4 = Kernel("tps4", tps4, tps4_laplacian, tps4_dphi_over_r)


def _poly_tail(points):
    """Values of ``{1, x, y}`` at ``points``, shape ``(len(points), 3)``."""
    pts = np.asarray(points, dtype=float)
    return np.column_stack([np.ones(len(pts)), pts[:, 0], pts[:, 1]])


@dataclass
class CollocationSystem:
    """Dense collocation matrix and right-hand side.

    Rows are ordered interior first, then boundary, matching ``centers``.
    With ``augment`` the matrix carries three extra columns for ``{1, x, y}``
    and three orthogonality rows.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    centers: np.ndarray
    n_interior: int
    kernel: Kernel = TPS4
    augment: bool = False

    @property
    def n_boundary(self) -> int:
        return self.centers.shape[0] - self.n_interior

    def to_dict(self, include_matrix: bool = False) -> dict:
        out = {
            "kernel": self.kernel.name,
            "augment": self.augment,
            "n_interior": self.n_interior,
            "n_boundary": self.n_boundary,
            "centers": self.centers.tolist(),
            "rhs": self.rhs.tolist(),
        }
        if include_matrix:
            out["matrix"] = self.matrix.tolist()
        return out


def assemble(
    nodes: NodeSet,
    f: Callable,
    g: Callable,
    kernel: Kernel = TPS4,
    augment: bool = False,
) -> CollocationSystem:
    """Build the collocation system for ``Laplace u = f``, ``u|boundary = g``.

    ``f`` and ``g`` take ``(x, y)`` arrays.
    """
    interior = nodes.interior
    bnd = nodes.boundary
    if interior.shape[0] < 1:
        raise ValueError("collocation needs at least one interior node")
    if bnd.shape[0] < 3:
        raise ValueError("collocation needs at least three boundary nodes")
    centers = np.vstack([interior, bnd])
    dist = cdist(centers, centers)
    off = dist + np.eye(len(centers))
    if np.min(off) == 0.0:
        raise ValueError("duplicate collocation nodes")

    ni = interior.shape[0]
    rows_int = kernel.laplacian_phi(dist[:ni])
    rows_bnd = kernel.phi(dist[ni:])
    matrix = np.vstack([rows_int, rows_bnd])
    rhs = np.concatenate([
        np.asarray(f(interior[:, 0], interior[:, 1]), dtype=float) * np.ones(ni),
        np.asarray(g(bnd[:, 0], bnd[:, 1]), dtype=float) * np.ones(bnd.shape[0]),
    ])
    if augment:
        tail = np.vstack([np.zeros((ni, 3)), _poly_tail(bnd)])
        side = _poly_tail(centers).T
        matrix = np.block([[matrix, tail], [side, np.zeros((3, 3))]])
        rhs = np.concatenate([rhs, np.zeros(3)])
    return CollocationSystem(matrix, rhs, centers, ni, kernel, augment)


@dataclass(frozen=True)
class RbfSolution:
    alpha: np.ndarray
    centers: np.ndarray
    kernel: Kernel = TPS4
    poly: np.ndarray | None = None
    residual: float = 0.0
    cond_estimate: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    def __call__(self, points) -> np.ndarray:
        return evaluate(self, points)

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.name,
            "alpha": self.alpha.tolist(),
            "centers": self.centers.tolist(),
            "poly": None if self.poly is None else self.poly.tolist(),
            "residual": self.residual,
            "cond_estimate": self.cond_estimate,
        }


def solve(system: CollocationSystem, rcond: float | None = None) -> RbfSolution:
    """LU with partial pivoting, plus residual and 1-norm condition estimate.

    Raises
    ------
    SingularSystemError
        If the smallest pivot is below ``rcond * max|pivot|`` (default
        ``N * eps``) or the reciprocal condition estimate underflows it.
    """
    A = np.asarray(system.matrix, dtype=float)
    b = np.asarray(system.rhs, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise ValueError("collocation system must be square")
    if rcond is None:
        rcond = n * np.finfo(float).eps

    lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    pivots = np.abs(np.diag(lu))
    pmax = float(pivots.max())
    pmin = float(pivots.min())
    anorm = np.linalg.norm(A, 1)
    rc, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    cond = float(np.inf) if rc == 0 else float(1.0 / rc)
    if pmax == 0.0 or pmin <= rcond * pmax or rc < np.finfo(float).eps:
        raise SingularSystemError(
            f"collocation matrix is singular to working precision "
            f"(smallest pivot {pmin:.3e}, largest {pmax:.3e}, cond ~ {cond:.3e})",
            pivot=pmin,
            cond_estimate=cond,
        )
    coef = scipy.linalg.lu_solve((lu, piv), b)
    res = float(np.max(np.abs(A @ coef - b)))
    bscale = float(np.max(np.abs(b))) or 1.0
    nc = system.centers.shape[0]
    return RbfSolution(
        alpha=coef[:nc],
        centers=system.centers,
        kernel=system.kernel,
        poly=coef[nc:] if system.augment else None,
        residual=res,
        cond_estimate=cond,
        diagnostics={"relative_residual": res / bscale, "min_pivot": pmin, "max_pivot": pmax},
    )


def evaluate(solution: RbfSolution, points) -> np.ndarray:
    """``sum_k alpha_k phi(|x - x_k|)`` (plus the linear tail, if any)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    vals = solution.kernel.phi(cdist(pts, solution.centers)) @ solution.alpha
    if solution.poly is not None:
        vals = vals + _poly_tail(pts) @ solution.poly
    return vals


def evaluate_gradient(solution: RbfSolution, points) -> np.ndarray:
    """Analytic gradient of the expansion, shape ``(len(points), 2)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    diff = pts[:, None, :] - solution.centers[None, :, :]
    w = solution.kernel.dphi_over_r(np.hypot(diff[..., 0], diff[..., 1]))
    grad = np.einsum("pk,pkd,k->pd", w, diff, solution.alpha)
    if solution.poly is not None:
        grad = grad + solution.poly[1:][None, :]
    return grad


def evaluate_laplacian(solution: RbfSolution, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return solution.kernel.laplacian_phi(cdist(pts, solution.centers)) @ solution.alpha
