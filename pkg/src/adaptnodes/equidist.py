"""One-dimensional equidistribution and polyline arc-length helpers.

The monitor is always treated as the piecewise-linear interpolant of its
samples, so its cumulative integral is piecewise quadratic and can be
inverted in closed form segment by segment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MonitorSamples:
    """A non-negative monitor tabulated on strictly increasing abscissae."""

    t: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        m = np.asarray(self.m, dtype=float)
        if t.ndim != 1 or t.shape != m.shape:
            raise ValueError("t and m must be 1D arrays of equal length")
        if t.size < 2:
            raise ValueError("at least two monitor samples are required")
        if np.any(np.diff(t) <= 0):
            raise ValueError("abscissae must be strictly increasing")
        if np.any(~np.isfinite(m)):
            raise ValueError("monitor values must be finite")
        scale = max(float(np.max(np.abs(m))), 1.0)
        if np.any(m < -1e-12 * scale):
            raise ValueError("monitor values must be non-negative")
        # floating-point noise below zero is clamped
        m = np.maximum(m, 0.0)
        if not np.any(m > 0):
            raise ValueError("monitor is identically zero")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "m", m)

    @property
    def a(self) -> float:
        return float(self.t[0])

    @property
    def b(self) -> float:
        return float(self.t[-1])

    def cumulative(self) -> np.ndarray:
        """Cumulative integral of the interpolated monitor at each sample."""
        seg = 0.5 * (self.m[1:] + self.m[:-1]) * np.diff(self.t)
        return np.concatenate(([0.0], np.cumsum(seg)))

    def integral(self, x) -> np.ndarray:
        """Integral of the interpolated monitor from ``a`` to ``x``."""
        x = np.clip(np.asarray(x, dtype=float), self.a, self.b)
        cum = self.cumulative()
        k = np.clip(np.searchsorted(self.t, x, side="right") - 1, 0, self.t.size - 2)
        h = self.t[k + 1] - self.t[k]
        tau = x - self.t[k]
        slope = (self.m[k + 1] - self.m[k]) / h
        return cum[k] + self.m[k] * tau + 0.5 * slope * tau**2


@dataclass(frozen=True)
class Partition1D:
    points: np.ndarray
    c: float

    @property
    def n(self) -> int:
        return self.points.size - 1


def equidistribute(samples: MonitorSamples, n: int) -> Partition1D:
    """Partition ``[a, b]`` into ``n`` cells of equal monitor integral.

    Parameters
    ----------
    samples : MonitorSamples
        Monitor values; interpolated linearly between samples.
    n : int
        Number of subintervals.

    Returns
    -------
    Partition1D
        ``n + 1`` points with fixed endpoints and the common cell integral
        ``c = total / n``. Where the monitor vanishes on a stretch, points
        are placed at the left edge of the flat part of the CDF.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"subinterval count must be a positive integer, got {n}")
    n = int(n)
    t, m = samples.t, samples.m
    cum = samples.cumulative()
    total = cum[-1]
    c = total / n

    targets = c * np.arange(1, n)
    # segment k holds cum[k] < target <= cum[k+1]
    k = np.searchsorted(cum, targets, side="left") - 1
    k = np.clip(k, 0, t.size - 2)
    h = t[k + 1] - t[k]
    d = targets - cum[k]
    m0 = m[k]
    quad = 0.5 * (m[k + 1] - m0) / h
    # root of quad*tau^2 + m0*tau - d = 0 in the cancellation-free form
    disc = np.sqrt(np.maximum(m0 * m0 + 4.0 * quad * d, 0.0))
    denom = m0 + disc
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(denom > 0, 2.0 * d / denom, 0.0)
    tau = np.clip(tau, 0.0, h)
    interior = t[k] + tau

    points = np.concatenate(([t[0]], interior, [t[-1]]))
    return Partition1D(points=points, c=float(c))


def cumulative_arclength(polyline) -> np.ndarray:
    """Cumulative Euclidean length along an ordered sequence of 2D points."""
    pts = np.asarray(polyline, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("a polyline needs at least two points")
    steps = np.hypot(*np.diff(pts, axis=0).T)
    return np.concatenate(([0.0], np.cumsum(steps)))


def reposition_on_polyline(polyline, s_targets, tol: float = 1e-12) -> np.ndarray:
    """Points on ``polyline`` at the requested arc-length positions.

    Targets may overshoot ``[0, L]`` by at most ``tol * max(L, 1)``; such
    targets are snapped to the nearest end.
    """
    pts = np.asarray(polyline, dtype=float)
    s = cumulative_arclength(pts)
    total = s[-1]
    st = np.atleast_1d(np.asarray(s_targets, dtype=float))
    slack = tol * max(total, 1.0)
    if np.any(st < -slack) or np.any(st > total + slack):
        raise ValueError("arc-length target outside the polyline")
    st = np.clip(st, 0.0, total)

    k = np.clip(np.searchsorted(s, st, side="right") - 1, 0, pts.shape[0] - 2)
    seg = s[k + 1] - s[k]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(seg > 0, (st - s[k]) / seg, 0.0)
    out = pts[k] + w[:, None] * (pts[k + 1] - pts[k])
    # exact vertices where the target hits one
    hit = st == s[k + 1]
    out[hit] = pts[k[hit] + 1]
    return out
