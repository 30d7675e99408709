import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from adaptnodes.equidist import (
    MonitorSamples,
    cumulative_arclength,
    equidistribute,
    reposition_on_polyline,
)


def pl_integral(t, m, lo, hi):
    """Exact integral of the linear interpolant on [lo, hi] by trapezoids on merged breakpoints."""
    knots = np.union1d(t[(t > lo) & (t < hi)], [lo, hi])
    vals = np.interp(knots, t, m)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(knots)))


def test_constant_monitor_unit_interval():
    part = equidistribute(MonitorSamples([0.0, 1.0], [1.0, 1.0]), 4)
    assert_allclose(part.points, [0, 0.25, 0.5, 0.75, 1], atol=1e-15)


def test_constant_monitor_c_value():
    part = equidistribute(MonitorSamples([0.0, 2.0], [1.0, 1.0]), 2)
    assert part.c == 1.0
    assert_allclose(part.points, [0, 1, 2], atol=1e-15)


@pytest.mark.parametrize("samples", [11, 101, 1001])
def test_linear_monitor_midpoint(samples):
    # integral_0^x t dt = 1/4 at x = sqrt(1/2); linear monitor is interpolated exactly
    t = np.linspace(0, 1, samples)
    part = equidistribute(MonitorSamples(t, t), 2)
    assert_allclose(part.points[1], np.sqrt(0.5), rtol=1e-14)


def test_refinement_converges_to_cdf_inversion():
    # M = 1 + sin^2(pi x): cdf(x) = 1.5 x - sin(2 pi x)/(4 pi); invert by bisection
    def cdf(x):
        return 1.5 * x - np.sin(2 * np.pi * x) / (4 * np.pi)

    n = 5
    targets = cdf(1.0) * np.arange(1, n) / n
    lo, hi = np.zeros_like(targets), np.ones_like(targets)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        low = cdf(mid) < targets
        lo, hi = np.where(low, mid, lo), np.where(low, hi, mid)
    exact = 0.5 * (lo + hi)

    errs = []
    for k in (20, 40, 80, 160):
        t = np.linspace(0, 1, k + 1)
        part = equidistribute(MonitorSamples(t, 1 + np.sin(np.pi * t) ** 2), n)
        errs.append(np.max(np.abs(part.points[1:-1] - exact)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.0)


def test_subinterval_integrals_equal():
    rng = np.random.default_rng(3)
    t = np.cumsum(rng.uniform(0.1, 1.0, 40))
    m = rng.uniform(0.0, 3.0, 40)
    part = equidistribute(MonitorSamples(t, m), 17)
    ints = [pl_integral(t, m, a, b) for a, b in zip(part.points[:-1], part.points[1:])]
    assert_allclose(ints, part.c, rtol=1e-12)
    assert part.points[0] == t[0] and part.points[-1] == t[-1]


def test_zero_plateau_left_edge():
    # the cdf is flat on [1, 2]; the middle point goes to its left edge
    samples = MonitorSamples([0, 1, 2, 3], [1, 0, 0, 1])
    part = equidistribute(samples, 2)
    assert_allclose(part.points, [0, 1, 3], atol=1e-15)


def test_tiny_negative_values_are_clamped():
    s = MonitorSamples([0, 1, 2], [1.0, -1e-17, 1.0])
    assert s.m[1] == 0.0


@pytest.mark.parametrize(
    "t, m, n",
    [
        ([0, 1], [1, 1], 0),
        ([0, 1], [0, 0], 2),
        ([0, 0], [1, 1], 2),
        ([1, 0], [1, 1], 2),
        ([0, 1], [1, -1], 2),
        ([0], [1], 1),
    ],
)
def test_equidistribute_errors(t, m, n):
    with pytest.raises(ValueError):
        equidistribute(MonitorSamples(t, m), n)


monitors = st.lists(st.floats(0.01, 100.0), min_size=2, max_size=30)


@settings(max_examples=60, deadline=None)
@given(monitors, st.integers(1, 40))
def test_constant_monitor_gives_uniform(values, n):
    t = np.linspace(-1.0, 2.0, len(values))
    part = equidistribute(MonitorSamples(t, np.full(len(values), values[0])), n)
    assert_allclose(part.points, np.linspace(-1.0, 2.0, n + 1), atol=1e-12, rtol=0)


@settings(max_examples=60, deadline=None)
@given(monitors, st.integers(1, 40), st.floats(1e-3, 1e3))
def test_scale_invariance(values, n, lam):
    t = np.linspace(0.0, 1.0, len(values))
    m = np.array(values)
    a = equidistribute(MonitorSamples(t, m), n)
    b = equidistribute(MonitorSamples(t, lam * m), n)
    assert_allclose(a.points, b.points, atol=1e-12, rtol=0)
    assert_allclose(b.c, lam * a.c, rtol=1e-12)


@settings(max_examples=60, deadline=None)
@given(monitors, st.integers(1, 40))
def test_points_nondecreasing_and_cells_equal(values, n):
    t = np.linspace(0.0, 1.0, len(values))
    m = np.array(values)
    part = equidistribute(MonitorSamples(t, m), n)
    assert np.all(np.diff(part.points) > 0)
    ints = [pl_integral(t, m, a, b) for a, b in zip(part.points[:-1], part.points[1:])]
    assert_allclose(ints, part.c, rtol=1e-12)


def test_cumulative_arclength_examples():
    assert_allclose(cumulative_arclength([(0, 0), (1, 0), (1, 1)]), [0, 1, 2])
    assert_array_equal(cumulative_arclength([(0, 0), (0, 0)]), [0, 0])
    ang = np.pi / 2 * np.arange(5)
    square = np.column_stack([np.cos(ang), np.sin(ang)])
    assert_allclose(np.diff(cumulative_arclength(square)), np.sqrt(2), rtol=1e-15)
    with pytest.raises(ValueError):
        cumulative_arclength([(0, 0)])


def test_reposition_examples():
    assert_allclose(reposition_on_polyline([(0, 0), (2, 0)], [0.5]), [[0.5, 0]])
    poly = [(0, 0), (1, 0), (1, 1)]
    assert_array_equal(reposition_on_polyline(poly, [2.0]), [[1, 1]])
    assert_allclose(reposition_on_polyline(poly, [1.5]), [[1, 0.5]])
    with pytest.raises(ValueError):
        reposition_on_polyline(poly, [2.1])
    with pytest.raises(ValueError):
        reposition_on_polyline(poly, [-0.1])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=20))
def test_reposition_roundtrip_vertices(pts):
    pts = np.array(pts)
    s = cumulative_arclength(pts)
    assert_array_equal(reposition_on_polyline(pts, s), pts)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=20), st.floats(0, 1))
def test_reposition_hits_target_arclength(pts, frac):
    pts = np.array(pts)
    s = cumulative_arclength(pts)
    target = frac * s[-1]
    p = reposition_on_polyline(pts, [target])[0]
    # arclength of the output: walk to its segment and add the partial length
    k = min(np.searchsorted(s, target, side="right") - 1, len(s) - 2)
    assert np.isclose(s[k] + np.hypot(*(p - pts[k])), target, rtol=1e-12, atol=1e-12)
