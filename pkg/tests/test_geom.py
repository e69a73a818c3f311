import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypthick.errors import NonConvergent, ValidationError
from hypthick.geom import (ChartRect, GeodesicBall, HPoint, Mobius, ball_to_euclidean,
                           ball_volume, dist, dist_xy, euclidean_to_ball, hyperbolic_integral,
                           isometry_to_origin)
from hypthick.quadrature import adaptive_gl, adaptive_gl_2d

xs = st.floats(-50, 50)
ys = st.floats(1e-3, 1e3)
pts = st.builds(HPoint, xs, ys)
radii = st.floats(0.01, 6.0)


@st.composite
def mobius(draw):
    a, b, c = draw(st.floats(-5, 5)), draw(st.floats(-5, 5)), draw(st.floats(-5, 5))
    d = draw(st.floats(-5, 5))
    det = a * d - b * c
    if det <= 1e-3:
        # flip to a matrix with positive determinant
        a, d = 1.0 + abs(a), 1.0 + abs(d)
        b, c = 0.1 * b, 0.1 * c
    return Mobius(a, b, c, d)


def test_known_distance():
    assert dist(HPoint(0, 1), HPoint(0, math.e)) == pytest.approx(1.0, rel=1e-15)
    assert dist(HPoint(0, 1), HPoint(0, 1)) == 0.0
    # cosh d = 1 + 4 / 2 = 3
    assert dist(HPoint(-1, 1), HPoint(1, 1)) == pytest.approx(math.acosh(3.0), rel=1e-15)


def test_invalid_points_and_maps():
    with pytest.raises(ValidationError):
        HPoint(0.0, 0.0)
    with pytest.raises(ValidationError):
        HPoint(math.nan, 1.0)
    with pytest.raises(ValidationError):
        Mobius(0.0, 1.0, 1.0, 0.0)  # det = -1 reverses orientation
    with pytest.raises(ValidationError):
        GeodesicBall(HPoint(0, 1), 0.0)
    with pytest.raises(ValidationError):
        ChartRect(0, 1, 2, 1)


@given(mobius(), pts, pts)
def test_mobius_is_isometry(T, p, q):
    d0 = dist(p, q)
    d1 = dist(T(p), T(q))
    assert abs(d1 - d0) <= 1e-9 * max(1.0, d0)


@given(mobius(), pts)
def test_mobius_inverse_and_composition(T, p):
    back = T.inverse()(T(p))
    assert dist(back, p) < 1e-8
    S = Mobius(2.0, 1.0, 0.5, 0.75)
    q1 = (S @ T)(p)
    q2 = S(T(p))
    assert dist(q1, q2) < 1e-8


@given(pts, pts, pts)
def test_triangle_inequality(p, q, r):
    assert dist(p, r) <= dist(p, q) + dist(q, r) + 1e-9


@given(pts)
def test_isometry_to_origin(p):
    q = isometry_to_origin(p)(p)
    assert abs(q.x) < 1e-12 and abs(q.y - 1.0) < 1e-12


@given(pts, radii)
def test_ball_round_trip(p, R):
    b = GeodesicBall(p, R)
    (cx, cy), r = ball_to_euclidean(b)
    assert cx == p.x
    assert cy == p.y * math.cosh(R) and r == p.y * math.sinh(R)
    back = euclidean_to_ball((cx, cy), r)
    assert back.center.x == p.x
    assert back.center.y == pytest.approx(p.y, rel=1e-9)
    assert back.radius == pytest.approx(R, rel=1e-9)


@given(pts, st.floats(0.05, 5.0), st.floats(0, 2 * math.pi))
def test_euclidean_circle_is_the_sphere(p, R, phi):
    (cx, cy), r = ball_to_euclidean(GeodesicBall(p, R))
    x, y = cx + r * math.cos(phi), cy + r * math.sin(phi)
    if y <= 0:
        return
    assert float(dist_xy(x, y, p.x, p.y)) == pytest.approx(R, rel=1e-8, abs=1e-10)


@pytest.mark.parametrize("R", [0.25, 1.0, 2.0, 4.0])
def test_ball_volume_matches_quadrature(R):
    b = GeodesicBall(HPoint(0.3, 2.0), R)
    q = hyperbolic_integral(lambda x, y: np.ones_like(x), b, rtol=1e-10)
    assert q.value == pytest.approx(ball_volume(R), rel=1e-8)


def test_rect_integral_with_infinite_top():
    r = ChartRect(-0.5, 0.5, 2.0)
    q = hyperbolic_integral(lambda x, y: np.ones_like(x), r)
    assert q.value == pytest.approx(r.volume, rel=1e-12)
    assert r.volume == pytest.approx(0.5)
    # int y^{-1} dvol over the cusp = int_2^inf dy / y^3 = 1/8
    q = hyperbolic_integral(lambda x, y: 1.0 / y, r, rtol=1e-10)
    assert q.value == pytest.approx(0.125, rel=1e-9)


def test_monte_carlo_agrees_within_error_bars():
    b = GeodesicBall(HPoint(0.0, 1.0), 1.0)
    f = lambda x, y: np.exp(-(x * x))
    ref = hyperbolic_integral(f, b, rtol=1e-10).value
    mc = hyperbolic_integral(f, b, method="mc", samples=200_000, seed=7)
    assert abs(mc.value - ref) < 5 * mc.error
    # seeded: same seed, same estimate
    assert hyperbolic_integral(f, b, method="mc", samples=1000, seed=3).value == \
        hyperbolic_integral(f, b, method="mc", samples=1000, seed=3).value


def test_unknown_method_and_region():
    with pytest.raises(ValidationError):
        hyperbolic_integral(lambda x, y: x, ChartRect(0, 1, 1, 2), method="simpson")
    with pytest.raises(ValidationError):
        hyperbolic_integral(lambda x, y: x, "disk")


def test_gauss_legendre_basics():
    assert adaptive_gl(lambda x: x**7, 0.0, 2.0).value == pytest.approx(2.0**8 / 8, rel=1e-14)
    # kink at 1/3 handled by a breakpoint in one pass
    r = adaptive_gl(lambda x: np.abs(x - 1 / 3), 0.0, 1.0, rtol=1e-14, breakpoints=[1 / 3])
    assert r.value == pytest.approx(5 / 18, rel=1e-14)
    assert r.panels <= 4
    r2 = adaptive_gl_2d(lambda x, y: x * y**2, (0, 1), (0, 3))
    assert r2.value == pytest.approx(4.5, rel=1e-13)
    with pytest.raises(NonConvergent):
        adaptive_gl(lambda x: np.sign(x - 0.1234567), 0.0, 1.0, rtol=1e-15, max_panels=8)
