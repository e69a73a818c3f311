import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypthick.covering import CuspDomain, FunnelDomain, RectRegion
from hypthick.errors import ValidationError
from hypthick.geom import ChartRect, GeodesicBall, HPoint, ball_to_euclidean, ball_volume
from hypthick.quotient import EndModel, quotient_dist_xy
from hypthick.thickness import (MAX_DEPTH, Complement, Disk, Everything, HalfPlane, Intersection,
                                Nothing, QuotientBall, Rect, SensorSet, ThetaStrip, Union_,
                                ball_measure, is_thick, measure_intersection, node_from_dict,
                                thickness_profile)

CUSP = EndModel.cusp(1.0)
FUNNEL = EndModel.funnel(1.0)

# -- expression trees ------------------------------------------------------------

prims = st.one_of(
    st.just(Everything()),
    st.just(Nothing()),
    st.builds(lambda a, w, b, h: Rect(a, a + w, b, b + h), st.floats(-2, 2), st.floats(0.01, 2),
              st.floats(0.1, 3), st.floats(0.01, 3)),
    st.builds(Disk, st.floats(-2, 2), st.floats(0.5, 3), st.floats(0.05, 1)),
    st.builds(HalfPlane, st.floats(-1, 1), st.floats(0.1, 1), st.floats(-1, 3)),
    st.builds(lambda a, w: ThetaStrip(a, a + w), st.floats(-0.5, 0.5), st.floats(0.05, 1.0)),
)
trees = st.recursive(
    prims,
    lambda kids: st.one_of(
        st.builds(lambda a: Union_(tuple(a)), st.lists(kids, min_size=1, max_size=3)),
        st.builds(lambda a: Intersection(tuple(a)), st.lists(kids, min_size=1, max_size=3)),
        st.builds(Complement, kids),
    ),
    max_leaves=8,
)


@given(trees)
def test_json_round_trip(node):
    s = SensorSet(node)
    back = SensorSet.from_json(s.to_json())
    assert back == s
    pts = np.random.default_rng(0).uniform([-3, 0.05], [3, 5], (200, 2))
    assert np.array_equal(back.contains(pts[:, 0], pts[:, 1]), s.contains(pts[:, 0], pts[:, 1]))


@given(trees, st.floats(-1.5, 1.5), st.floats(0.3, 4.0), st.floats(0.1, 1.5))
def test_complement_is_additive(node, x, y, R):
    ball = GeodesicBall(HPoint(x, y), R)
    a = measure_intersection(SensorSet(node), ball, rtol=1e-10)
    b = measure_intersection(SensorSet(Complement(node)), ball, rtol=1e-10)
    assert a >= 0 and b >= 0
    assert a + b == pytest.approx(ball_volume(R), rel=1e-7)


def test_depth_limit_and_bad_documents():
    d = {"primitive": "all"}
    for _ in range(MAX_DEPTH):
        d = {"op": "complement", "arg": d}
    with pytest.raises(ValidationError):
        node_from_dict(d)
    with pytest.raises(ValidationError):
        SensorSet.from_dict({"root": {"primitive": "all"}, "colour": "red"})
    with pytest.raises(ValidationError):
        SensorSet.from_dict({"root": {"primitive": "blob"}})
    with pytest.raises(ValidationError):
        SensorSet.from_dict({"root": {"primitive": "disk", "cx": 0, "cy": 1}})
    with pytest.raises(ValidationError):
        SensorSet.from_dict({"root": {"op": "union", "args": []}})
    with pytest.raises(ValidationError):
        SensorSet.from_json("{not json")


def test_operator_sugar():
    a, b = Disk(0, 1, 0.5), HalfPlane(1, 0, 0)
    assert isinstance(a | b, Union_) and isinstance(a & b, Intersection)
    assert isinstance(~a, Complement)
    assert bool((a & b).contains(-0.1, 1.0)) and not bool((a & b).contains(0.1, 1.0))


# -- measures against a Monte Carlo oracle -----------------------------------------

def _mc_ambient(omega, x, y, R, n=400_000, seed=0):
    """Sample the Euclidean disk uniformly, weight by 1/y^2."""
    (cx, cy), r = ball_to_euclidean(GeodesicBall(HPoint(x, y), R))
    rng = np.random.default_rng(seed)
    rho = r * np.sqrt(rng.random(n))
    ph = 2 * np.pi * rng.random(n)
    px, py = cx + rho * np.cos(ph), cy + rho * np.sin(ph)
    w = math.pi * r * r / py**2
    vals = w * omega.contains(px, py)
    return vals.mean(), vals.std() / math.sqrt(n)


def _mc_quotient(omega, end, x, y, R, box, n=400_000, seed=0):
    """Sample a box in D, keep points within quotient distance R of the center."""
    rng = np.random.default_rng(seed)
    (x0, x1), (y0, y1) = box
    px = x0 + (x1 - x0) * rng.random(n)
    py = y0 + (y1 - y0) * rng.random(n)
    inside = quotient_dist_xy(end, x, y, px, py) < R
    inD = end.in_domain_xy(px, py)
    w = (x1 - x0) * (y1 - y0) / py**2
    vals = w * inside * inD * omega.contains(px, py)
    return vals.mean(), vals.std() / math.sqrt(n)


@pytest.mark.parametrize("omega", [
    SensorSet(Disk(0.2, 1.5, 0.6)),
    SensorSet(Union_((Rect(-1, 0, 0.5, 2), HalfPlane(1, 1, 0.4)))),
    SensorSet(Complement(ThetaStrip(0.0, 0.3))),
])
def test_ambient_measure_matches_monte_carlo(omega):
    exact = measure_intersection(omega, GeodesicBall(HPoint(0.1, 1.2), 0.9), rtol=1e-10)
    mc, se = _mc_ambient(omega, 0.1, 1.2, 0.9)
    assert abs(exact - mc) < 5 * se + 1e-12


def test_cusp_quotient_ball_matches_monte_carlo():
    omega = SensorSet.theta_strip(0.0, 0.5, CUSP)
    ball = QuotientBall.at(CUSP, 0.3, 4.0, 1.0)
    y0, y1 = 4.0 * math.exp(-1), 4.0 * math.exp(1)
    mc, se = _mc_quotient(omega, CUSP, 0.3, 4.0, 1.0, ((-0.5, 0.5), (y0, y1)))
    assert abs(measure_intersection(omega, ball, 1e-10) - mc) < 5 * se
    full, se = _mc_quotient(SensorSet.full(CUSP), CUSP, 0.3, 4.0, 1.0, ((-0.5, 0.5), (y0, y1)))
    assert abs(ball_measure(ball, 1e-10) - full) < 5 * se


def test_funnel_quotient_ball_matches_monte_carlo():
    omega = SensorSet.theta_strip(0.0, 0.5, FUNNEL)
    d = 2.0
    x, y = -math.exp(0.4) * math.tanh(d), math.exp(0.4) / math.cosh(d)
    ball = QuotientBall.at(FUNNEL, x, y, 1.0)
    box = ((-math.e, 0.0), (0.0, math.e))
    mc, se = _mc_quotient(omega, FUNNEL, x, y, 1.0, box, n=1_000_000, seed=3)
    assert abs(measure_intersection(omega, ball, 1e-10) - mc) < 5 * se


def test_quotient_ball_high_in_cusp_closed_form():
    # chords are longer than one period almost everywhere, so the volume is 2 sinh R / y
    for y in (300.0, 1000.0):
        ball = QuotientBall.at(CUSP, 0.0, y, 1.0)
        assert ball_measure(ball, 1e-12) == pytest.approx(2 * math.sinh(1.0) / y, rel=1e-9)


def test_quotient_ball_must_stay_in_end():
    with pytest.raises(ValidationError):
        QuotientBall.at(CUSP, 0.0, 1.5, 1.0)


# -- profiles ------------------------------------------------------------------------

def test_strip_profile_regression():
    omega = SensorSet.theta_strip(0.0, 0.5, CUSP)
    rep = thickness_profile(omega, CuspDomain(CUSP, 1000.0), 1.0, 256, seed=0)
    # frozen from this implementation; a Monte Carlo check of the minimiser is below
    assert rep.delta_min == pytest.approx(0.49533137854017956, rel=1e-7)
    assert rep.tail_invariant
    s = rep.summary()
    assert s["certified_on_samples"] and s["tail"] == "invariant"
    assert is_thick(rep, 0.49) and not is_thick(rep, 0.5)
    x, y = rep.argmin
    y0, y1 = y * math.exp(-1), y * math.exp(1)
    mc_cap, se1 = _mc_quotient(omega, CUSP, x, y, 1.0, ((-0.5, 0.5), (y0, y1)), n=1_000_000)
    mc_all, _ = _mc_quotient(SensorSet.full(CUSP), CUSP, x, y, 1.0, ((-0.5, 0.5), (y0, y1)),
                             n=1_000_000)
    assert abs(mc_cap / mc_all - rep.delta_min) < 5 * se1 / mc_all


def test_trivial_profiles():
    reg = CuspDomain(CUSP, 100.0)
    full = thickness_profile(SensorSet.full(CUSP), reg, 1.0, 36)
    assert full.delta_min == pytest.approx(1.0, abs=1e-7)
    empty = thickness_profile(SensorSet.empty(CUSP), reg, 1.0, 36)
    assert empty.delta_min == 0.0
    below = thickness_profile(SensorSet.below(5.0, CUSP), reg, 1.0, 36)
    assert below.delta_min == 0.0
    # {y <= 5} is constant (empty) above y_max = 100
    assert below.tail_invariant and below.summary()["tail"] == "invariant"


def test_funnel_strip_is_not_thick():
    omega = SensorSet.theta_strip(0.0, 0.5, FUNNEL)
    rep = thickness_profile(omega, FunnelDomain(FUNNEL, 4.0), 0.5, 64)
    # deep in the funnel the ball fits inside the complementary strip
    assert rep.delta_min == 0.0
    assert rep.ratio.max() > 0.5


def test_ambient_profile_and_csv(tmp_path):
    omega = SensorSet(HalfPlane(1.0, 0.0, 0.0))  # x <= 0
    rep = thickness_profile(omega, RectRegion(ChartRect(-1, 1, 0.5, 2)), 1.0, 64)
    assert np.all((rep.ratio >= 0) & (rep.ratio <= 1 + 1e-9))
    # ratio is 1/2 on x = 0 by symmetry and decreases in x
    on_axis = measure_intersection(omega, GeodesicBall(HPoint(0.0, 1.0), 1.0), 1e-12)
    assert on_axis == pytest.approx(0.5 * ball_volume(1.0), rel=1e-10)
    p = tmp_path / "t.csv"
    rep.to_csv(p, comment="hello")
    lines = p.read_text().splitlines()
    assert lines[0] == "# hello" and lines[1] == "center_x,center_y,vol_ball,vol_cap,ratio"
    assert len(lines) == 2 + len(rep.center_x)
    rep.to_json(tmp_path / "t.json")
    assert json.loads((tmp_path / "t.json").read_text())["centers"] == len(rep.center_x)


def test_threads_do_not_change_results():
    omega = SensorSet.theta_strip(0.1, 0.4, CUSP)
    reg = CuspDomain(CUSP, 50.0)
    a = thickness_profile(omega, reg, 0.8, 49, seed=4)
    b = thickness_profile(omega, reg, 0.8, 49, seed=4, threads=3)
    assert np.array_equal(a.vol_cap, b.vol_cap) and np.array_equal(a.center_x, b.center_x)


def test_tail_flag():
    assert SensorSet.theta_strip(0, 0.5, CUSP).tail_invariant(10.0)
    assert not SensorSet(Disk(0.0, 9.5, 1.0), CUSP).tail_invariant(10.0)
    assert SensorSet.below(5.0, CUSP).tail_invariant(10.0)
    assert not SensorSet.below(50.0, CUSP).tail_invariant(10.0)
