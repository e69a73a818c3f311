import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from hypthick.errors import OutOfRegion, ValidationError
from hypthick.geom import HPoint, dist
from hypthick.quotient import (EndModel, PeriodicSample, QuotientPoint, ball_height_range,
                               copies_intersected, cusp_inclusion_margin, lift_multiplicity_margin,
                               lift_norm_bounds, quotient_distance, reduce)

CUSP = EndModel.cusp(1.0)
FUNNEL = EndModel.funnel(1.0)


def test_end_validation():
    with pytest.raises(ValidationError):
        EndModel("torus", 1.0)
    with pytest.raises(ValidationError):
        EndModel.cusp(0.0)


@given(st.floats(-1e3, 1e3), st.floats(1.001, 1e4))
def test_cusp_reduce_round_trip(x, y):
    q, k = reduce(HPoint(x, y), CUSP)
    assert -0.5 <= q.rep.x < 0.5
    back = CUSP.generator_power(k)(q.rep)
    assert abs(back.x - x) <= 1e-12 * max(1.0, abs(x)) and abs(back.y - y) <= 1e-12 * y


@given(st.floats(-1e3, -1e-3), st.floats(1e-3, 1e3), st.floats(0.1, 3.0))
def test_funnel_reduce_round_trip(x, y, ell):
    end = EndModel.funnel(ell)
    q, k = reduce(HPoint(x, y), end)
    assert bool(end.in_domain_xy(q.rep.x, q.rep.y))
    back = end.generator_power(k)(q.rep)
    assert math.hypot(back.x - x, back.y - y) <= 1e-11 * math.hypot(x, y)


def test_reduce_rejects_points_outside_the_end():
    with pytest.raises(OutOfRegion):
        reduce(HPoint(0.0, 0.5), CUSP)
    with pytest.raises(OutOfRegion):
        reduce(HPoint(1.0, 1.0), FUNNEL)


def test_generator_maps_boundary_to_boundary():
    g = CUSP.generator()
    p = g(HPoint(-0.5, 3.0))
    assert p.x == pytest.approx(0.5) and p.y == 3.0
    g = FUNNEL.generator()
    p = g(HPoint(-0.6, 0.8))  # on |z| = 1
    assert abs(p.z) == pytest.approx(math.e, rel=1e-14)


@pytest.mark.parametrize("y", [10.0, 100.0, 1000.0])
def test_cusp_distance_wraps(y):
    p = QuotientPoint(HPoint(0.0, y), CUSP)
    q = QuotientPoint(HPoint(0.4, y), CUSP)
    # the nearest lift of q is 0.4 - 1 = -0.6 only if closer; here 0.4 wins
    assert quotient_distance(p, q) == pytest.approx(math.acosh(1 + 0.16 / (2 * y * y)), rel=1e-12)
    q = QuotientPoint(HPoint(-0.5, y), CUSP)
    p = QuotientPoint(HPoint(0.45, y), CUSP)
    # through the seam: separation 0.05, not 0.95
    assert quotient_distance(p, q) == pytest.approx(math.acosh(1 + 0.0025 / (2 * y * y)), rel=1e-10)


def test_cusp_distance_half_period():
    y = 200.0
    p = QuotientPoint(HPoint(0.0, y), CUSP)
    q = QuotientPoint(HPoint(-0.5, y), CUSP)
    d = quotient_distance(p, q)
    assert d == pytest.approx(math.acosh(1 + 1 / (8 * y * y)), rel=1e-12)
    assert d == pytest.approx(1 / (2 * y), rel=1e-4)
    assert d < dist(p.rep, HPoint(3.5, y))


qpts = st.builds(lambda x, y: QuotientPoint(HPoint(x, y), CUSP), st.floats(-0.5, 0.4999), st.floats(1.01, 50))


@given(qpts, qpts, qpts)
def test_quotient_distance_is_a_pseudometric(p, q, r):
    dpq, dqp = quotient_distance(p, q), quotient_distance(q, p)
    assert abs(dpq - dqp) < 1e-10
    assert quotient_distance(p, r) <= dpq + quotient_distance(q, r) + 1e-10
    assert quotient_distance(p, p) == 0.0
    assert dpq <= dist(p.rep, q.rep) + 1e-12


@given(st.floats(-0.5, 0.4999), st.floats(0.05, 3.0), st.floats(0.0, 5.0))
def test_copy_count_bound(x, R, s):
    y = math.exp(R) * math.exp(s) * (1 + 1e-9)
    N = copies_intersected(HPoint(x, y), R, CUSP)
    assert N >= 1
    assert N - 2 <= 2 * y * math.sinh(R) + 1e-9


def test_copy_count_monotone_and_asymptotic():
    R = 1.0
    ys = np.geomspace(3.0, 3e3, 40)
    Ns = [copies_intersected(HPoint(0.1, y), R, CUSP) for y in ys]
    assert all(a <= b for a, b in zip(Ns, Ns[1:]))
    Rs = np.linspace(0.1, 1.0, 20)
    Ns = [copies_intersected(HPoint(0.1, 30.0), r, CUSP) for r in Rs]
    assert all(a <= b for a, b in zip(Ns, Ns[1:]))
    y = 1e4
    N = copies_intersected(HPoint(0.0, y), R, CUSP)
    assert abs(N - 2 * y * math.sinh(R)) <= 2
    # small Euclidean radius inside one copy
    assert copies_intersected(HPoint(0.0, 3.0), 0.05, CUSP) == 1


def test_copy_count_requires_ball_above_horocycle():
    with pytest.raises(OutOfRegion):
        copies_intersected(HPoint(0.0, 1.5), 1.0, CUSP)


def test_inclusion_margin_values():
    # sqrt(cosh(1/2) - 1) / (sqrt 2 sinh 1) to 30 digits with mpmath is 0.21495239978860508...
    assert cusp_inclusion_margin(1.0) == pytest.approx(0.21495239978860508, rel=1e-14)
    assert cusp_inclusion_margin(1e-4) == pytest.approx(0.25, rel=1e-6)
    with pytest.raises(ValidationError):
        cusp_inclusion_margin(0.0)


@given(st.floats(0.05, 4.0), st.floats(0.0, 4.0), st.floats(0, 1))
def test_inclusion_margin_certifies_half_radius(R, s, frac):
    y = math.exp(R + s) * (1 + 1e-9)
    N = copies_intersected(HPoint(0.0, y), R, CUSP)
    kmax = (N - 2) * cusp_inclusion_margin(R)
    assume(kmax > 1)
    k = math.floor(frac * (math.ceil(kmax) - 1))
    if k >= kmax:
        k = math.ceil(kmax) - 1
    assert dist(HPoint(0.0, y), HPoint(float(k), y)) < R / 2


def _sample(end, z, R, seed, modes=3):
    rng = np.random.default_rng(seed)
    lo, hi = ball_height_range(end, z, R)
    a = rng.normal(size=(modes, 2))
    ph = rng.uniform(0, 2 * np.pi, modes)

    def f(U, W):
        s = (W - lo) / (hi - lo)
        return sum(a[k, 0] * np.cos(2 * np.pi * k * (U - end.u_origin) / end.period + ph[k])
                   * (1 + a[k, 1] * s) for k in range(modes))

    return PeriodicSample.from_function(end, f, (lo, hi))


def test_lift_norms_constant_function():
    z, R = HPoint(0.2, 20.0), 1.0
    lo, hi = ball_height_range(CUSP, z, R)
    v = PeriodicSample.from_function(CUSP, lambda U, W: np.ones_like(U), (lo, hi))
    rep = lift_norm_bounds(v, CUSP, z, R)
    assert rep.lifted_R == pytest.approx(4 * math.pi * math.sinh(0.5) ** 2, rel=1e-8)
    assert rep.upper_ok and rep.lower_ok


def test_lift_norms_single_copy_equal():
    z, R = HPoint(0.0, 3.0), 0.05
    v = _sample(CUSP, z, R, 0)
    rep = lift_norm_bounds(v, CUSP, z, R)
    assert rep.N == 1
    assert rep.lifted_R == pytest.approx(rep.quotient_R, rel=1e-10)


@pytest.mark.parametrize("seed", range(6))
def test_lift_norms_random_cusp(seed):
    rng = np.random.default_rng(100 + seed)
    R = rng.uniform(0.2, 2.0)
    z = HPoint(rng.uniform(-0.5, 0.5), math.exp(R) * math.exp(rng.uniform(0.5, 2.5)))
    rep = lift_norm_bounds(_sample(CUSP, z, R, seed), CUSP, z, R, rtol=1e-8)
    assert rep.N >= 3
    assert rep.upper_ok and rep.lower_ok


@pytest.mark.parametrize("seed", range(4))
def test_lift_norms_random_funnel(seed):
    rng = np.random.default_rng(200 + seed)
    R = rng.uniform(0.2, 1.5)
    d = rng.uniform(R + 0.1, 3.0)
    rho = rng.uniform(0, 1.0)
    z = HPoint(-math.exp(rho) * math.tanh(d), math.exp(rho) / math.cosh(d))
    rep = lift_norm_bounds(_sample(FUNNEL, z, R, seed), FUNNEL, z, R, rtol=1e-8)
    assert rep.upper_ok and rep.lower_ok


def test_multiplicity_margin_at_least_one():
    for R in (0.5, 1.0, 2.0, 3.0):
        for Y in (3.0, 30.0):
            z = HPoint(0.1, Y * math.exp(R) + 2)
            assert lift_multiplicity_margin(CUSP, z, R, 100, 100) >= 1.0
    with pytest.raises(ValidationError):
        lift_multiplicity_margin(FUNNEL, HPoint(-1.0, 0.2), 0.5)


def test_periodic_sample_validation():
    u = np.linspace(-0.5, 0.5, 5)
    w = np.linspace(2, 3, 3)
    with pytest.raises(ValidationError):
        PeriodicSample(CUSP, u, w, np.zeros((2, 5)))
    vals = np.tile(np.arange(5.0), (3, 1))
    with pytest.raises(ValidationError):
        PeriodicSample(CUSP, u, w, vals)
