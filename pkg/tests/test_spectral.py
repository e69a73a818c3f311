import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypthick.errors import NonFinite, Overflow, SingularWindow, ValidationError
from hypthick.spectral import (ModeBasis, TruncatedCusp, ellipticity_bounds, energy_bound_check,
                               extension_residual, fit_exponential, fit_smallness, gram_matrix,
                               harmonic_extension, multiplier_bound_check, project,
                               radial_operator_apply, random_window, smallness_experiment,
                               solve_modes, spectral_constant, time_integrals,
                               time_integrals_numeric)
from hypthick.thickness import Complement, Disk, SensorSet, ThetaStrip


def test_domain_validation():
    with pytest.raises(ValidationError):
        TruncatedCusp(2.0, 1.0)
    with pytest.raises(ValidationError):
        TruncatedCusp(1.0, 10.0, n=2)


def test_k0_exact_eigenvalues(basis):
    dom = basis.domain
    k0 = basis.k == 0
    m = basis.m[k0]
    err = np.abs(basis.lam[k0] - dom.exact_k0(m)) / dom.exact_k0(m)
    # second order: the relative error grows like (m / n)^2
    assert np.all(err < 2e-5 * m**2 / (basis.domain.n / 800) ** 2)
    # exact values sqrt(1/4 + (m pi / log(Y/a))^2) = sqrt(1/4 + m^2) for Y = e^pi
    assert dom.exact_k0(np.array([1, 2])) == pytest.approx([math.sqrt(1.25), math.sqrt(4.25)])


def test_lower_bound_from_angular_frequency(basis):
    # lam^2 >= 1/4 + (2 pi k a)^2 on the truncated cusp, so lam >= 2 pi k a
    assert np.all(basis.lam >= 2 * math.pi * basis.k * basis.domain.a - 1e-9)


def test_profiles_are_orthonormal(basis):
    W = basis.domain.weights
    for k in np.unique(basis.k):
        F = basis.F[(basis.k == k) & (basis.parity == 0)]
        G = (F * W) @ F.T
        assert np.abs(G - np.eye(len(F))).max() < 1e-10


def test_radial_operator_eigen_relation(basis):
    # (4 pi^2 k^2 - d^2/dy^2) f = lam^2 f / y^2 in the discrete sense
    y = basis.domain.y
    for j in range(6):
        k = int(basis.k[j])
        r = radial_operator_apply(basis.domain, k, basis.F[j]) - basis.lam[j] ** 2 * basis.F[j] / y**2
        assert np.abs(r).max() <= 1e-8 * np.abs(basis.F[j] / y**2).max() * basis.lam[j] ** 2


def test_save_load_round_trip(tmp_path, small_basis):
    small_basis.save(tmp_path / "modes")
    back = ModeBasis.load(tmp_path / "modes")
    assert back.domain == small_basis.domain
    assert np.array_equal(back.lam, small_basis.lam) and np.array_equal(back.F, small_basis.F)


def test_lam_max_selection(small_basis):
    b = solve_modes(small_basis.domain, None, lam_max=8.0)
    assert b.lam.max() <= 8.0
    n = int(np.sum(small_basis.lam <= 8.0))
    assert np.allclose(b.lam[:n], small_basis.lam[:n])
    with pytest.raises(ValidationError):
        solve_modes(small_basis.domain, None, None)


# -- projector and Gram ----------------------------------------------------------------

@given(st.integers(0, 2**31), st.floats(1.0, 20.0))
def test_projector_algebra(basis, seed, Lambda):
    w = random_window(basis, Lambda, seed)
    again = project(w.coeffs, basis, Lambda)
    assert np.array_equal(again.coeffs, w.coeffs)
    theta = np.arange(64) / 64
    field = basis.synthesize(w.coeffs, theta)
    assert basis.l2_norm(field) ** 2 == pytest.approx(w.norm() ** 2, rel=1e-10, abs=1e-300)
    rep = multiplier_bound_check(lambda l: np.exp(-l) * np.cos(3 * l), w, trials=8, seed=seed)
    assert rep.holds and rep.tight


def test_project_rejects_bad_shape(basis):
    with pytest.raises(ValidationError):
        project(np.ones(3), basis, 5.0)


def test_gram_of_full_set_is_identity(basis):
    G = gram_matrix(SensorSet.full(), basis)
    assert np.abs(G - np.eye(len(basis))).max() < 1e-12


def test_gram_additivity(basis):
    om = SensorSet(ThetaStrip(0.1, 0.35))
    co = SensorSet(Complement(ThetaStrip(0.1, 0.35)))
    G = gram_matrix(om, basis) + gram_matrix(co, basis)
    assert np.abs(G - np.eye(len(basis))).max() < 1e-12


def test_gram_brute_force(basis):
    """Independent oracle: sample the field on a fine grid and integrate against 1_omega."""
    om = SensorSet(Disk(0.0, 5.0, 2.0))
    idx = np.arange(8)
    G = gram_matrix(om, basis, idx)
    theta = (np.arange(2048) + 0.5) / 2048 - 0.5
    y = basis.domain.y
    ang = basis.angular(theta)[idx]
    phi = ang[:, :, None] * basis.F[idx][:, None, :]
    mask = om.contains(theta[:, None], y[None, :])
    w = basis.domain.weights[None, :] * mask / len(theta)
    Gb = np.einsum("ilp,jlp,lp->ij", phi, phi, w)
    assert np.abs(G - Gb).max() < 5e-3


def test_spectral_constants(basis):
    full = SensorSet.full()
    assert all(spectral_constant(full, L, basis) == pytest.approx(1.0, abs=1e-12) for L in (2, 5, 10))
    strip = SensorSet(ThetaStrip(0.0, 0.5))
    # below the first k = 1 mode only k = 0 modes enter and the strip sees half of each
    assert spectral_constant(strip, 5.0, basis) == pytest.approx(math.sqrt(2), rel=1e-12)
    assert spectral_constant(strip, 0.1, basis) == 1.0
    with pytest.raises(SingularWindow):
        spectral_constant(SensorSet.empty(), 5.0, basis)
    assert spectral_constant(SensorSet.empty(), 5.0, basis, raise_singular=False) == math.inf


def test_fit_exponential_exact():
    L = np.linspace(1, 10, 7)
    C0, c, res = fit_exponential(L, 3.0 * np.exp(0.7 * L))
    assert C0 == pytest.approx(3.0) and c == pytest.approx(0.7) and res < 1e-12
    with pytest.raises(NonFinite):
        fit_exponential([1, 2, 3], [1.0, math.inf, 2.0])
    with pytest.raises(ValidationError):
        fit_exponential([1, 2], [1.0, 2.0])


# -- harmonic extension and energy -------------------------------------------------------

def test_extension_initial_data(basis):
    w = random_window(basis, 9.0, 3)
    ext = harmonic_extension(w, 1.0, 33)
    i0 = int(np.flatnonzero(ext.t == 0.0)[0])
    assert np.abs(ext.coeffs()[i0]).max() == 0.0
    assert np.abs(ext.dt_coeffs(1)[i0] - w.c).max() <= 1e-14 * np.abs(w.c).max()


def test_extension_residuals(basis):
    ext = harmonic_extension(random_window(basis, 8.0, 0), 1.0, 33)
    assert extension_residual(ext, "spectral") < 1e-12
    assert extension_residual(ext, "operator") < 1e-7
    with pytest.raises(ValidationError):
        extension_residual(ext, "galerkin")


def test_extension_overflow(basis):
    with pytest.raises(Overflow):
        harmonic_extension(random_window(basis, 18.0, 0), 50.0)
    with pytest.raises(ValidationError):
        harmonic_extension(random_window(basis, 8.0, 0), 0.0)


@given(st.floats(0.01, 20.0), st.floats(0.01, 3.0))
def test_time_integrals_closed_form(lam, T):
    a, b = time_integrals(lam, T)
    na, nb = time_integrals_numeric(lam, T)
    assert a == pytest.approx(na, rel=1e-9) and b == pytest.approx(nb, rel=1e-9)


def test_energy_ratio_bounded(basis):
    ratios = [energy_bound_check(random_window(basis, L, 0), 1.0).ratio for L in (2, 4, 8, 16)]
    assert all(0 < r < 1.0 for r in ratios)


# -- smallness ----------------------------------------------------------------------------

@given(st.lists(st.tuples(st.floats(0.1, 10), st.floats(0.01, 1), st.floats(1, 100)),
                min_size=2, max_size=20))
def test_fit_smallness_always_holds(rows):
    K, E, O = (np.array(c) for c in zip(*rows))
    C, alpha = fit_smallness(K, E, O)
    assert 0 < alpha < 1
    assert np.all(K <= C * E**alpha * O ** (1 - alpha) * (1 + 1e-9))


def test_smallness_experiment(basis):
    rep = smallness_experiment(basis, 8.0, trials=6, seed=1)
    assert 0 < rep.alpha < 1 and rep.holds.all()
    assert np.all(rep.sup_K <= rep.sup_Omega * (1 + 1e-12))
    with pytest.raises(ValidationError):
        smallness_experiment(basis, 8.0, z=(0.0, 1.2), trials=1)


def test_ellipticity():
    lo, hi = ellipticity_bounds(0.7)
    assert lo == pytest.approx(math.exp(-1.4)) and hi == pytest.approx(math.exp(1.4))
