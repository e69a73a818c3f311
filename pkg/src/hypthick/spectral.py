"""Laplace-Beltrami modes on a truncated cusp and what is built from them.

The cusp S^1 x (a, Y) with metric (dtheta^2 + dy^2) / y^2 separates: a mode
is Theta(theta) f(y) with Theta in {1, sqrt2 cos 2 pi k theta, sqrt2 sin 2 pi k theta}
and -f'' + 4 pi^2 k^2 f = lam^2 f / y^2, Dirichlet at both ends.  The radial
problem is discretised by central differences on a uniform y-grid and
symmetrised with the mass matrix diag(1/y^2), which gives one symmetric
tridiagonal eigenproblem per k.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal

from .errors import ConvergenceFailure, DegenerateField, NonFinite, Overflow, SingularWindow, ValidationError
from .quadrature import adaptive_gl

TWO_PI = 2.0 * math.pi
SINH_GUARD = 700.0


@dataclass(frozen=True)
class TruncatedCusp:
    a: float
    Y: float
    n: int = 800
    k_max: int = 8

    def __post_init__(self):
        if not (self.a > 0 and self.Y > self.a):
            raise ValidationError(f"need 0 < a < Y, got a={self.a}, Y={self.Y}")
        if int(self.n) < 16:
            raise ValidationError("need at least 16 grid points")
        if int(self.k_max) < 0:
            raise ValidationError("k_max must be >= 0")

    @property
    def h(self) -> float:
        return (self.Y - self.a) / (self.n + 1)

    @property
    def y(self) -> np.ndarray:
        return self.a + self.h * np.arange(1, self.n + 1)

    @property
    def weights(self) -> np.ndarray:
        """Radial quadrature weights h / y_i^2 of the discrete L2 norm."""
        y = self.y
        return self.h / (y * y)

    def exact_k0(self, m) -> np.ndarray:
        """Continuum k = 0 frequencies sqrt(1/4 + (m pi / log(Y/a))^2)."""
        m = np.asarray(m, dtype=float)
        return np.sqrt(0.25 + (m * math.pi / math.log(self.Y / self.a)) ** 2)


@dataclass(frozen=True)
class EigenMode:
    k: int
    parity: int  # 0 for cos (and k = 0), 1 for sin
    m: int
    lam: float
    profile: np.ndarray


def _radial_tridiagonal(dom: TruncatedCusp, k: int):
    y = dom.y
    h2 = dom.h**2
    d = y * y * (2.0 / h2 + (TWO_PI * k) ** 2)
    e = -y[:-1] * y[1:] / h2
    return d, e


def radial_operator_apply(dom: TruncatedCusp, k: int, f: np.ndarray) -> np.ndarray:
    """(-D2 + 4 pi^2 k^2) f with Dirichlet ends, along the last axis."""
    h2 = dom.h**2
    pad = np.zeros(f.shape[:-1] + (f.shape[-1] + 2,))
    pad[..., 1:-1] = f
    lap = (pad[..., 2:] - 2 * pad[..., 1:-1] + pad[..., :-2]) / h2
    return -lap + (TWO_PI * k) ** 2 * f


@dataclass
class ModeBasis:
    """Modes sorted by frequency; profiles are normalised in the discrete norm."""

    domain: TruncatedCusp
    k: np.ndarray
    parity: np.ndarray
    m: np.ndarray
    lam: np.ndarray
    F: np.ndarray  # (modes, n) radial samples

    def __len__(self):
        return len(self.lam)

    @property
    def modes(self) -> list[EigenMode]:
        return [EigenMode(int(k), int(p), int(m), float(l), f)
                for k, p, m, l, f in zip(self.k, self.parity, self.m, self.lam, self.F)]

    def angular(self, theta) -> np.ndarray:
        """Theta_j(theta) for all modes; shape (modes,) + theta.shape."""
        th = np.asarray(theta, dtype=float)
        arg = TWO_PI * self.k.reshape((-1,) + (1,) * th.ndim) * th
        c = np.where(self.k == 0, 1.0, math.sqrt(2.0)).reshape((-1,) + (1,) * th.ndim)
        par = self.parity.reshape((-1,) + (1,) * th.ndim)
        return c * np.where(par == 0, np.cos(arg), np.sin(arg))

    def angular_dtheta(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        kk = self.k.reshape((-1,) + (1,) * th.ndim)
        arg = TWO_PI * kk * th
        c = np.where(self.k == 0, 1.0, math.sqrt(2.0)).reshape((-1,) + (1,) * th.ndim)
        par = self.parity.reshape((-1,) + (1,) * th.ndim)
        return c * TWO_PI * kk * np.where(par == 0, -np.sin(arg), np.cos(arg))

    def synthesize(self, coeffs, theta) -> np.ndarray:
        """u(theta_l, y_i) = sum_j c_j Theta_j(theta_l) f_j(y_i); shape (len(theta), n)."""
        c = np.asarray(coeffs, dtype=float)
        return np.einsum("j,jl,ji->li", c, self.angular(theta), self.F)

    def l2_norm(self, field_: np.ndarray) -> float:
        """Discrete L2(M) norm of samples on a uniform theta grid times the y-grid."""
        return float(math.sqrt(np.sum(field_**2 * self.domain.weights[None, :]) / field_.shape[0]))

    def save(self, prefix) -> None:
        """Write <prefix>.json (header) and <prefix>.csv (k, parity, m, lam, f_1..f_n)."""
        prefix = Path(prefix)
        d = self.domain
        head = {"a": d.a, "Y": d.Y, "n": d.n, "k_max": d.k_max, "modes": len(self)}
        prefix.with_suffix(".json").write_text(json.dumps(head, indent=2, sort_keys=True) + "\n")
        with open(prefix.with_suffix(".csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "parity", "m", "lam"] + [f"f{i}" for i in range(1, d.n + 1)])
            for k, p, m, l, f in zip(self.k, self.parity, self.m, self.lam, self.F):
                w.writerow([int(k), int(p), int(m), repr(float(l))] + [repr(float(v)) for v in f])

    @classmethod
    def load(cls, prefix) -> "ModeBasis":
        prefix = Path(prefix)
        head = json.loads(prefix.with_suffix(".json").read_text())
        dom = TruncatedCusp(head["a"], head["Y"], head["n"], head["k_max"])
        rows = np.loadtxt(prefix.with_suffix(".csv"), delimiter=",", skiprows=1, ndmin=2)
        return cls(dom, rows[:, 0].astype(int), rows[:, 1].astype(int), rows[:, 2].astype(int),
                   rows[:, 3].copy(), rows[:, 4:].copy())


def solve_modes(domain: TruncatedCusp, n_modes: int | None = 30,
                lam_max: float | None = None) -> ModeBasis:
    """Lowest modes over |k| <= k_max (cos and sin for k > 0).

    ``n_modes`` keeps that many modes overall; ``lam_max`` keeps every mode
    with lam <= lam_max.  At least one of them must be given.
    """
    if n_modes is None and lam_max is None:
        raise ValidationError("give n_modes or lam_max")
    y = domain.y
    h = domain.h
    ks, ps, ms, ls, fs = [], [], [], [], []
    for k in range(domain.k_max + 1):
        d, e = _radial_tridiagonal(domain, k)
        try:
            if lam_max is not None:
                w, g = eigh_tridiagonal(d, e, select="v", select_range=(0.0, lam_max**2))
            else:
                cnt = min(n_modes, domain.n)
                w, g = eigh_tridiagonal(d, e, select="i", select_range=(0, cnt - 1))
        except LinAlgError as exc:
            raise ConvergenceFailure(f"tridiagonal eigensolver failed for k={k}: {exc}") from None
        if len(w) == 0:
            continue
        if np.any(w <= 0):
            raise ConvergenceFailure(f"non-positive eigenvalue for k={k}")
        # M^{1/2} f = g with M = diag(1/y^2); scale so sum h f^2 / y^2 = 1
        f = (y[:, None] * g / math.sqrt(h)).T
        # fix signs: positive first lobe
        idx = np.argmax(np.abs(f) > 1e-8 * np.abs(f).max(axis=1, keepdims=True), axis=1)
        f *= np.sign(f[np.arange(len(f)), idx])[:, None]
        for par in ((0,) if k == 0 else (0, 1)):
            ks.append(np.full(len(w), k))
            ps.append(np.full(len(w), par))
            ms.append(np.arange(1, len(w) + 1))
            ls.append(np.sqrt(w))
            fs.append(f)
    k = np.concatenate(ks)
    p = np.concatenate(ps)
    m = np.concatenate(ms)
    lam = np.concatenate(ls)
    F = np.concatenate(fs)
    order = np.lexsort((p, k, lam))
    if n_modes is not None and lam_max is None:
        order = order[:n_modes]
    return ModeBasis(domain, k[order], p[order], m[order], lam[order], F[order])


# -- windows and multipliers -------------------------------------------------

@dataclass
class SpectralWindow:
    Lambda: float
    basis: ModeBasis
    coeffs: np.ndarray  # full length; zero outside the window

    @property
    def mask(self) -> np.ndarray:
        return self.basis.lam <= self.Lambda

    @property
    def lam(self) -> np.ndarray:
        return self.basis.lam[self.mask]

    @property
    def c(self) -> np.ndarray:
        return self.coeffs[self.mask]

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def project(coeffs, basis: ModeBasis, Lambda: float) -> SpectralWindow:
    """Pi_Lambda: keep the coefficients of modes with lam <= Lambda."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != basis.lam.shape:
        raise ValidationError("coefficient vector does not match the basis")
    return SpectralWindow(float(Lambda), basis, np.where(basis.lam <= Lambda, c, 0.0))


def random_window(basis: ModeBasis, Lambda: float, seed: int) -> SpectralWindow:
    rng = np.random.Generator(np.random.Philox(seed))
    return project(rng.standard_normal(len(basis)), basis, Lambda)


@dataclass
class MultiplierReport:
    sup_interval: float
    sup_modes: float
    ratios: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.ratios <= self.sup_interval * (1 + 1e-12) + 1e-300))

    @property
    def tight(self) -> bool:
        """The ratio never exceeds the sup over the window's own frequencies."""
        return bool(np.all(self.ratios <= self.sup_modes * (1 + 1e-12) + 1e-300))


def multiplier_bound_check(phi: Callable, window: SpectralWindow, trials: int = 16,
                           seed: int = 0, grid: int = 4097) -> MultiplierReport:
    """Compare ||phi(sqrt(-Delta)) Pi u|| / ||Pi u|| with sup |phi| on [0, Lambda]."""
    lam = window.lam
    pts = np.concatenate([np.linspace(0.0, window.Lambda, grid), lam])
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(phi(pts), dtype=float))
    sup_interval = float(np.nanmax(vals))
    sup_modes = float(np.abs(phi(lam)).max()) if len(lam) else 0.0
    rng = np.random.Generator(np.random.Philox(seed))
    ratios = []
    mult = np.asarray(phi(lam), dtype=float) if len(lam) else np.zeros(0)
    for i in range(trials):
        c = window.c if i == 0 else rng.standard_normal(len(lam))
        nc = np.linalg.norm(c)
        if nc == 0:
            continue
        ratios.append(np.linalg.norm(mult * c) / nc)
    return MultiplierReport(sup_interval, sup_modes, np.array(ratios))


# -- Gram matrices and the spectral-estimate constant -----------------------

def _angular_integrals(kvals, par_vals, lo, hi, inside):
    """Exact int over the omega-intervals of Theta_p Theta_q, per row.

    lo, hi, inside have shape (rows, segs).  Returns (rows, P, P) for the
    angular functions listed by (kvals, par_vals).
    """
    nu_max = 2 * int(kvals.max()) if len(kvals) else 0
    nu = np.arange(nu_max + 1)
    a = TWO_PI * nu[None, None, :] * lo[..., None]
    b = TWO_PI * nu[None, None, :] * hi[..., None]
    w = inside[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        Icos = np.where(nu == 0, (hi - lo)[..., None], (np.sin(b) - np.sin(a)) / (TWO_PI * nu))
        Isin = np.where(nu == 0, 0.0, -(np.cos(b) - np.cos(a)) / (TWO_PI * nu))
    Icos = (Icos * w).sum(axis=1)  # (rows, nu)
    Isin = (Isin * w).sum(axis=1)
    kp, kq = kvals[:, None], kvals[None, :]
    pp, pq = par_vals[:, None], par_vals[None, :]
    cp = np.where(kp == 0, 1.0, math.sqrt(2.0)) * np.where(kq == 0, 1.0, math.sqrt(2.0))
    s = kp + kq
    d = np.abs(kp - kq)
    sgn = np.sign(kq - kp)  # sin(A - B) with A = 2 pi kp theta
    cc = 0.5 * (Icos[:, d] + Icos[:, s])
    ss = 0.5 * (Icos[:, d] - Icos[:, s])
    # cos(A) sin(B) = (sin(A + B) - sin(A - B)) / 2 = (sin s + sgn sin d) / 2
    cs = 0.5 * (Isin[:, s] + sgn * Isin[:, d])
    sc = np.transpose(cs, (0, 2, 1))
    out = np.where((pp == 0) & (pq == 0), cc,
                   np.where((pp == 1) & (pq == 1), ss, np.where(pp == 0, cs, sc)))
    return out * cp


def gram_matrix(omega, basis: ModeBasis, idx=None) -> np.ndarray:
    """G_jk = int_omega phi_j phi_k dvol, exact in theta and discrete in y."""
    from .thickness import SensorSet

    if not isinstance(omega, SensorSet):
        raise ValidationError("omega must be a SensorSet")
    if omega.end is not None and not (omega.end.is_cusp and omega.end.period == 1.0):
        raise ValidationError("sensor set must live on a cusp of period 1")
    idx = np.arange(len(basis)) if idx is None else np.asarray(idx)
    if len(idx) == 0:
        return np.zeros((0, 0))
    dom = basis.domain
    y = dom.y
    lo = np.full(y.shape, -0.5)
    hi = np.full(y.shape, 0.5)
    b = omega.root.breaks("h", y, lo, hi)
    b = np.where(np.isfinite(b), b, lo[:, None])
    b = np.clip(b, -0.5, 0.5)
    b = np.sort(np.concatenate([lo[:, None], b, hi[:, None]], axis=1), axis=1)
    mid = 0.5 * (b[:, 1:] + b[:, :-1])
    inside = omega.contains(mid, np.broadcast_to(y[:, None], mid.shape))
    # distinct angular functions among the selected modes
    ang = np.stack([basis.k[idx], basis.parity[idx]], axis=1)
    uniq, inv = np.unique(ang, axis=0, return_inverse=True)
    inv = np.ravel(inv)
    T = _angular_integrals(uniq[:, 0], uniq[:, 1], b[:, :-1], b[:, 1:], inside)
    F = basis.F[idx] * np.sqrt(dom.weights)[None, :]
    G = np.einsum("ji,ijk,ki->jk", F, T[:, inv][:, :, inv], F, optimize=True)
    return 0.5 * (G + G.T)


def spectral_constant(omega, Lambda: float, basis: ModeBasis, tol: float = 1e-14,
                      raise_singular: bool = True) -> float:
    """Optimal C with ||u||_M <= C ||u||_omega on the window lam <= Lambda.

    Equals lambda_min(G)^{-1/2}; an empty window gives 1 by convention.
    """
    idx = np.flatnonzero(basis.lam <= Lambda)
    if len(idx) == 0:
        return 1.0
    G = gram_matrix(omega, basis, idx)
    mu = float(np.linalg.eigvalsh(G)[0])
    if mu <= tol:
        if raise_singular:
            raise SingularWindow(f"Gram matrix is singular (lambda_min = {mu:.3e})")
        return math.inf
    return 1.0 / math.sqrt(mu)


def fit_exponential(Lambdas, Cs) -> tuple[float, float, float]:
    """Least squares log C = log C0 + c Lambda; returns (C0, c, rms residual)."""
    L = np.asarray(Lambdas, dtype=float)
    C = np.asarray(Cs, dtype=float)
    if len(L) < 3 or len(L) != len(C):
        raise ValidationError("need at least 3 matching points")
    if not (np.all(np.isfinite(C)) and np.all(np.isfinite(L)) and np.all(C > 0)):
        raise NonFinite("fit_exponential needs finite positive constants")
    A = np.stack([np.ones_like(L), L], axis=1)
    sol, *_ = np.linalg.lstsq(A, np.log(C), rcond=None)
    res = np.log(C) - A @ sol
    return float(math.exp(sol[0])), float(sol[1]), float(math.sqrt(np.mean(res**2)))


# -- harmonic extension -------------------------------------------------------

def _guard(window: SpectralWindow, T: float):
    if window.Lambda * T > SINH_GUARD and np.any(window.lam * T > SINH_GUARD):
        raise Overflow(f"Lambda * T = {window.Lambda * T:.1f} exceeds the sinh guard {SINH_GUARD}")


@dataclass
class HarmonicExtension:
    """v(t) = sum_j sinh(lam_j t) / lam_j c_j phi_j on a t-grid."""

    window: SpectralWindow
    T: float
    t: np.ndarray

    @property
    def time_factor(self) -> np.ndarray:
        lam = self.window.lam
        return np.sinh(np.outer(self.t, lam)) / lam

    def coeffs(self) -> np.ndarray:
        """(t, modes) coefficients of v(t)."""
        return self.time_factor * self.window.c

    def dt_coeffs(self, order: int = 1) -> np.ndarray:
        lam = self.window.lam
        lt = np.outer(self.t, lam)
        base = np.cosh(lt) if order % 2 else np.sinh(lt)
        return base * lam ** (order - 1) * self.window.c

    def field(self, theta) -> np.ndarray:
        """v on (t, theta, y); shape (len(t), len(theta), n)."""
        b = self.window.basis
        m = self.window.mask
        return np.einsum("tj,jl,ji->tli", self.coeffs(), b.angular(theta)[m], b.F[m], optimize=True)


def harmonic_extension(window: SpectralWindow, T: float, t_points: int = 33) -> HarmonicExtension:
    if not T > 0:
        raise ValidationError("T must be positive")
    _guard(window, T)
    t = np.linspace(-T, T, int(t_points))
    return HarmonicExtension(window, float(T), t)


def extension_residual(ext: HarmonicExtension, method: str = "fd", n_theta: int = 64,
                       row_stride: int = 1) -> float:
    """max |(d_t^2 + Delta_g) v| / max |v| over the interior of the grid.

    ``spectral``: the identity d_t^2 v = lam^2 v = -Delta_g v per mode, with
    analytic time derivatives.  ``operator``: the same, but Delta_g is
    applied through the discrete radial operator to the stored profiles, so
    it also measures eigensolver accuracy.  ``fd``: central differences in t
    and theta on the sampled field (second order in both steps); the radial
    part uses the difference operator of the eigensolver.  ``row_stride``
    evaluates the fd residual on every stride-th y row only.
    """
    w = ext.window
    b = w.basis
    dom = b.domain
    m = w.mask
    if not m.any():
        return 0.0
    y = dom.y
    idx = np.flatnonzero(m)
    theta = np.arange(n_theta) / n_theta
    ang = b.angular(theta)[m]
    if method == "spectral":
        c = ext.coeffs()
        r = ext.dt_coeffs(2) - w.lam**2 * c
        den = np.abs(c).max()
        return float(np.abs(r).max() / den) if den > 0 else 0.0
    if method == "operator":
        # Delta_g phi_j = -y^2 (4 pi^2 k^2 f - f'') Theta
        lap = np.stack([-y**2 * radial_operator_apply(dom, int(b.k[j]), b.F[j]) for j in idx])
        v = np.einsum("tj,jl,ji->tli", ext.coeffs(), ang, b.F[m], optimize=True)
        r = (np.einsum("tj,jl,ji->tli", ext.dt_coeffs(2), ang, b.F[m], optimize=True)
             + np.einsum("tj,jl,ji->tli", ext.coeffs(), ang, lap, optimize=True))
        vmax = np.abs(v).max()
        return float(np.abs(r).max() / vmax) if vmax > 0 else 0.0
    if method != "fd":
        raise ValidationError(f"unknown residual method {method!r}")
    rows = np.arange(0, dom.n, max(1, int(row_stride)))
    Fp = np.pad(b.F[m], ((0, 0), (1, 1)))  # Dirichlet zeros at both ends
    c = ext.coeffs()

    def at(offset):
        return np.einsum("tj,jl,ji->tli", c, ang, Fp[:, rows + 1 + offset], optimize=True)

    v, vu, vd = at(0), at(1), at(-1)
    ht = ext.t[1] - ext.t[0]
    hth = 1.0 / n_theta
    vt = (v[2:] - 2 * v[1:-1] + v[:-2]) / ht**2
    vc = v[1:-1]
    vth = (np.roll(vc, -1, axis=1) - 2 * vc + np.roll(vc, 1, axis=1)) / hth**2
    vyy = (vu[1:-1] - 2 * vc + vd[1:-1]) / dom.h**2
    r = vt + y[rows] ** 2 * (vth + vyy)
    vmax = np.abs(v).max()
    return float(np.abs(r).max() / vmax) if vmax > 0 else 0.0


# -- the H^3 energy of the extension ------------------------------------------

def _time_integrals_scaled(lam, T, Lambda):
    """e^{-2 Lambda T} int_{-T}^T sinh^2(lam t) dt and the cosh^2 analogue."""
    lam = np.asarray(lam, dtype=float)
    # sinh(2 lam T) / (2 lam) scaled by e^{-2 Lambda T}
    sh = (np.exp(2 * (lam - Lambda) * T) - np.exp(-2 * (lam + Lambda) * T)) / (4 * lam)
    tt = T * math.exp(-2 * Lambda * T)
    return sh - tt, sh + tt


def time_integrals(lam: float, T: float) -> tuple[float, float]:
    """Closed forms of int_{-T}^T sinh^2(lam t) dt and int_{-T}^T cosh^2(lam t) dt."""
    s = math.sinh(2 * lam * T) / (2 * lam)
    return s - T, s + T


def time_integrals_numeric(lam: float, T: float, rtol: float = 1e-12) -> tuple[float, float]:
    s = adaptive_gl(lambda t: np.sinh(lam * t) ** 2, -T, T, rtol=rtol).value
    c = adaptive_gl(lambda t: np.cosh(lam * t) ** 2, -T, T, rtol=rtol).value
    return s, c


@dataclass
class EnergyReport:
    Lambda: float
    T: float
    h3_norm: float  # scaled by e^{-Lambda T}
    u_norm: float

    @property
    def ratio(self) -> float:
        if self.u_norm == 0:
            return 0.0
        return self.h3_norm / (self.Lambda**3 * self.T * self.u_norm)


def h3_energy(window: SpectralWindow, T: float) -> float:
    """e^{-Lambda T} ||w||_{H^3((-T,T) x M)} for the harmonic extension w."""
    _guard(window, T)
    lam = window.lam
    c2 = window.c**2
    if len(lam) == 0:
        return 0.0
    Is, Ic = _time_integrals_scaled(lam, T, window.Lambda)
    total = np.zeros_like(lam)
    for j in range(4):
        # d_t^j (sinh(lam t)/lam) = lam^{j-1} sinh or cosh
        It = Is if j % 2 == 0 else Ic
        total += (1 + lam**2) ** (3 - j) * lam ** (2 * (j - 1)) * It
    return float(math.sqrt(np.sum(c2 * total)))


def energy_bound_check(window: SpectralWindow, T: float) -> EnergyReport:
    """Ratio ||w||_{H^3} / (Lambda^3 T e^{Lambda T} ||u||) for the window's data."""
    return EnergyReport(window.Lambda, float(T), h3_energy(window, T), window.norm())


# -- propagation of smallness experiment ---------------------------------------

@dataclass
class SmallnessReport:
    sup_K: np.ndarray
    sup_E: np.ndarray
    sup_Omega: np.ndarray
    C: float
    alpha: float
    skipped: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def holds(self) -> np.ndarray:
        rhs = self.C * self.sup_E**self.alpha * self.sup_Omega ** (1 - self.alpha)
        return self.sup_K <= rhs * (1 + 1e-12)

    def rows(self):
        for k, e, o, h in zip(self.sup_K, self.sup_E, self.sup_Omega, self.holds):
            yield [float(k), float(e), float(o), bool(h)]


def fit_smallness(sup_K, sup_E, sup_Omega) -> tuple[float, float]:
    """Support line of the trials: log(K/Omega) <= log C + alpha log(E/Omega).

    Among alpha in (0, 1) with C(alpha) = max_i (K_i/Omega_i)(Omega_i/E_i)^alpha
    (the least C that makes every trial hold), picks the one with the
    smallest mean slack; ties go to the smallest alpha.
    """
    a = np.log(np.asarray(sup_E) / np.asarray(sup_Omega))
    b = np.log(np.asarray(sup_K) / np.asarray(sup_Omega))
    eps = 1e-6
    cand = [eps, 1 - eps]
    for i in range(len(a)):
        for j in range(i + 1, len(a)):
            if a[i] != a[j]:
                al = (b[i] - b[j]) / (a[i] - a[j])
                if eps < al < 1 - eps:
                    cand.append(al)
    cand = np.array(sorted(cand))
    logC = np.max(b[None, :] - cand[:, None] * a[None, :], axis=1)
    slack = logC[:, None] + cand[:, None] * a[None, :] - b[None, :]
    obj = slack.mean(axis=1)
    best = int(np.flatnonzero(obj <= obj.min() + 1e-12)[0])
    return float(math.exp(logC[best])), float(cand[best])


def _ball_grid(basis: ModeBasis, xz, yz, r, n_x):
    """Grid points (x, y-index) of the lifted ball B_H(xz + i yz, r)."""
    y = basis.domain.y
    cy, er = yz * math.cosh(r), yz * math.sinh(r)
    rows = np.flatnonzero(np.abs(y - cy) < er)
    if len(rows) == 0 or rows[0] == 0 or rows[-1] == len(y) - 1:
        raise ValidationError("smallness ball must sit strictly inside the truncated cusp")
    xs = np.linspace(xz - er, xz + er, n_x)
    X, I = np.meshgrid(xs, rows, indexing="ij")
    inside = (X - xz) ** 2 + (y[I] - cy) ** 2 < er**2
    return X[inside], I[inside]


def gradient_sup(window: SpectralWindow, t, x, iy, yz: float) -> float:
    """max |grad W| in the rescaled chart over the points (t, x, y_iy).

    W(t, X, Y) = v(t, xz + yz X, yz Y), so the chart gradient is
    (d_t v, yz d_x v, yz d_y v).
    """
    b = window.basis
    m = window.mask
    if not m.any():
        return 0.0
    lam = window.lam
    c = window.c
    F = b.F[m]
    dF = np.gradient(F, b.domain.h, axis=1)
    ang = b.angular(x)[m]
    dang = b.angular_dtheta(x)[m]
    S = np.sinh(np.outer(t, lam)) / lam * c
    Cc = np.cosh(np.outer(t, lam)) * c
    Fi, dFi = F[:, iy], dF[:, iy]
    vt = np.einsum("tj,jp->tp", Cc, ang * Fi)
    vx = np.einsum("tj,jp->tp", S, dang * Fi)
    vy = np.einsum("tj,jp->tp", S, ang * dFi)
    g2 = vt**2 + yz**2 * (vx**2 + vy**2)
    return float(math.sqrt(g2.max()))


def smallness_experiment(basis: ModeBasis, Lambda: float, T: float = 1.0, z=(0.0, 3.0),
                         R: float = 0.5, eta: float = 0.5, E_box=None, trials: int = 20,
                         seed: int = 0, n_x: int = 96, t_points: int = 41) -> SmallnessReport:
    """Fit sup_K |grad W| <= C sup_E |grad W|^alpha sup_Omega |grad W|^(1-alpha).

    K = (-T/2, T/2) x B(z, R), Omega = (-T, T) x B(z, e^eta R) and
    E = {0} x F with F a chart box inside B(z, R), all on the lift of the
    cusp to the half-plane.  Each trial draws a fresh seeded window.
    """
    xz, yz = z
    T1, T2 = 0.5 * T, T
    if E_box is None:
        E_box = (xz - 0.2, xz + 0.2, yz * math.exp(-R / 2), yz * math.exp(R / 2))
    t = np.linspace(-T2, T2, t_points)
    tK = t[np.abs(t) < T1]
    tO = t[np.abs(t) < T2]
    xK, iK = _ball_grid(basis, xz, yz, R, n_x)
    xO, iO = _ball_grid(basis, xz, yz, math.exp(eta) * R, n_x)
    y = basis.domain.y
    inE = (xK >= E_box[0]) & (xK <= E_box[1]) & (y[iK] >= E_box[2]) & (y[iK] <= E_box[3])
    if not inE.any():
        raise ValidationError("E box misses the grid of B(z, R)")
    xE, iE = xK[inE], iK[inE]
    sK, sE, sO = [], [], []
    skipped = 0
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(trials):
        w = project(rng.standard_normal(len(basis)), basis, Lambda)
        _guard(w, T)
        o = gradient_sup(w, tO, xO, iO, yz)
        if o == 0.0:
            if not w.mask.any():
                skipped += 1
                continue
            raise DegenerateField("sup over Omega vanishes")
        sK.append(gradient_sup(w, tK, xK, iK, yz))
        sE.append(gradient_sup(w, np.zeros(1), xE, iE, yz))
        sO.append(o)
    if not sK:
        return SmallnessReport(np.zeros(0), np.zeros(0), np.zeros(0), 1.0, 0.5, skipped)
    sK, sE, sO = map(np.array, (sK, sE, sO))
    C, alpha = fit_smallness(sK, sE, sO)
    meta = {"Lambda": Lambda, "T": T, "R": R, "eta": eta, "z": list(z), "E_box": list(E_box),
            "n_x": n_x, "t_points": t_points}
    return SmallnessReport(sK, sE, sO, C, alpha, skipped, meta)


def ellipticity_bounds(R: float, n: int = 2001) -> tuple[float, float]:
    """Extremes of 1/Y^2 over the chart ball B(i, R), against e^{-2R} and e^{2R}."""
    Y = np.exp(np.linspace(-R, R, n))
    a = 1.0 / Y**2
    return float(a.min()), float(a.max())


__all__ = [
    "TruncatedCusp", "EigenMode", "ModeBasis", "solve_modes", "SpectralWindow", "project",
    "random_window", "MultiplierReport", "multiplier_bound_check", "gram_matrix",
    "spectral_constant", "fit_exponential", "HarmonicExtension", "harmonic_extension",
    "extension_residual", "time_integrals", "time_integrals_numeric", "EnergyReport",
    "h3_energy", "energy_bound_check", "SmallnessReport", "fit_smallness",
    "smallness_experiment", "gradient_sup", "ellipticity_bounds", "radial_operator_apply",
]
