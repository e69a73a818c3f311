"""Heat-kernel side: volume doubling, Gaussian quotients, the exact kernel of
the hyperbolic plane, Gaussian envelopes, observability and the constant
pipeline that turns observability into a thickness certificate.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigh
from scipy.special import erf, logsumexp

from .errors import InfeasibleCurvature, NoFeasiblePoint, SingularWindow, ValidationError
from .geom import ball_volume
from .quadrature import adaptive_gl


@dataclass(frozen=True)
class CurvatureParams:
    """Dimension, curvature bound and the constants of doubling and Gaussian bounds.

    The hyperbolic-plane defaults come from :func:`doubling_check` (C_D = 4)
    and from :func:`envelope_fit` on the default grid (C1, C2).
    """

    n: int = 2
    K: float = 1.0
    C_D: float = 4.0
    # envelope_fit on the default (d, t) grid; regression-tested
    C1: float = 5.819466326205815
    C2: float = 0.05

    def __post_init__(self):
        if not (self.n >= 1 and self.K >= 0 and self.C_D > 0 and self.C1 > 0 and self.C2 > 0):
            raise ValidationError(f"curvature parameters must be positive: {self}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CurvatureParams":
        extra = set(d) - {"n", "K", "C_D", "C1", "C2"}
        if extra:
            raise ValidationError(f"unknown curvature keys {sorted(extra)}")
        return cls(**d)


@dataclass(frozen=True)
class NecessityParams:
    t_K: float
    alpha_K: float
    beta_K: float
    m_K: float
    M_K: float
    M_prime_K: float
    R: float
    delta: float
    log_delta: float
    log_bound: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# -- volume doubling ----------------------------------------------------------

@dataclass
class DoublingReport:
    r: np.ndarray
    ratio: np.ndarray
    envelope: np.ndarray
    C_D: float
    iterate_n: int
    iterate_ratio: np.ndarray
    iterate_bound: np.ndarray

    @property
    def holds(self) -> bool:
        return bool(np.all(self.ratio <= self.envelope) and np.all(self.iterate_ratio <= self.iterate_bound))


def doubling_ratio(r) -> np.ndarray:
    """vol(B(2r)) / vol(B(r)) on the hyperbolic plane, equal to 4 cosh^2(r/2)."""
    r = np.asarray(r, dtype=float)
    return 4.0 * np.cosh(0.5 * r) ** 2


def doubling_check(r_grid, C_D: float = 4.0, n: int = 3) -> DoublingReport:
    """Check vol(B(2r)) <= C_D e^{C_D r} vol(B(r)) and its n-fold iterate."""
    r = np.asarray(r_grid, dtype=float)
    if np.any(r <= 0):
        raise ValidationError("radii must be positive")
    vol = np.vectorize(ball_volume)
    ratio = vol(2 * r) / vol(r)
    env = C_D * np.exp(C_D * r)
    it = vol(2**n * r) / vol(r)
    itb = C_D**n * np.exp(C_D * (2**n - 1) * r)
    return DoublingReport(r, ratio, env, C_D, n, it, itb)


# -- quotients of Gaussian integrals ---------------------------------------------

def log_gaussian_quotient_bound(alpha: float, beta: float, C_D: float) -> float:
    """log of e^{-alpha} / (1 + sum_n exp(2^{n+1} C_D - 4^n beta) C_D^{n+1}).

    The sum is taken in log space until terms drop below 1e-300 relative.
    """
    if not (alpha > 0 and beta > 0 and C_D > 0):
        raise ValidationError("alpha, beta and C_D must be positive")
    logs: list[float] = []
    lc = math.log(C_D)
    for n in range(200):
        logs.append(2.0 ** (n + 1) * C_D - 4.0**n * beta + (n + 1) * lc)
        # once decreasing, terms fall doubly exponentially
        if n > 0 and logs[-1] < logs[-2] and logs[-1] < max(logs) - 700.0:
            break
    s = logsumexp(logs)
    return -alpha - float(np.logaddexp(0.0, s))


def gaussian_quotient_bound(alpha: float, beta: float, C_D: float) -> float:
    return math.exp(log_gaussian_quotient_bound(alpha, beta, C_D))


def gaussian_integral_closed(alpha: float) -> float:
    """int over the plane of e^{-alpha d^2} dvol = pi^{3/2} alpha^{-1/2} e^{1/(4 alpha)} erf(1/(2 sqrt alpha))."""
    return float(math.pi**1.5 / math.sqrt(alpha) * math.exp(0.25 / alpha) * erf(0.5 / math.sqrt(alpha)))


def gaussian_integral(alpha: float, rtol: float = 1e-12) -> float:
    """2 pi int_0^inf e^{-alpha s^2} sinh s ds by adaptive quadrature."""
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    # beyond S the integrand is below e^{-60} of its peak
    S = 1.0 / (2 * alpha) + math.sqrt(60.0 / alpha) + 1.0
    f = lambda s: np.exp(-alpha * s * s + s) * (1 - np.exp(-2 * s)) / 2
    return 2 * math.pi * adaptive_gl(f, 0.0, S, rtol=rtol, initial_panels=8).value


def gaussian_quotient_numeric(alpha: float, beta: float) -> float:
    if not (alpha > 0 and beta > 0):
        raise ValidationError("alpha and beta must be positive")
    if alpha == beta:
        return 1.0
    return gaussian_integral(alpha) / gaussian_integral(beta)


# -- exact heat kernel of the hyperbolic plane ------------------------------------

def _kernel_integral(d: float, t: float, rtol: float) -> float:
    """e^{d^2/4t} int_d^inf s e^{-s^2/4t} / sqrt(cosh s - cosh d) ds with s = d + u^2."""
    # integrand below e^{-745} once (2 d u^2 + u^4) / 4t > 745
    U = math.sqrt(-d + math.sqrt(d * d + 2980.0 * t))

    def g(u):
        u2 = u * u
        s = d + u2
        # cosh(d + u^2) - cosh d = 2 sinh(d + u^2/2) sinh(u^2/2)
        den = np.sqrt(2.0 * np.sinh(d + 0.5 * u2) * np.sinh(0.5 * u2))
        with np.errstate(invalid="ignore", divide="ignore"):
            val = 2.0 * u * s * np.exp(-(2 * d * u2 + u2 * u2) / (4 * t)) / den
        # limit u -> 0: 2 d / sqrt(sinh d) (or 0 at d = 0)
        lim = 2 * d / math.sqrt(math.sinh(d)) if d > 0 else 0.0
        return np.where(u == 0, lim, val)

    return adaptive_gl(g, 0.0, U, rtol=rtol, initial_panels=8).value


def log_h2_heat_kernel(d: float, t: float, rtol: float = 1e-10) -> float:
    if not t > 0 or d < 0:
        raise ValidationError("need t > 0 and d >= 0")
    I = _kernel_integral(float(d), float(t), rtol)
    return (0.5 * math.log(2.0) - t / 4 - 1.5 * math.log(4 * math.pi * t)
            - d * d / (4 * t) + math.log(I))


def h2_heat_kernel(d, t, rtol: float = 1e-10):
    """Heat kernel p(d, t) of the hyperbolic plane (McKean's integral formula)."""
    d_arr = np.asarray(d, dtype=float)
    out = np.vectorize(lambda dd: math.exp(log_h2_heat_kernel(dd, t, rtol)))(d_arr)
    return float(out) if out.ndim == 0 else out


def kernel_mass(t: float, rtol: float = 1e-10) -> float:
    """2 pi int_0^inf p(s, t) sinh s ds, which should be 1."""
    S = 2 * t + math.sqrt(4 * t * t + 240 * t) + 2.0
    f = lambda s: np.vectorize(lambda ss: math.exp(log_h2_heat_kernel(ss, t, rtol) + ss)
                               * (1 - math.exp(-2 * ss)) / 2)(s)
    return 2 * math.pi * adaptive_gl(f, 0.0, S, rtol=1e-9, initial_panels=8).value


# -- Gaussian envelopes -------------------------------------------------------------

@dataclass
class EnvelopeReport:
    C1: float
    C2: float
    d: np.ndarray
    t: np.ndarray
    logp: np.ndarray  # (len(d), len(t))
    retried: bool = False

    def _parts(self):
        D, Tt = np.meshgrid(self.d, self.t, indexing="ij")
        logV = np.log(np.vectorize(ball_volume)(np.sqrt(Tt)))
        return D, Tt, logV

    def log_upper(self) -> np.ndarray:
        D, Tt, logV = self._parts()
        return math.log(self.C1) - logV - D**2 / (5 * Tt) + self.C2 * (Tt + D**2)

    def log_lower(self) -> np.ndarray:
        D, Tt, logV = self._parts()
        return -math.log(self.C1) - logV - D**2 / (3 * Tt) - self.C2 * (Tt + D**2)

    @property
    def holds(self) -> bool:
        tol = 1e-12
        return bool(np.all(self.logp <= self.log_upper() + tol) and np.all(self.logp >= self.log_lower() - tol))

    def rows(self):
        up, lo = self.log_upper(), self.log_lower()
        for i, dd in enumerate(self.d):
            for j, tt in enumerate(self.t):
                yield [float(dd), float(tt), float(self.logp[i, j]), float(lo[i, j]), float(up[i, j])]


def kernel_grid(d_grid, t_grid, rtol: float = 1e-10) -> np.ndarray:
    return np.array([[log_h2_heat_kernel(dd, tt, rtol) for tt in t_grid] for dd in d_grid])


def _min_logC1(logp, d, t, C2):
    D, Tt = np.meshgrid(d, t, indexing="ij")
    logV = np.log(np.vectorize(ball_volume)(np.sqrt(Tt)))
    up = logp + logV + D**2 / (5 * Tt) - C2 * (Tt + D**2)
    lo = -logp - logV - D**2 / (3 * Tt) - C2 * (Tt + D**2)
    return float(max(up.max(), lo.max()))


def envelope_fit(d_grid=None, t_grid=None, logp=None, C2_grid=None,
                 C1_max: float = 100.0) -> EnvelopeReport:
    """Smallest C2 on the search grid admitting some C1 <= C1_max, then the least such C1.

    Both displayed bounds are checked on every (d, t) sample with the exact
    vol(B(sqrt t)).  The search enlarges once (C1_max x 100, C2 range x 4)
    before giving up with NoFeasiblePoint.
    """
    d = np.linspace(0.0, 5.0, 26) if d_grid is None else np.asarray(d_grid, dtype=float)
    t = np.geomspace(0.05, 2.0, 16) if t_grid is None else np.asarray(t_grid, dtype=float)
    if d.min() > 0 or d.max() < 5 or t.min() > 0.05 or t.max() < 2:
        raise ValidationError("grid must cover d in [0, 5] and t in [0.05, 2]")
    if logp is None:
        logp = kernel_grid(d, t)
    C2s = np.round(np.arange(1, 101) * 0.05, 10) if C2_grid is None else np.asarray(C2_grid, dtype=float)
    for attempt in range(2):
        for c2 in C2s:
            lc1 = _min_logC1(logp, d, t, c2)
            c1 = max(1.0, math.exp(lc1))
            if c1 <= C1_max:
                # round up on a 1% grid so the stored constant is conservative
                c1 = 1.01 ** math.ceil(math.log(c1) / math.log(1.01))
                return EnvelopeReport(float(c1), float(c2), d, t, logp, retried=attempt > 0)
        C1_max *= 100.0
        C2s = np.round(np.arange(1, 4 * len(C2s) + 1) * (C2s[1] - C2s[0] if len(C2s) > 1 else 0.05), 10)
    raise NoFeasiblePoint("no (C1, C2) on the search grid bounds the kernel samples")


# -- observability ------------------------------------------------------------------

def observability_matrices(G: np.ndarray, lam: np.ndarray, T: float):
    """D = diag(e^{-2 lam^2 T}) and Q_jk = G_jk (1 - e^{-(lam_j^2 + lam_k^2) T}) / (lam_j^2 + lam_k^2)."""
    l2 = lam**2
    S = l2[:, None] + l2[None, :]
    Q = G * (-np.expm1(-S * T)) / S
    D = np.diag(np.exp(-2 * l2 * T))
    return D, 0.5 * (Q + Q.T)


def observability_constant(omega, T: float, basis, Lambda_cap: float, tol: float = 1e-14,
                           raise_singular: bool = True) -> float:
    """Smallest C with ||u(T)||^2 <= C int_0^T ||u(s)||_omega^2 ds over the window."""
    from .spectral import gram_matrix

    if not T > 0:
        raise ValidationError("T must be positive")
    idx = np.flatnonzero(basis.lam <= Lambda_cap)
    if len(idx) == 0:
        return 0.0
    G = gram_matrix(omega, basis, idx)
    D, Q = observability_matrices(G, basis.lam[idx], T)
    qmin = float(np.linalg.eigvalsh(Q)[0])
    if qmin <= tol * float(np.abs(Q).max()):
        if raise_singular:
            raise SingularWindow(f"observability form is singular (lambda_min = {qmin:.3e})")
        return math.inf
    try:
        mu = eigh(D, Q, eigvals_only=True)
    except LinAlgError as exc:
        if raise_singular:
            raise SingularWindow(f"generalized eigensolve failed: {exc}") from None
        return math.inf
    return float(mu[-1])


def heat_flow_norms(coeffs, lam, times) -> np.ndarray:
    """||u(t)|| for u(t) = sum e^{-lam^2 t} c_j phi_j."""
    c = np.asarray(coeffs, dtype=float)
    return np.array([np.linalg.norm(np.exp(-lam**2 * t) * c) for t in times])


@dataclass
class HeatBumpReport:
    lhs: float  # ||u(T)||^2
    observed: float  # int_0^T ||u||_omega^2
    C_obs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.C_obs * self.observed * (1 + 1e-10)


def heat_bump_experiment(omega, basis, t_K: float, z0=(0.0, 3.0), width: float = 0.3,
                         Lambda_cap: float | None = None, n_theta: int = 256) -> HeatBumpReport:
    """Observability tested on a concentrated initial state, as in the necessity argument.

    The initial datum is the projection of exp(-d(z, z0)^2 / (2 width^2))
    onto the basis, it is evolved for T = t_K / 2, and both sides of the
    observability inequality are evaluated.
    """
    from .geom import dist_xy
    from .spectral import gram_matrix

    cap = float(basis.lam.max()) if Lambda_cap is None else Lambda_cap
    idx = np.flatnonzero(basis.lam <= cap)
    y = basis.domain.y
    theta = np.arange(n_theta) / n_theta - 0.5
    # periodic distance: nearest lift in theta
    dx = np.mod(theta - z0[0] + 0.5, 1.0) - 0.5
    dd = dist_xy(z0[0] + dx[:, None], y[None, :], z0[0], z0[1])
    u0 = np.exp(-dd**2 / (2 * width**2))
    ang = basis.angular(theta)[idx]
    c = np.einsum("li,jl,ji,i->j", u0, ang, basis.F[idx], basis.domain.weights) / n_theta
    lam = basis.lam[idx]
    T = 0.5 * t_K
    G = gram_matrix(omega, basis, idx)
    D, Q = observability_matrices(G, lam, T)
    lhs = float(c @ D @ c)
    obs = float(c @ Q @ c)
    C = observability_constant(omega, T, basis, cap, raise_singular=False)
    return HeatBumpReport(lhs, obs, C)


# -- the necessity pipeline ------------------------------------------------------------

def necessity_pipeline(cp: CurvatureParams, R_grid_size: int = 400) -> NecessityParams:
    """Constants t_K, alpha_K, beta_K, m_K, M_K, M'_K and the certificate (R, delta).

    R is the first value 0.1 * 1.1^j with exp(-beta_K R^2 / 2) below half the
    Gaussian quotient bound at (alpha_K, beta_K / 2); delta = e^{-alpha_K R^2} / (2 M'_K).
    """
    C1, C2, CD = cp.C1, cp.C2, cp.C_D
    t_K = 1.0 / (10.0 * (C2 + 2.0 * CD))
    beta_K = 2.0 / (5.0 * t_K) - 2.0 * C2
    if not beta_K > 4.0 * CD:
        raise InfeasibleCurvature(f"beta_K = {beta_K} does not exceed 4 C_D = {4 * CD}")
    alpha_K = 2.0 * (C2 + 1.0 / (3.0 * t_K))
    m_K = C1**-2 * math.exp(-2.0 * C2 * t_K)
    # time integral over (0, t_K / 2) of the squared upper bound
    M_K = 0.5 * t_K * C1**2 * math.exp(2.0 * C2 * t_K)
    # one doubling step from sqrt(t_K / 2) to sqrt(t_K) <= 2 sqrt(t_K / 2)
    vr = CD * math.exp(CD * math.sqrt(0.5 * t_K))
    Mp = M_K / m_K * vr**2
    log_bound = log_gaussian_quotient_bound(alpha_K, 0.5 * beta_K, CD)
    target = math.log(0.5) + log_bound
    R = None
    for j in range(R_grid_size):
        r = 0.1 * 1.1**j
        if -0.5 * beta_K * r * r < target:
            R = r
            break
    if R is None:
        raise InfeasibleCurvature("no radius on the search grid satisfies the Gaussian tail condition")
    log_delta = -alpha_K * R * R - math.log(2.0 * Mp)
    return NecessityParams(t_K, alpha_K, beta_K, m_K, M_K, Mp, R, math.exp(log_delta),
                           log_delta, log_bound)


__all__ = [
    "CurvatureParams", "NecessityParams", "DoublingReport", "doubling_ratio", "doubling_check",
    "log_gaussian_quotient_bound", "gaussian_quotient_bound", "gaussian_integral",
    "gaussian_integral_closed", "gaussian_quotient_numeric", "h2_heat_kernel",
    "log_h2_heat_kernel", "kernel_mass", "EnvelopeReport", "kernel_grid", "envelope_fit",
    "observability_matrices", "observability_constant", "heat_flow_norms",
    "HeatBumpReport", "heat_bump_experiment", "necessity_pipeline",
]
