"""Funnel and cusp end models.

A cusp end is the region above the horocycle y = 1/l in H/<z -> z + 1>, with
fundamental domain D_C = [-1/2, 1/2) x (1/l, inf).  A funnel is the left
half of H/<z -> e^l z>, with fundamental domain
D_F = {x < 0 < y, 1 <= |z| < e^l}.

Both ends are handled in "slice" coordinates (u, w) in which the group acts
by u -> u + period and the volume form is weight(w) du dw:

    cusp:   u = x,       w = y,        weight = 1 / y^2,        period 1
    funnel: u = log|z|,  w = arg z,    weight = 1 / sin^2(w),   period l

A geodesic ball meets each line w = const in one u-interval, which is what
makes exact periodic-lift integrals cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import OutOfRegion, ValidationError
from .geom import GeodesicBall, HPoint, Mobius, ball_to_euclidean, dist_xy
from .quadrature import adaptive_gl

FUNNEL = "funnel"
CUSP = "cusp"


@dataclass(frozen=True)
class EndModel:
    kind: str
    ell: float

    def __post_init__(self):
        if self.kind not in (FUNNEL, CUSP):
            raise ValidationError(f"unknown end kind {self.kind!r}")
        if not (self.ell > 0.0 and math.isfinite(self.ell)):
            raise ValidationError(f"end length must be positive, got {self.ell}")

    @classmethod
    def funnel(cls, ell: float) -> "EndModel":
        return cls(FUNNEL, float(ell))

    @classmethod
    def cusp(cls, ell: float) -> "EndModel":
        return cls(CUSP, float(ell))

    @property
    def is_cusp(self) -> bool:
        return self.kind == CUSP

    @property
    def period(self) -> float:
        """Period of the generator in slice coordinates."""
        return 1.0 if self.is_cusp else self.ell

    @property
    def horocycle_height(self) -> float:
        return 1.0 / self.ell

    def generator(self) -> Mobius:
        if self.is_cusp:
            return Mobius(1.0, 1.0, 0.0, 1.0)
        return Mobius(math.exp(self.ell / 2), 0.0, 0.0, math.exp(-self.ell / 2))

    def generator_power(self, k: int) -> Mobius:
        if self.is_cusp:
            return Mobius(1.0, float(k), 0.0, 1.0)
        return Mobius(math.exp(k * self.ell / 2), 0.0, 0.0, math.exp(-k * self.ell / 2))

    def translate_xy(self, x, y, k):
        """Apply generator^k to coordinate arrays."""
        if self.is_cusp:
            return x + k, y
        s = np.exp(np.asarray(k) * self.ell)
        return x * s, y * s

    def in_domain_xy(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.is_cusp:
            return (x >= -0.5) & (x < 0.5) & (y > self.horocycle_height)
        r2 = x * x + y * y
        # the inner circle |z| = 1 is closed; allow roundoff from exp/log round trips
        return (x < 0) & (y > 0) & (r2 >= 1.0 - 1e-12) & (r2 < math.exp(2 * self.ell))

    def in_end_xy(self, x, y):
        """Membership in the lifted end (the region that reduces into D)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.is_cusp:
            return y > self.horocycle_height
        return (x < 0) & (y > 0)

    # slice coordinates -------------------------------------------------

    def to_slice(self, x, y):
        if self.is_cusp:
            return np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        z = np.asarray(x) + 1j * np.asarray(y)
        return np.log(np.abs(z)), np.angle(z)

    def from_slice(self, u, w):
        if self.is_cusp:
            return np.asarray(u, dtype=float), np.asarray(w, dtype=float)
        r = np.exp(u)
        return r * np.cos(w), r * np.sin(w)

    def slice_weight(self, w):
        if self.is_cusp:
            return 1.0 / (w * w)
        s = np.sin(w)
        return 1.0 / (s * s)

    @property
    def u_origin(self) -> float:
        """Left end of the fundamental period in u."""
        return -0.5 if self.is_cusp else 0.0

    def reduce_u(self, u):
        """Shift u into [u_origin, u_origin + period); returns (u_red, k)."""
        k = np.floor((np.asarray(u) - self.u_origin) / self.period)
        ur = u - k * self.period
        # guard the half-open right edge against roundoff
        over = ur >= self.u_origin + self.period
        k = np.where(over, k + 1, k)
        ur = np.where(over, ur - self.period, ur)
        under = ur < self.u_origin
        k = np.where(under, k - 1, k)
        ur = np.where(under, ur + self.period, ur)
        return ur, k.astype(np.int64)


@dataclass(frozen=True)
class QuotientPoint:
    rep: HPoint
    end: EndModel

    def __post_init__(self):
        if not bool(self.end.in_domain_xy(self.rep.x, self.rep.y)):
            raise OutOfRegion(f"{self.rep} is not in the fundamental domain of {self.end}")


def reduce(p: HPoint, end: EndModel) -> tuple[QuotientPoint, int]:
    """Representative of p in the fundamental domain and k with g^k(rep) = p."""
    if not bool(end.in_end_xy(p.x, p.y)):
        raise OutOfRegion(f"{p} is outside the lifted {end.kind} region")
    u, _ = end.to_slice(p.x, p.y)
    _, k = end.reduce_u(u)
    k = int(k)
    # roundoff in log/exp can land one step off the half-open boundary
    for kk in (k, k - 1, k + 1):
        x, y = end.translate_xy(p.x, p.y, -kk)
        if bool(end.in_domain_xy(x, y)):
            k = kk
            break
    rep = HPoint(float(x), float(y))
    return QuotientPoint(rep, end), int(k)


def quotient_dist_xy(end: EndModel, x1, y1, x2, y2):
    """Vectorised distance on the quotient: min over k of d(p, g^k q).

    cosh d(p, g^k q) is convex in k (a parabola for the cusp, a cosh of
    k*l for the funnel), so the minimum is attained at one of the two
    integers bracketing the continuous minimiser; all other translates are
    provably farther.
    """
    x1, y1, x2, y2 = (np.asarray(a, dtype=float) for a in (x1, y1, x2, y2))
    if end.is_cusp:
        k_star = x1 - x2
    else:
        k_star = (np.log(np.hypot(x1, y1)) - np.log(np.hypot(x2, y2))) / end.ell
    k0 = np.floor(k_star)
    best = None
    for k in (k0, k0 + 1):
        xt, yt = end.translate_xy(x2, y2, k)
        d = dist_xy(x1, y1, xt, yt)
        best = d if best is None else np.minimum(best, d)
    return best


def quotient_distance(p: QuotientPoint, q: QuotientPoint) -> float:
    if p.end != q.end:
        raise ValidationError("points belong to different end models")
    return float(quotient_dist_xy(p.end, p.rep.x, p.rep.y, q.rep.x, q.rep.y))


def _check_ball_in_end(end: EndModel, center: HPoint, R: float) -> None:
    (cx, cy), r = ball_to_euclidean(GeodesicBall(center, R))
    if end.is_cusp:
        if cy - r <= end.horocycle_height:
            raise OutOfRegion(
                f"ball of radius {R} at {center} crosses the horocycle y = {end.horocycle_height}")
    elif cx + r >= 0.0:
        raise OutOfRegion(f"ball of radius {R} at {center} crosses the funnel geodesic x = 0")


def copies_intersected(z: QuotientPoint | HPoint, R: float, end: EndModel | None = None) -> int:
    """Number N of translates of D meeting the lifted ball B_H(z, R).

    For a cusp the Euclidean disk spans the open x-interval
    (x - y sinh R, x + y sinh R), and translate k of D_C is [k - 1/2, k + 1/2).
    """
    if isinstance(z, QuotientPoint):
        end, p = z.end, z.rep
    else:
        if end is None:
            raise ValidationError("end model required for a bare HPoint")
        p = z
    _check_ball_in_end(end, p, R)
    (cx, cy), r = ball_to_euclidean(GeodesicBall(p, R))
    if end.is_cusp:
        lo, hi = cx - r, cx + r
    else:
        C = math.hypot(cx, cy)
        lo, hi = math.log(C - r), math.log(C + r)
    P, u0 = end.period, end.u_origin
    k_min = math.floor((lo - u0) / P)
    k_max = math.ceil((hi - u0) / P) - 1
    return int(k_max - k_min + 1)


def cusp_inclusion_margin(R: float) -> float:
    """c(R) = sqrt(cosh(R/2) - 1) / (sqrt(2) sinh R)."""
    if R <= 0:
        raise ValidationError("R must be positive")
    return math.sqrt(math.cosh(R / 2) - 1.0) / (math.sqrt(2.0) * math.sinh(R))


# -----------------------------------------------------------------------------
# sampled periodic functions and exact slice integrals


@dataclass(frozen=True)
class PeriodicSample:
    """Function on a fundamental domain sampled on a tensor grid in slice coordinates.

    ``values[i, j]`` is the value at (u_j, w_i); u spans one full period
    (u_0 = u_origin, u_last = u_origin + period, with matching end columns).
    Evaluation is bilinear.
    """

    end: EndModel
    u: np.ndarray
    w: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.w), len(self.u)):
            raise ValidationError("values must have shape (len(w), len(u))")
        if not np.allclose(self.values[:, 0], self.values[:, -1]):
            raise ValidationError("sampled function is not periodic")

    @classmethod
    def from_function(cls, end: EndModel, f, w_range, n_u=65, n_w=129) -> "PeriodicSample":
        u = np.linspace(end.u_origin, end.u_origin + end.period, n_u)
        w = np.linspace(w_range[0], w_range[1], n_w)
        U, W = np.meshgrid(u, w)
        vals = np.asarray(f(U, W), dtype=float)
        vals[:, -1] = vals[:, 0]
        return cls(end, u, w, vals)

    def _rows(self, w):
        """Linear interpolation in w; returns (len(w), n_u)."""
        w = np.asarray(w, dtype=float)
        if np.any(w < self.w[0] - 1e-12) or np.any(w > self.w[-1] + 1e-12):
            raise OutOfRegion("slice outside the sampled range")
        i = np.clip(np.searchsorted(self.w, w) - 1, 0, len(self.w) - 2)
        s = ((w - self.w[i]) / (self.w[i + 1] - self.w[i]))[:, None]
        return (1 - s) * self.values[i] + s * self.values[i + 1]

    def __call__(self, u, w):
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        ur, _ = self.end.reduce_u(u)
        shape = np.broadcast(ur, w).shape
        ur, w = np.broadcast_to(ur, shape).ravel(), np.broadcast_to(w, shape).ravel()
        rows = self._rows(w)
        j = np.clip(np.searchsorted(self.u, ur, side="right") - 1, 0, len(self.u) - 2)
        s = (ur - self.u[j]) / (self.u[j + 1] - self.u[j])
        n = np.arange(len(ur))
        out = (1 - s) * rows[n, j] + s * rows[n, j + 1]
        return out.reshape(shape)

    def sq_slice(self, w, ul, ur, wrap: bool):
        """Exact integral of v^2 du over [ul, ur] on each slice w.

        With ``wrap`` the interval is projected to the quotient first, so
        its measure is capped at one period.  v is piecewise linear in u on
        a slice, so v^2 integrates exactly cell by cell.
        """
        rows = self._rows(w)
        h = np.diff(self.u)
        p, q = rows[:, :-1], rows[:, 1:]
        cells = h * (p * p + p * q + q * q) / 3.0
        cum = np.concatenate([np.zeros((len(rows), 1)), np.cumsum(cells, axis=1)], axis=1)
        per = cum[:, -1]

        def G(x):
            xr, k = self.end.reduce_u(x)
            j = np.clip(np.searchsorted(self.u, xr, side="right") - 1, 0, len(self.u) - 2)
            n = np.arange(len(xr))
            hj = h[j]
            tau = (xr - self.u[j]) / hj
            a, b = rows[n, j], rows[n, j + 1]
            d = b - a
            part = hj * (a * a * tau + a * d * tau**2 + d * d * tau**3 / 3.0)
            return k * per + cum[n, j] + part

        val = G(np.asarray(ur, dtype=float)) - G(np.asarray(ul, dtype=float))
        if wrap:
            val = np.where(np.asarray(ur) - np.asarray(ul) >= self.end.period, per, val)
        return val


def ball_slices(end: EndModel, center: HPoint, R: float):
    """Parametrise B_H(center, R) by t in [0, pi].

    Returns a function t -> (w, u_lo, u_hi, jac) with
    integral over the ball of g dvol = int_0^pi int_{u_lo}^{u_hi} g du * jac dt.
    """
    (cx, cy), r = ball_to_euclidean(GeodesicBall(center, R))
    if end.is_cusp:
        def f(t):
            st = np.sin(t)
            w = cy - r * np.cos(t)
            return w, cx - r * st, cx + r * st, r * st / (w * w)
        return f

    C = math.hypot(cx, cy)
    phi_c = math.atan2(cy, cx)
    beta = math.asin(r / C)

    def g(t):
        w = phi_c - beta * np.cos(t)
        delta = w - phi_c
        b = C * np.cos(delta)
        disc = np.sqrt(np.maximum(0.0, r * r - (C * np.sin(delta)) ** 2))
        lo = np.log(np.maximum(b - disc, 1e-300))
        hi = np.log(b + disc)
        s = np.sin(w)
        return w, lo, hi, beta * np.sin(t) / (s * s)

    return g


def ball_height_range(end: EndModel, center: HPoint, R: float) -> tuple[float, float]:
    """Range of the slice variable w over the closed ball."""
    (cx, cy), r = ball_to_euclidean(GeodesicBall(center, R))
    if end.is_cusp:
        return cy - r, cy + r
    C = math.hypot(cx, cy)
    phi_c = math.atan2(cy, cx)
    beta = math.asin(r / C)
    return phi_c - beta, phi_c + beta


def lifted_sq_norm(v: PeriodicSample, center: HPoint, R: float, wrap: bool,
                   rtol: float = 1e-10) -> float:
    """||v~||^2 over B_H(center, R) (wrap=False) or ||v||^2 over the quotient ball."""
    sl = ball_slices(v.end, center, R)

    def integrand(t):
        shape = t.shape
        w, lo, hi, jac = sl(t.ravel())
        return (v.sq_slice(w, lo, hi, wrap) * jac).reshape(shape)

    # w(t) = mid - amp cos t on both ends; the integrand kinks where w crosses a
    # sample row and, when wrapping, where the chord reaches one full period
    w_lo, w_hi = ball_height_range(v.end, center, R)
    mid, amp = 0.5 * (w_lo + w_hi), 0.5 * (w_hi - w_lo)
    bp = [np.arccos(np.clip((mid - v.w) / amp, -1.0, 1.0))]
    if wrap:
        tt = np.linspace(0.0, math.pi, 4097)
        _, lo, hi, _ = sl(tt)
        s = np.sign(hi - lo - v.end.period)
        def excess(t):
            _, a, b, _ = sl(np.array([t]))
            return float(b[0] - a[0]) - v.end.period

        for i in np.nonzero(np.diff(s))[0]:
            bp.append([brentq(excess, tt[i], tt[i + 1], xtol=1e-15)])
    bp = np.concatenate(bp)
    return adaptive_gl(integrand, 0.0, math.pi, rtol=rtol, atol=1e-300, breakpoints=bp).value


@dataclass(frozen=True)
class LiftNormReport:
    N: int
    c_R: float
    lifted_R: float
    quotient_R: float
    quotient_half: float
    ratio_hi: float
    ratio_lo: float

    @property
    def upper_ok(self) -> bool:
        return self.ratio_hi <= 1.0 + 1e-6

    @property
    def lower_ok(self) -> bool:
        return not (self.ratio_lo > 1.0 + 1e-6)


def lift_norm_bounds(v: PeriodicSample, end: EndModel, z: HPoint | QuotientPoint,
                     R: float, rtol: float = 1e-10) -> LiftNormReport:
    """Compare the L^2 norm of a periodic lift on B_H(z~, R) with quotient-ball norms.

    ratio_hi = ||v~||^2_{B_H(z~,R)} / (N ||v||^2_{B(z,R)})   (<= 1 expected)
    ratio_lo = 2 (N-2) c(R) ||v||^2_{B(z,R/2)} / ||v~||^2_{B_H(z~,R)}
               (<= 1 expected for a cusp with N >= 3, NaN otherwise)

    For a funnel ratio_lo is replaced by ||v||^2_{B(z,R)} / ||v~||^2_{B_H(z~,R)},
    the left inequality of the two-sided funnel comparison.
    """
    if v.end != end:
        raise ValidationError("sample and end model disagree")
    p = z.rep if isinstance(z, QuotientPoint) else z
    N = copies_intersected(p, R, end)
    lo_w, hi_w = ball_height_range(end, p, R)
    if lo_w < v.w[0] - 1e-12 or hi_w > v.w[-1] + 1e-12:
        raise OutOfRegion("sampled function does not cover the ball")
    lifted = lifted_sq_norm(v, p, R, wrap=False, rtol=rtol)
    quot = lifted_sq_norm(v, p, R, wrap=True, rtol=rtol)
    half = lifted_sq_norm(v, p, R / 2, wrap=True, rtol=rtol)
    c = cusp_inclusion_margin(R)
    ratio_hi = lifted / (N * quot) if quot > 0 else 0.0
    if end.is_cusp:
        ratio_lo = (2 * (N - 2) * c * half / lifted) if (N >= 3 and lifted > 0) else math.nan
    else:
        ratio_lo = quot / lifted if lifted > 0 else math.nan
    return LiftNormReport(N, c, lifted, quot, half, ratio_hi, ratio_lo)


def lift_multiplicity_margin(end: EndModel, z: HPoint, R: float, n_heights: int = 400,
                             n_offsets: int = 200) -> float:
    """min over q in B(z, R/2) of #{lifts of q in B_H(z~, R)} / (2 (N-2) c(R)).

    The lower lift inequality holds for every v exactly when this is >= 1.
    Cusp only; returns inf when N < 3.
    """
    if not end.is_cusp:
        raise ValidationError("multiplicity margin is defined for cusps")
    N = copies_intersected(z, R, end)
    if N < 3:
        return math.inf
    need = 2 * (N - 2) * cusp_inclusion_margin(R)
    half = ball_slices(end, z, R / 2)
    t = np.linspace(0.0, math.pi, n_heights + 2)[1:-1]
    w, lo, hi, _ = half(t)
    (cx, cy), r = ball_to_euclidean(GeodesicBall(z, R))
    hw = np.sqrt(np.maximum(0.0, r * r - (w - cy) ** 2))
    s = np.linspace(0.0, 1.0, n_offsets + 2)[1:-1]
    # positions inside the half-ball chord, reduced to one period
    span = np.minimum(hi - lo, 1.0)
    xq = lo[:, None] + s[None, :] * span[:, None]
    a = (cx - hw)[:, None] - xq
    b = (cx + hw)[:, None] - xq
    count = np.ceil(b) - np.floor(a) - 1
    return float(count.min() / need)


__all__ = [
    "EndModel", "QuotientPoint", "PeriodicSample", "LiftNormReport",
    "reduce", "quotient_distance", "quotient_dist_xy", "copies_intersected",
    "cusp_inclusion_margin", "lift_norm_bounds", "lifted_sq_norm", "ball_slices",
    "ball_height_range", "lift_multiplicity_margin",
]
