"""Upper half-plane model: points, Mobius isometries, balls, measure.

The metric is (dx^2 + dy^2) / y^2 and the volume form dx dy / y^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import NonConvergent, ValidationError
from .quadrature import QuadResult, adaptive_gl_2d


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValidationError(f"HPoint coordinates must be finite, got ({x}, {y})")
        if y <= 0.0:
            raise ValidationError(f"HPoint requires y > 0, got y = {y}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class Mobius:
    """Orientation-preserving isometry z -> (az + b) / (cz + d), ad - bc = 1.

    Any matrix with positive determinant is rescaled by 1/sqrt(det).
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not math.isfinite(det) or det <= 0.0:
            raise ValidationError(f"Mobius requires det > 0, got {det}")
        s = 1.0 / math.sqrt(det)
        for name in "abcd":
            object.__setattr__(self, name, float(getattr(self, name)) * s)

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, m) -> "Mobius":
        m = np.asarray(m, dtype=float)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "Mobius") -> "Mobius":
        return Mobius.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def __call__(self, p: HPoint) -> HPoint:
        return apply(self, p)

    def apply_xy(self, x, y):
        """Vectorised action on coordinate arrays."""
        z = np.asarray(x) + 1j * np.asarray(y)
        w = (self.a * z + self.b) / (self.c * z + self.d)
        return w.real, w.imag


def apply(T: Mobius, p: HPoint) -> HPoint:
    den = T.c * p.z + T.d
    # cz + d = 0 would need z real; impossible for y > 0.
    assert den != 0
    return HPoint.from_complex((T.a * p.z + T.b) / den)


def cosh_dist_xy(x1, y1, x2, y2):
    """cosh of the hyperbolic distance, vectorised."""
    return 1.0 + ((x1 - x2) ** 2 + (y1 - y2) ** 2) / (2.0 * y1 * y2)


def dist_xy(x1, y1, x2, y2):
    return np.arccosh(np.maximum(1.0, cosh_dist_xy(x1, y1, x2, y2)))


def dist(p: HPoint, q: HPoint) -> float:
    """Hyperbolic distance via cosh d = 1 + |p - q|^2 / (2 y_p y_q)."""
    return float(math.acosh(max(1.0, cosh_dist_xy(p.x, p.y, q.x, q.y))))


@dataclass(frozen=True)
class GeodesicBall:
    center: HPoint
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValidationError(f"ball radius must be positive and finite, got {self.radius}")

    def euclidean(self) -> tuple[tuple[float, float], float]:
        return ball_to_euclidean(self)

    def contains_xy(self, x, y):
        return dist_xy(x, y, self.center.x, self.center.y) < self.radius


def ball_to_euclidean(b: GeodesicBall) -> tuple[tuple[float, float], float]:
    """Euclidean disk of a geodesic ball: center (x, y cosh R), radius y sinh R."""
    x, y, R = b.center.x, b.center.y, b.radius
    return (x, y * math.cosh(R)), y * math.sinh(R)


def euclidean_to_ball(center: tuple[float, float], radius: float) -> GeodesicBall:
    """Inverse of :func:`ball_to_euclidean` for disks inside the half-plane."""
    cx, cy = float(center[0]), float(center[1])
    if not (radius > 0.0 and cy - radius > 0.0):
        raise ValidationError("euclidean disk must have positive radius and lie in y > 0")
    # y cosh R = cy, y sinh R = r  =>  y = sqrt(cy^2 - r^2), tanh R = r / cy
    return GeodesicBall(HPoint(cx, math.sqrt((cy - radius) * (cy + radius))),
                        math.atanh(radius / cy))


def ball_volume(R: float) -> float:
    return 4.0 * math.pi * math.sinh(0.5 * R) ** 2


def isometry_to_origin(p: HPoint) -> Mobius:
    """Mobius map sending p to i: z -> (z - x) / y."""
    return Mobius(1.0, -p.x, 0.0, p.y)


@dataclass(frozen=True)
class ChartRect:
    """Axis-aligned rectangle [x0, x1] x [y0, y1] in the half-plane; y1 may be inf."""

    x0: float
    x1: float
    y0: float
    y1: float = math.inf

    def __post_init__(self):
        if not (self.x1 >= self.x0 and self.y1 >= self.y0 > 0.0):
            raise ValidationError(f"invalid chart rectangle {self}")

    def contains_xy(self, x, y):
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)

    @property
    def volume(self) -> float:
        return (self.x1 - self.x0) * (1.0 / self.y0 - 1.0 / self.y1)


Region = Union[ChartRect, GeodesicBall]
Weight = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _ball_integrand(f: Weight, ball: GeodesicBall):
    (cx, cy), r = ball_to_euclidean(ball)

    def g(t, s):
        # y = cy - r cos t, x = cx + s r sin t; dx dy = (r sin t)^2 ds dt
        hw = r * np.sin(t)
        y = cy - r * np.cos(t)
        x = cx + s * hw
        return f(x, y) * hw * hw / (y * y)

    return g


def _rect_integrand(f: Weight):
    # u = 1/y turns dx dy / y^2 into dx du and maps y = inf to u = 0
    def g(x, u):
        with np.errstate(divide="ignore"):
            y = 1.0 / u
        return f(x, y)

    return g


def hyperbolic_integral(
    f: Weight,
    region: Region,
    rtol: float = 1e-8,
    atol: float = 0.0,
    method: str = "gl",
    samples: int = 100_000,
    seed: int = 0,
    max_panels: int = 2**20,
) -> QuadResult:
    """Integrate ``f(x, y)`` against dx dy / y^2 over a chart rectangle or a ball.

    Balls are mapped onto [0, pi] x [-1, 1] through the Euclidean disk, so the
    integrand stays smooth when ``f`` is.  Rectangles use u = 1/y, which makes
    infinite cusp heights an ordinary finite interval.  ``method="mc"`` gives a
    seeded Monte Carlo estimate with its standard error instead.
    """
    if isinstance(region, GeodesicBall):
        g = _ball_integrand(f, region)
        xr, yr = (0.0, math.pi), (-1.0, 1.0)
    elif isinstance(region, ChartRect):
        g = _rect_integrand(f)
        xr = (region.x0, region.x1)
        yr = (0.0 if math.isinf(region.y1) else 1.0 / region.y1, 1.0 / region.y0)
    else:
        raise ValidationError(f"unsupported region {region!r}")

    if method == "gl":
        return adaptive_gl_2d(g, xr, yr, rtol=rtol, atol=atol, max_panels=max_panels)
    if method == "mc":
        rng = np.random.Generator(np.random.Philox(seed))
        a = rng.uniform(xr[0], xr[1], samples)
        b = rng.uniform(yr[0], yr[1], samples)
        vals = np.asarray(g(a, b), dtype=float)
        area = (xr[1] - xr[0]) * (yr[1] - yr[0])
        return QuadResult(float(area * vals.mean()),
                          float(area * vals.std(ddof=1) / math.sqrt(samples)), 0)
    raise ValidationError(f"unknown quadrature method {method!r}")


__all__ = [
    "HPoint", "Mobius", "GeodesicBall", "ChartRect", "QuadResult", "NonConvergent",
    "apply", "dist", "dist_xy", "cosh_dist_xy", "ball_to_euclidean", "euclidean_to_ball",
    "ball_volume", "isometry_to_origin", "hyperbolic_integral",
]
