"""Sensor sets and certification of the thickness condition.

A sensor set is a boolean expression over a few chart primitives.  Volumes
of balls meeting it are computed slice by slice: along every slice of the
ball (a horizontal segment, or a ray in funnel coordinates) each primitive
contributes at most a handful of breakpoints, so the one-dimensional
measure is exact and only the outer integral is done by quadrature.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .geom import GeodesicBall, HPoint, ball_to_euclidean, ball_volume
from .quadrature import adaptive_gl
from .quotient import EndModel, QuotientPoint, _check_ball_in_end, ball_slices, reduce

MAX_DEPTH = 32


# -- primitives -------------------------------------------------------------

class Node:
    """Base of the sensor-set expression tree."""

    def contains(self, x, y):
        raise NotImplementedError

    def breaks(self, geom: str, w, lo, hi) -> np.ndarray:
        """Breakpoints (in the slice parameter u) along the slices at w; shape (m, k)."""
        return np.empty((np.size(w), 0))

    def depth(self) -> int:
        return 1

    def primitives(self):
        yield self

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __or__(self, other):
        return Union_((self, other))

    def __and__(self, other):
        return Intersection((self, other))

    def __invert__(self):
        return Complement(self)


@dataclass(frozen=True)
class Everything(Node):
    def contains(self, x, y):
        return np.ones(np.broadcast(x, y).shape, dtype=bool)

    def to_dict(self):
        return {"primitive": "all"}


@dataclass(frozen=True)
class Nothing(Node):
    def contains(self, x, y):
        return np.zeros(np.broadcast(x, y).shape, dtype=bool)

    def to_dict(self):
        return {"primitive": "empty"}


def _ray_linear(w, a, b, c):
    """u = log r where a x + b y = c along the ray r (cos w, sin w)."""
    den = a * np.cos(w) + b * np.sin(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = c / den
    return np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), np.nan)


@dataclass(frozen=True)
class Rect(Node):
    """Chart rectangle [x0, x1] x [y0, y1]; y1 may be inf."""

    x0: float
    x1: float
    y0: float
    y1: float = math.inf

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValidationError(f"degenerate rectangle {self}")

    def contains(self, x, y):
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)

    def breaks(self, geom, w, lo, hi):
        w = np.asarray(w, dtype=float)
        if geom == "h":
            inside = (w >= self.y0) & (w <= self.y1)
            b = np.stack([np.full(w.shape, self.x0), np.full(w.shape, self.x1)], axis=1)
            return np.where(inside[:, None], b, np.nan)
        vals = [_ray_linear(w, 1.0, 0.0, v) for v in (self.x0, self.x1)]
        vals += [_ray_linear(w, 0.0, 1.0, v) for v in (self.y0, self.y1) if math.isfinite(v)]
        return np.stack(vals, axis=1)

    def to_dict(self):
        return {"primitive": "rect", "x0": self.x0, "x1": self.x1, "y0": self.y0,
                "y1": None if math.isinf(self.y1) else self.y1}


@dataclass(frozen=True)
class Disk(Node):
    """Euclidean disk |z - c| <= r in the chart."""

    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValidationError("disk radius must be positive")

    def contains(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.r**2

    def breaks(self, geom, w, lo, hi):
        w = np.asarray(w, dtype=float)
        if geom == "h":
            h2 = self.r**2 - (w - self.cy) ** 2
            h = np.sqrt(np.where(h2 > 0, h2, np.nan))
            return np.stack([self.cx - h, self.cx + h], axis=1)
        # r^2 - 2 r (c . e) + |c|^2 - rho^2 = 0 along the ray direction e
        p = self.cx * np.cos(w) + self.cy * np.sin(w)
        q = self.cx**2 + self.cy**2 - self.r**2
        disc = p * p - q
        s = np.sqrt(np.where(disc > 0, disc, np.nan))
        r1, r2 = p - s, p + s
        with np.errstate(invalid="ignore", divide="ignore"):
            u1 = np.where(r1 > 0, np.log(np.abs(r1)), np.nan)
            u2 = np.where(r2 > 0, np.log(np.abs(r2)), np.nan)
        return np.stack([u1, u2], axis=1)

    def to_dict(self):
        return {"primitive": "disk", "cx": self.cx, "cy": self.cy, "r": self.r}


@dataclass(frozen=True)
class HalfPlane(Node):
    """{a x + b y <= c} in chart coordinates."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.a == 0 and self.b == 0:
            raise ValidationError("half-plane needs (a, b) != 0")

    def contains(self, x, y):
        return self.a * x + self.b * y <= self.c

    def breaks(self, geom, w, lo, hi):
        w = np.asarray(w, dtype=float)
        if geom == "h":
            if self.a == 0:
                return np.empty((w.size, 0))
            return ((self.c - self.b * w) / self.a)[:, None]
        return _ray_linear(w, self.a, self.b, self.c)[:, None]

    def to_dict(self):
        return {"primitive": "halfplane", "a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class ThetaStrip(Node):
    """Periodic strip {(u - t0) mod P < t1 - t0} in the angular coordinate of an end.

    u is x on a cusp chart and log|z| on a funnel chart (``log=True``).
    """

    t0: float
    t1: float
    period: float = 1.0
    log: bool = False

    def __post_init__(self):
        if not (0 < self.t1 - self.t0 <= self.period):
            raise ValidationError("theta strip needs 0 < t1 - t0 <= period")

    def _u(self, x, y):
        if self.log:
            return 0.5 * np.log(np.asarray(x) ** 2 + np.asarray(y) ** 2)
        return np.asarray(x, dtype=float)

    def contains(self, x, y):
        u = self._u(x, y)
        return np.mod(u - self.t0, self.period) < self.t1 - self.t0

    def breaks(self, geom, w, lo, hi):
        if (geom == "ray") != self.log:
            raise ValidationError("theta strip coordinate does not match the slice geometry")
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        P = self.period
        k0 = np.floor((lo - self.t1) / P)
        n = int(np.max(np.ceil((hi - lo) / P))) + 2 if lo.size else 0
        k = k0[:, None] + np.arange(n)[None, :]
        return np.concatenate([self.t0 + k * P, self.t1 + k * P], axis=1)

    def to_dict(self):
        return {"primitive": "theta_strip", "t0": self.t0, "t1": self.t1,
                "period": self.period, "log": self.log}


# -- operators --------------------------------------------------------------

@dataclass(frozen=True)
class Union_(Node):
    args: tuple

    def contains(self, x, y):
        out = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for a in self.args:
            out |= a.contains(x, y)
        return out

    def breaks(self, geom, w, lo, hi):
        return np.concatenate([a.breaks(geom, w, lo, hi) for a in self.args], axis=1)

    def depth(self):
        return 1 + max(a.depth() for a in self.args)

    def primitives(self):
        for a in self.args:
            yield from a.primitives()

    def to_dict(self):
        return {"op": "union", "args": [a.to_dict() for a in self.args]}


@dataclass(frozen=True)
class Intersection(Union_):
    def contains(self, x, y):
        out = np.ones(np.broadcast(x, y).shape, dtype=bool)
        for a in self.args:
            out &= a.contains(x, y)
        return out

    def to_dict(self):
        return {"op": "intersection", "args": [a.to_dict() for a in self.args]}


@dataclass(frozen=True)
class Complement(Node):
    arg: Node

    def contains(self, x, y):
        return ~self.arg.contains(x, y)

    def breaks(self, geom, w, lo, hi):
        return self.arg.breaks(geom, w, lo, hi)

    def depth(self):
        return 1 + self.arg.depth()

    def primitives(self):
        yield from self.arg.primitives()

    def to_dict(self):
        return {"op": "complement", "arg": self.arg.to_dict()}


_PRIMS = {"all": Everything, "empty": Nothing, "rect": Rect, "disk": Disk,
          "halfplane": HalfPlane, "theta_strip": ThetaStrip}


def node_from_dict(d: dict, _depth: int = 1) -> Node:
    if _depth > MAX_DEPTH:
        raise ValidationError(f"sensor set deeper than {MAX_DEPTH}")
    if not isinstance(d, dict):
        raise ValidationError(f"sensor node must be an object, got {d!r}")
    if "op" in d:
        op = d["op"]
        if op in ("union", "intersection"):
            args = d.get("args")
            if not args:
                raise ValidationError(f"{op} needs a non-empty args list")
            kids = tuple(node_from_dict(a, _depth + 1) for a in args)
            return Union_(kids) if op == "union" else Intersection(kids)
        if op == "complement":
            return Complement(node_from_dict(d["arg"], _depth + 1))
        raise ValidationError(f"unknown operator {op!r}")
    kind = d.get("primitive")
    if kind not in _PRIMS:
        raise ValidationError(f"unknown primitive {kind!r}")
    params = {k: v for k, v in d.items() if k != "primitive"}
    if kind == "rect" and params.get("y1") is None:
        params["y1"] = math.inf
    try:
        return _PRIMS[kind](**params)
    except TypeError as e:
        raise ValidationError(f"bad parameters for {kind}: {e}") from None


@dataclass(frozen=True)
class SensorSet:
    """A measurable set omega; with ``end`` set it lives on the end's quotient.

    A periodic set is described in fundamental-domain coordinates and
    extended by the end's generator.
    """

    root: Node
    end: EndModel | None = None

    def __post_init__(self):
        if self.root.depth() > MAX_DEPTH:
            raise ValidationError(f"sensor set deeper than {MAX_DEPTH}")

    @classmethod
    def full(cls, end=None):
        return cls(Everything(), end)

    @classmethod
    def empty(cls, end=None):
        return cls(Nothing(), end)

    @classmethod
    def theta_strip(cls, t0, t1, end: EndModel | None = None):
        if end is None:
            return cls(ThetaStrip(t0, t1))
        return cls(ThetaStrip(t0, t1, end.period, log=not end.is_cusp), end)

    @classmethod
    def below(cls, y0: float, end=None):
        """{y <= y0}: empty toward the cusp tip."""
        return cls(HalfPlane(0.0, 1.0, y0), end)

    def complement(self) -> "SensorSet":
        return SensorSet(Complement(self.root), self.end)

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.end is not None:
            u, w = self.end.to_slice(x, y)
            u, _ = self.end.reduce_u(u)
            x, y = self.end.from_slice(u, w)
        return self.root.contains(x, y)

    def tail_invariant(self, y_max: float) -> bool:
        """True when membership does not depend on y above ``y_max`` (cusp chart)."""
        for p in self.root.primitives():
            if isinstance(p, Rect) and (p.y0 > y_max or math.isfinite(p.y1)):
                return False
            if isinstance(p, Disk) and p.cy + p.r > y_max:
                return False
            if isinstance(p, HalfPlane) and p.b != 0:
                if p.a != 0 or (p.c / p.b) > y_max:
                    return False
        return True

    def to_dict(self):
        d = {"root": self.root.to_dict()}
        if self.end is not None:
            d["end"] = {"kind": self.end.kind, "ell": self.end.ell}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SensorSet":
        if "root" not in d:
            raise ValidationError("sensor set document needs a 'root' node")
        extra = set(d) - {"root", "end"}
        if extra:
            raise ValidationError(f"unknown sensor set keys {sorted(extra)}")
        end = None
        if d.get("end") is not None:
            e = d["end"]
            end = EndModel(e["kind"], float(e["ell"]))
        return cls(node_from_dict(d["root"]), end)

    @classmethod
    def from_json(cls, text: str) -> "SensorSet":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise ValidationError(f"sensor set is not valid JSON: {e}") from None


# -- slice measures ---------------------------------------------------------

def _direct_measure(root: Node, geom: str, end: EndModel | None, w, lo, hi):
    """Exact length of {u in [lo, hi] : slice point in omega} for each slice."""
    w = np.asarray(w, dtype=float)
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if w.size == 0:
        return np.zeros(0)
    b = root.breaks(geom, w, lo, hi)
    b = np.where(np.isfinite(b), b, lo[:, None])
    b = np.clip(b, lo[:, None], hi[:, None])
    b = np.sort(np.concatenate([lo[:, None], b, hi[:, None]], axis=1), axis=1)
    mid = 0.5 * (b[:, 1:] + b[:, :-1])
    seg = np.diff(b, axis=1)
    W = np.broadcast_to(w[:, None], mid.shape)
    if geom == "h":
        x, y = mid, W
    else:
        r = np.exp(mid)
        x, y = r * np.cos(W), r * np.sin(W)
    inside = root.contains(x, y)
    return np.where(inside, seg, 0.0).sum(axis=1)


def _periodic_measure(root, geom, end: EndModel, w, lo, hi, clamp: bool):
    """Measure of the periodic extension of omega on [lo, hi].

    With ``clamp`` (quotient balls) a window at least one period wide counts
    once; otherwise whole periods are counted with multiplicity.
    """
    P = end.period
    u0 = end.u_origin
    width = hi - lo
    full = np.floor(width / P)
    if clamp:
        full = np.minimum(full, 1.0)
    per = _direct_measure(root, geom, end, w, np.full(w.shape, u0), np.full(w.shape, u0 + P))
    rest_lo = lo + full * P
    rest_hi = np.where(full * P >= width, rest_lo, hi)
    if clamp:
        rest_hi = np.where(width >= P, rest_lo, rest_hi)
    k = np.floor((rest_lo - u0) / P)
    edge = u0 + (k + 1) * P
    a = _direct_measure(root, geom, end, w, rest_lo - k * P, np.minimum(rest_hi, edge) - k * P)
    tail = np.maximum(rest_hi - edge, 0.0)
    b = _direct_measure(root, geom, end, w, np.full(w.shape, u0), u0 + tail)
    return full * per + a + b


def _horizontal_slices(center: HPoint, R: float):
    (cx, cy), r = ball_to_euclidean(GeodesicBall(center, R))

    def f(t):
        st = np.sin(t)
        y = cy - r * np.cos(t)
        return y, cx - r * st, cx + r * st, r * st / (y * y)

    return f


@dataclass(frozen=True)
class QuotientBall:
    """{q in D : quotient distance(center, q) < R} inside an end."""

    center: QuotientPoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValidationError("ball radius must be positive")
        _check_ball_in_end(self.center.end, self.center.rep, self.radius)

    @classmethod
    def at(cls, end: EndModel, x: float, y: float, R: float) -> "QuotientBall":
        q, _ = reduce(HPoint(x, y), end)
        return cls(q, R)


def _ball_integrand(omega: SensorSet | None, ball):
    """t -> (slice measure of omega) * jacobian, for t in [0, pi]."""
    root = Everything() if omega is None else omega.root
    if isinstance(ball, QuotientBall):
        end = ball.center.end
        if omega is not None and omega.end is not None and omega.end != end:
            raise ValidationError("sensor set and ball live on different ends")
        sl = ball_slices(end, ball.center.rep, ball.radius)
        geom = "h" if end.is_cusp else "ray"

        def g(t):
            shape = np.shape(t)
            w, lo, hi, jac = sl(np.ravel(t))
            m = _periodic_measure(root, geom, end, w, lo, hi, clamp=True)
            return (m * jac).reshape(shape)

        return g
    if not isinstance(ball, GeodesicBall):
        raise ValidationError(f"unsupported ball {ball!r}")
    end = None if omega is None else omega.end
    if end is None:
        sl = _horizontal_slices(ball.center, ball.radius)

        def g(t):
            shape = np.shape(t)
            w, lo, hi, jac = sl(np.ravel(t))
            return (_direct_measure(root, "h", None, w, lo, hi) * jac).reshape(shape)

        return g
    _check_ball_in_end(end, ball.center, ball.radius)
    sl = ball_slices(end, ball.center, ball.radius)
    geom = "h" if end.is_cusp else "ray"

    def g(t):
        shape = np.shape(t)
        w, lo, hi, jac = sl(np.ravel(t))
        return (_periodic_measure(root, geom, end, w, lo, hi, clamp=False) * jac).reshape(shape)

    return g


def measure_intersection(omega: SensorSet, ball, rtol: float = 1e-8) -> float:
    """vol(ball intersected with omega) for an ambient or a quotient ball."""
    if isinstance(omega.root, Nothing):
        return 0.0
    g = _ball_integrand(omega, ball)
    return adaptive_gl(g, 0.0, math.pi, rtol=rtol, atol=1e-15).value


def ball_measure(ball, rtol: float = 1e-8) -> float:
    """Volume of an ambient ball (closed form) or a quotient ball (slices)."""
    if isinstance(ball, GeodesicBall):
        return ball_volume(ball.radius)
    return adaptive_gl(_ball_integrand(None, ball), 0.0, math.pi, rtol=rtol).value


# -- profiles ---------------------------------------------------------------

@dataclass
class ThicknessReport:
    R: float
    center_x: np.ndarray
    center_y: np.ndarray
    vol_ball: np.ndarray
    vol_cap: np.ndarray
    kind: str = "ambient"
    tail_invariant: bool = True
    meta: dict = field(default_factory=dict)

    @property
    def ratio(self) -> np.ndarray:
        return self.vol_cap / self.vol_ball

    @property
    def delta_min(self) -> float:
        return float(self.ratio.min())

    @property
    def argmin(self) -> tuple[float, float]:
        i = int(np.argmin(self.ratio))
        return float(self.center_x[i]), float(self.center_y[i])

    @property
    def abs_min(self) -> float:
        """Smallest absolute mass vol(B intersected with omega) over the centers."""
        return float(self.vol_cap.min())

    def summary(self) -> dict:
        return {
            "R": self.R,
            "delta_min": self.delta_min,
            "argmin": list(self.argmin),
            "abs_mass_min": self.abs_min,
            "centers": int(len(self.center_x)),
            "kind": self.kind,
            # the infimum is over every center; only the sampled ones are checked
            "certified_on_samples": True,
            "tail": "invariant" if self.tail_invariant else "unverified",
            **self.meta,
        }

    def rows(self):
        for row in zip(self.center_x, self.center_y, self.vol_ball, self.vol_cap, self.ratio):
            yield [float(v) for v in row]

    def to_csv(self, path, comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["center_x", "center_y", "vol_ball", "vol_cap", "ratio"])
            for row in self.rows():
                w.writerow([repr(v) for v in row])

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")


def is_thick(report: ThicknessReport, delta: float) -> bool:
    return report.delta_min >= delta


def _grid_axis(lo, hi, n, shift):
    return lo + (np.arange(n) + shift) * (hi - lo) / n


def _adversarial_u(omega: SensorSet) -> list[float]:
    """Slice coordinates of primitive edges, where ratios tend to be extremal."""
    out = []
    for p in omega.root.primitives():
        if isinstance(p, ThetaStrip):
            out += [p.t0, p.t1]
        elif isinstance(p, Rect):
            out += [p.x0, p.x1]
        elif isinstance(p, Disk):
            out += [p.cx - p.r, p.cx, p.cx + p.r]
    return out


def profile_centers(region, R: float, n: int, seed: int, omega: SensorSet | None = None):
    """Stratified centers (x, y) for a thickness profile.

    A regular n x n grid in (angle, log height), shifted by one seeded
    offset per axis, plus edge-aligned extra columns from ``omega``.
    Returns (x, y, kind) with kind in {"ambient", "cusp", "funnel"}.
    """
    from .covering import CuspDomain, FunnelDomain, RectRegion

    rng = np.random.Generator(np.random.Philox(seed))
    s1, s2 = rng.uniform(0, 1, 2)
    extra = _adversarial_u(omega) if omega is not None else []
    if isinstance(region, RectRegion):
        r = region.rect
        xs = np.concatenate([_grid_axis(r.x0, r.x1, n, s1),
                             [u for u in extra if r.x0 <= u <= r.x1]])
        ly = _grid_axis(math.log(r.y0), math.log(r.y1), n, s2)
        X, Y = np.meshgrid(xs, np.exp(ly))
        return X.ravel(), Y.ravel(), "ambient"
    if isinstance(region, CuspDomain):
        end = region.end
        y_lo = max(region.lower, end.horocycle_height * math.exp(R) * (1 + 1e-12))
        if not region.y_max > y_lo:
            raise ValidationError("cusp region too short for balls of this radius")
        xs = np.concatenate([_grid_axis(-0.5, 0.5, n, s1), np.mod(np.array(extra) + 0.5, 1.0) - 0.5])
        ly = _grid_axis(math.log(y_lo), math.log(region.y_max), n - 1, s2)
        ly = np.concatenate([ly, [math.log(region.y_max)]])
        X, Y = np.meshgrid(xs, np.exp(ly))
        return X.ravel(), Y.ravel(), "cusp"
    if isinstance(region, FunnelDomain):
        end = region.end
        if not region.depth > R:
            raise ValidationError("funnel depth must exceed R so balls stay in the end")
        rho = np.concatenate([_grid_axis(0.0, end.ell, n, s1), np.mod(np.array(extra), end.ell)])
        d = _grid_axis(R * (1 + 1e-9), region.depth, n, s2)
        Rho, D = np.meshgrid(rho, d)
        e = np.exp(Rho)
        return (-e * np.tanh(D)).ravel(), (e / np.cosh(D)).ravel(), "funnel"
    raise ValidationError(f"unsupported profile region {region!r}")


def thickness_profile(omega: SensorSet, region, R: float, center_samples: int = 4096,
                      seed: int = 0, rtol: float = 1e-8, threads: int = 1) -> ThicknessReport:
    """Ratios vol(B_z(R) n omega) / vol(B_z(R)) over stratified centers z.

    Ambient regions use geodesic balls of the half-plane; cusp and funnel
    domains use quotient balls of the end.  Quotient ball volumes depend
    only on the height (or the distance to the funnel geodesic), so they
    are computed once per grid row.
    """
    if not R > 0:
        raise ValidationError("R must be positive")
    n = max(2, int(round(math.sqrt(center_samples))))
    x, y, kind = profile_centers(region, R, n, seed, omega)
    vb = np.empty(len(x))
    balls = []
    row_cache: dict[float, float] = {}
    for i, (cx, cy) in enumerate(zip(x, y)):
        if kind == "ambient":
            ball = GeodesicBall(HPoint(cx, cy), R)
            vb[i] = ball_volume(R)
        else:
            ball = QuotientBall.at(region.end, cx, cy, R)
            key = round(float(cy), 12) if kind == "cusp" else round(float(np.arcsinh(-cx / cy)), 12)
            if key not in row_cache:
                row_cache[key] = ball_measure(ball, rtol)
            vb[i] = row_cache[key]
        balls.append(ball)
    if threads > 1:
        # results come back in submission order, so output does not depend on threads
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vc = np.fromiter(ex.map(lambda b: measure_intersection(omega, b, rtol), balls), float, len(balls))
    else:
        vc = np.array([measure_intersection(omega, b, rtol) for b in balls], dtype=float)
    tail = True
    if kind == "cusp":
        tail = omega.tail_invariant(float(region.y_max))
    return ThicknessReport(float(R), x, y, vb, vc, kind, tail, {"grid": n, "seed": seed})


__all__ = [
    "Node", "Everything", "Nothing", "Rect", "Disk", "HalfPlane", "ThetaStrip",
    "Union_", "Intersection", "Complement", "node_from_dict", "SensorSet",
    "QuotientBall", "measure_intersection", "ball_measure", "ThicknessReport",
    "thickness_profile", "is_thick", "profile_centers", "MAX_DEPTH",
]
