"""Saturated R-separated sets, covering checks and intersection numbers.

Regions know how to map uniform samples to points distributed according to
the hyperbolic measure (arc length for segments), their volume, and which
distance applies (ambient or quotient).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .errors import EmptyRegion, ValidationError
from .geom import ChartRect, GeodesicBall, HPoint, ball_to_euclidean, ball_volume, dist_xy
from .quotient import EndModel, quotient_dist_xy


class Region:
    """Sampling, measure and boundary description of a covering region.

    Boundaries are reported as Euclidean lines (point, direction) and
    circles (center, radius) so that the saturation repair can enumerate
    corner points of uncovered pockets.
    """

    dim = 2
    quotient: EndModel | None = None

    def contains(self, x, y):
        raise NotImplementedError

    def canon(self, x, y):
        """Map lifted points back into the fundamental domain (identity if ambient)."""
        return x, y

    def lines(self) -> list[tuple[tuple[float, float], tuple[float, float]]]:
        return []

    def circles(self) -> list[tuple[tuple[float, float], float]]:
        return []

    def corners(self) -> list[tuple[float, float]]:
        return []

    def translates(self, x, y):
        """Centers plus the generator translates that can reach the domain."""
        return x, y

    def sample(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def volume(self) -> float:
        raise NotImplementedError

    def dist(self, x1, y1, x2, y2):
        if self.quotient is None:
            return dist_xy(x1, y1, x2, y2)
        return quotient_dist_xy(self.quotient, x1, y1, x2, y2)


@dataclass(frozen=True)
class RectRegion(Region):
    rect: ChartRect

    def __post_init__(self):
        if math.isinf(self.rect.y1) or self.rect.volume <= 0:
            raise EmptyRegion("rectangle region must be bounded with positive area")

    def contains(self, x, y):
        return self.rect.contains_xy(x, y)

    def lines(self):
        r = self.rect
        return [((r.x0, 0.0), (0.0, 1.0)), ((r.x1, 0.0), (0.0, 1.0)),
                ((0.0, r.y0), (1.0, 0.0)), ((0.0, r.y1), (1.0, 0.0))]

    def corners(self):
        r = self.rect
        return [(r.x0, r.y0), (r.x0, r.y1), (r.x1, r.y0), (r.x1, r.y1)]

    def sample(self, u):
        r = self.rect
        x = r.x0 + u[:, 0] * (r.x1 - r.x0)
        inv = 1.0 / r.y1 + u[:, 1] * (1.0 / r.y0 - 1.0 / r.y1)
        return x, 1.0 / inv

    @property
    def volume(self):
        return self.rect.volume


@dataclass(frozen=True)
class BallRegion(Region):
    ball: GeodesicBall

    def contains(self, x, y):
        c = self.ball.center
        return dist_xy(x, y, c.x, c.y) <= self.ball.radius

    def circles(self):
        return [ball_to_euclidean(self.ball)]

    def sample(self, u):
        R = self.ball.radius
        s = np.arccosh(1.0 + u[:, 0] * (math.cosh(R) - 1.0))
        w = np.tanh(s / 2) * np.exp(2j * np.pi * u[:, 1])
        z = 1j * (1 + w) / (1 - w)
        c = self.ball.center
        return c.x + c.y * z.real, c.y * z.imag

    @property
    def volume(self):
        return ball_volume(self.ball.radius)


@dataclass(frozen=True)
class VerticalSegment(Region):
    """{x + iy : y0 <= y <= y1}; measured by hyperbolic arc length."""

    x: float
    y0: float
    y1: float
    dim = 1

    def __post_init__(self):
        if not (self.y1 > self.y0 > 0):
            raise EmptyRegion("segment needs y1 > y0 > 0")

    def contains(self, x, y):
        return (np.asarray(x) == self.x) & (np.asarray(y) >= self.y0) & (np.asarray(y) <= self.y1)

    def sample(self, u):
        L = math.log(self.y1 / self.y0)
        return np.full(len(u), self.x), self.y0 * np.exp(u[:, 0] * L)

    @property
    def volume(self):
        return math.log(self.y1 / self.y0)


@dataclass(frozen=True)
class FunnelDomain(Region):
    """Fundamental domain of a funnel, truncated at distance ``depth`` from its geodesic.

    Sampled in Fermi coordinates (rho, d): z = e^rho (-tanh d + i / cosh d),
    volume element cosh(d) drho dd.
    """

    end: EndModel
    depth: float

    def __post_init__(self):
        if self.end.is_cusp or not self.depth > 0:
            raise EmptyRegion("funnel domain needs a funnel end and depth > 0")

    @property
    def quotient(self):
        return self.end

    def _depth_of(self, x, y):
        return np.arcsinh(np.maximum(-np.asarray(x), 0.0) / np.asarray(y))

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.end.in_domain_xy(x, y) & (self._depth_of(x, y) <= self.depth * (1 + 1e-14))

    def canon(self, x, y):
        u, w = self.end.to_slice(x, y)
        ur, _ = self.end.reduce_u(u)
        return self.end.from_slice(ur, w)

    def lines(self):
        d = self.depth
        return [((0.0, 0.0), (0.0, 1.0)), ((0.0, 0.0), (-math.tanh(d), 1.0 / math.cosh(d)))]

    def translates(self, x, y):
        xs = [x * math.exp(k * self.end.ell) for k in (-1, 0, 1)]
        ys = [y * math.exp(k * self.end.ell) for k in (-1, 0, 1)]
        return np.concatenate(xs), np.concatenate(ys)

    def sample(self, u):
        rho = u[:, 0] * self.end.ell
        d = np.arcsinh(u[:, 1] * math.sinh(self.depth))
        r = np.exp(rho)
        return -r * np.tanh(d), r / np.cosh(d)

    @property
    def volume(self):
        return self.end.ell * math.sinh(self.depth)


@dataclass(frozen=True)
class CuspDomain(Region):
    """[-1/2, 1/2) x (y_min, y_max] inside a cusp, with quotient distance."""

    end: EndModel
    y_max: float
    y_min: float | None = None

    def __post_init__(self):
        lo = self.lower
        if not self.end.is_cusp or not self.y_max > lo:
            raise EmptyRegion("cusp domain needs a cusp end and y_max above the horocycle")

    @property
    def quotient(self):
        return self.end

    @property
    def lower(self):
        return self.end.horocycle_height if self.y_min is None else self.y_min

    def contains(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x >= -0.5) & (x < 0.5) & (y >= self.lower) & (y <= self.y_max)

    def canon(self, x, y):
        ur, _ = self.end.reduce_u(np.asarray(x, dtype=float))
        return ur, np.asarray(y, dtype=float)

    def lines(self):
        return [((0.0, self.lower), (1.0, 0.0)), ((0.0, self.y_max), (1.0, 0.0))]

    def translates(self, x, y):
        return np.concatenate([x - 1, x, x + 1]), np.concatenate([y, y, y])

    def sample(self, u):
        x = -0.5 + u[:, 0]
        inv = 1.0 / self.y_max + u[:, 1] * (1.0 / self.lower - 1.0 / self.y_max)
        return x, 1.0 / inv

    @property
    def volume(self):
        return 1.0 / self.lower - 1.0 / self.y_max


def sample_stream(region: Region, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Scrambled Halton points mapped into the region (deterministic in seed)."""
    u = qmc.Halton(d=region.dim, scramble=True, seed=seed).random(n)
    return region.sample(u)


def default_sample_count(region: Region, R: float, per_ball: int = 200) -> int:
    """``per_ball`` samples per expected ball volume (ball length 2R in 1-D)."""
    unit = 2 * R if region.dim == 1 else ball_volume(R)
    return max(per_ball, int(math.ceil(per_ball * region.volume / unit)))


@dataclass
class SeparatedSet:
    x: np.ndarray
    y: np.ndarray
    R: float
    region: Region
    samples: int = 0
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.x)

    @property
    def centers(self) -> list[HPoint]:
        return [HPoint(a, b) for a, b in zip(self.x, self.y)]

    def min_distance_to_centers(self, px, py):
        """Distance from each probe to its nearest center."""
        px = np.asarray(px, dtype=float)
        py = np.asarray(py, dtype=float)
        out = np.full(px.shape, np.inf)
        for start in range(0, len(self.x), 512):
            cx = self.x[start:start + 512]
            cy = self.y[start:start + 512]
            d = self.region.dist(px[:, None], py[:, None], cx[None, :], cy[None, :])
            out = np.minimum(out, d.min(axis=1))
        return out

    def pairwise(self) -> np.ndarray:
        return self.region.dist(self.x[:, None], self.y[:, None], self.x[None, :], self.y[None, :])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "R"])
            for a, b in zip(self.x, self.y):
                w.writerow([repr(float(a)), repr(float(b)), repr(float(self.R))])


def build_maximal_separated(region: Region, R: float, sample_count: int | None = None,
                            seed: int = 0, repair: bool = True) -> SeparatedSet:
    """Greedy saturated R-separated subset of a low-discrepancy sample stream.

    A stream point becomes a center when it lies at distance >= R from all
    previous centers, so afterwards every stream point is within R of a center.
    With ``repair`` the leftover pockets between the stream points are then
    closed by :func:`saturate`, which makes the set maximal in the region
    itself and not only on the stream.
    """
    if not R > 0:
        raise ValidationError("R must be positive")
    if not region.volume > 0:
        raise EmptyRegion("region has zero measure")
    n = default_sample_count(region, R) if sample_count is None else int(sample_count)
    if n < 1:
        raise EmptyRegion("need at least one sample")
    sx, sy = sample_stream(region, n, seed)
    if region.dim == 1:
        # on a segment the greedy runs as a sweep along arc length
        order = np.argsort(sy, kind="stable")
        sx, sy = sx[order], sy[order]
    cx = np.empty(n)
    cy = np.empty(n)
    m = 0
    for i in range(n):
        if m == 0 or region.dist(sx[i], sy[i], cx[:m], cy[:m]).min() >= R:
            cx[m] = sx[i]
            cy[m] = sy[i]
            m += 1
    out = SeparatedSet(cx[:m].copy(), cy[:m].copy(), float(R), region, n, seed)
    out.meta["stream_centers"] = m
    out.meta["repair_added"] = saturate(out) if repair else 0
    return out


def _circle_circle(c1, r1, c2, r2):
    """Intersection points of Euclidean circles (vectorised over pairs)."""
    dx, dy = c2[0] - c1[0], c2[1] - c1[1]
    d = np.hypot(dx, dy)
    ok = (d > 0) & (d < r1 + r2) & (d > np.abs(r1 - r2))
    d, dx, dy = d[ok], dx[ok], dy[ok]
    r1o, r2o = r1[ok], r2[ok]
    ax, ay = c1[0][ok], c1[1][ok]
    a = (r1o**2 - r2o**2 + d**2) / (2 * d)
    h = np.sqrt(np.maximum(r1o**2 - a**2, 0.0))
    mx, my = ax + a * dx / d, ay + a * dy / d
    px = np.concatenate([mx + h * dy / d, mx - h * dy / d])
    py = np.concatenate([my - h * dx / d, my + h * dx / d])
    return px, py


def _circle_line(cx, cy, r, p0, v):
    v = np.asarray(v, dtype=float) / math.hypot(*v)
    fx, fy = p0[0] - cx, p0[1] - cy
    b = fx * v[0] + fy * v[1]
    c = fx * fx + fy * fy - r * r
    disc = b * b - c
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    xs, ys = [], []
    for t in (-b - sq, -b + sq):
        xs.append((p0[0] + t * v[0])[ok])
        ys.append((p0[1] + t * v[1])[ok])
    return np.concatenate(xs), np.concatenate(ys)


def _circle_circle_fixed(cx, cy, r, c2, r2):
    n = len(cx)
    return _circle_circle((cx, cy), r, (np.full(n, c2[0]), np.full(n, c2[1])), np.full(n, r2))


def _pocket_candidates(region: Region, x, y, R):
    """Corner points of the uncovered set: circle/circle and circle/boundary hits."""
    tx, ty = region.translates(x, y)
    ex, ey = tx, ty * math.cosh(R)
    er = ty * math.sinh(R)
    cand_x, cand_y = [np.array([c[0] for c in region.corners()])], [np.array([c[1] for c in region.corners()])]
    if len(tx) > 1:
        i, j = np.triu_indices(len(tx), 1)
        near = dist_xy(tx[i], ty[i], tx[j], ty[j]) < 2 * R
        i, j = i[near], j[near]
        px, py = _circle_circle((ex[i], ey[i]), er[i], (ex[j], ey[j]), er[j])
        cand_x.append(px)
        cand_y.append(py)
    for p0, v in region.lines():
        px, py = _circle_line(ex, ey, er, p0, v)
        cand_x.append(px)
        cand_y.append(py)
    for c2, r2 in region.circles():
        px, py = _circle_circle_fixed(ex, ey, er, c2, r2)
        cand_x.append(px)
        cand_y.append(py)
    px = np.concatenate(cand_x)
    py = np.concatenate(cand_y)
    keep = py > 0
    px, py = region.canon(px[keep], py[keep])
    inside = region.contains(px, py)
    return px[inside], py[inside]


def _saturate_1d(region: "VerticalSegment", x, y, R, rel):
    s = np.log(y / region.y0)
    L = region.volume
    while True:
        cand = np.concatenate([[0.0, L], s - R, s + R])
        cand = cand[(cand >= 0) & (cand <= L)]
        gap = np.abs(cand[:, None] - s[None, :]).min(axis=1) if len(s) else np.full(len(cand), np.inf)
        ok = gap >= R * (1 - rel)
        if not ok.any():
            break
        s = np.append(s, np.sort(cand[ok])[0])
    return np.full(len(s), region.x), region.y0 * np.exp(s)


def saturate(s: "SeparatedSet", rel: float = 1e-12, max_rounds: int = 100_000) -> int:
    """Add centers until no point of the region is at distance >= R from all of them.

    Every component of the uncovered set has a corner on one of the radius-R
    circles or on the region boundary, so testing those corners decides
    maximality; admissible corners are added one at a time (separation is
    then >= R up to relative roundoff ``rel``).  Returns the number added.
    """
    n0 = len(s)
    if isinstance(s.region, VerticalSegment):
        s.x, s.y = _saturate_1d(s.region, s.x, s.y, s.R, rel)
        return len(s) - n0
    for _ in range(max_rounds):
        px, py = _pocket_candidates(s.region, s.x, s.y, s.R)
        if len(px) == 0:
            break
        d = s.min_distance_to_centers(px, py) if len(s) else np.full(len(px), np.inf)
        ok = d >= s.R * (1 - rel)
        if not ok.any():
            break
        # deterministic pick: farthest admissible corner, ties by coordinates
        idx = np.flatnonzero(ok)
        k = idx[np.lexsort((py[idx], px[idx], -d[idx]))[0]]
        s.x = np.append(s.x, px[k])
        s.y = np.append(s.y, py[k])
    return len(s) - n0


@dataclass
class CoveringReport:
    coverage: float
    probes: int
    violators: list[tuple[float, float, float]]

    @property
    def covered(self) -> bool:
        return not self.violators


def verify_covering(s: SeparatedSet, probe_count: int = 10_000, seed: int = 1,
                    probes: tuple[np.ndarray, np.ndarray] | None = None) -> CoveringReport:
    """Fraction of probes lying within distance R of some center.

    Fresh probes are i.i.d. from the region's measure (Philox generator);
    explicit probes may be passed instead.
    """
    if probes is None:
        rng = np.random.Generator(np.random.Philox(seed))
        px, py = s.region.sample(rng.random((probe_count, s.region.dim)))
    else:
        px, py = (np.asarray(a, dtype=float) for a in probes)
    d = s.min_distance_to_centers(px, py)
    bad = d >= s.R
    viol = [(float(a), float(b), float(c)) for a, b, c in zip(px[bad], py[bad], d[bad])]
    return CoveringReport(float(1.0 - bad.mean()) if len(px) else 1.0, len(px), viol)


def intersection_number(s: SeparatedSet, r: float) -> int:
    """max_i #{j : d(x_i, x_j) < r}, counting i itself."""
    if len(s) == 0:
        return 0
    best = 0
    for start in range(0, len(s), 512):
        d = s.region.dist(s.x[start:start + 512, None], s.y[start:start + 512, None],
                          s.x[None, :], s.y[None, :])
        best = max(best, int((d < r).sum(axis=1).max()))
    return best


def intersection_bound(R: float) -> float:
    """Packing bound sinh^2(5R/4) / sinh^2(R/4) for r = 2R (at most 25 e^{2R})."""
    return math.sinh(1.25 * R) ** 2 / math.sinh(0.25 * R) ** 2


def save_covering(s: SeparatedSet, path: str | Path) -> None:
    s.to_csv(path)


__all__ = [
    "Region", "RectRegion", "BallRegion", "VerticalSegment", "FunnelDomain", "CuspDomain",
    "SeparatedSet", "CoveringReport", "build_maximal_separated", "verify_covering",
    "intersection_number", "intersection_bound", "saturate", "sample_stream", "default_sample_count",
]
