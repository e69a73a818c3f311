"""Adaptive Gauss-Legendre quadrature with dyadic refinement.

Panels are refined in batches so the integrand is always called with
large vectorised arrays.  The error estimate of a panel is the difference
between its own 16-point rule and the sum over its children.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonConvergent

GL_ORDER = 16
MAX_PANELS = 2**20

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    panels: int

    def __float__(self) -> float:
        return self.value


def _gl_batch(f, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """16-point rule on each interval [lo_i, hi_i]; one call to ``f``."""
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = np.asarray(f(x), dtype=float)
    return half * (vals @ _WEIGHTS)


def adaptive_gl(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rtol: float = 1e-8,
    atol: float = 0.0,
    max_panels: int = MAX_PANELS,
    initial_panels: int = 1,
    raise_on_fail: bool = True,
    breakpoints=None,
) -> QuadResult:
    """Integrate ``f`` over [a, b].

    ``f`` receives an array of any shape and must return an array of the
    same shape.  Known kinks of ``f`` can be passed as ``breakpoints``;
    they become panel edges.  Raises NonConvergent if the tolerance is not
    met before ``max_panels`` panels have been used (unless
    ``raise_on_fail`` is off).
    """
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    edges = np.linspace(a, b, initial_panels + 1)
    if breakpoints is not None:
        bp = np.asarray(breakpoints, dtype=float)
        lo_, hi_ = min(a, b), max(a, b)
        bp = bp[(bp > lo_) & (bp < hi_)]
        edges = np.unique(np.concatenate([edges, bp]))
        if b < a:
            edges = edges[::-1]
    lo, hi = edges[:-1], edges[1:]
    whole = _gl_batch(f, lo, hi)
    accepted_val = 0.0
    accepted_err = 0.0
    n_panels = len(lo)
    width = abs(b - a)
    estimate = float(whole.sum())
    while len(lo):
        mid = 0.5 * (lo + hi)
        both = _gl_batch(f, np.concatenate([lo, mid]), np.concatenate([mid, hi]))
        left, right = both[: len(lo)], both[len(lo):]
        refined = left + right
        err = np.abs(whole - refined)
        estimate = accepted_val + float(refined.sum())
        tol = max(atol, rtol * abs(estimate))
        local_tol = tol * np.abs(hi - lo) / width
        ok = err <= local_tol
        accepted_val += float(refined[ok].sum())
        accepted_err += float(err[ok].sum())
        if ok.all():
            break
        bad = ~ok
        n_panels += int(bad.sum())
        if n_panels > max_panels:
            total_err = accepted_err + float(err[bad].sum())
            value = accepted_val + float(refined[bad].sum())
            if raise_on_fail:
                raise NonConvergent(
                    f"adaptive_gl: error {total_err:.3e} above tolerance {tol:.3e} "
                    f"after {n_panels} panels"
                )
            return QuadResult(value, total_err, n_panels)
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
        whole = np.concatenate([left[bad], right[bad]])
    return QuadResult(estimate, accepted_err, n_panels)


def _gl2_batch(f, x0, x1, y0, y1):
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    mx = 0.5 * (x1 + x0)
    my = 0.5 * (y1 + y0)
    X = mx[:, None, None] + hx[:, None, None] * _NODES[None, :, None]
    Y = my[:, None, None] + hy[:, None, None] * _NODES[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    vals = np.asarray(f(X, Y), dtype=float)
    return hx * hy * np.einsum("pij,i,j->p", vals, _WEIGHTS, _WEIGHTS)


def adaptive_gl_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    rtol: float = 1e-8,
    atol: float = 0.0,
    max_panels: int = MAX_PANELS,
    raise_on_fail: bool = True,
) -> QuadResult:
    """Tensor 16x16 Gauss-Legendre on rectangles, refined by quadrisection."""
    x0 = np.array([float(x_range[0])])
    x1 = np.array([float(x_range[1])])
    y0 = np.array([float(y_range[0])])
    y1 = np.array([float(y_range[1])])
    area = abs((x1 - x0) * (y1 - y0))[0]
    if area == 0.0:
        return QuadResult(0.0, 0.0, 0)
    whole = _gl2_batch(f, x0, x1, y0, y1)
    accepted_val = 0.0
    accepted_err = 0.0
    n_panels = 1
    estimate = float(whole.sum())
    while len(x0):
        xm = 0.5 * (x0 + x1)
        ym = 0.5 * (y0 + y1)
        cx0 = np.concatenate([x0, xm, x0, xm])
        cx1 = np.concatenate([xm, x1, xm, x1])
        cy0 = np.concatenate([y0, y0, ym, ym])
        cy1 = np.concatenate([ym, ym, y1, y1])
        kids = _gl2_batch(f, cx0, cx1, cy0, cy1).reshape(4, -1)
        refined = kids.sum(axis=0)
        err = np.abs(whole - refined)
        estimate = accepted_val + float(refined.sum())
        tol = max(atol, rtol * abs(estimate))
        local_tol = tol * np.abs((x1 - x0) * (y1 - y0)) / area
        ok = err <= local_tol
        accepted_val += float(refined[ok].sum())
        accepted_err += float(err[ok].sum())
        if ok.all():
            break
        bad = ~ok
        n_panels += 3 * int(bad.sum())
        if n_panels > max_panels:
            total_err = accepted_err + float(err[bad].sum())
            if raise_on_fail:
                raise NonConvergent(
                    f"adaptive_gl_2d: error {total_err:.3e} above tolerance {tol:.3e} "
                    f"after {n_panels} panels"
                )
            return QuadResult(accepted_val + float(refined[bad].sum()), total_err, n_panels)
        x0 = np.concatenate([a[bad] for a in (x0, xm, x0, xm)])
        x1 = np.concatenate([a[bad] for a in (xm, x1, xm, x1)])
        y0 = np.concatenate([a[bad] for a in (y0, y0, ym, ym)])
        y1 = np.concatenate([a[bad] for a in (ym, ym, y1, y1)])
        whole = kids[:, bad].reshape(-1)
    return QuadResult(estimate, accepted_err, n_panels)
