"""Shared numerical primitives.

Small, dependency-light helpers used across modules: the p-Laplacian flux
map Phi(t) = |t|^{p-2} t and its inverse, finite differences on nonuniform
grids, and a batched adaptive Simpson quadrature.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


class NumericalError(RuntimeError):
    """A computation failed for numerical (not input-validation) reasons."""


class SingularLocusError(NumericalError):
    """The phase-plane vector field was evaluated on its singular locus."""


def phi(t, p: float):
    """Flux map Phi(t) = |t|^{p-2} t (odd, strictly increasing)."""
    t = np.asarray(t, dtype=float)
    out = np.sign(t) * np.abs(t) ** (p - 1.0)
    return out if out.ndim else float(out)


def phi_inv(z, p: float):
    """Inverse flux map Phi^{-1}(z) = sign(z) |z|^{1/(p-1)}."""
    z = np.asarray(z, dtype=float)
    out = np.sign(z) * np.abs(z) ** (1.0 / (p - 1.0))
    return out if out.ndim else float(out)


def diff1(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """First derivative of samples y(x) on a nonuniform grid.

    Three-point formulas, second order in the local spacing; one-sided
    at the two ends. x must be strictly increasing with at least 3 points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.size < 3 or x.size != y.size:
        raise ValueError("diff1 needs matching 1-d arrays with >= 3 samples")
    d = np.empty_like(y)
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    d[1:-1] = (
        -hp / (hm * (hm + hp)) * y[:-2]
        + (hp - hm) / (hm * hp) * y[1:-1]
        + hm / (hp * (hm + hp)) * y[2:]
    )
    h0, h1 = x[1] - x[0], x[2] - x[1]
    d[0] = (
        -(2 * h0 + h1) / (h0 * (h0 + h1)) * y[0]
        + (h0 + h1) / (h0 * h1) * y[1]
        - h0 / (h1 * (h0 + h1)) * y[2]
    )
    g0, g1 = x[-2] - x[-3], x[-1] - x[-2]
    d[-1] = (
        g1 / (g0 * (g0 + g1)) * y[-3]
        - (g0 + g1) / (g0 * g1) * y[-2]
        + (g0 + 2 * g1) / (g1 * (g0 + g1)) * y[-1]
    )
    return d


def diff2(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivative of y(x) on a nonuniform grid (3-point, ends one-sided)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.size < 3 or x.size != y.size:
        raise ValueError("diff2 needs matching 1-d arrays with >= 3 samples")
    d = np.empty_like(y)
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    d[1:-1] = 2.0 * (
        y[:-2] / (hm * (hm + hp)) - y[1:-1] / (hm * hp) + y[2:] / (hp * (hm + hp))
    )
    d[0] = d[1]
    d[-1] = d[-2]
    return d


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 0.0,
    min_intervals: int = 64,
    max_rounds: int = 40,
) -> tuple[float, float]:
    """Adaptive composite Simpson quadrature with batched refinement.

    f must accept an ndarray of abscissae. Intervals whose halved-Simpson
    update exceeds the locally apportioned tolerance are subdivided; all
    midpoint evaluations in a round are vectorized. Returns (value,
    error_estimate).
    """
    if not b > a:
        raise ValueError("adaptive_simpson needs b > a")
    edges = np.linspace(a, b, min_intervals + 1)
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    flo, fhi, fmid = f(lo), f(hi), f(mid)

    total = 0.0
    err_total = 0.0
    for _ in range(max_rounds):
        s1 = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
        ml = 0.5 * (lo + mid)
        mr = 0.5 * (mid + hi)
        fml, fmr = f(ml), f(mr)
        sl = (mid - lo) / 6.0 * (flo + 4.0 * fml + fmid)
        sr = (hi - mid) / 6.0 * (fmid + 4.0 * fmr + fhi)
        s2 = sl + sr
        err = np.abs(s2 - s1) / 15.0

        scale = abs(total + s2.sum())
        budget = (abs_tol + rel_tol * max(scale, 1e-300)) * (hi - lo) / (b - a)
        done = err <= budget
        total += s2[done].sum()
        err_total += err[done].sum()
        if done.all():
            return total, err_total

        keep = ~done
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        new_mid = np.concatenate([ml[keep], mr[keep]])
        flo = np.concatenate([flo[keep], fmid[keep]])
        fhi = np.concatenate([fmid[keep], fhi[keep]])
        fmid = np.concatenate([fml[keep], fmr[keep]])
        mid = new_mid

    # refinement budget exhausted: account for what is left
    s2 = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    total += s2.sum()
    err_total += np.abs(s2).sum() * 1e-10 + err_total
    return total, err_total


def fit_loglog_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept of log y against log x (y > 0)."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    A = np.column_stack([lx, np.ones_like(lx)])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    return float(coef[0]), float(coef[1])
