"""Gauss-Legendre rules on boxes and balls."""

from __future__ import annotations

from functools import lru_cache
from math import ceil

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = ["gauss_legendre", "box_rule", "ball_rule", "integrate_against", "QuadratureResult"]


@lru_cache(maxsize=256)
def _gl(p: int):
    x, w = leggauss(p)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(p: int, a: float = -1.0, b: float = 1.0):
    """p-point rule on [a, b]."""
    if p < 1:
        raise ValueError("order must be positive")
    x, w = _gl(p)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def box_rule(lo, hi, order):
    """Tensor-product rule on the box prod [lo_i, hi_i]; returns nodes (m, n) and weights (m,)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(hi <= lo):
        raise ValueError("degenerate box")
    orders = [order] * len(lo) if np.isscalar(order) else list(order)
    axes = [gauss_legendre(p, a, b) for p, a, b in zip(orders, lo, hi)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return X, W


def ball_rule(center, radius: float, order: int, frequency: float = 0.0):
    """Product rule in polar coordinates on the ball B(center, radius).

    ``order`` sets the base number of nodes per direction.  ``frequency`` is
    an upper bound on |xi| for integrands oscillating like exp(i<xi, x>);
    node counts grow with ``frequency * radius`` so oscillations stay
    resolved.  Polynomials times powers of (1 - |y|^2) are integrated exactly
    once the base order exceeds half their degree.
    """
    c = np.asarray(center, dtype=float)
    n = c.size
    r = float(radius)
    osc = frequency * r
    nr = order + int(ceil(0.5 * osc))
    if n == 1:
        x, w = gauss_legendre(nr + order, -1.0, 1.0)
        return c + r * x[:, None], r * w
    rho, wr = gauss_legendre(nr, 0.0, 1.0)
    if n == 2:
        m = 2 * order + int(ceil(1.1 * osc)) + 4
        th = 2 * np.pi * np.arange(m) / m
        R, T = np.meshgrid(rho, th, indexing="ij")
        W = np.outer(wr * rho, np.full(m, 2 * np.pi / m)).ravel()
        X = np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=1)
        return c + r * X, r**2 * W
    if n == 3:
        ct, wt = gauss_legendre(nr, -1.0, 1.0)
        m = 2 * order + int(ceil(1.1 * osc)) + 4
        ph = 2 * np.pi * np.arange(m) / m
        R, CT, PH = np.meshgrid(rho, ct, ph, indexing="ij")
        ST = np.sqrt(1.0 - CT**2)
        X = np.stack([(R * ST * np.cos(PH)).ravel(), (R * ST * np.sin(PH)).ravel(), (R * CT).ravel()], axis=1)
        W = (wr * rho**2)[:, None, None] * wt[None, :, None] * np.full(m, 2 * np.pi / m)[None, None, :]
        return c + r * X, r**3 * W.ravel()
    # higher dimensions: tensor rule on the bounding box, integrand assumed to vanish outside
    X, W = box_rule(c - r, c + r, nr + order)
    inside = np.sum((X - c) ** 2, axis=1) <= r * r
    return X[inside], W[inside]


class QuadratureResult(tuple):
    """(value, error_estimate) pair."""

    __slots__ = ()

    def __new__(cls, value, error):
        return super().__new__(cls, (value, error))

    @property
    def value(self):
        return self[0]

    @property
    def error(self):
        return self[1]


def integrate_against(phi, density, box, order: int = 24) -> QuadratureResult:
    """Tensor Gauss-Legendre integral of phi(x) * density(x) over a box.

    ``phi`` and ``density`` are vectorized callables on arrays (m, n).  The
    error estimate is the difference between orders ``order`` and
    ``order // 2``.
    """
    lo, hi = box
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(hi <= lo):
        raise ValueError("degenerate integration box")

    def run(p):
        X, W = box_rule(lo, hi, p)
        return np.sum(W * np.asarray(phi(X)) * np.asarray(density(X)))

    full = run(order)
    coarse = run(max(order // 2, 1))
    return QuadratureResult(full, abs(full - coarse))
