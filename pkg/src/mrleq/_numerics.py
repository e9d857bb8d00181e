"""Quadrature and root-bracketing helpers used across the package."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import InfiniteMomentError

QUAD_ABS_TOL = 1e-10
TAIL_SURVIVAL = 1e-12

# 8-point Gauss-Legendre rule on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
GL_NODES = 0.5 * (_GL_X + 1.0)
GL_WEIGHTS = 0.5 * _GL_W


def doubling_cutoff(sf: Callable[[float], float], start: float, eps: float = TAIL_SURVIVAL,
                    max_doublings: int = 80) -> float:
    """Smallest ``start * 2**k`` (k >= 0) at which ``sf`` drops below ``eps``."""
    x = max(float(start), 1e-3)
    for _ in range(max_doublings):
        if sf(x) < eps:
            return x
        x *= 2.0
    raise InfiniteMomentError(f"survival stays above {eps:g} up to {x:g}")


def quad(f: Callable[[float], float], a: float, b: float, points=None,
         epsabs: float = QUAD_ABS_TOL, epsrel: float = 1e-12, limit: int = 500) -> float:
    """Adaptive Gauss-Kronrod quadrature on a finite interval."""
    if b <= a:
        return 0.0
    pts = None
    if points is not None:
        pts = sorted({float(p) for p in points if a < p < b})
        pts = pts or None
    val, _ = integrate.quad(f, a, b, points=pts, epsabs=epsabs, epsrel=epsrel, limit=limit)
    return float(val)


def integrate_tail(f: Callable[[float], float], a: float, sf: Callable[[float], float],
                   points=None, eps: float = TAIL_SURVIVAL, upper: float = math.inf) -> float:
    """Integrate ``f`` over ``[a, upper)``, truncating an infinite tail where ``sf < eps``.

    Converges when f decays with the survival function; the truncation point
    is found by doubling.
    """
    if math.isinf(upper):
        upper = doubling_cutoff(sf, max(2.0 * abs(a), 1.0), eps)
        upper = max(upper, a)
    return quad(f, a, upper, points=points)


def bisect_increasing(fn: Callable[[np.ndarray], np.ndarray], target, lo, hi,
                      iters: int = 200, xtol: float = 0.0) -> np.ndarray:
    """Vectorized bisection for ``fn(x) = target`` with ``fn`` nondecreasing.

    ``lo``/``hi`` broadcast against ``target`` and must bracket the solution.
    Stops once every bracket has collapsed to adjacent floats (or ``xtol``).
    """
    target = np.asarray(target, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), target.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), target.shape).copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = fn(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        nxt = 0.5 * (lo + hi)
        if np.all((hi - lo <= xtol) | (nxt == lo) | (nxt == hi)):
            break
    return 0.5 * (lo + hi)
