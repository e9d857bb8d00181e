"""Demand distributions: analytic families, combinators and the JSON spec format.

Every distribution is an immutable object over nonnegative demand exposing
vectorized ``cdf``, ``sf``, ``pdf``, ``quantile`` and ``tail_integral``,
where ``tail_integral(r) = E[(X - r)^+] = int_r^inf sf(u) du``. The tail
integral is the workhorse of the package: the mean residual life, the
supplier's objective and the cx/ew orders are all built on it, so every
family supplies it in closed form or from a high-accuracy table.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable

import numpy as np
from scipy import special
from scipy.interpolate import CubicHermiteSpline

from . import _numerics as num
from .errors import (
    ContractViolationError,
    InfiniteMomentError,
    ParameterDomainError,
    ResolutionError,
    SpecParseError,
    UnsupportedInputError,
)

DEFAULT_KNOTS = 4096


def _as_array(x):
    return np.asarray(x, dtype=float)


def _ret(x, out):
    """Return a Python float for scalar input, an array otherwise."""
    if np.ndim(x) == 0:
        return float(np.asarray(out).reshape(()))
    return out


class Distribution:
    """Base class for a continuous distribution on ``[support_low, support_high]``.

    Subclasses implement ``_sf``, ``_pdf`` and ``_tail`` on arrays restricted
    to ``x >= support_low``; the public methods handle broadcasting, the
    region below the support and scalar/array return types.
    """

    support_low: float = 0.0
    support_high: float = math.inf
    has_density: bool = True
    breakpoints: tuple[float, ...] = ()
    knots: np.ndarray | None = None  # interpolation knots of tabulated distributions
    spec: dict | None = None

    # -- to be provided by subclasses -------------------------------------
    def _sf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise UnsupportedInputError(f"{self!r} has no density")

    def _tail(self, x: np.ndarray) -> np.ndarray:
        out = np.empty_like(x)
        for i, xi in enumerate(x.flat):
            out.flat[i] = num.integrate_tail(lambda u: float(self._sf(np.asarray(u))), xi,
                                             self._sf_scalar, points=self.breakpoints,
                                             upper=self.support_high)
        return out

    # -- public API ---------------------------------------------------------
    def sf(self, x):
        xa = _as_array(x)
        below = xa < self.support_low
        out = np.where(below, 1.0, self._sf(np.where(below, self.support_low, xa)))
        out = np.where(xa >= self.support_high, 0.0, out)
        return _ret(x, np.clip(out, 0.0, 1.0))

    def cdf(self, x):
        xa = _as_array(x)
        return _ret(x, 1.0 - _as_array(self.sf(xa)))

    def pdf(self, x):
        xa = _as_array(x)
        inside = (xa >= self.support_low) & (xa <= self.support_high)
        safe = np.clip(xa, self.support_low, self._finite_high())
        out = np.where(inside, self._pdf(safe), 0.0)
        return _ret(x, out)

    def tail_integral(self, x):
        """``E[(X - x)^+]``; equals ``mean - x`` below the support."""
        xa = _as_array(x)
        lo = self.support_low
        below = xa < lo
        above = xa >= self.support_high
        core = self._tail(np.clip(xa, lo, self._finite_high()))
        out = np.where(below, self._tail_at_low + (lo - xa), core)
        out = np.where(above, 0.0, out)
        return _ret(x, np.maximum(out, 0.0))

    def mean_residual_life(self, x):
        """Raw ``tail_integral / sf``; NaN where the survival underflows to 0."""
        xa = _as_array(x)
        s = _as_array(self.sf(xa))
        t = _as_array(self.tail_integral(xa))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(s > 0, t / s, np.nan)
        return _ret(x, out)

    def hazard(self, x):
        xa = _as_array(x)
        s = _as_array(self.sf(xa))
        f = _as_array(self.pdf(xa))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(s > 0, f / s, np.nan)
        return _ret(x, out)

    def quantile(self, p):
        """Left-continuous inverse cdf, clamped to the support at p=0 and p=1."""
        pa = _as_array(p)
        inner = np.clip(pa, 1e-300, 1.0 - 1e-16)
        hi = self._bracket_high(float(np.max(inner)) if inner.size else 0.5)
        q = num.bisect_increasing(self.cdf, inner, self.support_low, hi)
        q = np.where(pa <= 0.0, self.support_low, q)
        q = np.where(pa >= 1.0, self.support_high, q)
        return _ret(p, q)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return _as_array(self.quantile(rng.random(size)))

    @cached_property
    def mean(self) -> float:
        return self.support_low + self._tail_at_low

    @cached_property
    def second_moment(self) -> float:
        # E[X^2] = 2 int_0^inf E[(X-u)^+] du
        lo = self.support_low
        below = lo * lo * 0.5 + lo * self._tail_at_low  # int_0^lo (T(lo) + lo - u) du
        tail = lambda u: float(self.tail_integral(u))  # noqa: E731
        above = num.integrate_tail(tail, lo, self._sf_scalar, points=self.breakpoints,
                                   upper=self.support_high)
        if not math.isfinite(self.support_high):
            # a convergent integral gains almost nothing past the truncation point
            cut = num.doubling_cutoff(self._sf_scalar, max(2.0 * abs(lo), 1.0))
            extra = num.quad(tail, cut, 4.0 * cut)
            if extra > 1e-6 * max(below + above, 1e-300):
                raise InfiniteMomentError(
                    f"second moment diverges: the tail beyond {cut:.3g} adds {extra:.3g}")
        return 2.0 * (below + above)

    @property
    def variance(self) -> float:
        return max(self.second_moment - self.mean**2, 0.0)

    # -- helpers --------------------------------------------------------------
    @cached_property
    def _tail_at_low(self) -> float:
        return float(self._tail(np.asarray([self.support_low]))[0])

    def _sf_scalar(self, x: float) -> float:
        return float(self.sf(x))

    def _finite_high(self) -> float:
        return self.support_high if math.isfinite(self.support_high) else np.inf

    def _bracket_high(self, pmax: float) -> float:
        if math.isfinite(self.support_high):
            return self.support_high
        eps = max(1.0 - pmax, 1e-16) * 0.5
        start = max(self.support_low, 1.0) if self.support_low > 0 else 1.0
        return num.doubling_cutoff(self._sf_scalar, start, eps)

    def upper_cutoff(self, eps: float = num.TAIL_SURVIVAL) -> float:
        """A point beyond which survival is below ``eps`` (support end if bounded)."""
        if math.isfinite(self.support_high):
            return self.support_high
        start = max(self.mean, self.support_low, 1e-3)
        return num.doubling_cutoff(self._sf_scalar, start, eps)

    def __repr__(self) -> str:
        if self.spec is not None:
            return f"{type(self).__name__}({json.dumps(self.spec, sort_keys=True)})"
        return f"{type(self).__name__}()"


# ---------------------------------------------------------------------------
# Analytic families
# ---------------------------------------------------------------------------

class Exponential(Distribution):
    def __init__(self, rate: float):
        if not rate > 0:
            raise ParameterDomainError(f"exponential rate must be > 0, got {rate}")
        self.rate = float(rate)
        self.breakpoints = (0.0,)
        self.spec = {"kind": "exponential", "rate": self.rate}

    def _sf(self, x):
        return np.exp(-self.rate * x)

    def _pdf(self, x):
        return self.rate * np.exp(-self.rate * x)

    def _tail(self, x):
        return np.exp(-self.rate * x) / self.rate

    def mean_residual_life(self, x):
        return _ret(x, np.full_like(_as_array(x), 1.0 / self.rate))

    def hazard(self, x):
        xa = _as_array(x)
        return _ret(x, np.where(xa < 0, 0.0, self.rate))

    def quantile(self, p):
        pa = _as_array(p)
        with np.errstate(divide="ignore"):
            q = -np.log1p(-pa) / self.rate
        return _ret(p, np.where(pa <= 0, 0.0, q))

    def sample(self, size, rng):
        return rng.exponential(1.0 / self.rate, size)

    @cached_property
    def mean(self):
        return 1.0 / self.rate

    @cached_property
    def second_moment(self):
        return 2.0 / self.rate**2


class Uniform(Distribution):
    def __init__(self, a: float, b: float):
        if not (a >= 0 and b > a):
            raise ParameterDomainError(f"uniform needs 0 <= a < b, got a={a}, b={b}")
        self.a, self.b = float(a), float(b)
        self.support_low, self.support_high = self.a, self.b
        self.breakpoints = (self.a, self.b)
        self.spec = {"kind": "uniform", "a": self.a, "b": self.b}

    def _sf(self, x):
        return np.clip((self.b - x) / (self.b - self.a), 0.0, 1.0)

    def _pdf(self, x):
        return np.full_like(x, 1.0 / (self.b - self.a))

    def _tail(self, x):
        return np.maximum(self.b - x, 0.0) ** 2 / (2.0 * (self.b - self.a))

    def mean_residual_life(self, x):
        xa = _as_array(x)
        out = np.where(xa < self.a, self.mean - xa, 0.5 * (self.b - xa))
        return _ret(x, np.where(xa >= self.b, np.nan, out))

    def hazard(self, x):
        xa = _as_array(x)
        with np.errstate(divide="ignore"):
            out = np.where(xa < self.a, 0.0, 1.0 / (self.b - xa))
        return _ret(x, np.where(xa >= self.b, np.nan, out))

    def quantile(self, p):
        pa = np.clip(_as_array(p), 0.0, 1.0)
        return _ret(p, self.a + pa * (self.b - self.a))

    def sample(self, size, rng):
        return rng.uniform(self.a, self.b, size)

    @cached_property
    def mean(self):
        return 0.5 * (self.a + self.b)

    @cached_property
    def second_moment(self):
        return (self.a**2 + self.a * self.b + self.b**2) / 3.0


_SQRT2 = math.sqrt(2.0)
_SQRT_HALF_PI = math.sqrt(math.pi / 2.0)


class TruncatedNormal(Distribution):
    """Normal(mu, sigma^2) conditioned on being nonnegative."""

    def __init__(self, mu: float, sigma: float):
        if not sigma > 0:
            raise ParameterDomainError(f"normal sigma must be > 0, got {sigma}")
        self.mu, self.sigma = float(mu), float(sigma)
        self._z0 = -self.mu / self.sigma
        self._mass = float(special.ndtr(-self._z0))  # P(N > 0)
        if self._mass <= 0:
            raise ParameterDomainError("normal puts no mass on [0, inf)")
        self.breakpoints = (0.0,)
        self.spec = {"kind": "truncated_normal", "mu": self.mu, "sigma": self.sigma}

    @property
    def truncated_mass(self) -> float:
        """Probability the untruncated normal assigns to negative demand."""
        return 1.0 - self._mass

    def _z(self, x):
        return (x - self.mu) / self.sigma

    def _mills(self, z):
        # sf(z)/pdf(z) for the standard normal, stable for large z
        return _SQRT_HALF_PI * special.erfcx(z / _SQRT2)

    def _sf(self, x):
        return special.ndtr(-self._z(x)) / self._mass

    def _pdf(self, x):
        z = self._z(x)
        return np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * self.sigma * self._mass)

    def mean_residual_life(self, x):
        xa = _as_array(x)
        z = self._z(np.maximum(xa, 0.0))
        m = self.sigma * self._mills_inv_minus_z(z)
        out = np.where(xa < 0, self.mean - xa, m)
        return _ret(x, out)

    def _mills_inv_minus_z(self, z):
        # E[Z - z | Z > z] = phi(z)/sf(z) - z
        return 1.0 / self._mills(z) - z

    def _tail(self, x):
        return self._sf(x) * self.sigma * self._mills_inv_minus_z(self._z(x))

    def hazard(self, x):
        xa = _as_array(x)
        out = 1.0 / (self.sigma * self._mills(self._z(xa)))
        return _ret(x, np.where(xa < 0, 0.0, out))

    def quantile(self, p):
        pa = np.clip(_as_array(p), 0.0, 1.0)
        lower = special.ndtr(self._z0)
        with np.errstate(divide="ignore"):
            from_left = special.ndtri(lower + pa * self._mass)
            from_right = -special.ndtri((1.0 - pa) * self._mass)
        z = np.where(pa < 0.5, from_left, from_right)
        q = np.maximum(self.mu + self.sigma * z, 0.0)
        return _ret(p, np.where(pa <= 0, 0.0, q))

    @cached_property
    def mean(self):
        lam = math.exp(-0.5 * self._z0**2) / math.sqrt(2 * math.pi) / self._mass
        return self.mu + self.sigma * lam

    @cached_property
    def second_moment(self):
        phi0 = math.exp(-0.5 * self._z0**2) / math.sqrt(2 * math.pi)
        lam = phi0 / self._mass
        var = self.sigma**2 * (1.0 + self._z0 * lam - lam**2)
        return var + self.mean**2


@dataclass(frozen=True)
class SinusoidParams:
    omega: float
    kappa: float
    phi: float

    def normalization(self) -> float:
        w, k, ph = self.omega, self.kappa, self.phi
        denom = k * k * math.cos(w * ph) + k * k + k * w * math.sin(w * ph) + w * w
        if denom <= 0:
            return -math.inf
        return k * (k * k + w * w) / denom


class Sinusoid(Distribution):
    """Exponentially decaying sinusoid density on ``[0, inf)``.

    ``f(r) = C e^{-kappa r} (cos(omega (r - phi)) + 1)``. Survival, tail
    integral, mean residual life and hazard all have closed forms in which
    the ``e^{-kappa r}`` factor cancels, so they stay accurate far in the tail.
    """

    def __init__(self, omega: float, kappa: float, phi: float):
        if not omega >= 0:
            raise ParameterDomainError(f"sinusoid omega must be >= 0, got {omega}")
        if not kappa > 0:
            raise ParameterDomainError(f"sinusoid kappa must be > 0, got {kappa}")
        self.params = SinusoidParams(float(omega), float(kappa), float(phi))
        c = self.params.normalization()
        if not c > 0:
            raise ParameterDomainError(f"sinusoid normalization constant is {c}, must be > 0")
        self.c = c
        self.breakpoints = (0.0,)
        self.spec = {"kind": "sinusoid", "omega": self.params.omega,
                     "kappa": self.params.kappa, "phi": self.params.phi}

    def _theta(self, x):
        return self.params.omega * (x - self.params.phi)

    def _sf_factor(self, x):
        w, k = self.params.omega, self.params.kappa
        t = self._theta(x)
        return 1.0 / k + (k * np.cos(t) - w * np.sin(t)) / (k * k + w * w)

    def _tail_factor(self, x):
        w, k = self.params.omega, self.params.kappa
        kk = k * k + w * w
        t = self._theta(x)
        return 1.0 / k**2 + ((k * k - w * w) * np.cos(t) - 2 * k * w * np.sin(t)) / kk**2

    def _sf(self, x):
        return self.c * np.exp(-self.params.kappa * x) * self._sf_factor(x)

    def _pdf(self, x):
        return self.c * np.exp(-self.params.kappa * x) * (np.cos(self._theta(x)) + 1.0)

    def _tail(self, x):
        return self.c * np.exp(-self.params.kappa * x) * self._tail_factor(x)

    def mean_residual_life(self, x):
        xa = _as_array(x)
        core = self._tail_factor(np.maximum(xa, 0)) / self._sf_factor(np.maximum(xa, 0))
        return _ret(x, np.where(xa < 0, self.mean - xa, core))

    def hazard(self, x):
        xa = np.maximum(_as_array(x), 0)
        return _ret(x, (np.cos(self._theta(xa)) + 1.0) / self._sf_factor(xa))

    def sample(self, size, rng):
        # rejection from Exponential(kappa); acceptance probability (cos + 1) / 2
        out = np.empty(0)
        while out.size < size:
            k = int((size - out.size) * 2.1) + 16
            x = rng.exponential(1.0 / self.params.kappa, k)
            keep = rng.random(k) * 2.0 < np.cos(self._theta(x)) + 1.0
            out = np.concatenate([out, x[keep]])
        return out[:size]


class CdfTable(Distribution):
    """Monotone piecewise-linear cdf through given knots; no density is exposed."""

    has_density = False

    def __init__(self, x, cdf_values):
        x = _as_array(x)
        F = _as_array(cdf_values)
        if x.ndim != 1 or x.shape != F.shape or x.size < 2:
            raise ParameterDomainError("cdf table needs matching 1-d knot arrays")
        if np.any(np.diff(x) <= 0) or np.any(np.diff(F) < 0):
            raise ParameterDomainError("cdf table knots must increase and cdf must not decrease")
        if x[0] < 0 or F[0] != 0.0 or F[-1] != 1.0:
            raise ParameterDomainError("cdf table must start at cdf 0 on x >= 0 and end at 1")
        self.x, self.F = x, F
        self.support_low, self.support_high = float(x[0]), float(x[-1])
        s = 1.0 - F
        seg = 0.5 * (s[:-1] + s[1:]) * np.diff(x)
        self._cum_right = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        self.breakpoints = tuple(x.tolist()) if x.size <= 64 else ()
        self.knots = x
        self.spec = {"kind": "cdf_table", "x": x.tolist(), "cdf": F.tolist()}

    def _sf(self, x):
        return 1.0 - np.interp(x, self.x, self.F)

    def _tail(self, x):
        k = np.clip(np.searchsorted(self.x, x, side="right") - 1, 0, self.x.size - 2)
        s_here = self._sf(x)
        s_next = 1.0 - self.F[k + 1]
        return self._cum_right[k + 1] + 0.5 * (s_here + s_next) * (self.x[k + 1] - x)

    def quantile(self, p):
        pa = np.clip(_as_array(p), 0.0, 1.0)
        # first knot where F reaches p, then linear within the segment
        k = np.clip(np.searchsorted(self.F, pa, side="left"), 1, self.x.size - 1)
        f0, f1 = self.F[k - 1], self.F[k]
        with np.errstate(invalid="ignore", divide="ignore"):
            w = np.where(f1 > f0, (pa - f0) / (f1 - f0), 0.0)
        q = self.x[k - 1] + w * (self.x[k] - self.x[k - 1])
        return _ret(p, np.where(pa <= 0, self.support_low, q))


# ---------------------------------------------------------------------------
# Combinators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShiftScaleParams:
    delta: float = 0.0
    lam: float = 1.0


class ShiftScaled(Distribution):
    """Distribution of ``delta + lam * X``."""

    def __init__(self, base: Distribution, params: ShiftScaleParams):
        if not params.lam > 0:
            raise ParameterDomainError(f"scale must be > 0, got {params.lam}")
        if not params.delta >= 0:
            raise ParameterDomainError(f"shift must be >= 0, got {params.delta}")
        self.base, self.params = base, params
        d, c = params.delta, params.lam
        self.support_low = d + c * base.support_low
        self.support_high = d + c * base.support_high
        self.has_density = base.has_density
        self.breakpoints = tuple(d + c * b for b in base.breakpoints)
        self.spec = None if base.spec is None else {
            "kind": "shift_scale", "delta": d, "lambda": c, "base": base.spec}

    def _inv(self, x):
        return (x - self.params.delta) / self.params.lam

    def _sf(self, x):
        return _as_array(self.base.sf(self._inv(x)))

    def _pdf(self, x):
        return _as_array(self.base.pdf(self._inv(x))) / self.params.lam

    def _tail(self, x):
        return self.params.lam * _as_array(self.base.tail_integral(self._inv(x)))

    def mean_residual_life(self, x):
        xa = _as_array(x)
        inside = self.params.lam * _as_array(self.base.mean_residual_life(self._inv(xa)))
        # below the support every unit of demand is still ahead: m(x) = mean - x
        return _ret(x, np.where(xa < self.support_low, self.mean - xa, inside))

    def hazard(self, x):
        xa = _as_array(x)
        inside = _as_array(self.base.hazard(self._inv(xa))) / self.params.lam
        return _ret(x, np.where(xa < self.support_low, 0.0, inside))

    def quantile(self, p):
        return _ret(p, self.params.delta + self.params.lam * _as_array(self.base.quantile(p)))

    def sample(self, size, rng):
        return self.params.delta + self.params.lam * self.base.sample(size, rng)

    @cached_property
    def mean(self):
        return self.params.delta + self.params.lam * self.base.mean

    @cached_property
    def second_moment(self):
        d, c = self.params.delta, self.params.lam
        return d * d + 2 * d * c * self.base.mean + c * c * self.base.second_moment


class Mixture(Distribution):
    """``p * F1 + (1 - p) * F2``."""

    def __init__(self, first: Distribution, second: Distribution, p: float):
        if not 0 < p < 1:
            raise ParameterDomainError(f"mixture weight must lie in (0, 1), got {p}")
        self.first, self.second, self.p = first, second, float(p)
        self.support_low = min(first.support_low, second.support_low)
        self.support_high = max(first.support_high, second.support_high)
        self.has_density = first.has_density and second.has_density
        self.breakpoints = tuple(sorted(set(first.breakpoints) | set(second.breakpoints)))
        self.spec = None if first.spec is None or second.spec is None else {
            "kind": "mixture", "p": self.p, "first": first.spec, "second": second.spec}

    def _mix(self, a, b):
        return self.p * _as_array(a) + (1.0 - self.p) * _as_array(b)

    def _sf(self, x):
        return self._mix(self.first.sf(x), self.second.sf(x))

    def _pdf(self, x):
        return self._mix(self.first.pdf(x), self.second.pdf(x))

    def _tail(self, x):
        return self._mix(self.first.tail_integral(x), self.second.tail_integral(x))

    def sample(self, size, rng):
        pick = rng.random(size) < self.p
        a = self.first.sample(size, rng)
        b = self.second.sample(size, rng)
        return np.where(pick, a, b)

    @cached_property
    def mean(self):
        return float(self._mix(self.first.mean, self.second.mean))

    @cached_property
    def second_moment(self):
        return float(self._mix(self.first.second_moment, self.second.second_moment))


def _hermite_monotone_ok(x, y, d, tol):
    """Fritsch-Carlson test that the cubic Hermite interpolant is nonincreasing."""
    h = np.diff(x)
    delta = np.diff(y) / h
    if np.any(d > tol):
        return False
    flat = np.abs(delta) * h <= tol
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(flat, 0.0, d[:-1] / delta)
        b = np.where(flat, 0.0, d[1:] / delta)
    return bool(np.all(flat | ((a >= -1e-9) & (b >= -1e-9) & (a * a + b * b <= 9.0 + 1e-9))))


class _TailTable:
    """Right-cumulative integral of a cubic Hermite survival spline.

    Beyond the last knot the survival is continued exponentially with the
    hazard at that knot.
    """

    def __init__(self, knots, sf_vals, pdf_vals):
        self.knots = knots
        self.spline = CubicHermiteSpline(knots, sf_vals, -pdf_vals)
        h = np.diff(knots)
        seg = h * (sf_vals[:-1] + sf_vals[1:]) / 2 + h * h * (pdf_vals[1:] - pdf_vals[:-1]) / 12
        s_end, f_end = sf_vals[-1], pdf_vals[-1]
        self.end_hazard = f_end / s_end if s_end > 0 and f_end > 0 else math.inf
        end_tail = 0.0 if s_end <= 0 or math.isinf(self.end_hazard) else s_end / self.end_hazard
        self.cum_right = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) + end_tail
        self.antideriv = self.spline.antiderivative()
        self.s_end = s_end

    def sf(self, x):
        end = self.knots[-1]
        inside = np.clip(self.spline(np.minimum(x, end)), 0.0, 1.0)
        if self.s_end > 0 and math.isfinite(self.end_hazard):
            beyond = self.s_end * np.exp(-self.end_hazard * np.maximum(x - end, 0.0))
        else:
            beyond = np.zeros_like(x)
        return np.where(x > end, beyond, inside)

    def pdf(self, x):
        end = self.knots[-1]
        inside = np.maximum(-self.spline(np.minimum(x, end), 1), 0.0)
        return np.where(x > end, self.end_hazard * self.sf(x) if math.isfinite(self.end_hazard) else 0.0, inside)

    def tail(self, x):
        end = self.knots[-1]
        k = np.clip(np.searchsorted(self.knots, x, side="right") - 1, 0, self.knots.size - 2)
        xc = np.minimum(x, end)
        inside = self.cum_right[k + 1] + (self.antideriv(self.knots[k + 1]) - self.antideriv(xc))
        if math.isfinite(self.end_hazard) and self.s_end > 0:
            beyond = self.sf(x) / self.end_hazard
        else:
            beyond = np.zeros_like(x)
        return np.where(x > end, beyond, inside)


class Convolution(Distribution):
    """Distribution of ``X + Z`` for independent nonnegative ``X`` and ``Z``.

    Survival and density of the sum are computed at ``knots`` evenly spaced
    points by composite Gauss-Legendre quadrature in ``z``, split at every
    kink of either input. They are joined by a cubic Hermite spline whose
    integral gives the tail table exactly.
    """

    def __init__(self, x: Distribution, z: Distribution, knots: int = DEFAULT_KNOTS,
                 panels: int = 32):
        for name, d in (("x", x), ("z", z)):
            if d.support_low < 0:
                raise ParameterDomainError(f"convolution operand {name} must be nonnegative")
            if not d.has_density:
                raise UnsupportedInputError(f"convolution operand {name} has no density")
            if not math.isfinite(d.second_moment):
                raise InfiniteMomentError(f"convolution operand {name} has infinite second moment")
        if knots < 16:
            raise ResolutionError("convolution needs at least 16 knots")
        self.x, self.z, self.knots_count, self.panels = x, z, int(knots), int(panels)
        self.support_low = x.support_low + z.support_low
        self.support_high = x.support_high + z.support_high
        hi = x.upper_cutoff(1e-13) + z.upper_cutoff(1e-13)
        if math.isfinite(self.support_high):
            hi = self.support_high
        knots_arr = np.linspace(self.support_low, hi, self.knots_count)
        # the sum's density can only kink where a kink of X meets a kink of Z
        kinks = {a + b for a in self._kinks(x) for b in self._kinks(z)}
        extra = [k for k in kinks if self.support_low < k < hi]
        knots_arr = np.unique(np.concatenate([knots_arr, extra]))
        sf_vals, pdf_vals = self._evaluate(knots_arr)
        sf_vals[0] = 1.0
        if math.isfinite(self.support_high):
            sf_vals[-1] = 0.0
        sf_vals = np.minimum.accumulate(np.clip(sf_vals, 0.0, 1.0))
        pdf_vals = np.maximum(pdf_vals, 0.0)
        if not _hermite_monotone_ok(knots_arr, sf_vals, -pdf_vals, tol=1e-13):
            raise ResolutionError(
                f"{self.knots_count} knots are too coarse to certify a monotone cdf for X+Z")
        self._table = _TailTable(knots_arr, sf_vals, pdf_vals)
        self.knots = knots_arr
        self.breakpoints = ()
        self.spec = None if x.spec is None or z.spec is None else {
            "kind": "convolve", "x": x.spec, "z": z.spec, "knots": self.knots_count}

    @staticmethod
    def _kinks(d: Distribution) -> set[float]:
        out = {d.support_low, *d.breakpoints}
        if math.isfinite(d.support_high):
            out.add(d.support_high)
        return out

    def _evaluate(self, s: np.ndarray):
        x, z = self.x, self.z
        zlo = z.support_low
        zhi = z.upper_cutoff(1e-16)
        xbp = sorted({x.support_low, *x.breakpoints} | ({x.support_high} if math.isfinite(x.support_high) else set()))
        zbp = sorted({b for b in z.breakpoints if zlo < b < zhi})
        sf_out = np.empty_like(s)
        pdf_out = np.empty_like(s)
        chunk = 256
        for start in range(0, s.size, chunk):
            sc = s[start:start + chunk, None]
            cuts = [np.full_like(sc, zlo), np.full_like(sc, zhi)]
            cuts += [np.full_like(sc, b) for b in zbp]
            cuts += [np.clip(sc - b, zlo, zhi) for b in xbp]
            edges = np.sort(np.concatenate(cuts, axis=1), axis=1)
            a, b = edges[:, :-1], edges[:, 1:]
            # panels x GL nodes within every segment
            t = (np.arange(self.panels)[:, None] + num.GL_NODES[None, :]).ravel() / self.panels
            w = np.tile(num.GL_WEIGHTS, self.panels) / self.panels
            zz = a[..., None] + (b - a)[..., None] * t
            ww = (b - a)[..., None] * w
            fz = _as_array(z.pdf(zz))
            arg = sc[..., None] - zz
            sf_out[start:start + chunk] = np.sum(ww * fz * _as_array(x.sf(arg)), axis=(1, 2))
            pdf_out[start:start + chunk] = np.sum(ww * fz * _as_array(x.pdf(arg)), axis=(1, 2))
        # mass of Z beyond the truncation point: X + Z certainly exceeds s there only if s small;
        # it is below 1e-16 and ignored
        return sf_out, pdf_out

    def _sf(self, x):
        return self._table.sf(x)

    def _pdf(self, x):
        return self._table.pdf(x)

    def _tail(self, x):
        return self._table.tail(x)

    def sample(self, size, rng):
        return self.x.sample(size, rng) + self.z.sample(size, rng)

    @cached_property
    def second_moment(self):
        return self.x.second_moment + 2 * self.x.mean * self.z.mean + self.z.second_moment


class Transformed(Distribution):
    """Distribution of ``g(X)`` for a strictly increasing map ``g``.

    Quantiles are exact (``g`` of the base quantile) and the cdf inverts
    ``g`` by bisection. The tail integral comes from a table of exact
    interval integrals of the survival function at base-quantile knots,
    joined by cubic Hermite interpolation.
    """

    def __init__(self, base: Distribution, fn: Callable, inverse: Callable | None = None,
                 derivative: Callable | None = None, knots: int = DEFAULT_KNOTS,
                 map_spec: dict | None = None):
        self.base, self.fn = base, fn
        self._inverse, self._derivative = inverse, derivative
        probe_p = np.linspace(1e-6, 1 - 1e-6, 257)
        probe_x = np.concatenate([[base.support_low], _as_array(base.quantile(probe_p))])
        probe_y = _as_array(fn(probe_x))
        if np.any(~np.isfinite(probe_y)) or np.any(np.diff(probe_y) <= 0):
            raise ContractViolationError("map is not strictly increasing on the probe grid")
        with np.errstate(over="ignore", invalid="ignore"):
            self.support_low = float(fn(np.asarray(base.support_low)))
            top = float(fn(np.asarray(base.support_high))) if math.isfinite(base.support_high) else math.inf
        if self.support_low < 0:
            raise ParameterDomainError("transformed demand must stay nonnegative")
        self.support_high = top if math.isfinite(top) else math.inf
        self.has_density = base.has_density
        self.breakpoints = tuple(float(fn(np.asarray(b))) for b in base.breakpoints
                                 if math.isfinite(b))
        self.spec = None if base.spec is None or map_spec is None else {
            "kind": "transform", "map": map_spec, "base": base.spec}
        self._build_table(int(knots))

    def _inv(self, y):
        y = _as_array(y)
        if self._inverse is not None:
            return _as_array(self._inverse(y))
        b = self.base
        hi = b.support_high if math.isfinite(b.support_high) else b.upper_cutoff(1e-300)
        ymax = float(self.fn(np.asarray(hi)))
        # inputs beyond the bracket map to the bracket end; survival there is 0 anyway
        x = num.bisect_increasing(lambda u: _as_array(self.fn(u)), np.minimum(y, ymax),
                                  b.support_low, hi)
        return np.where(y > ymax, np.inf, x)

    def _build_table(self, knots: int):
        b = self.base
        n_tail = knots // 4
        p = np.concatenate([
            np.geomspace(1e-12, 0.05, n_tail),
            np.linspace(0.05, 0.95, knots - 2 * n_tail)[1:-1],
            1.0 - np.geomspace(0.05, 1e-12, n_tail),
        ])
        xk = np.unique(np.concatenate([[b.support_low], _as_array(b.quantile(p))]))
        if math.isfinite(b.support_high):
            xk = np.unique(np.concatenate([xk, [b.support_high]]))
        yk = _as_array(self.fn(xk))
        keep = np.concatenate([[True], np.diff(yk) > 0])
        xk, yk = xk[keep], yk[keep]
        sk = _as_array(b.sf(xk))
        # exact interval integrals of S_Y(y) = S_X(g^{-1}(y)) on [y_k, y_{k+1}]
        a, c = yk[:-1], yk[1:]
        nodes = a[:, None] + (c - a)[:, None] * num.GL_NODES[None, :]
        vals = _as_array(b.sf(self._inv(nodes)))
        seg = (c - a) * (vals @ num.GL_WEIGHTS)
        s_end = sk[-1]
        end_tail = 0.0
        if s_end > 0:
            # exponential continuation fitted to the last two knots
            rate = (math.log(sk[-2]) - math.log(s_end)) / (yk[-1] - yk[-2])
            end_tail = s_end / rate if rate > 0 else 0.0
        tk = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) + end_tail
        self._yk, self._tk, self._end_tail = yk, tk, end_tail
        self._tail_spline = CubicHermiteSpline(yk, tk, -sk)

    def _sf(self, y):
        return _as_array(self.base.sf(self._inv(y)))

    def _pdf(self, y):
        x = self._inv(y)
        if self._derivative is not None:
            d = _as_array(self._derivative(x))
        else:
            h = 1e-6 * (1.0 + np.abs(x))
            lo = np.maximum(x - h, self.base.support_low)
            d = (_as_array(self.fn(x + h)) - _as_array(self.fn(lo))) / (x + h - lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(d > 0, _as_array(self.base.pdf(x)) / d, np.inf)

    def _tail(self, y):
        end = self._yk[-1]
        inside = self._tail_spline(np.minimum(y, end))
        s = self._sf(y)
        s_end = float(self.base.sf(self._inv(np.asarray(end))))
        beyond = self._end_tail * np.where(s_end > 0, s / max(s_end, 1e-300), 0.0)
        return np.where(y > end, beyond, inside)

    def quantile(self, p):
        return _ret(p, _as_array(self.fn(_as_array(self.base.quantile(p)))))

    def sample(self, size, rng):
        return _as_array(self.fn(self.base.sample(size, rng)))


# ---------------------------------------------------------------------------
# Public constructors
# ---------------------------------------------------------------------------

def make_family(kind: str, **params: float) -> Distribution:
    """Construct one of the analytic families by name.

    kind: ``exponential(rate)``, ``uniform(a, b)``, ``truncated_normal(mu, sigma)``
    or ``sinusoid(omega, kappa, phi)``.
    """
    try:
        if kind == "exponential":
            return Exponential(params["rate"])
        if kind == "uniform":
            return Uniform(params["a"], params["b"])
        if kind in ("truncated_normal", "normal"):
            return TruncatedNormal(params["mu"], params["sigma"])
        if kind == "sinusoid":
            return Sinusoid(params["omega"], params["kappa"], params["phi"])
    except KeyError as e:
        raise ParameterDomainError(f"{kind} is missing parameter {e.args[0]!r}") from None
    raise ParameterDomainError(f"unknown family {kind!r}")


def shift_scale(base: Distribution, params: ShiftScaleParams | None = None, *,
                delta: float = 0.0, lam: float = 1.0) -> Distribution:
    return ShiftScaled(base, params or ShiftScaleParams(delta, lam))


def mixture(f1: Distribution, f2: Distribution, p: float) -> Distribution:
    return Mixture(f1, f2, p)


def convolve(x: Distribution, z: Distribution, knots: int = DEFAULT_KNOTS) -> Distribution:
    return Convolution(x, z, knots=knots)


def transform_increasing(base: Distribution, fn: Callable, *, inverse=None, derivative=None,
                         knots: int = DEFAULT_KNOTS, map_spec: dict | None = None) -> Distribution:
    return Transformed(base, fn, inverse=inverse, derivative=derivative, knots=knots,
                       map_spec=map_spec)


@dataclass(frozen=True)
class Moments:
    mean: float
    second_moment: float
    variance: float
    cv: float


def moments(d: Distribution) -> Moments:
    """Mean, second moment, variance and coefficient of variation."""
    m = float(d.mean)
    m2 = float(d.second_moment)
    if not (math.isfinite(m) and math.isfinite(m2)):
        raise InfiniteMomentError(f"{d!r} has an infinite moment")
    var = max(m2 - m * m, 0.0)
    return Moments(m, m2, var, math.sqrt(var) / m if m > 0 else math.inf)


# ---------------------------------------------------------------------------
# Named increasing maps (serializable transforms)
# ---------------------------------------------------------------------------

def named_map(spec: dict, pointer: str = "/map"):
    """Resolve a serializable map spec to ``(fn, inverse, derivative)``."""
    if not isinstance(spec, dict) or "name" not in spec:
        raise SpecParseError("map must be an object with a 'name'", pointer)
    name = spec["name"]
    allowed = {"identity": set(), "power": {"k"}, "affine": {"a", "b"}, "exp": set(),
               "square_plus_linear": set()}
    if name not in allowed:
        raise SpecParseError(f"unknown map {name!r}", pointer + "/name")
    extra = set(spec) - {"name"} - allowed[name]
    if extra:
        raise SpecParseError(f"unknown field {sorted(extra)[0]!r}", f"{pointer}/{sorted(extra)[0]}")
    missing = allowed[name] - set(spec)
    if missing:
        raise SpecParseError(f"missing field {sorted(missing)[0]!r}", pointer)
    if name == "identity":
        return (lambda x: _as_array(x) * 1.0), (lambda y: _as_array(y) * 1.0), (lambda x: np.ones_like(_as_array(x)))
    if name == "power":
        k = float(spec["k"])
        if not k > 0:
            raise SpecParseError("power map needs k > 0", pointer + "/k")
        return ((lambda x: np.power(np.maximum(_as_array(x), 0), k)),
                (lambda y: np.power(np.maximum(_as_array(y), 0), 1.0 / k)),
                (lambda x: k * np.power(np.maximum(_as_array(x), 0), k - 1)))
    if name == "affine":
        a, b = float(spec["a"]), float(spec["b"])
        if not b > 0:
            raise SpecParseError("affine map needs b > 0", pointer + "/b")
        return ((lambda x: a + b * _as_array(x)), (lambda y: (_as_array(y) - a) / b),
                (lambda x: np.full_like(_as_array(x), b)))
    if name == "exp":
        # e^x - 1 keeps 0 fixed
        return ((lambda x: np.expm1(_as_array(x))), (lambda y: np.log1p(_as_array(y))),
                (lambda x: np.exp(_as_array(x))))
    # x^2 + x
    return ((lambda x: _as_array(x) ** 2 + _as_array(x)),
            (lambda y: (-1 + np.sqrt(1 + 4 * np.maximum(_as_array(y), 0))) / 2),
            (lambda x: 2 * _as_array(x) + 1))


# ---------------------------------------------------------------------------
# Declarative JSON specs
# ---------------------------------------------------------------------------

_FIELDS: dict[str, tuple[set[str], set[str]]] = {
    # kind: (required, optional)
    "exponential": ({"rate"}, set()),
    "uniform": ({"a", "b"}, set()),
    "truncated_normal": ({"mu", "sigma"}, set()),
    "sinusoid": ({"omega", "kappa", "phi"}, set()),
    "scale": ({"c", "base"}, set()),
    "shift_scale": ({"base"}, {"delta", "lambda"}),
    "mixture": ({"p", "first", "second"}, set()),
    "convolve": ({"x", "z"}, {"knots"}),
    "transform": ({"map", "base"}, {"knots"}),
    "cdf_table": ({"x", "cdf"}, set()),
}


def _number(value: Any, pointer: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecParseError(f"expected a number, got {json.dumps(value)}", pointer)
    return float(value)


def from_spec(spec: Any, pointer: str = "") -> Distribution:
    """Build a distribution from its declarative JSON form (dict or JSON text)."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as e:
            raise SpecParseError(f"invalid JSON: {e.msg} at char {e.pos}", pointer) from None
    if not isinstance(spec, dict):
        raise SpecParseError("distribution spec must be a JSON object", pointer)
    kind = spec.get("kind")
    if kind == "normal":
        kind = "truncated_normal"
    if kind not in _FIELDS:
        raise SpecParseError(f"unknown kind {kind!r}", pointer + "/kind")
    required, optional = _FIELDS[kind]
    for key in spec:
        if key != "kind" and key not in required | optional:
            raise SpecParseError(f"unknown field {key!r} for kind {kind!r}", f"{pointer}/{key}")
    for key in sorted(required):
        if key not in spec:
            raise SpecParseError(f"missing field {key!r} for kind {kind!r}", pointer)

    def n(key):
        return _number(spec[key], f"{pointer}/{key}")

    def wrap(fn, key):
        try:
            return fn()
        except ParameterDomainError as e:
            raise SpecParseError(str(e), f"{pointer}/{key}" if key else pointer) from None

    if kind == "exponential":
        return wrap(lambda: Exponential(n("rate")), "rate")
    if kind == "uniform":
        return wrap(lambda: Uniform(n("a"), n("b")), "")
    if kind == "truncated_normal":
        return wrap(lambda: TruncatedNormal(n("mu"), n("sigma")), "sigma")
    if kind == "sinusoid":
        return wrap(lambda: Sinusoid(n("omega"), n("kappa"), n("phi")), "")
    if kind == "scale":
        base = from_spec(spec["base"], pointer + "/base")
        return wrap(lambda: ShiftScaled(base, ShiftScaleParams(0.0, n("c"))), "c")
    if kind == "shift_scale":
        base = from_spec(spec["base"], pointer + "/base")
        delta = n("delta") if "delta" in spec else 0.0
        lam = n("lambda") if "lambda" in spec else 1.0
        return wrap(lambda: ShiftScaled(base, ShiftScaleParams(delta, lam)), "")
    if kind == "mixture":
        a = from_spec(spec["first"], pointer + "/first")
        b = from_spec(spec["second"], pointer + "/second")
        return wrap(lambda: Mixture(a, b, n("p")), "p")
    if kind == "convolve":
        a = from_spec(spec["x"], pointer + "/x")
        b = from_spec(spec["z"], pointer + "/z")
        knots = int(n("knots")) if "knots" in spec else DEFAULT_KNOTS
        return wrap(lambda: Convolution(a, b, knots=knots), "")
    if kind == "transform":
        base = from_spec(spec["base"], pointer + "/base")
        fn, inv, der = named_map(spec["map"], pointer + "/map")
        knots = int(n("knots")) if "knots" in spec else DEFAULT_KNOTS
        return wrap(lambda: Transformed(base, fn, inverse=inv, derivative=der, knots=knots,
                                        map_spec=dict(spec["map"])), "map")
    return wrap(lambda: CdfTable(spec["x"], spec["cdf"]), "")
