"""Supplier equilibrium price, market fundamentals and efficiency.

The supplier's optimal wholesale price is a fixed point of the demand's
mean residual life, ``r* = m(r*)``. Under a (strictly) DGMRL demand with a
finite second moment it is unique and is found by bisection on
``psi(r) = m(r) - r``; otherwise every sign change of ``psi`` on a dense
grid is reported.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .distributions import Distribution, moments
from .errors import (
    ConvergenceError,
    DomainError,
    InconsistencyError,
    NoFixedPointError,
    NoTransactionError,
    ParameterDomainError,
)
from .reliability import NearSupportEndWarning, check_property, mrl

DEFAULT_TOL = 1e-9
MAX_ITER = 200
SCAN_POINTS = 20000


@dataclass(frozen=True)
class MarketConfig:
    n: int
    demand: Distribution

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterDomainError(f"number of retailers must be a positive integer, got {self.n}")


@dataclass
class EquilibriumResult:
    r_star: float
    residual: float
    bracket: tuple[float, float]
    all_fixed_points: list[float]
    dgmrl_certified: bool
    iterations: int = 0
    method: str = "bisection"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bracket"] = list(self.bracket)
        return out


@dataclass
class MarketOutcome:
    alpha: float
    r_star: float
    n: int
    q_star: float
    p_star: float
    profit_supplier: float
    profit_retailer_each: float
    profit_integrated: float
    profit_decentralized_total: float
    ratio: float | None
    efficiency: float | None
    transaction: bool = field(default=True)

    def to_dict(self) -> dict:
        return asdict(self)


def _psi(d: Distribution, r: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearSupportEndWarning)
        return float(mrl(d, r)) - r


def _lower_bracket(d: Distribution) -> float:
    # psi(0) = E[alpha] > 0 always; prefer a point just inside the support
    r_lo = float(d.quantile(1e-9))
    if _psi(d, r_lo) > 0:
        return r_lo
    return 0.0


def _upper_bracket(d: Distribution, start: float) -> float:
    r = max(start, 1e-12)
    limit = d.upper_cutoff(1e-10) * 2.0
    while r <= limit:
        if _psi(d, r) < 0:
            return r
        r *= 2.0
    raise NoFixedPointError("m(r) - r stays positive up to the 1-1e-10 quantile")


def _bisect(d: Distribution, lo: float, hi: float, tol: float, max_iter: int):
    it = 0
    mid = 0.5 * (lo + hi)
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        val = _psi(d, mid)
        if val > 0:
            lo = mid
        else:
            hi = mid
        if abs(val) < 0.5 * tol * (1 + mid) and hi - lo < tol * (1 + mid):
            break
        if mid in (lo, hi) and hi - lo <= 2 * np.spacing(mid):
            break
    return mid, (lo, hi), it


def fixed_point_scan(d: Distribution, points: int = SCAN_POINTS) -> list[tuple[float, float]]:
    """Brackets ``(a, b)`` around every sign change of ``m(r) - r``."""
    lo = 0.0
    hi = float(d.quantile(1 - 1e-10))
    grid = np.linspace(lo, hi, points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearSupportEndWarning)
        psi = np.asarray(mrl(d, grid), dtype=float) - grid
    psi = np.where(np.isfinite(psi), psi, -grid)
    sign = np.sign(psi)
    idx = np.flatnonzero((sign[:-1] > 0) & (sign[1:] <= 0) | (sign[:-1] < 0) & (sign[1:] >= 0))
    return [(float(grid[i]), float(grid[i + 1])) for i in idx]


def solve_wholesale_price(cfg: MarketConfig | Distribution, tol: float = DEFAULT_TOL,
                          max_iter: int = MAX_ITER, grid_spec=None,
                          certify: bool = True) -> EquilibriumResult:
    """Solve ``r* = m(r*)`` for the supplier's optimal wholesale price.

    The demand is first checked for a strict DGMRL certificate. Certified
    inputs get a single bisection root with ``|r* - m(r*)| < tol (1 + r*)``.
    Uncertified inputs get every fixed point on a dense scan; ``r_star`` is
    then the one with the largest expected revenue ``r E[(alpha - r)^+]``.
    """
    d = cfg.demand if isinstance(cfg, MarketConfig) else cfg
    moments(d)  # raises InfiniteMomentError on a divergent second moment
    certified = False
    if certify:
        certified = check_property(d, "DGMRL", grid_spec, "strict").certified

    if certified:
        lo = _lower_bracket(d)
        hi = _upper_bracket(d, max(d.mean, lo * 2, 1e-9))
        r, bracket, iters = _bisect(d, lo, hi, tol, max_iter)
        residual = abs(_psi(d, r))
        if residual >= tol * (1 + r):
            raise ConvergenceError(f"bisection stopped at residual {residual:.3g} after {iters} steps")
        # the scan is only a consistency check of uniqueness
        roots = [r]
        return EquilibriumResult(r, residual, bracket, roots, True, iters, "bisection")

    brackets = fixed_point_scan(d)
    if not brackets:
        raise NoFixedPointError("no sign change of m(r) - r below the 1-1e-10 quantile")
    roots = []
    for a, b in brackets:
        if _psi(d, a) == 0.0:
            roots.append(a)
            continue
        roots.append(float(optimize.brentq(lambda x: _psi(d, x), a, b, xtol=1e-15, rtol=1e-15,
                                           maxiter=max_iter)))
    roots = sorted(set(roots))
    revenue = [r * float(d.tail_integral(r)) for r in roots]
    best = roots[int(np.argmax(revenue))]
    residual = abs(_psi(d, best))
    i = roots.index(best)
    return EquilibriumResult(best, residual, brackets[min(i, len(brackets) - 1)], roots, False,
                             0, "scan")


def check_uniqueness(result: EquilibriumResult, d: Distribution) -> list[float]:
    """Scan for all fixed points and fail if a certified solve is not unique."""
    roots = [0.5 * (a + b) for a, b in fixed_point_scan(d)]
    if result.dgmrl_certified and len(roots) > 1:
        raise InconsistencyError(f"DGMRL-certified demand has {len(roots)} fixed points")
    return roots


def fundamentals(r_star: float, alpha: float, n: int) -> MarketOutcome:
    """Realized equilibrium quantities and profits for demand level ``alpha``."""
    if r_star < 0 or alpha < 0 or n < 1:
        raise ParameterDomainError("need r_star >= 0, alpha >= 0 and n >= 1")
    excess = max(alpha - r_star, 0.0)
    q = n / (n + 1) * excess
    p = alpha - q
    ps = n / (n + 1) * excess * r_star
    pi = (excess / (n + 1)) ** 2
    pI = r_star * excess
    pD = ps + n * pi
    transaction = alpha > r_star
    ratio = n * pi / ps if ps > 0 else None
    efficiency = None
    if transaction:
        efficiency = 0.0 if r_star == 0 else (n + 1) ** 2 / n / (n + alpha / r_star)
    return MarketOutcome(alpha, r_star, n, q, p, ps, pi, pI, pD, ratio, efficiency, transaction)


def profit_ratio(alpha: float, r_star: float, n: int) -> float:
    """Retailers' total realized profit over the supplier's."""
    if not alpha > r_star:
        raise NoTransactionError(f"alpha={alpha} does not exceed r*={r_star}: no transaction")
    if not r_star > 0:
        raise ParameterDomainError("profit ratio needs r* > 0")
    return (alpha / r_star - 1.0) / (n + 1)


def realized_efficiency(alpha: float, r_star: float, n: int) -> float:
    """Integrated over decentralized realized profit, for ``alpha > r* > 0``."""
    if not alpha > r_star > 0:
        raise NoTransactionError("efficiency is defined only for alpha > r* > 0")
    return (n + 1) ** 2 / n / (n + alpha / r_star)


def integrated_expected_profit(d: Distribution, r: float):
    """Expected profit ``r E[(alpha - r)^+] = r m(r) sf(r)`` of an integrated chain."""
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0):
        raise DomainError("price must be nonnegative")
    out = ra * np.asarray(d.tail_integral(ra), dtype=float)
    return float(out) if out.ndim == 0 else out


def poa(n: int) -> float:
    """Price of anarchy ``1 + 1/n`` over DGMRL demand."""
    if int(n) != n or n < 1:
        raise ParameterDomainError("n must be a positive integer")
    return 1 + 1 / n


def empirical_poa(cfg: MarketConfig, alpha_grid, r_star: float | None = None) -> float:
    """Worst realized efficiency over an alpha grid (points <= r* are ignored)."""
    if r_star is None:
        r_star = solve_wholesale_price(cfg).r_star
    alphas = np.asarray(alpha_grid, dtype=float)
    alphas = alphas[alphas > r_star]
    if alphas.size == 0 or not r_star > 0:
        raise DomainError("alpha grid has no point above r*")
    n = cfg.n
    return float(np.max((n + 1) ** 2 / n / (n + alphas / r_star)))


def approach_grid(r_star: float, points: int = 200, closest: float = 1e-6,
                  farthest: float = 10.0) -> np.ndarray:
    """Alpha values ``r* (1 + t)`` with t log-spaced in [closest, farthest]."""
    return r_star * (1.0 + np.geomspace(closest, farthest, points))


