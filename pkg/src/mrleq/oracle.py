"""Brute-force verification of the equilibrium.

Nothing here uses the mean residual life or the closed-form tail integrals:
the supplier's expected profit is integrated directly from the survival
function, optimal prices are found by grid search, the second-stage Cournot
profile is audited by unilateral deviations, and profits are re-estimated by
Monte Carlo.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _numerics as num
from .distributions import Distribution
from .errors import DegenerateInputError, DomainError

DEVIATION_TOL = 1e-9


def _panel_integral(d: Distribution, fn, a: float, b: float) -> float:
    """Integrate ``fn`` on [a, b] with 8-point Gauss-Legendre panels aligned to knots.

    Used for tabulated distributions, whose survival is piecewise cubic
    between knots (so every panel is integrated exactly).
    """
    k = d.knots
    inner = k[(k > a) & (k < b)]
    edges = np.unique(np.concatenate([[a], inner, np.linspace(a, b, 257), [b]]))
    lo, hi = edges[:-1], edges[1:]
    nodes = lo[:, None] + (hi - lo)[:, None] * num.GL_NODES[None, :]
    return float(np.sum((hi - lo) * (fn(nodes) @ num.GL_WEIGHTS)))


def _integrate_sf_weighted(d: Distribution, weight, a: float) -> float:
    """``int_a^inf weight(u) sf(u) du`` for ``a >= support_low``."""
    if d.knots is None:
        f = lambda u: weight(u) * float(d.sf(u))  # noqa: E731
        return num.integrate_tail(f, a, lambda u: float(d.sf(u)), points=d.breakpoints,
                                  upper=d.support_high)
    b = d.support_high if math.isfinite(d.support_high) else \
        num.doubling_cutoff(lambda u: float(d.sf(u)), max(float(d.knots[-1]), a, 1.0), 1e-16)
    return _panel_integral(d, lambda u: weight(u) * np.asarray(d.sf(u), dtype=float), a, b)


def _expected_excess(d: Distribution, r: float) -> float:
    """``E[(alpha - r)^+]`` by direct quadrature of the survival function."""
    head = max(d.support_low - r, 0.0)  # survival is 1 below the support
    a = max(r, 0.0, d.support_low)
    return head + _integrate_sf_weighted(d, lambda u: 1.0, a)


def _expected_excess_sq(d: Distribution, r: float) -> float:
    """``E[((alpha - r)^+)^2] = 2 int_r^inf (u - r) sf(u) du``."""
    lo = max(r, 0.0)
    a = max(lo, d.support_low)
    head = (a - lo) ** 2  # 2 int_lo^a (u - lo) du with sf = 1
    return head + 2.0 * _integrate_sf_weighted(d, lambda u: u - lo, a)


def expected_supplier_profit(d: Distribution, n: int, r: float) -> float:
    """``r * n/(n+1) * E[(alpha - r)^+]`` integrated directly from the survival."""
    if r < 0:
        raise DomainError("price must be nonnegative")
    if r == 0 or r >= d.support_high:
        return 0.0
    return r * n / (n + 1) * _expected_excess(d, r)


def _excess_curve(d: Distribution, grid: np.ndarray) -> np.ndarray:
    """``E[(alpha - r)^+]`` on an increasing grid via Gauss-Legendre panels.

    Each grid interval is split at the distribution's kinks and integrated
    with an 8-point rule; the tail beyond the grid uses adaptive quadrature.
    """
    edges = np.unique(np.concatenate([grid, [b for b in d.breakpoints
                                             if grid[0] < b < grid[-1]]]))
    a, b = edges[:-1], edges[1:]
    nodes = a[:, None] + (b - a)[:, None] * num.GL_NODES[None, :]
    pieces = (b - a) * (np.asarray(d.sf(nodes), dtype=float) @ num.GL_WEIGHTS)
    right = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
    right += _expected_excess(d, float(edges[-1]))
    return np.interp(grid, edges, right)  # grid points are edges, so this is a lookup


@dataclass
class OracleReport:
    r_hat: float
    grid_step: float
    n: int
    r_grid: np.ndarray = field(repr=False)
    expected_profit: np.ndarray = field(repr=False)
    mc_estimates: dict | None = None
    deviation_max: float | None = None

    def to_dict(self, include_curve: bool = False) -> dict:
        out = {"r_hat": self.r_hat, "grid_step": self.grid_step, "n": self.n,
               "grid_points": int(self.r_grid.size), "mc_estimates": self.mc_estimates,
               "deviation_max": self.deviation_max}
        if include_curve:
            out["profit_curve"] = {"r": self.r_grid.tolist(),
                                   "expected_profit": self.expected_profit.tolist()}
        return out

    def curve_csv(self) -> str:
        lines = ["r,expected_profit"]
        lines += [f"{r:.17g},{p:.17g}" for r, p in zip(self.r_grid, self.expected_profit)]
        return "\n".join(lines) + "\n"


def default_price_grid(d: Distribution, points: int = 4000) -> np.ndarray:
    hi = float(d.quantile(1 - 1e-8))
    return np.linspace(0.0, hi, points + 1)[1:]


def argmax_grid(d: Distribution, n: int = 1, r_grid=None) -> tuple[float, OracleReport]:
    """Grid maximizer of the supplier's expected profit.

    The maximization runs on ``r E[(alpha - r)^+]``; the ``n/(n+1)`` factor
    only rescales the reported curve, so the maximizer does not depend on n.
    """
    grid = default_price_grid(d) if r_grid is None else np.asarray(r_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0) or grid[0] < 0:
        raise DomainError("price grid must be increasing and nonnegative")
    revenue = grid * _excess_curve(d, grid)
    if np.ptp(revenue) <= 1e-14:
        raise DegenerateInputError("expected profit is flat across the grid")
    i = int(np.argmax(revenue))
    step = float(np.max(np.diff(grid)))
    report = OracleReport(float(grid[i]), step, n, grid, revenue * n / (n + 1))
    return float(grid[i]), report


def _retailer_profit(q_i, others, alpha, r):
    return q_i * np.maximum(alpha - q_i - others, 0.0) - r * q_i


def cournot_deviation_check(alpha: float, r: float, n: int, q_grid=None) -> float:
    """Largest gain from a unilateral deviation against the symmetric Cournot profile.

    Opponents play ``(alpha - r)^+ / (n + 1)``; the deviator tries every
    quantity on ``q_grid`` (default 20001 points on ``[0, alpha]``).
    """
    if alpha < 0 or r < 0 or n < 1:
        raise DomainError("need alpha, r >= 0 and n >= 1")
    candidate = max(alpha - r, 0.0) / (n + 1)
    others = (n - 1) * candidate
    grid = np.linspace(0.0, max(alpha, 1e-12), 20001) if q_grid is None else np.asarray(q_grid, dtype=float)
    base = _retailer_profit(candidate, others, alpha, r)
    return float(np.max(_retailer_profit(grid, others, alpha, r)) - base)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MRLEQ_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class MCEstimate:
    mean: float
    stderr: float
    quadrature: float | None = None

    def within(self, k: float = 4.0) -> bool:
        if self.quadrature is None:
            return True
        if self.stderr == 0:
            return abs(self.mean - self.quadrature) <= 1e-12
        return abs(self.mean - self.quadrature) <= k * self.stderr


def _chunk_sums(d, r, n, size, seed_seq):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    a = d.sample(size, rng)
    ex = np.maximum(a - r, 0.0)
    vals = np.stack([n / (n + 1) * ex * r, (ex / (n + 1)) ** 2, r * ex,
                     n / (n + 1) * ex * r + n * (ex / (n + 1)) ** 2])
    return vals.sum(axis=1), (vals ** 2).sum(axis=1)


def monte_carlo_profits(d: Distribution, r_star: float, n: int, samples: int = 1_000_000,
                        seed: int = 12345, chunks: int = 16) -> dict:
    """Sample demand, evaluate realized profits, and compare with quadrature.

    Chunks use seeds spawned from ``seed`` and are merged by chunk index, so
    the result does not depend on ``MRLEQ_THREADS``.
    """
    if samples < 10_000:
        raise DomainError("Monte Carlo needs at least 1e4 samples")
    sizes = [samples // chunks + (1 if i < samples % chunks else 0) for i in range(chunks)]
    seqs = np.random.SeedSequence(seed).spawn(chunks)
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        parts = list(pool.map(lambda a: _chunk_sums(d, r_star, n, *a), zip(sizes, seqs)))
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / samples
    var = np.maximum(s2 / samples - mean ** 2, 0.0) * samples / (samples - 1)
    se = np.sqrt(var / samples)
    ex1 = _expected_excess(d, r_star) if r_star < d.support_high else 0.0
    ex2 = _expected_excess_sq(d, r_star) if r_star < d.support_high else 0.0
    quad = [n / (n + 1) * r_star * ex1, ex2 / (n + 1) ** 2, r_star * ex1,
            n / (n + 1) * r_star * ex1 + n * ex2 / (n + 1) ** 2]
    names = ["profit_supplier", "profit_retailer_each", "profit_integrated",
             "profit_decentralized_total"]
    est = {k: MCEstimate(float(mean[i]), float(se[i]), float(quad[i])) for i, k in enumerate(names)}
    return {"samples": samples, "seed": seed, "chunks": chunks,
            "estimates": {k: asdict(v) for k, v in est.items()},
            "within_4se": all(v.within(4.0) for v in est.values())}


def objective_identity_gap(d: Distribution, n: int, r: float) -> float:
    """Relative gap between the quadrature objective and ``n/(n+1) r T(r)``."""
    a = expected_supplier_profit(d, n, r)
    b = n / (n + 1) * r * float(d.tail_integral(r))
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def lattice_audit(alphas=(0.5, 1.0, 2.0), prices=(0.1, 0.3, 0.8), ns=(1, 3, 10),
                  q_points: int = 20001) -> dict:
    """Deviation audit over a lattice of (alpha, r, n); returns the worst gain."""
    worst = -math.inf
    where = None
    for a in alphas:
        for r in prices:
            for n in ns:
                g = cournot_deviation_check(a, r, n, np.linspace(0.0, a, q_points))
                if g > worst:
                    worst, where = g, {"alpha": a, "r": r, "n": n}
    return {"deviation_max": worst, "at": where, "q_points": q_points}
