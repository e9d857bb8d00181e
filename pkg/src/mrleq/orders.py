"""Grid certificates for the st, hr, mrl, cx, disp and ew stochastic orders.

Every check evaluates the defining inequality in both directions, so one
verdict answers "X1 <= X2?", "X2 <= X1?" and, when neither holds, carries a
witness for each failed direction. Violations smaller than the tolerance
count as equality; the largest violation is kept for auditing.

Hazard-rate convention: ``X1 <=hr X2`` iff ``h1(r) >= h2(r)`` for all r
(equivalently ``sf2 / sf1`` nondecreasing), which is the convention under
which hr implies mrl.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution
from .errors import UnsupportedInputError
from .reliability import NearSupportEndWarning, mrl

ORDERS = ("st", "hr", "mrl", "cx", "disp", "ew")
TOLERANCES = {"st": 1e-9, "hr": 1e-9, "mrl": 1e-7, "cx": 1e-9, "disp": 1e-9, "ew": 1e-9}
MIN_SURVIVAL = 1e-14


@dataclass
class OrderVerdict:
    order: str
    forward: bool | None  # X1 <= X2
    backward: bool | None  # X2 <= X1
    witness_forward: dict | None = None
    witness_backward: dict | None = None
    max_violation_forward: float = 0.0
    max_violation_backward: float = 0.0
    tolerance: float = 0.0
    grid: dict = field(default_factory=dict)
    reason: str = ""

    @property
    def direction(self) -> str:
        if self.forward is None:
            return "inapplicable"
        if self.forward and self.backward:
            return "both"
        if self.forward:
            return "X1<=X2"
        if self.backward:
            return "X2<=X1"
        return "neither"

    @property
    def holds(self) -> bool:
        """Whether ``X1 <= X2`` was certified."""
        return bool(self.forward)

    @property
    def witness(self) -> dict | None:
        return self.witness_forward if not self.forward else self.witness_backward

    def to_dict(self) -> dict:
        return {
            "order": self.order, "direction": self.direction, "holds": self.holds,
            "witness": self.witness,
            "witnesses": {"forward": self.witness_forward, "backward": self.witness_backward},
            "max_violation": {"forward": self.max_violation_forward,
                              "backward": self.max_violation_backward},
            "tolerance": self.tolerance, "grid": self.grid, "reason": self.reason,
        }


def common_grid(x1: Distribution, x2: Distribution, points: int = 2000,
                include_zero: bool = False) -> np.ndarray:
    """Linear and log-spaced points covering both (1e-6, 1-1e-6) quantile ranges."""
    lo = min(float(x1.quantile(1e-6)), float(x2.quantile(1e-6)))
    hi = max(float(x1.quantile(1 - 1e-6)), float(x2.quantile(1 - 1e-6)))
    lin = np.linspace(lo, hi, points)
    log = np.geomspace(max(lo, hi * 1e-9, 1e-12), hi, points)
    parts = [lin, log] + ([np.array([0.0])] if include_zero else [])
    return np.unique(np.concatenate(parts))


def _grid_info(grid) -> dict:
    return {"points": int(np.size(grid)), "low": float(np.min(grid)), "high": float(np.max(grid))}


def _one_way(lhs, rhs, tol, coords: dict):
    """Check lhs <= rhs (+ relative tolerance); return (ok, witness, max_violation)."""
    scale = np.maximum(1.0, np.abs(np.where(np.isfinite(rhs), rhs, 1.0)))
    with np.errstate(invalid="ignore"):
        excess = np.where(np.isnan(lhs) | np.isnan(rhs), -np.inf, lhs - rhs)
    excess = np.where(np.isposinf(lhs) & np.isposinf(rhs), -np.inf, excess)
    if excess.size == 0:
        return True, None, 0.0
    flat = int(np.argmax(excess - tol * scale))
    idx = np.unravel_index(flat, excess.shape)
    worst = float(excess[idx])
    ok = bool(worst - tol * float(scale[idx]) <= 0)
    witness = None
    if not ok:
        witness = {k: float(v[idx]) for k, v in coords.items()}
        witness.update(lhs=float(lhs[idx]), rhs=float(rhs[idx]))
    return ok, witness, max(worst, 0.0) if math.isfinite(worst) else math.inf


def _both_ways(order, v1, v2, coords, tol, grid_info, reason="") -> OrderVerdict:
    f_ok, f_w, f_max = _one_way(v1, v2, tol, coords)
    b_ok, b_w, b_max = _one_way(v2, v1, tol, coords)
    return OrderVerdict(order, f_ok, b_ok, f_w, b_w, f_max, b_max, tol, grid_info, reason)


def check_st(x1: Distribution, x2: Distribution, grid=None, tol: float = TOLERANCES["st"]) -> OrderVerdict:
    """Usual stochastic order: ``sf1(r) <= sf2(r)`` for all r."""
    grid = common_grid(x1, x2) if grid is None else np.asarray(grid, dtype=float)
    s1 = np.asarray(x1.sf(grid), dtype=float)
    s2 = np.asarray(x2.sf(grid), dtype=float)
    return _both_ways("st", s1, s2, {"r": grid}, tol, _grid_info(grid))


def _hazard_on(d: Distribution, grid, s):
    h = np.asarray(d.hazard(grid), dtype=float)
    return np.where(s > 0, h, np.inf)


def check_hr(x1: Distribution, x2: Distribution, grid=None, tol: float = TOLERANCES["hr"],
             allow_fallback: bool = True) -> OrderVerdict:
    """Hazard-rate order ``X1 <=hr X2``: ``h1 >= h2`` wherever defined.

    The density-free characterization (``sf2/sf1`` nondecreasing) is always
    evaluated too and stored under ``grid["ratio_test"]``; it becomes the
    verdict when either input lacks a density (or raises
    ``UnsupportedInputError`` with ``allow_fallback=False``).
    """
    grid = common_grid(x1, x2) if grid is None else np.asarray(grid, dtype=float)
    s1 = np.asarray(x1.sf(grid), dtype=float)
    s2 = np.asarray(x2.sf(grid), dtype=float)
    live = (s1 > MIN_SURVIVAL) | (s2 > MIN_SURVIVAL)
    g, s1, s2 = grid[live], s1[live], s2[live]
    ratio = _ratio_test(g, s1, s2, tol)
    info = _grid_info(g)
    info["ratio_test"] = {"forward": ratio.forward, "backward": ratio.backward}
    if not (x1.has_density and x2.has_density):
        if not allow_fallback:
            raise UnsupportedInputError("hazard-rate order needs densities for both inputs")
        ratio.grid = info
        ratio.reason = "density absent; survival-ratio characterization used"
        return ratio
    h1 = _hazard_on(x1, g, s1)
    h2 = _hazard_on(x2, g, s2)
    # X1 <=hr X2  <=>  h2 <= h1
    f_ok, f_w, f_max = _one_way(h2, h1, tol, {"r": g})
    b_ok, b_w, b_max = _one_way(h1, h2, tol, {"r": g})
    return OrderVerdict("hr", f_ok, b_ok, f_w, b_w, f_max, b_max, tol, info)


def _ratio_test(g, s1, s2, tol) -> OrderVerdict:
    def nondecreasing(num, den):
        ok = den > MIN_SURVIVAL
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = num[ok] / den[ok]
        gg = g[ok]
        if ratio.size < 2:
            return True, None, 0.0
        drop = ratio[:-1] - ratio[1:]
        scale = np.maximum(1.0, np.abs(ratio[:-1]))
        i = int(np.argmax(drop - tol * scale))
        if drop[i] - tol * scale[i] > 0:
            return False, {"r": float(gg[i]), "r_next": float(gg[i + 1]), "lhs": float(ratio[i]),
                           "rhs": float(ratio[i + 1])}, float(drop[i])
        return True, None, max(float(drop[i]), 0.0)

    f = nondecreasing(s2, s1)
    b = nondecreasing(s1, s2)
    return OrderVerdict("hr", f[0], b[0], f[1], b[1], f[2], b[2], tol, {})


def check_mrl(x1: Distribution, x2: Distribution, grid=None, tol: float = TOLERANCES["mrl"]) -> OrderVerdict:
    """Mean residual life order: ``m1(r) <= m2(r)`` for all r."""
    grid = common_grid(x1, x2) if grid is None else np.asarray(grid, dtype=float)
    grid = grid[grid >= 0]
    s1 = np.asarray(x1.sf(grid), dtype=float)
    s2 = np.asarray(x2.sf(grid), dtype=float)
    # points where either MRL is indeterminate (survival underflow) are dropped
    ok = ((s1 > MIN_SURVIVAL) | (grid >= x1.support_high)) & ((s2 > MIN_SURVIVAL) | (grid >= x2.support_high))
    g = grid[ok]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearSupportEndWarning)
        m1 = np.asarray(mrl(x1, g), dtype=float)
        m2 = np.asarray(mrl(x2, g), dtype=float)
    return _both_ways("mrl", m1, m2, {"r": g}, tol, _grid_info(g))


def check_cx(x1: Distribution, x2: Distribution, grid=None, tol: float = TOLERANCES["cx"]) -> OrderVerdict:
    """Convex order: equal means and ``T1(r) <= T2(r)`` for all r >= 0.

    Unequal means make the order inapplicable rather than failed.
    """
    mu1, mu2 = float(x1.mean), float(x2.mean)
    if abs(mu1 - mu2) >= 1e-6 * (1 + abs(mu1)):
        return OrderVerdict("cx", None, None, tolerance=tol,
                            reason=f"means differ ({mu1:.10g} vs {mu2:.10g})")
    grid = common_grid(x1, x2, include_zero=True) if grid is None else np.asarray(grid, dtype=float)
    t1 = np.asarray(x1.tail_integral(grid), dtype=float)
    t2 = np.asarray(x2.tail_integral(grid), dtype=float)
    return _both_ways("cx", t1, t2, {"r": grid}, tol, _grid_info(grid))


def check_disp(x1: Distribution, x2: Distribution, probe=None, points: int = 200,
               tol: float = TOLERANCES["disp"]) -> OrderVerdict:
    """Dispersive order: quantile spreads ``Q1(v) - Q1(u) <= Q2(v) - Q2(u)`` for u <= v."""
    p = np.linspace(0.001, 0.999, points) if probe is None else np.asarray(probe, dtype=float)
    q1 = np.asarray(x1.quantile(p), dtype=float)
    q2 = np.asarray(x2.quantile(p), dtype=float)
    d1 = q1[None, :] - q1[:, None]
    d2 = q2[None, :] - q2[:, None]
    upper = np.triu(np.ones_like(d1, dtype=bool), k=1)
    d1 = np.where(upper, d1, np.nan)
    d2 = np.where(upper, d2, np.nan)
    u = np.broadcast_to(p[:, None], d1.shape)
    v = np.broadcast_to(p[None, :], d1.shape)
    info = {"points": int(p.size), "low": float(p[0]), "high": float(p[-1]), "lattice": "triangular"}
    return _both_ways("disp", d1, d2, {"u": u, "v": v}, tol, info)


def check_ew(x1: Distribution, x2: Distribution, probe=None, points: int = 500,
             tol: float = TOLERANCES["ew"]) -> OrderVerdict:
    """Excess wealth order: ``T1(Q1(p)) <= T2(Q2(p))`` for all p in (0, 1)."""
    p = np.linspace(0.001, 0.999, points) if probe is None else np.asarray(probe, dtype=float)
    w1 = np.asarray(x1.tail_integral(x1.quantile(p)), dtype=float)
    w2 = np.asarray(x2.tail_integral(x2.quantile(p)), dtype=float)
    info = {"points": int(p.size), "low": float(p[0]), "high": float(p[-1])}
    return _both_ways("ew", w1, w2, {"p": p}, tol, info)


CHECKS = {"st": check_st, "hr": check_hr, "mrl": check_mrl, "cx": check_cx,
          "disp": check_disp, "ew": check_ew}


def check_order(order: str, x1: Distribution, x2: Distribution, **kwargs) -> OrderVerdict:
    if order not in CHECKS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")
    return CHECKS[order](x1, x2, **kwargs)


def witness_reproduces(verdict: OrderVerdict, x1: Distribution, x2: Distribution,
                       direction: str = "forward") -> bool:
    """Re-evaluate a stored witness and confirm it still violates beyond tolerance."""
    w = verdict.witness_forward if direction == "forward" else verdict.witness_backward
    if w is None:
        return False
    a, b = (x1, x2) if direction == "forward" else (x2, x1)
    o, tol = verdict.order, verdict.tolerance
    if o == "st":
        lhs, rhs = a.sf(w["r"]), b.sf(w["r"])
    elif o == "mrl":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearSupportEndWarning)
            lhs, rhs = mrl(a, w["r"]), mrl(b, w["r"])
    elif o == "cx":
        lhs, rhs = a.tail_integral(w["r"]), b.tail_integral(w["r"])
    elif o == "hr":
        if "r_next" in w:
            r0, r1 = w["r"], w["r_next"]
            lhs, rhs = b.sf(r0) / a.sf(r0), b.sf(r1) / a.sf(r1)
            return float(lhs) - float(rhs) > tol * max(1.0, abs(float(lhs)))
        lhs, rhs = b.hazard(w["r"]), a.hazard(w["r"])
    elif o == "disp":
        lhs = a.quantile(w["v"]) - a.quantile(w["u"])
        rhs = b.quantile(w["v"]) - b.quantile(w["u"])
    else:
        lhs = a.tail_integral(a.quantile(w["p"]))
        rhs = b.tail_integral(b.quantile(w["p"]))
    lhs, rhs = float(lhs), float(rhs)
    return lhs - rhs > tol * max(1.0, abs(rhs))
