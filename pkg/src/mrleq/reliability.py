"""Mean residual life, generalized MRL, hazard and generalized failure rate.

Also grid certificates for the DMRL, DGMRL, IFR and IGFR classes. A
certificate says "no monotonicity violation beyond tolerance was found at
these grid points"; it is falsifiable evidence, not a proof.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .distributions import Distribution
from .errors import DomainError

NEAR_END_SURVIVAL = 1e-14
DEFAULT_GRID_POINTS = 2000
MONOTONE_TOL = 1e-9
STRICT_STEP = 1e-12

PROPERTIES = ("DMRL", "DGMRL", "IFR", "IGFR")


class NearSupportEndWarning(RuntimeWarning):
    pass


def mrl(d: Distribution, r):
    """Mean residual life ``E[X - r | X > r]``, with ``m(r) = 0`` for ``r >= alpha_H``.

    Where the survival is below 1e-14 the value is reported as NaN
    (indeterminate) and a ``NearSupportEndWarning`` is issued.
    """
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0):
        raise DomainError("mean residual life needs r >= 0")
    s = np.asarray(d.sf(ra), dtype=float)
    m = np.asarray(d.mean_residual_life(ra), dtype=float)
    beyond = ra >= d.support_high
    near = (~beyond) & (s < NEAR_END_SURVIVAL)
    if np.any(near):
        warnings.warn(f"survival below {NEAR_END_SURVIVAL:g} at {np.count_nonzero(near)} point(s); "
                      "mean residual life flagged indeterminate", NearSupportEndWarning, stacklevel=2)
    out = np.where(beyond, 0.0, np.where(near, np.nan, m))
    return float(out) if out.ndim == 0 else out


def gmrl(d: Distribution, r):
    """Generalized mean residual life ``m(r) / r`` for ``r > 0``."""
    ra = np.asarray(r, dtype=float)
    if np.any(ra <= 0):
        raise DomainError("generalized mean residual life needs r > 0")
    out = np.asarray(mrl(d, ra)) / ra
    return float(out) if out.ndim == 0 else out


def default_grid(d: Distribution, points: int = DEFAULT_GRID_POINTS,
                 p_lo: float = 1e-6, p_hi: float = 1 - 1e-6) -> np.ndarray:
    """Log-spaced points between the ``p_lo`` and ``p_hi`` quantiles."""
    lo = float(d.quantile(p_lo))
    hi = float(d.quantile(p_hi))
    if lo <= 0:
        lo = min(1e-9, hi * 1e-9)
    return np.geomspace(lo, hi, points)


def _resolve_grid(d: Distribution, grid_spec) -> np.ndarray:
    if grid_spec is None:
        return default_grid(d)
    if isinstance(grid_spec, (int, np.integer)):
        return default_grid(d, int(grid_spec))
    if isinstance(grid_spec, dict):
        return default_grid(d, **grid_spec)
    grid = np.asarray(grid_spec, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be a strictly increasing 1-d array")
    return grid


@dataclass
class ReliabilityProfile:
    grid: np.ndarray
    mrl: np.ndarray
    gmrl: np.ndarray
    hazard: np.ndarray | None
    gfr: np.ndarray | None

    def to_csv(self) -> str:
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "mrl", "gmrl", "hazard", "gfr"])
        for i, r in enumerate(self.grid):
            h = "" if self.hazard is None else f"{self.hazard[i]:.17g}"
            g = "" if self.gfr is None else f"{self.gfr[i]:.17g}"
            w.writerow([f"{r:.17g}", f"{self.mrl[i]:.17g}", f"{self.gmrl[i]:.17g}", h, g])
        return buf.getvalue()


def profile(d: Distribution, grid_spec=None) -> ReliabilityProfile:
    """Evaluate m, e, h and g on a grid strictly inside the support."""
    grid = _resolve_grid(d, grid_spec)
    if grid[0] <= d.support_low or grid[-1] >= d.support_high:
        raise DomainError("profile grid must lie strictly inside the support")
    m = np.asarray(mrl(d, grid), dtype=float)
    e = m / grid
    if d.has_density:
        h = np.asarray(d.hazard(grid), dtype=float)
        g = grid * h
    else:
        h = g = None
    return ReliabilityProfile(grid, m, e, h, g)


@dataclass
class PropertyVerdict:
    property: str
    holds: str  # "yes" | "no" | "indeterminate"
    witness: tuple[float, float, float, float] | None = None  # (r1, r2, value1, value2)
    tolerance: float = MONOTONE_TOL
    strict: bool = False
    max_violation: float = 0.0
    reason: str = ""
    grid: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.holds == "yes"

    def to_dict(self) -> dict:
        w = None
        if self.witness is not None:
            w = dict(zip(("r1", "r2", "value1", "value2"), self.witness))
        return {"property": self.property, "holds": self.holds, "strict": self.strict,
                "witness": w, "tolerance": self.tolerance, "max_violation": self.max_violation,
                "reason": self.reason, "grid": self.grid}


def _curve(d: Distribution, prop: str, grid: np.ndarray):
    if prop in ("DMRL", "DGMRL"):
        m = np.asarray(mrl(d, grid), dtype=float)
        return (m if prop == "DMRL" else m / grid), -1
    if not d.has_density:
        return None, 1
    h = np.asarray(d.hazard(grid), dtype=float)
    return (h if prop == "IFR" else grid * h), 1


def check_property(d: Distribution, prop: str, grid_spec=None, strictness: str = "weak",
                   tol: float = MONOTONE_TOL) -> PropertyVerdict:
    """Grid certificate for DMRL / DGMRL (decreasing) or IFR / IGFR (increasing).

    Weak mode looks for an adjacent-pair move in the wrong direction larger
    than ``tol * max(1, |value|)``. Strict mode additionally demands at
    least one step of size >= 1e-12 in the right direction within every
    decade of r that holds two or more grid points.
    """
    if prop not in PROPERTIES:
        raise ValueError(f"property must be one of {PROPERTIES}, got {prop!r}")
    if strictness not in ("weak", "strict"):
        raise ValueError("strictness must be 'weak' or 'strict'")
    grid = _resolve_grid(d, grid_spec)
    if grid[0] <= d.support_low or grid[-1] >= d.support_high:
        raise DomainError("certificate grid must lie inside the support and above 0")
    info = {"points": int(grid.size), "low": float(grid[0]), "high": float(grid[-1])}
    strict = strictness == "strict"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearSupportEndWarning)
        values, sign = _curve(d, prop, grid)
    if values is None:
        return PropertyVerdict(prop, "indeterminate", tolerance=tol, strict=strict,
                               reason="distribution exposes no density", grid=info)
    finite = np.isfinite(values)
    if not np.all(finite):
        # drop the indeterminate tail but remember it
        cut = int(np.argmin(finite)) if finite[0] else 0
        if cut < 2:
            return PropertyVerdict(prop, "indeterminate", tolerance=tol, strict=strict,
                                   reason="curve is not finite on the grid", grid=info)
        grid, values = grid[:cut], values[:cut]
    step = sign * np.diff(values)  # positive = moving in the required direction
    scale = np.maximum(1.0, np.abs(values[:-1]))
    wrong = -step - tol * scale
    worst = int(np.argmax(wrong))
    max_violation = float(max(-step[worst], 0.0))
    if wrong[worst] > 0:
        w = (float(grid[worst]), float(grid[worst + 1]), float(values[worst]), float(values[worst + 1]))
        return PropertyVerdict(prop, "no", w, tol, strict, max_violation, "monotonicity violated", info)
    if strict:
        decade = np.floor(np.log10(grid[:-1]))
        for dec in np.unique(decade):
            sel = decade == dec
            if not np.any(step[sel] >= STRICT_STEP):
                i = int(np.flatnonzero(sel)[0])
                w = (float(grid[i]), float(grid[i + 1]), float(values[i]), float(values[i + 1]))
                return PropertyVerdict(prop, "no", w, tol, strict, max_violation,
                                       f"no strict step in decade 1e{int(dec)}", info)
    return PropertyVerdict(prop, "yes", None, tol, strict, max_violation, "", info)


def is_dgmrl(d: Distribution, grid_spec=None, strict: bool = True) -> bool:
    return check_property(d, "DGMRL", grid_spec, "strict" if strict else "weak").certified
