"""Wholesale price equilibria in a supplier-retailers chain under demand uncertainty.

The supplier's optimal wholesale price is the fixed point of the demand's
mean residual life. The package provides demand distributions, reliability
profiles and certificates, stochastic-order checkers, the equilibrium
solver, brute-force oracles and comparative-statics experiments.
"""

from .comparative import (
    ExperimentReport,
    closure_experiments,
    convolution_experiment,
    counterexample_reproduction,
    normal_family_experiment,
    scale_experiment,
    st_price_sweep,
    variability_experiments,
)
from .distributions import (
    CdfTable,
    Distribution,
    Exponential,
    ShiftScaleParams,
    Sinusoid,
    SinusoidParams,
    convolve,
    from_spec,
    make_family,
    mixture,
    moments,
    shift_scale,
    transform_increasing,
    TruncatedNormal,
    Uniform,
)
from .equilibrium import (
    MarketConfig,
    empirical_poa,
    fundamentals,
    poa,
    profit_ratio,
    realized_efficiency,
    solve_wholesale_price,
)
from .errors import MrleqError
from .oracle import argmax_grid, cournot_deviation_check, expected_supplier_profit, monte_carlo_profits
from .orders import check_order
from .reliability import check_property, gmrl, mrl, profile

__all__ = [
    "Distribution", "Exponential", "Uniform", "TruncatedNormal", "Sinusoid", "CdfTable",
    "ShiftScaleParams", "SinusoidParams", "make_family", "shift_scale", "mixture",
    "convolve", "transform_increasing", "moments", "from_spec",
    "mrl", "gmrl", "profile", "check_property", "check_order",
    "MarketConfig", "solve_wholesale_price", "fundamentals", "profit_ratio", "realized_efficiency",
    "poa", "empirical_poa",
    "expected_supplier_profit", "argmax_grid", "cournot_deviation_check", "monte_carlo_profits",
    "ExperimentReport", "scale_experiment", "convolution_experiment", "closure_experiments",
    "variability_experiments", "normal_family_experiment", "counterexample_reproduction",
    "st_price_sweep", "MrleqError",
]
