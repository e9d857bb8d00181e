import math

import numpy as np
import pytest

from mrleq.distributions import Exponential, Uniform, convolve, mixture
from mrleq.equilibrium import solve_wholesale_price
from mrleq.errors import DegenerateInputError, DomainError
from mrleq.oracle import (
    argmax_grid,
    cournot_deviation_check,
    default_price_grid,
    expected_supplier_profit,
    lattice_audit,
    monte_carlo_profits,
    objective_identity_gap,
)

from conftest import sinusoid_f


def test_expected_profit_examples():
    assert expected_supplier_profit(Uniform(0, 1), 1, 1 / 3) == pytest.approx(1 / 27, rel=1e-12)
    assert expected_supplier_profit(Uniform(0, 1), 1, 0.0) == 0.0
    assert expected_supplier_profit(Exponential(1.0), 2, 1.0) == pytest.approx(2 / 3 * math.exp(-1), rel=1e-12)
    with pytest.raises(DomainError):
        expected_supplier_profit(Uniform(0, 1), 1, -0.5)


@pytest.mark.parametrize("d", [Uniform(0, 1), Exponential(1.0), sinusoid_f(),
                               mixture(Exponential(2), Uniform(0, 3), 0.4),
                               convolve(Uniform(0, 1), Exponential(1.0)), Uniform(0.25, 0.75)],
                         ids=["uniform", "exp", "sinusoid", "mixture", "convolution", "shifted"])
def test_objective_identity(d):
    for r in (0.05, 0.3, 1.0, 2.5):
        if r < d.support_high:
            assert objective_identity_gap(d, 3, r) < 1e-10


def test_argmax_examples():
    for d, target in ((Uniform(0, 1), 1 / 3), (Exponential(1.0), 1.0)):
        r_hat, rep = argmax_grid(d)
        assert abs(r_hat - target) <= rep.grid_step
    r_hat, rep = argmax_grid(sinusoid_f())
    assert abs(r_hat - 1.0299) <= rep.grid_step


def test_argmax_is_independent_of_n():
    d = mixture(Exponential(2), Uniform(0, 3), 0.4)
    assert argmax_grid(d, 1)[0] == argmax_grid(d, 5)[0]


def test_argmax_agrees_with_solver(corpus):
    for name, d in corpus.items():
        r_hat, rep = argmax_grid(d)
        assert abs(r_hat - solve_wholesale_price(d).r_star) <= rep.grid_step, name


def test_argmax_degenerate_grid():
    with pytest.raises(DegenerateInputError):
        argmax_grid(Uniform(0, 1), 1, np.linspace(2.0, 3.0, 50))
    with pytest.raises(DomainError):
        argmax_grid(Uniform(0, 1), 1, [0.5, 0.2])


def test_default_grid_covers_quantile():
    g = default_price_grid(Exponential(1.0))
    assert g.size == 4000 and g[0] > 0
    assert g[-1] == pytest.approx(-math.log(1e-8), rel=1e-9)


def test_cournot_examples():
    h = 1 / 20000
    assert cournot_deviation_check(1.0, 1 / 3, 1) <= 1e-9 + h * h
    assert cournot_deviation_check(0.5, 0.8, 2) <= 0.0
    assert cournot_deviation_check(2.0, 0.5, 3) <= 1e-9 + (2 * h) ** 2
    # the deviation gain is non-negative once the candidate quantity is on the grid
    assert cournot_deviation_check(1.0, 0.1, 2, np.linspace(0, 1, 1001)) >= -1e-15


def test_lattice_audit():
    out = lattice_audit()
    assert out["deviation_max"] <= 1e-6


def test_monte_carlo_examples():
    mc = monte_carlo_profits(Uniform(0, 1), 1 / 3, 1, 1_000_000, seed=1)
    est = mc["estimates"]["profit_supplier"]
    assert abs(est["mean"] - 1 / 27) <= 4 * est["stderr"]
    assert mc["within_4se"]
    e = monte_carlo_profits(Exponential(1.0), 1.0, 1, 200_000, seed=2)["estimates"]["profit_supplier"]
    assert abs(e["mean"] - math.exp(-1) / 2) <= 4 * e["stderr"]
    zero = monte_carlo_profits(Uniform(0, 1), 1.5, 2, 10_000)
    assert all(v["mean"] == 0 for v in zero["estimates"].values())
    with pytest.raises(DomainError):
        monte_carlo_profits(Uniform(0, 1), 0.3, 1, 100)


def test_monte_carlo_thread_independent(monkeypatch):
    d = sinusoid_f()
    monkeypatch.setenv("MRLEQ_THREADS", "1")
    a = monte_carlo_profits(d, 1.03, 2, 50_000, seed=9)
    monkeypatch.setenv("MRLEQ_THREADS", "4")
    b = monte_carlo_profits(d, 1.03, 2, 50_000, seed=9)
    assert a == b


def test_report_serialization():
    _, rep = argmax_grid(Uniform(0, 1), 2, np.linspace(0.001, 1, 2000))
    d = rep.to_dict(include_curve=True)
    assert d["grid_points"] == 2000 and len(d["profit_curve"]["r"]) == 2000
    assert rep.curve_csv().splitlines()[0] == "r,expected_profit"
