import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from mrleq.distributions import (
    CdfTable,
    Exponential,
    Sinusoid,
    TruncatedNormal,
    Uniform,
    convolve,
    from_spec,
    make_family,
    mixture,
    moments,
    named_map,
    shift_scale,
    transform_increasing,
)
from mrleq.errors import (
    ContractViolationError,
    ParameterDomainError,
    ResolutionError,
    SpecParseError,
)

from conftest import dgmrl_corpus, sinusoid_f


def all_distributions():
    out = dict(dgmrl_corpus())
    out["sinusoid(pi,0.8,1.2)"] = sinusoid_f()
    out["U01+U01"] = convolve(Uniform(0, 1), Uniform(0, 1))
    out["exp1^2"] = transform_increasing(Exponential(1.0), lambda x: np.asarray(x) ** 2,
                                         inverse=np.sqrt, derivative=lambda x: 2 * np.asarray(x))
    return out


@pytest.mark.parametrize("name", sorted(all_distributions()))
def test_type_invariants(name):
    d = all_distributions()[name]
    hi = d.upper_cutoff(1e-10)
    x = np.linspace(0.0, hi, 1000)
    cdf = np.asarray(d.cdf(x))
    sf = np.asarray(d.sf(x))
    assert d.cdf(0.0) == 0.0 or d.support_low == 0.0 and d.cdf(0.0) < 1e-12
    assert np.all((cdf >= 0) & (cdf <= 1))
    assert np.all(np.diff(cdf) >= -1e-15)
    assert np.max(np.abs(sf + cdf - 1)) < 1e-9
    p = np.linspace(0.01, 0.99, 99)
    assert np.max(np.abs(np.asarray(d.cdf(d.quantile(p))) - p)) < 1e-6
    m = moments(d)
    assert m.second_moment >= m.mean ** 2


def test_quantile_endpoints_clamped():
    u = Uniform(0.25, 0.75)
    assert u.quantile(0.0) == 0.25 and u.quantile(1.0) == 0.75
    assert Exponential(1.0).quantile(1.0) == math.inf


def test_quantile_inverts_cdf_inside_support():
    d = TruncatedNormal(1.0, 1.0)
    x = np.linspace(0.05, 4.0, 50)
    assert np.max(np.abs(d.quantile(d.cdf(x)) - x) / (1 + x)) < 1e-6


@pytest.mark.parametrize("kappa", [0.5, 0.9, 2.0])
def test_sinusoid_degenerates_to_exponential(kappa):
    s = Sinusoid(0.0, kappa, 0.0)
    e = Exponential(kappa)
    r = np.linspace(0, 20, 401)
    assert np.max(np.abs(s.pdf(r) - e.pdf(r))) < 1e-12
    assert s.params.normalization() == pytest.approx(kappa / 2, rel=1e-15)


def test_sinusoid_density_integrates_to_one():
    # independent adaptive quadrature of the raw formula
    f = sinusoid_f()
    total, _ = integrate.quad(lambda r: float(f.pdf(r)), 0, np.inf, limit=500)
    assert abs(total - 1.0) < 1e-8


def test_sinusoid_closed_forms_against_quadrature():
    f = sinusoid_f()
    for r in (0.0, 0.5, 1.0299, 3.0, 8.0):
        s, _ = integrate.quad(lambda u: float(f.pdf(u)), r, r + 80, limit=500)
        t, _ = integrate.quad(lambda u: float(f.sf(u)), r, r + 80, limit=500)
        assert f.sf(r) == pytest.approx(s, rel=1e-9)
        assert f.tail_integral(r) == pytest.approx(t, rel=1e-9)


def test_sinusoid_mean_matches_monte_carlo():
    f = sinusoid_f()
    x = f.sample(400_000, np.random.default_rng(7))
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - f.mean) < 3 * se


def test_analytic_moments():
    assert Exponential(0.9).mean == pytest.approx(1 / 0.9, rel=1e-15)
    m = moments(Exponential(2.0))
    assert (m.mean, m.variance, m.cv) == pytest.approx((0.5, 0.25, 1.0))
    u = moments(Uniform(0, 1))
    assert (u.mean, u.second_moment) == pytest.approx((0.5, 1 / 3))


def test_truncated_normal_moments_against_quadrature():
    d = TruncatedNormal(1.0, 1.0)
    z = 1 - 0.5 * math.erfc(1 / math.sqrt(2))
    pdf = lambda x: math.exp(-0.5 * (x - 1) ** 2) / math.sqrt(2 * math.pi) / z  # noqa: E731
    m1, _ = integrate.quad(lambda x: x * pdf(x), 0, np.inf)
    m2, _ = integrate.quad(lambda x: x * x * pdf(x), 0, np.inf)
    assert d.mean == pytest.approx(m1, rel=1e-10)
    assert d.second_moment == pytest.approx(m2, rel=1e-9)
    assert d.truncated_mass == pytest.approx(1 - z, rel=1e-12)


def test_family_parameter_errors():
    with pytest.raises(ParameterDomainError):
        make_family("exponential", rate=0.0)
    with pytest.raises(ParameterDomainError):
        make_family("uniform", a=1.0, b=1.0)
    with pytest.raises(ParameterDomainError):
        make_family("truncated_normal", mu=1.0, sigma=-1.0)
    with pytest.raises(ParameterDomainError):
        make_family("sinusoid", omega=1.0, kappa=0.0, phi=0.0)
    with pytest.raises(ParameterDomainError):
        mixture(Uniform(0, 1), Uniform(0, 2), 1.0)
    with pytest.raises(ParameterDomainError):
        shift_scale(Exponential(1.0), lam=0.0)


def test_shift_scale_examples():
    base = Exponential(1.0)
    p = np.linspace(0.01, 0.99, 99)
    ident = shift_scale(base, delta=0.0, lam=1.0)
    assert np.max(np.abs(ident.quantile(p) - base.quantile(p))) < 1e-12
    assert moments(shift_scale(base, lam=2.0)).mean == pytest.approx(2.0)
    assert moments(shift_scale(base, lam=2.0)).cv == pytest.approx(1.0)
    assert moments(shift_scale(base, delta=1.0, lam=1.0)).cv == pytest.approx(0.5)
    d = shift_scale(TruncatedNormal(1, 1), delta=0.5, lam=3.0)
    assert np.max(np.abs(d.quantile(p) - (0.5 + 3 * TruncatedNormal(1, 1).quantile(p)))) < 1e-9


def test_mixture_examples():
    same = mixture(Uniform(0, 1), Uniform(0, 1), 0.5)
    assert same.cdf(0.5) == pytest.approx(0.5)
    ee = mixture(Exponential(1.0), Exponential(2.0), 0.5)
    assert ee.sf(1.0) == pytest.approx(0.5 * (math.exp(-1) + math.exp(-2)), rel=1e-14)
    assert mixture(Uniform(0, 1), Uniform(0, 2), 0.3).mean == pytest.approx(0.85)


def test_convolution_examples():
    tri = convolve(Uniform(0, 1), Uniform(0, 1))
    assert tri.cdf(1.0) == pytest.approx(0.5, abs=1e-12)
    assert tri.mean == pytest.approx(1.0, abs=1e-6)
    ue = convolve(Uniform(0, 1), Exponential(1.0))
    assert ue.mean == pytest.approx(1.5, abs=1e-6)
    ee = convolve(Exponential(1.0), Exponential(2.0))
    assert ee.mean == pytest.approx(1.5, abs=1e-6)
    assert ee.variance == pytest.approx(1.0 + 0.25, rel=1e-6)


def test_convolution_against_closed_form():
    # exp(1) + exp(2): sf = 2 e^{-x} - e^{-2x}, tail = 2 e^{-x} - e^{-2x} / 2
    d = convolve(Exponential(1.0), Exponential(2.0))
    x = np.linspace(0, 25, 1001)
    assert np.max(np.abs(d.sf(x) - (2 * np.exp(-x) - np.exp(-2 * x)))) < 1e-8
    assert np.max(np.abs(d.tail_integral(x) - (2 * np.exp(-x) - 0.5 * np.exp(-2 * x)))) < 1e-8


def test_convolution_resolution_error():
    with pytest.raises(ResolutionError):
        convolve(Uniform(0, 1), Uniform(0, 1), knots=4)


def test_transform_examples():
    sq = transform_increasing(Uniform(0, 1), lambda x: np.asarray(x) ** 2, inverse=np.sqrt,
                              derivative=lambda x: 2 * np.asarray(x))
    assert sq.cdf(0.25) == pytest.approx(0.5, abs=1e-12)
    p = np.linspace(0.01, 0.99, 99)
    ident = transform_increasing(Exponential(1.0), lambda x: np.asarray(x) * 1.0)
    assert np.max(np.abs(ident.quantile(p) - Exponential(1.0).quantile(p))) < 1e-12
    doubled = transform_increasing(Exponential(1.0), lambda x: 2 * np.asarray(x))
    assert np.max(np.abs(doubled.quantile(p) - shift_scale(Exponential(1.0), lam=2.0).quantile(p))) < 1e-9


def test_transform_square_of_exponential_tail():
    # Y = X^2, X ~ exp(1): E[(Y - r)^+] = 2 (sqrt(r) + 1) e^{-sqrt(r)}
    fn, inv, der = named_map({"name": "power", "k": 2})
    y = transform_increasing(Exponential(1.0), fn, inverse=inv, derivative=der)
    r = np.array([0.0, 0.3, 1.0, 4.0, 7.4641, 20.0])
    exact = 2 * (np.sqrt(r) + 1) * np.exp(-np.sqrt(r))
    assert np.max(np.abs(y.tail_integral(r) - exact)) < 1e-8
    assert y.second_moment == pytest.approx(24.0, rel=1e-6)


def test_transform_rejects_non_monotone_map():
    with pytest.raises(ContractViolationError):
        transform_increasing(Uniform(0, 1), lambda x: np.sin(6 * np.asarray(x)))


def test_cdf_table():
    d = CdfTable([0.0, 1.0, 2.0], [0.0, 0.5, 1.0])
    assert d.cdf(0.5) == pytest.approx(0.25)
    assert d.mean == pytest.approx(1.0)
    assert not d.has_density


def test_spec_round_trip_and_errors():
    spec = {"kind": "mixture", "p": 0.5, "first": {"kind": "exponential", "rate": 2.0},
            "second": {"kind": "scale", "c": 2, "base": {"kind": "uniform", "a": 0, "b": 1}}}
    d = from_spec(json.dumps(spec))
    assert d.mean == pytest.approx(0.5 * 0.5 + 0.5 * 1.0)
    with pytest.raises(SpecParseError) as e:
        from_spec({"kind": "mixture", "p": 0.5, "first": {"kind": "exponential", "rte": 1},
                   "second": {"kind": "uniform", "a": 0, "b": 1}})
    assert e.value.pointer == "/first/rte"
    with pytest.raises(SpecParseError) as e:
        from_spec({"kind": "exponential", "rate": -1})
    assert e.value.pointer == "/rate"
    with pytest.raises(SpecParseError):
        from_spec("{not json")
    with pytest.raises(SpecParseError) as e:
        from_spec({"kind": "weibull"})
    assert e.value.pointer == "/kind"


def test_sinusoid_spec():
    d = from_spec({"kind": "sinusoid", "omega": 3.14159, "kappa": 0.8, "phi": 1.2})
    assert isinstance(d, Sinusoid)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.0, 5.0), w=st.floats(0.1, 5.0), p=st.floats(0.01, 0.99))
def test_uniform_properties(a, w, p):
    d = Uniform(a, a + w)
    q = d.quantile(p)
    assert abs(d.cdf(q) - p) < 1e-9
    assert d.mean == pytest.approx(a + w / 2)
    r = a + w * p
    assert d.tail_integral(r) == pytest.approx((a + w - r) ** 2 / (2 * w), rel=1e-9, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(l1=st.floats(0.2, 5.0), l2=st.floats(0.2, 5.0), p=st.floats(0.05, 0.95),
       x=st.floats(0.0, 10.0))
def test_mixture_linearity(l1, l2, p, x):
    a, b = Exponential(l1), Exponential(l2)
    m = mixture(a, b, p)
    assert m.cdf(x) == pytest.approx(p * a.cdf(x) + (1 - p) * b.cdf(x), abs=1e-14)
    assert m.tail_integral(x) == pytest.approx(p * a.tail_integral(x) + (1 - p) * b.tail_integral(x),
                                               rel=1e-12, abs=1e-300)
