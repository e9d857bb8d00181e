import math

import pytest

from mrleq.distributions import (
    Exponential,
    Sinusoid,
    TruncatedNormal,
    Uniform,
    mixture,
    shift_scale,
)

# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def sinusoid_f():
    return Sinusoid(math.pi, 0.8, 1.2)


def dgmrl_corpus():
    """Named distributions expected to certify as strictly DGMRL."""
    return {
        "exponential(0.5)": Exponential(0.5),
        "exponential(2)": Exponential(2.0),
        "uniform(0,1)": Uniform(0.0, 1.0),
        "uniform(0,2)": Uniform(0.0, 2.0),
        "uniform(0.25,0.75)": Uniform(0.25, 0.75),
        "truncnorm(10,2)": TruncatedNormal(10.0, 2.0),
        "truncnorm(1,1)": TruncatedNormal(1.0, 1.0),
        "mixture(exp2,exp1,0.5)": mixture(Exponential(2.0), Exponential(1.0), 0.5),
        "mixture(U01,U02,0.3)": mixture(Uniform(0, 1), Uniform(0, 2), 0.3),
        "shift_scale(exp1,1,2)": shift_scale(Exponential(1.0), delta=1.0, lam=2.0),
        "scale(U01,3)": shift_scale(Uniform(0, 1), lam=3.0),
    }


@pytest.fixture(scope="session")
def corpus():
    return dgmrl_corpus()
