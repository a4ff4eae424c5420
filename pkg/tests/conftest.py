import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from optrecover.sequences import Tabulated
from optrecover.spectral import SpectralProblem

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def tabulated_problem(log_mu, log_gap) -> SpectralProblem:
    """Finite problem with ``log ξ = log μ + log_gap``; monotone certificate."""
    log_mu = np.asarray(log_mu, float)
    log_xi = log_mu + np.asarray(log_gap, float)
    return SpectralProblem(
        mu=Tabulated(tuple(log_mu)), xi=Tabulated(tuple(log_xi)), ratio_monotone_from=0
    )


def random_monotone_problem(rng: np.random.Generator, length: int) -> SpectralProblem:
    """μ nondecreasing, μ/ξ nonincreasing, both drawn in log-space."""
    mu_steps = rng.exponential(0.5, length) * (rng.uniform(size=length) < 0.8)
    gap_steps = rng.exponential(1.0, length) * (rng.uniform(size=length) < 0.8)
    log_mu = np.cumsum(mu_steps) - mu_steps[0] + rng.normal(0, 1)
    log_gap = np.cumsum(gap_steps) - gap_steps[0] + rng.uniform(-1.0, 2.0)
    return tabulated_problem(log_mu, log_gap)


@st.composite
def monotone_problems(draw, min_len=2, max_len=24):
    n = draw(st.integers(min_len, max_len))
    steps = st.floats(0.0, 2.0, allow_nan=False)
    mu_steps = draw(st.lists(steps, min_size=n, max_size=n))
    gap_steps = draw(st.lists(steps, min_size=n, max_size=n))
    offset = draw(st.floats(-2.0, 2.0))
    log_mu = np.cumsum([0.0] + mu_steps[1:]) + offset
    log_gap = np.cumsum([0.0] + gap_steps[1:])
    return tabulated_problem(log_mu, log_gap)


deltas = st.floats(1e-6, 10.0, allow_nan=False).filter(lambda d: d > 0)


@pytest.fixture
def example1():
    from optrecover.applications import numdiff_problem

    return numdiff_problem(4.0)


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b))


SQRT_PI = math.sqrt(math.pi)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
