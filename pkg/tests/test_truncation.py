import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import deltas, monotone_problems, rel_close
from optrecover.exceptions import HorizonError
from optrecover.sequences import ExpOfLambda, Power, PowerLambda, PowerPaired
from optrecover.spectral import CoefficientVector, NoisyObservation, SpectralProblem, n_delta
from optrecover.truncation import (
    MatchedOrder,
    MinimizeFormula,
    NDeltaRule,
    apply,
    info_map,
    reconstruct,
    select_n,
    worst_case_error,
)


def error_oracle(mu, xi, delta, n):
    # direct sup over a long explicit tail, real arithmetic
    tail = max(m / x for m, x in zip(mu[n:], xi[n:]))
    return math.sqrt(tail**2 + (delta * mu[n - 1]) ** 2)


def test_example1_delta_point_one():
    p = SpectralProblem(PowerPaired(2), Power(4), 0)
    br = worst_case_error(p, 0.1, 2)
    assert br.tail_term == pytest.approx(0.25, rel=1e-15)
    assert br.noise_term == pytest.approx(0.1, rel=1e-15)
    assert br.total == pytest.approx(math.sqrt(0.0725), rel=1e-14)


@pytest.mark.parametrize("gamma", [2.5, 3.0, 4.0, 5.0])
@pytest.mark.parametrize("n", [1, 2, 3, 7, 12])
def test_worst_case_matches_direct_sup(gamma, n):
    stride = 1 if gamma >= 4 else 2
    p = SpectralProblem(PowerPaired(2), Power(gamma), 0, ratio_stride=stride)
    mu = [(k // 2 + 1) ** 2 for k in range(3000)]
    xi = [max(1, k) ** gamma for k in range(3000)]
    assert rel_close(worst_case_error(p, 1e-3, n).total, error_oracle(mu, xi, 1e-3, n), 1e-13)


def test_heat_t_equals_T_s0_example():
    lam = PowerLambda(1)
    p = SpectralProblem(ExpOfLambda(lam, 1.0), ExpOfLambda(lam, 1.0), 0)
    delta = math.exp(-5)
    br = worst_case_error(p, delta, 5)
    assert br.tail_term == 1.0
    assert rel_close(br.noise_term, math.exp(-1), 1e-14)


def test_n_zero_rejected():
    p = SpectralProblem(PowerPaired(2), Power(4), 0)
    with pytest.raises(ValueError):
        worst_case_error(p, 0.1, 0)
    with pytest.raises(ValueError):
        info_map(CoefficientVector({0: 1.0}), 0)


def test_info_map_pads_with_zeros():
    assert list(info_map(CoefficientVector({1: 2.0, 9: 1.0}), 3)) == [0.0, 2.0, 0.0]


def test_apply_multiplies_by_mu_below_n():
    p = SpectralProblem(PowerPaired(2), Power(4), 0)
    f = CoefficientVector({0: 1.0, 3: -1.0, 4: 5.0})
    out = apply(p, NoisyObservation(f, 0.1), 4)
    # μ is applied in log-space, so values agree to round-off
    assert out.support == [0, 3]
    assert np.allclose(out.to_dense(), [1.0, 0.0, 0.0, -4.0], rtol=1e-14, atol=0)
    assert reconstruct(p, [0.0, 0.0, 2.0]).get(2) == pytest.approx(8.0, rel=1e-14)


def test_select_n_rules_agree_on_example1():
    p = SpectralProblem(PowerPaired(2), Power(4), 0)
    for d in (0.1, 1e-3, 1e-6):
        nd = n_delta(p, d)
        assert select_n(p, d, NDeltaRule()) == nd
        assert select_n(p, d, MatchedOrder()) == nd


def test_select_n_clamps_to_one():
    p = SpectralProblem(PowerPaired(2), Power(4), 0)
    assert n_delta(p, 2.0) == 0
    assert select_n(p, 2.0) == 1
    assert select_n(p, 2.0, MatchedOrder()) == 1


def test_minimize_smallest_tie():
    p = SpectralProblem(PowerPaired(2), Power(4), 0)
    n = select_n(p, 1e-3, MinimizeFormula(n_max=30))
    totals = [worst_case_error(p, 1e-3, k).total for k in range(1, 31)]
    assert n == 1 + int(np.argmin(totals))


def test_matched_constant_shifts_level():
    p = SpectralProblem(PowerPaired(2), Power(4), 0)
    # n^4 >= c/δ with δ = 1e-4: c=1 -> 10, c=16 -> 20, c=1/16 -> 5
    assert select_n(p, 1e-4, MatchedOrder(1.0)) == 10
    assert select_n(p, 1e-4, MatchedOrder(16.0)) == 20
    assert select_n(p, 1e-4, MatchedOrder(1 / 16)) == 5


def test_matched_custom_scale_and_horizon():
    p = SpectralProblem(PowerPaired(2), Power(4), 0, horizon=5)
    # scale n^2 >= 1/δ with δ = 0.04 -> n = 5
    assert select_n(p, 0.04, MatchedOrder(log_scale=lambda pr, n: 2 * math.log(max(n, 1)))) == 5
    with pytest.raises(HorizonError):
        select_n(p, 1e-8, MatchedOrder())


@given(monotone_problems(min_len=3), deltas, st.integers(1, 20))
def test_total_is_hypot_of_parts(problem, delta, n):
    n = min(n, problem.last_index)
    br = worst_case_error(problem, delta, n)
    assert rel_close(br.total, math.hypot(br.tail_term, br.noise_term), 1e-15)
    assert br.tail_term >= 0 and br.noise_term > 0


@given(monotone_problems(min_len=3), deltas)
def test_minimize_never_worse_than_n_delta(problem, delta):
    try:
        n = select_n(problem, delta, MinimizeFormula(n_max=problem.last_index))
        nd = select_n(problem, delta, NDeltaRule())
    except HorizonError:
        return
    if nd <= problem.last_index:
        assert worst_case_error(problem, delta, n).total <= worst_case_error(problem, delta, nd).total * (1 + 1e-15)
