import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import deltas, monotone_problems, tabulated_problem
from optrecover.exceptions import HorizonError, UncertifiedTailError
from optrecover.sequences import ExpOfLambda, GeneralForm, Power, PowerLambda, PowerPaired, Tabulated
from optrecover.spectral import (
    CoefficientVector,
    NoisyObservation,
    SpectralProblem,
    h_norm,
    n_delta,
    ratio,
    tail_argmax,
    tail_sup_ratio,
    validate,
    w_norm,
)


def n_delta_oracle(xi_values, delta):
    # plain loop over the real values, no logs
    for k, x in enumerate(xi_values):
        if x >= 1.0 / delta * (1 - 1e-13):
            return k
    return None


@pytest.mark.parametrize("gamma", [2.5, 4.0, 6.0])
@pytest.mark.parametrize("delta", [0.3, 0.1, 1e-3, 1e-5])
def test_n_delta_power_matches_loop(gamma, delta):
    p = SpectralProblem(PowerPaired(2), Power(gamma), 0, ratio_stride=1 if gamma >= 4 else 2)
    xi = [max(1, k) ** gamma for k in range(2000)]
    assert n_delta(p, delta) == n_delta_oracle(xi, delta)


def test_n_delta_heat_example():
    # 2 ln k + k >= ln 1e4: k=6 gives 9.58, k=5 gives 8.22
    p = SpectralProblem(ExpOfLambda(PowerLambda(1), 1.0), ExpOfLambda(PowerLambda(1), 1.0, power=2.0), 0)
    xi = [max(1, k) ** 2 * math.exp(k) for k in range(40)]
    assert n_delta(p, 1e-4) == n_delta_oracle(xi, 1e-4) == 6


def test_n_delta_zero_when_xi0_large():
    p = SpectralProblem(Power(1), GeneralForm(c=100.0, eta=1.0, alpha=0.0), 0)
    assert n_delta(p, 0.1) == 0


def test_n_delta_exact_boundary_not_lost_to_roundoff():
    # ξ_N = 1/δ exactly in real arithmetic
    p = SpectralProblem(PowerPaired(2), Power(4), 0)
    assert n_delta(p, 1 / 3**4) == 3


def test_n_delta_horizon_exhausted():
    p = SpectralProblem(PowerPaired(2), Power(4), 0, horizon=10)
    with pytest.raises(HorizonError):
        n_delta(p, 1e-8)


def test_ratio_in_log_space_survives_huge_sequences():
    lam = PowerLambda(1.0)
    p = SpectralProblem(ExpOfLambda(lam, 0.5), ExpOfLambda(lam, 1.0), 0, horizon=5000)
    assert math.isclose(ratio(p, 4000), math.exp(-2000), rel_tol=1e-12)


@given(monotone_problems(), st.integers(0, 30))
def test_tail_argmax_monotone_is_n(problem, n):
    n = min(n, problem.last_index)
    assert tail_argmax(problem, n) == n


def test_tail_argmax_stride_two_scans_pair():
    # γ = 3: ratio at odd index exceeds its even predecessor
    p = SpectralProblem(PowerPaired(2), Power(3), 0, ratio_stride=2)
    for n in range(1, 40):
        brute = n + int(np.argmax([ratio(p, k) for k in range(n, 400)]))
        assert tail_argmax(p, n) == brute


def test_tail_argmax_finite_without_certificate():
    p = SpectralProblem(Tabulated((0.0, 0.0, 0.0)), Tabulated((0.0, 1.0, 0.5)))
    assert tail_argmax(p, 1) == 2
    assert math.isclose(tail_sup_ratio(p, 1), math.exp(-0.5))


def test_tail_argmax_infinite_uncertified_raises():
    p = SpectralProblem(PowerPaired(2), Power(4))
    with pytest.raises(UncertifiedTailError):
        tail_argmax(p, 3)


def test_validate_clean_example():
    assert validate(SpectralProblem(PowerPaired(2), Power(4), 0)) == []


def test_validate_flags_bad_certificate():
    codes = [v.code for v in validate(SpectralProblem(PowerPaired(2), Power(3), 0))]
    assert codes == ["certificate"]
    assert validate(SpectralProblem(PowerPaired(2), Power(3), 0, ratio_stride=2)) == []


def test_validate_flags_nonmonotone_and_nonpositive():
    p = SpectralProblem(Tabulated((0.0, -1.0, 0.0)), Tabulated((0.0, 1.0, 2.0)))
    assert [v.code for v in validate(p)] == ["monotonicity"]
    p = SpectralProblem(Tabulated((0.0, -math.inf)), Tabulated((0.0, 1.0)))
    assert [v.code for v in validate(p)] == ["positivity"]


def test_validate_flags_no_decay():
    p = SpectralProblem(Power(1), Power(1), 0)
    assert [v.code for v in validate(p)] == ["ratio-decay"]


def test_problem_dict_round_trip():
    p = SpectralProblem(PowerPaired(2), GeneralForm(1, 2, 0.5, 0.5), 3, horizon=77, ratio_stride=2)
    assert SpectralProblem.from_dict(p.to_dict()) == p


def test_coefficient_vector_algebra():
    a = CoefficientVector({3: 1.0, 0: 2.0, 5: 0.0})
    assert a.support == [0, 3] and a.stop == 4
    b = CoefficientVector({3: 1.0})
    assert (a - b) == CoefficientVector({0: 2.0})
    assert (2 * a).get(3) == 2.0
    assert a.truncate(3) == CoefficientVector({0: 2.0})
    assert list(a.to_dense()) == [2.0, 0.0, 0.0, 1.0]
    assert CoefficientVector.from_record(a.to_record()) == a


def test_coefficient_vector_rejects_negative_index():
    with pytest.raises(ValueError):
        CoefficientVector({-1: 1.0})


def test_noisy_observation_needs_positive_delta():
    with pytest.raises(ValueError):
        NoisyObservation(CoefficientVector(), 0.0)


def test_norms():
    p = SpectralProblem(PowerPaired(2), Power(2), 0)
    v = CoefficientVector({0: 3.0, 2: 4.0})
    assert h_norm(v) == 5.0
    assert math.isclose(w_norm(p, v), math.hypot(3.0, 4.0 * 4), rel_tol=1e-14)


@given(monotone_problems(), deltas)
def test_n_delta_is_first_crossing(problem, delta):
    try:
        nd = n_delta(problem, delta)
    except HorizonError:
        lx = problem.log_xi_values(problem.last_index + 1)
        assert np.all(lx < -math.log(delta))
        return
    lx = problem.log_xi_values(nd + 1)
    assert lx[nd] >= -math.log(delta) - 1e-12
    assert np.all(lx[:nd] < -math.log(delta))
