import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from optrecover.exceptions import ConfigError, HorizonError
from optrecover.sequences import (
    ExpOfLambda,
    GeneralForm,
    Power,
    PowerLambda,
    PowerPaired,
    Tabulated,
    kbar,
    rule_from_dict,
    rule_to_dict,
)


def test_kbar_clamps_zero():
    assert list(kbar([0, 1, 5])) == [1.0, 1.0, 5.0]


def test_power_paired_matches_direct_values():
    r = PowerPaired(2.0)
    direct = [(k // 2 + 1) ** 2 for k in range(10)]
    assert np.allclose(np.exp(r.log_values(np.arange(10))), direct, rtol=1e-14)


def test_power_uses_kbar():
    r = Power(3.0)
    assert r.log_value(0) == 0.0
    assert math.isclose(r.log_value(5), 3 * math.log(5))


def test_exp_of_lambda_stays_finite_where_exp_overflows():
    r = ExpOfLambda(PowerLambda(1.0), t=1.0, power=2.0)
    v = r.log_value(5000)
    assert math.isfinite(v)
    assert math.isclose(v, 5000 + 2 * math.log(5000), rel_tol=1e-14)


def test_general_form_direct():
    r = GeneralForm(c=2.0, eta=1.5, alpha=0.5, beta=0.5)
    k = 9
    assert math.isclose(math.exp(r.log_value(k)), 2.0 * 9**1.5 * math.exp(0.5 * 3.0), rel_tol=1e-13)


@pytest.mark.parametrize("kw", [dict(c=0), dict(eta=-1), dict(beta=1.5), dict(alpha=0, eta=0)])
def test_general_form_rejects_out_of_family(kw):
    with pytest.raises(ValueError):
        GeneralForm(**kw)


def test_tabulated_without_tail_is_finite():
    r = Tabulated((0.0, 1.0, 2.0))
    assert r.length == 3
    with pytest.raises(HorizonError):
        r.log_values(np.arange(4))


def test_tabulated_tail_continues_at_absolute_index():
    r = Tabulated((0.0, 0.5), tail=Power(2.0))
    assert r.length is None
    assert math.isclose(r.log_value(7), 2 * math.log(7))
    assert r.log_value(1) == 0.5


def test_negative_index_rejected():
    with pytest.raises(IndexError):
        Power(1.0).log_values([-1])


RULES = [
    PowerPaired(2.0),
    Power(4.0),
    ExpOfLambda(PowerLambda(0.5, 2.0), t=0.3, power=1.0),
    GeneralForm(1.5, 2.0, 0.25, 0.5),
    Tabulated((0.0, 1.0), tail=Power(1.0)),
]


@pytest.mark.parametrize("rule", RULES, ids=lambda r: type(r).__name__)
def test_dict_round_trip(rule):
    assert rule_from_dict(rule_to_dict(rule)) == rule


def test_unknown_key_reports_path():
    with pytest.raises(ConfigError, match="xi"):
        rule_from_dict({"rule": "power", "p": 2, "q": 1}, "xi")


def test_missing_tag_and_unknown_tag():
    with pytest.raises(ConfigError, match="missing 'rule'"):
        rule_from_dict({"p": 2}, "mu")
    with pytest.raises(ConfigError, match="unknown rule tag"):
        rule_from_dict({"rule": "bogus"}, "mu")


def test_invalid_parameters_become_config_errors():
    with pytest.raises(ConfigError):
        rule_from_dict({"rule": "power", "p": -1}, "xi")


@given(st.floats(0.1, 6.0), st.lists(st.integers(0, 10_000), min_size=2, max_size=20))
def test_power_rules_nondecreasing(p, ks):
    ks = np.sort(np.array(ks))
    for rule in (Power(p), PowerPaired(p), GeneralForm(1.0, p, 0.3, 0.5)):
        v = rule.log_values(ks)
        assert np.all(np.diff(v) >= -1e-12)
