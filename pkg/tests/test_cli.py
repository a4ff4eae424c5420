import json
import math
from pathlib import Path

import numpy as np
import pytest

from conftest import SQRT_PI
from optrecover import records
from optrecover.applications import synthesize
from optrecover.banach import TWO_PI, GridFunction
from optrecover.cli import cmd_attack, cmd_bounds, cmd_recover, cmd_sweep, cmd_validate, main
from optrecover.config import load_config, parse_config
from optrecover.exceptions import ConfigError
from optrecover.spectral import CoefficientVector
from optrecover.truncation import TruncationErrorBreakdown, worst_case_error

NUMDIFF = """
schema_version = 1
[problem]
type = "numdiff"
gamma = 4.0
[run]
deltas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
trials = 30
q = [2.0, 4.0, inf]
"""

GEOMETRIC = """
schema_version = 1
[problem]
type = "spectral"
ratio_monotone_from = 0
horizon = 200
[problem.mu]
rule = "general_form"
alpha = 0.5
[problem.xi]
rule = "general_form"
alpha = 1.0
[run]
deltas = [1e-1, 1e-3, 1e-6]
"""


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_numdiff(tmp_path):
    cfg = load_config(write(tmp_path, NUMDIFF))
    assert cfg.kind == "numdiff"
    assert cfg.q == (2.0, 4.0, math.inf)
    assert cfg.out_dir == tmp_path / "out"


def test_parse_error_has_line(tmp_path):
    with pytest.raises(ConfigError, match="line 3"):
        parse_config('schema_version = 1\n[problem]\ntype = = "x"\n')


def test_unknown_key_path():
    with pytest.raises(ConfigError, match="run.trails"):
        parse_config(NUMDIFF.replace("trials = 30", "trails = 30"))
    with pytest.raises(ConfigError, match="xi"):
        parse_config(GEOMETRIC.replace("alpha = 1.0", "alpha = 1.0\nfoo = 2"))


def test_missing_xi_rule():
    text = GEOMETRIC.split("[problem.xi]")[0] + "[run]\ndelta = 0.1\n"
    with pytest.raises(ConfigError, match="problem.xi"):
        parse_config(text)


def test_numdiff_gamma_gate():
    with pytest.raises(ConfigError, match="gamma > 2"):
        parse_config(NUMDIFF.replace("gamma = 4.0", "gamma = 1.5"))


def test_schema_version_required():
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config(NUMDIFF.replace("schema_version = 1", ""))


def test_overrides():
    cfg = parse_config(NUMDIFF).with_overrides(seed=9, q=["2", "inf"], match_const=2.0, trials=None)
    assert cfg.seed == 9 and cfg.q == (2.0, math.inf) and cfg.trials == 30
    assert cfg.strategy.constant == 2.0


def test_format_value():
    assert records.format_value(0.1) == "0.10000000000000001"
    assert records.format_value(3) == "3"
    assert records.format_value(math.inf) == "inf"
    assert records.format_value(True) == "true"


def test_validate_exit_codes(tmp_path):
    assert cmd_validate(parse_config(NUMDIFF)).code == 0
    assert main(["validate", "--config", str(write(tmp_path, NUMDIFF.replace("4.0", "1.5")))]) == 1
    assert main(["validate", "--config", str(tmp_path / "missing.toml")]) == 3


def test_bounds_example_row(tmp_path):
    cfg = parse_config(NUMDIFF.replace("deltas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]", "delta = 0.1"))
    cfg = cfg.with_overrides(out_dir=tmp_path)
    res = cmd_bounds(cfg)
    row = res.rows[0]
    assert row["n"] == 2 and row["lower_R_delta"] == pytest.approx(0.25)
    assert row["upper_truncation"] == pytest.approx(0.2693, abs=1e-4)
    assert row["k_delta"] == pytest.approx(4.123, abs=1e-3)
    header, rows = records.read_csv(tmp_path / "bounds.csv")
    assert header[0] == "delta" and len(rows) == 1


def test_bounds_window_empty_for_fast_growth(tmp_path):
    text = GEOMETRIC.replace("alpha = 1.0", "alpha = 3.0").replace("alpha = 0.5", "alpha = 1.0")
    text = text.replace("deltas = [1e-1, 1e-3, 1e-6]", "deltas = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]")
    res = cmd_bounds(parse_config(text).with_overrides(out_dir=tmp_path))
    assert any(r["window_empty"] for r in res.rows)


def test_recover_noisy_sine(tmp_path):
    x = np.arange(256) * TWO_PI / 256
    records.write_signal(tmp_path / "sig.csv", GridFunction(np.sin(x) + 1e-5 * np.cos(40 * x)))
    cfg = parse_config(NUMDIFF.replace("deltas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]", "delta = 1e-3"))
    res = cmd_recover(cfg.with_overrides(out_dir=tmp_path / "o"), tmp_path / "sig.csv")
    rep = json.loads((tmp_path / "o" / "recovery_report.json").read_text())
    assert rep["n"] == 6
    out = records.read_signal(tmp_path / "o" / "recovered.csv")
    assert np.allclose(out.samples, np.sin(x), atol=1e-12)


def test_recover_coefficients_exact(tmp_path):
    c = CoefficientVector({0: 1.0, 3: -0.5})
    records.write_coefficients(tmp_path / "c.json", c)
    cfg = parse_config(NUMDIFF.replace("deltas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]", "delta = 1e-3"))
    cmd_recover(cfg.with_overrides(out_dir=tmp_path), tmp_path / "c.json")
    est = records.read_coefficients(tmp_path / "recovered.json")
    assert np.allclose(est.to_dense(4), [1.0, 0, 0, -2.0], rtol=1e-14)


def test_recover_heat_round_trip(tmp_path):
    text = """
schema_version = 1
[problem]
type = "heat"
t = 1.0
T = 1.0
s = 2.0
[run]
delta = 1e-4
"""
    c = CoefficientVector({0: 1.0, 2: math.exp(-2.0)})
    records.write_coefficients(tmp_path / "u0.json", c)
    cmd_recover(parse_config(text).with_overrides(out_dir=tmp_path), tmp_path / "u0.json")
    est = records.read_coefficients(tmp_path / "recovered.json")
    assert np.allclose(est.to_dense(3), [1.0, 0.0, 1.0], rtol=1e-13)


def test_recover_io_error(tmp_path):
    cfg = write(tmp_path, NUMDIFF.replace("deltas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]", "delta = 1e-3"))
    assert main(["recover", "--config", str(cfg), str(tmp_path / "nope.csv")]) == 3


def test_attack_geometric_pass(tmp_path):
    res = cmd_attack(parse_config(GEOMETRIC).with_overrides(out_dir=tmp_path, trials=200))
    assert res.code == 0
    assert all(r["oracle_gap"] < 1e-12 for r in res.rows)
    assert json.loads((tmp_path / "witnesses.json").read_text())[0]["pair"]["label"] == "extremal-pair"


def test_attack_tampered_formula_fails(tmp_path):
    def tampered(problem, delta, n):
        br = worst_case_error(problem, delta, n)
        return TruncationErrorBreakdown(n, br.tail_term, br.noise_term, 0.9 * br.total)

    res = cmd_attack(parse_config(GEOMETRIC).with_overrides(out_dir=tmp_path, trials=20), formula=tampered)
    assert res.code == 2
    assert all(r["verdict"] == "FAIL" for r in res.rows)


def test_attack_deterministic(tmp_path):
    cfg = parse_config(GEOMETRIC).with_overrides(trials=2000)
    cmd_attack(cfg.with_overrides(out_dir=tmp_path / "a"))
    cmd_attack(cfg.with_overrides(out_dir=tmp_path / "b"))
    assert (tmp_path / "a" / "attack.csv").read_bytes() == (tmp_path / "b" / "attack.csv").read_bytes()


def test_sweep_outputs(tmp_path):
    res = cmd_sweep(parse_config(NUMDIFF).with_overrides(out_dir=tmp_path))
    assert res.code == 0
    fit = json.loads((tmp_path / "sweep_fit.json").read_text())
    assert 0.4 <= fit["slope"] <= 0.6
    header, rows = records.read_csv(tmp_path / "sweep.csv")
    assert header[:8] == ["delta", "n", "tail", "noise", "total", "lower", "empirical_max", "slope_so_far"]
    assert "lq_upper_inf" in header and len(rows) == 5
    header, _ = records.read_csv(tmp_path / "sweep_plot.csv")
    assert header == ["series", "delta", "y"]


def test_sweep_single_delta_flagged(tmp_path):
    cfg = parse_config(NUMDIFF.replace("deltas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6]", "delta = 1e-3"))
    cmd_sweep(cfg.with_overrides(out_dir=tmp_path, q=[]))
    fit = json.loads((tmp_path / "sweep_fit.json").read_text())
    assert fit["slope"] is None and "no-fit" in fit["flags"]


def test_main_sweep_via_flags(tmp_path, capsys):
    cfg = write(tmp_path, NUMDIFF)
    code = main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "x"), "--q", "2,inf",
                 "--trials", "5", "--seed", "3", "--horizon", "300", "--match-const", "1.0"])
    assert code == 0
    assert "slope" in capsys.readouterr().out
