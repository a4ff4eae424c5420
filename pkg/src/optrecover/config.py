"""Run configuration read from TOML.

Example::

    schema_version = 1

    [problem]
    type = "numdiff"          # numdiff | heat | spectral
    gamma = 4.0

    [run]
    deltas = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7]
    strategy = "matched"      # matched | n_delta | minimize
    trials = 200
    seed = 0
    q = [2.0, 4.0, inf]

    [output]
    dir = "out"

A ``spectral`` problem gives its sequences as tagged rule tables::

    [problem]
    type = "spectral"
    ratio_monotone_from = 0
    [problem.mu]
    rule = "power_paired"
    p = 2.0
    [problem.xi]
    rule = "general_form"
    eta = 4.0

Unknown keys anywhere are rejected with their dotted path.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import tomli

from .applications import APP_HORIZON, Custom, Heat, HeatProblem, NumDiff
from .exceptions import ConfigError
from .sequences import PowerLambda
from .spectral import DEFAULT_HORIZON, SpectralProblem
from .truncation import MatchedOrder, MinimizeFormula, NDeltaRule

__all__ = ["SCHEMA_VERSION", "RunConfig", "load_config", "parse_config"]

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema_version", "problem", "run", "output"}
_PROBLEM_KEYS = {
    "numdiff": {"type", "gamma", "horizon"},
    "heat": {"type", "t", "T", "s", "gamma", "lambda_scale", "horizon"},
    "spectral": {"type", "mu", "xi", "horizon", "ratio_monotone_from", "ratio_stride", "label"},
}
_RUN_KEYS = {
    "delta", "deltas", "strategy", "n_max", "match_const", "trials", "seed",
    "q", "horizon", "matched_noise_c", "tolerance", "input", "samples",
}
_OUTPUT_KEYS = {"dir"}
_STRATEGIES = ("matched", "n_delta", "minimize")


@dataclass(frozen=True)
class RunConfig:
    """A validated run: problem, δ grid, selection strategy and output place.

    ``horizon`` bounds the support of brute-force attacks and the range over
    which ``L_q`` constants are certified; ``None`` lets each command pick.
    """

    app: Union[NumDiff, Heat, Custom]
    deltas: tuple
    strategy_name: str = "matched"
    match_const: float = 1.0
    n_max: Optional[int] = None
    trials: int = 200
    seed: int = 0
    q: tuple = ()
    horizon: Optional[int] = None
    matched_noise_c: float = 1.0
    tolerance: float = 1e-12
    samples: int = 4096
    input: Optional[Path] = None
    out_dir: Path = Path("out")
    source: Optional[Path] = None

    @property
    def problem(self) -> SpectralProblem:
        return self.app.problem()

    @property
    def kind(self) -> str:
        return {NumDiff: "numdiff", Heat: "heat", Custom: "spectral"}[type(self.app)]

    @property
    def strategy(self):
        if self.strategy_name == "matched":
            return MatchedOrder(constant=self.match_const)
        if self.strategy_name == "minimize":
            return MinimizeFormula(n_max=self.n_max)
        return NDeltaRule()

    def with_overrides(self, **kw) -> "RunConfig":
        """Replace fields whose override is not ``None`` (command-line flags)."""
        changes = {k: v for k, v in kw.items() if v is not None}
        if "q" in changes:
            changes["q"] = tuple(_q_value(v, "--q") for v in changes["q"])
        if "out_dir" in changes:
            changes["out_dir"] = Path(changes["out_dir"])
        cfg = dataclasses.replace(self, **changes)
        _check_run(cfg)
        return cfg


def _unknown(table: dict, allowed: set, where: str):
    extra = sorted(set(table) - allowed)
    if extra:
        path = f"{where}.{extra[0]}" if where else extra[0]
        raise ConfigError(f"unknown key '{path}'")


def _table(d: dict, key: str) -> dict:
    v = d.get(key, {})
    if not isinstance(v, dict):
        raise ConfigError(f"'{key}' must be a table")
    return v


def _number(v, where: str, kind=float):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{where}' must be a number, got {v!r}")
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"'{where}' must be an integer, got {v!r}")
        return int(v)
    return float(v)


def _q_value(v, where: str) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "infinity"):
            return math.inf
        try:
            v = float(v)
        except ValueError:
            raise ConfigError(f"'{where}': bad exponent {v!r}") from None
    q = _number(v, where)
    if not q >= 2:
        raise ConfigError(f"'{where}': q must lie in [2, inf], got {q}")
    return q


def _build_app(p: dict):
    kind = p.get("type")
    if kind not in _PROBLEM_KEYS:
        raise ConfigError(f"'problem.type' must be one of {sorted(_PROBLEM_KEYS)}, got {kind!r}")
    _unknown(p, _PROBLEM_KEYS[kind], "problem")
    try:
        if kind == "numdiff":
            if "gamma" not in p:
                raise ConfigError("missing key 'problem.gamma'")
            gamma = _number(p["gamma"], "problem.gamma")
            if not gamma > 2:
                raise ConfigError(f"'problem.gamma': numerical differentiation needs gamma > 2, got {gamma}")
            return NumDiff(gamma, horizon=_number(p.get("horizon", APP_HORIZON), "problem.horizon", int))
        if kind == "heat":
            if "t" not in p:
                raise ConfigError("missing key 'problem.t'")
            gamma = _number(p.get("gamma", 1.0), "problem.gamma")
            lam = PowerLambda(gamma, _number(p.get("lambda_scale", 1.0), "problem.lambda_scale"))
            hp = HeatProblem(
                t=_number(p["t"], "problem.t"),
                T=_number(p.get("T", 1.0), "problem.T"),
                s=_number(p.get("s", 0.0), "problem.s"),
                gamma=gamma,
                lam=lam,
            )
            return Heat(hp, horizon=_number(p.get("horizon", APP_HORIZON), "problem.horizon", int))
        for key in ("mu", "xi"):
            if key not in p:
                raise ConfigError(f"missing rule table 'problem.{key}'")
        d = dict(p)
        d.setdefault("horizon", DEFAULT_HORIZON)
        problem = SpectralProblem.from_dict(d)
        return Custom(problem, label=str(p.get("label", "spectral")))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"problem: {exc}") from None


def _check_run(cfg: RunConfig):
    if not cfg.deltas:
        raise ConfigError("no noise level given: set 'run.delta' or 'run.deltas'")
    for d in cfg.deltas:
        if not d > 0:
            raise ConfigError(f"'run.deltas': noise levels must be positive, got {d}")
    if cfg.strategy_name not in _STRATEGIES:
        raise ConfigError(f"'run.strategy' must be one of {list(_STRATEGIES)}, got {cfg.strategy_name!r}")
    if not cfg.match_const > 0:
        raise ConfigError("'run.match_const' must be positive")
    if cfg.trials < 0:
        raise ConfigError("'run.trials' must be >= 0")
    if cfg.seed < 0:
        raise ConfigError("'run.seed' must be a nonnegative integer")
    if cfg.horizon is not None and cfg.horizon < 1:
        raise ConfigError("'run.horizon' must be >= 1")
    if cfg.matched_noise_c < 1:
        raise ConfigError("'run.matched_noise_c' must be >= 1")
    if not cfg.tolerance > 0:
        raise ConfigError("'run.tolerance' must be positive")
    if cfg.samples < 4:
        raise ConfigError("'run.samples' must be >= 4")


def parse_config(text: str, source: Optional[Path] = None) -> RunConfig:
    """Parse and validate TOML text.  Paths are resolved against ``source``'s folder."""
    where = str(source) if source else "<config>"
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    _unknown(doc, _TOP_KEYS, "")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"'schema_version' must be {SCHEMA_VERSION}, got {version!r}")
    if "problem" not in doc:
        raise ConfigError("missing table 'problem'")
    app = _build_app(_table(doc, "problem"))

    run = _table(doc, "run")
    _unknown(run, _RUN_KEYS, "run")
    if "delta" in run and "deltas" in run:
        raise ConfigError("give either 'run.delta' or 'run.deltas', not both")
    if "deltas" in run:
        raw = run["deltas"]
        if not isinstance(raw, list):
            raise ConfigError("'run.deltas' must be a list")
        deltas = tuple(_number(v, "run.deltas") for v in raw)
    elif "delta" in run:
        deltas = (_number(run["delta"], "run.delta"),)
    else:
        deltas = ()
    q = run.get("q", [])
    if not isinstance(q, list):
        q = [q]
    base = source.parent if source else Path(".")
    out = _table(doc, "output")
    _unknown(out, _OUTPUT_KEYS, "output")
    cfg = RunConfig(
        app=app,
        deltas=deltas,
        strategy_name=str(run.get("strategy", "matched")),
        match_const=_number(run.get("match_const", 1.0), "run.match_const"),
        n_max=_number(run["n_max"], "run.n_max", int) if "n_max" in run else None,
        trials=_number(run.get("trials", 200), "run.trials", int),
        seed=_number(run.get("seed", 0), "run.seed", int),
        q=tuple(_q_value(v, "run.q") for v in q),
        horizon=_number(run["horizon"], "run.horizon", int) if "horizon" in run else None,
        matched_noise_c=_number(run.get("matched_noise_c", 1.0), "run.matched_noise_c"),
        tolerance=_number(run.get("tolerance", 1e-12), "run.tolerance"),
        samples=_number(run.get("samples", 4096), "run.samples", int),
        input=base / run["input"] if "input" in run else None,
        out_dir=base / out.get("dir", "out"),
        source=source,
    )
    _check_run(cfg)
    return cfg


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read a config file; I/O failures propagate as ``OSError``."""
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), path)
