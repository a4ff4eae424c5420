"""Monotone sequence rules evaluated in log-space.

Every rule maps an index array ``k`` (0-based) to ``log s_k``.  Values are
never exponentiated here, so rules like ``k̄^s e^{λ_k T}`` stay finite for
any index a caller is likely to reach.

``k̄`` denotes ``max(1, k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .exceptions import ConfigError, HorizonError

__all__ = [
    "PowerLambda",
    "PowerPaired",
    "Power",
    "ExpOfLambda",
    "GeneralForm",
    "Tabulated",
    "Rule",
    "kbar",
    "rule_from_dict",
    "rule_to_dict",
]


def kbar(k):
    """``max(1, k)`` elementwise, as float."""
    return np.maximum(1.0, np.asarray(k, dtype=float))


def _as_index(k) -> np.ndarray:
    arr = np.asarray(k)
    if arr.size and (arr.min() < 0):
        raise IndexError("sequence indices must be >= 0")
    return arr.astype(np.int64)


class _Rule:
    """Mixin supplying the scalar accessor on top of ``log_values``."""

    #: number of tabulated entries, ``None`` for rules defined on all k
    length: Optional[int] = None

    def log_values(self, k) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def log_value(self, k: int) -> float:
        return float(self.log_values(np.array([k]))[0])


@dataclass(frozen=True)
class PowerLambda:
    """``λ_k = scale * k**gamma`` (plain k, so ``λ_0 = 0``).

    Used as the eigenvalue rule of the generator ``L`` in the parabolic
    problem.  Not a log-space rule: :meth:`__call__` returns λ itself.
    """

    gamma: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0 or self.scale <= 0:
            raise ValueError("PowerLambda needs gamma > 0 and scale > 0")

    def __call__(self, k) -> np.ndarray:
        return self.scale * np.asarray(k, dtype=float) ** self.gamma


@dataclass(frozen=True)
class PowerPaired(_Rule):
    """``s_{2k} = s_{2k+1} = (k+1)**p``; the spectrum of ``-d²/dx²`` for p=2."""

    p: float = 2.0

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("PowerPaired needs p > 0")

    def log_values(self, k) -> np.ndarray:
        k = _as_index(k)
        return self.p * np.log(k // 2 + 1.0)


@dataclass(frozen=True)
class Power(_Rule):
    """``s_k = k̄**p``."""

    p: float = 1.0

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError("Power needs p > 0")

    def log_values(self, k) -> np.ndarray:
        k = _as_index(k)
        return self.p * np.log(kbar(k))


@dataclass(frozen=True)
class ExpOfLambda(_Rule):
    """``s_k = k̄**power * exp(λ_k t)``.

    With ``power=0`` this is the eigenvalue sequence ``e^{λ_k t}`` of the
    backward parabolic solution operator; with ``power=s, t=T`` it is the
    matching smoothness sequence.

    ``lam`` is a :class:`PowerLambda` or any vectorised callable returning
    nondecreasing, nonnegative values.
    """

    lam: Callable = PowerLambda()
    t: float = 1.0
    power: float = 0.0

    def __post_init__(self):
        if self.t < 0 or self.power < 0:
            raise ValueError("ExpOfLambda needs t >= 0 and power >= 0")

    def log_values(self, k) -> np.ndarray:
        k = _as_index(k)
        lam = np.asarray(self.lam(k), dtype=float)
        out = self.t * lam
        if self.power:
            out = out + self.power * np.log(kbar(k))
        return out


@dataclass(frozen=True)
class GeneralForm(_Rule):
    """``s_k = c * k̄**eta * exp(alpha * k**beta)``.

    Parameter ranges follow the slowly growing family: ``c > 0``,
    ``eta, alpha >= 0``, ``0 <= beta <= 1`` and ``alpha + eta > 0``.
    """

    c: float = 1.0
    eta: float = 0.0
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("GeneralForm needs c > 0")
        if self.eta < 0 or self.alpha < 0:
            raise ValueError("GeneralForm needs eta, alpha >= 0")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("GeneralForm needs 0 <= beta <= 1")
        if not self.alpha + self.eta > 0:
            raise ValueError("GeneralForm needs alpha + eta > 0")

    def log_values(self, k) -> np.ndarray:
        k = _as_index(k)
        kf = k.astype(float)
        out = math.log(self.c) + self.alpha * kf**self.beta
        if self.eta:
            out = out + self.eta * np.log(kbar(k))
        return out


@dataclass(frozen=True)
class Tabulated(_Rule):
    """Explicit ``log s_k`` values for ``k < len(log_values)``.

    Beyond the table the optional ``tail`` rule is evaluated at the absolute
    index; without one the sequence is finite and lookups past its end raise
    :class:`HorizonError`.
    """

    log_values_: tuple = ()
    tail: Optional["Rule"] = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.log_values_)
        if not vals:
            raise ValueError("Tabulated needs at least one value")
        object.__setattr__(self, "log_values_", vals)

    @property
    def length(self) -> Optional[int]:  # type: ignore[override]
        return None if self.tail is not None else len(self.log_values_)

    def log_values(self, k) -> np.ndarray:
        k = _as_index(k)
        table = np.asarray(self.log_values_)
        n = table.size
        inside = k < n
        if inside.all():
            return table[k]
        if self.tail is None:
            bad = int(k[~inside].max())
            raise HorizonError(f"index {bad} beyond tabulated length {n} and no tail rule")
        out = np.empty(k.shape, dtype=float)
        out[inside] = table[k[inside]]
        out[~inside] = self.tail.log_values(k[~inside])
        return out


Rule = Union[PowerPaired, Power, ExpOfLambda, GeneralForm, Tabulated]


# --------------------------------------------------------------------------
# dict (de)serialisation used by the config loader and report records


def _take(d: dict, allowed: Sequence[str], where: str) -> dict:
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")
    return d


def _lambda_from_dict(d, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a table")
    d = dict(d)
    tag = d.pop("rule", "power")
    if tag != "power":
        raise ConfigError(f"{where}.rule: unsupported lambda rule {tag!r}")
    _take(d, ("gamma", "scale"), where)
    return PowerLambda(gamma=float(d.get("gamma", 1.0)), scale=float(d.get("scale", 1.0)))


def rule_from_dict(d: dict, where: str = "rule") -> Rule:
    """Build a rule from its tagged-table form, e.g. ``{"rule": "power", "p": 4}``."""
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a table with a 'rule' tag")
    d = dict(d)
    if "rule" not in d:
        raise ConfigError(f"{where}: missing 'rule' tag")
    tag = d.pop("rule")
    try:
        if tag == "power_paired":
            _take(d, ("p",), where)
            return PowerPaired(p=float(d.get("p", 2.0)))
        if tag == "power":
            _take(d, ("p",), where)
            return Power(p=float(d["p"]))
        if tag == "exp_of_lambda":
            _take(d, ("lambda", "t", "power"), where)
            lam = _lambda_from_dict(d.get("lambda", {}), f"{where}.lambda")
            return ExpOfLambda(lam=lam, t=float(d["t"]), power=float(d.get("power", 0.0)))
        if tag == "general_form":
            _take(d, ("c", "eta", "alpha", "beta"), where)
            return GeneralForm(
                c=float(d.get("c", 1.0)),
                eta=float(d.get("eta", 0.0)),
                alpha=float(d.get("alpha", 0.0)),
                beta=float(d.get("beta", 1.0)),
            )
        if tag == "tabulated":
            _take(d, ("log_values", "tail"), where)
            tail = d.get("tail")
            tail_rule = rule_from_dict(tail, f"{where}.tail") if tail is not None else None
            return Tabulated(tuple(d["log_values"]), tail=tail_rule)
    except KeyError as exc:
        raise ConfigError(f"{where}: missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}.rule: unknown rule tag {tag!r}")


def rule_to_dict(rule: Rule) -> dict:
    if isinstance(rule, PowerPaired):
        return {"rule": "power_paired", "p": rule.p}
    if isinstance(rule, Power):
        return {"rule": "power", "p": rule.p}
    if isinstance(rule, ExpOfLambda):
        if not isinstance(rule.lam, PowerLambda):
            raise TypeError("only PowerLambda eigenvalue rules are serialisable")
        lam = {"rule": "power", "gamma": rule.lam.gamma, "scale": rule.lam.scale}
        return {"rule": "exp_of_lambda", "lambda": lam, "t": rule.t, "power": rule.power}
    if isinstance(rule, GeneralForm):
        return {"rule": "general_form", "c": rule.c, "eta": rule.eta,
                "alpha": rule.alpha, "beta": rule.beta}
    if isinstance(rule, Tabulated):
        out = {"rule": "tabulated", "log_values": list(rule.log_values_)}
        if rule.tail is not None:
            out["tail"] = rule_to_dict(rule.tail)
        return out
    raise TypeError(f"unknown rule type {type(rule).__name__}")
