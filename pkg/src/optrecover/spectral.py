"""Spectral problem ``(A, W)``: eigenvalues, smoothness weights, coefficient vectors.

A problem is the pair of log-space sequences ``log μ_k`` (eigenvalues of the
operator ``A``) and ``log ξ_k`` (weights of the smoothness ball ``W``).  All
quantities that could overflow are formed as ``exp`` of log differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional

import numpy as np

from .exceptions import HorizonError, UncertifiedTailError
from .sequences import Rule, rule_from_dict, rule_to_dict

__all__ = [
    "SpectralProblem",
    "CoefficientVector",
    "NoisyObservation",
    "Violation",
    "log_mu",
    "log_xi",
    "ratio",
    "n_delta",
    "tail_argmax",
    "tail_sup_ratio",
    "validate",
    "h_norm",
    "w_norm",
]

DEFAULT_HORIZON = 10_000

# relative slack when comparing log ξ_N with log(1/δ); absorbs exp/log
# round-off for a δ constructed as exactly 1/ξ_N
_LOG_SLACK = 1e-13
# relative slack in monotonicity checks on log-sequences
_MONO_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralProblem:
    """Eigenvalue rule ``mu`` and smoothness rule ``xi`` of a recovery problem.

    Parameters
    ----------
    mu, xi : Rule
        Log-space sequence rules for ``μ_k`` and ``ξ_k``.
    ratio_monotone_from : int, optional
        Index ``K0`` from which ``μ_k/ξ_k`` is certified nonincreasing.
        ``0`` is the standing monotone assumption under which the optimality
        theorems hold.  ``None`` means no certificate.
    ratio_stride : int
        Stride ``p`` of the certificate: ``μ_{k+p}/ξ_{k+p} <= μ_k/ξ_k`` for
        ``k >= K0``.  ``p = 2`` covers paired spectra such as ``-d²/dx²``
        with smoothness ``k̄^γ``, ``2 < γ < 4``, whose ratio is not monotone.
    horizon : int
        Largest index scanned by searches (``n_delta``, validation).
    """

    mu: Rule
    xi: Rule
    ratio_monotone_from: Optional[int] = None
    horizon: int = DEFAULT_HORIZON
    ratio_stride: int = 1

    def __post_init__(self):
        if self.ratio_stride < 1:
            raise ValueError("ratio_stride must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.ratio_monotone_from is not None and self.ratio_monotone_from < 0:
            raise ValueError("ratio_monotone_from must be >= 0")

    @property
    def length(self) -> Optional[int]:
        """Number of defined indices if either sequence is a finite table."""
        lengths = [r.length for r in (self.mu, self.xi) if r.length is not None]
        return min(lengths) if lengths else None

    @property
    def last_index(self) -> int:
        """Largest index covered by scans: the horizon, clipped to finite tables."""
        n = self.length
        return self.horizon if n is None else min(self.horizon, n - 1)

    @property
    def monotone(self) -> bool:
        """Whether the full chain ``μ_0/ξ_0 >= μ_1/ξ_1 >= ...`` is certified."""
        return self.ratio_monotone_from == 0 and self.ratio_stride == 1

    @cached_property
    def _log_mu_table(self) -> np.ndarray:
        return np.asarray(self.mu.log_values(np.arange(self.last_index + 1)), dtype=float)

    @cached_property
    def _log_xi_table(self) -> np.ndarray:
        return np.asarray(self.xi.log_values(np.arange(self.last_index + 1)), dtype=float)

    def log_mu_values(self, stop: int) -> np.ndarray:
        """``log μ_k`` for ``k < stop``."""
        if stop <= self.last_index + 1:
            return self._log_mu_table[:stop]
        return np.asarray(self.mu.log_values(np.arange(stop)), dtype=float)

    def log_xi_values(self, stop: int) -> np.ndarray:
        if stop <= self.last_index + 1:
            return self._log_xi_table[:stop]
        return np.asarray(self.xi.log_values(np.arange(stop)), dtype=float)

    def log_ratio_values(self, stop: int) -> np.ndarray:
        return self.log_mu_values(stop) - self.log_xi_values(stop)

    def to_dict(self) -> dict:
        out = {"mu": rule_to_dict(self.mu), "xi": rule_to_dict(self.xi), "horizon": self.horizon}
        if self.ratio_monotone_from is not None:
            out["ratio_monotone_from"] = self.ratio_monotone_from
        if self.ratio_stride != 1:
            out["ratio_stride"] = self.ratio_stride
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "SpectralProblem":
        return cls(
            mu=rule_from_dict(d["mu"], "mu"),
            xi=rule_from_dict(d["xi"], "xi"),
            ratio_monotone_from=d.get("ratio_monotone_from"),
            horizon=int(d.get("horizon", DEFAULT_HORIZON)),
            ratio_stride=int(d.get("ratio_stride", 1)),
        )


def _check_index(k: int) -> int:
    k = int(k)
    if k < 0:
        raise IndexError("index must be >= 0")
    return k


def log_mu(problem: SpectralProblem, k: int) -> float:
    """``log μ_k``."""
    k = _check_index(k)
    if k <= problem.last_index:
        return float(problem._log_mu_table[k])
    return problem.mu.log_value(k)


def log_xi(problem: SpectralProblem, k: int) -> float:
    """``log ξ_k``."""
    k = _check_index(k)
    if k <= problem.last_index:
        return float(problem._log_xi_table[k])
    return problem.xi.log_value(k)


def ratio(problem: SpectralProblem, k: int) -> float:
    """``μ_k / ξ_k``, formed as ``exp(log μ_k - log ξ_k)``."""
    return math.exp(log_mu(problem, k) - log_xi(problem, k))


def n_delta(problem: SpectralProblem, delta: float) -> int:
    """Smallest ``N >= 0`` with ``ξ_N >= 1/δ``.

    Raises
    ------
    HorizonError
        If no index up to ``problem.last_index`` qualifies.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    target = -math.log(delta)
    target -= _LOG_SLACK * max(1.0, abs(target))
    hits = np.flatnonzero(problem._log_xi_table >= target)
    if hits.size == 0:
        raise HorizonError(
            f"xi_k < 1/delta for all k <= {problem.last_index}; delta={delta!r} too small for the horizon"
        )
    return int(hits[0])


def tail_argmax(problem: SpectralProblem, n: int) -> int:
    """Smallest index ``l >= n`` attaining ``sup_{k>=n} μ_k/ξ_k``.

    Under a certificate from ``K0`` with stride ``p`` only
    ``[n, max(n, K0) + p - 1]`` needs scanning: every later index is dominated
    by one of those.  Finite problems are scanned to their last index.
    """
    n = _check_index(n)
    k0 = problem.ratio_monotone_from
    if k0 is not None:
        p = problem.ratio_stride
        if p == 1 and n >= k0:
            return n
        stop = max(n, k0) + p - 1
    elif problem.length is not None:
        stop = problem.length - 1
        if n > stop:
            raise HorizonError(f"index {n} beyond finite problem of length {problem.length}")
    else:
        raise UncertifiedTailError(
            "sup of mu_k/xi_k over an infinite tail needs ratio_monotone_from or a finite table"
        )
    logs = problem.log_ratio_values(stop + 1)[n:]
    return n + int(np.argmax(logs))


def tail_sup_ratio(problem: SpectralProblem, n: int) -> float:
    """``sup_{k>=n} μ_k/ξ_k``; see :func:`tail_argmax` for how the sup is certified."""
    return ratio(problem, tail_argmax(problem, n))


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str
    index: Optional[int] = None


def _first_decrease(logs: np.ndarray) -> Optional[int]:
    if logs.size < 2:
        return None
    tol = _MONO_RTOL * np.maximum(1.0, np.abs(logs[:-1]))
    bad = np.flatnonzero(logs[1:] < logs[:-1] - tol)
    return int(bad[0]) if bad.size else None


def validate(problem: SpectralProblem) -> list:
    """Check positivity, monotonicity and ratio decay up to ``problem.last_index``.

    Returns a list of :class:`Violation`; empty means the problem is usable.
    """
    out = []
    stop = problem.last_index + 1
    lm = problem.log_mu_values(stop)
    lx = problem.log_xi_values(stop)
    for name, logs in (("mu", lm), ("xi", lx)):
        if not np.all(np.isfinite(logs)):
            k = int(np.flatnonzero(~np.isfinite(logs))[0])
            out.append(Violation("positivity", f"{name}_{k} is not a positive finite number", k))
            continue
        k = _first_decrease(logs)
        if k is not None:
            out.append(Violation("monotonicity", f"{name}_{k + 1} < {name}_{k}", k + 1))
    if out:
        return out
    lr = lm - lx
    if stop < 2 or not lr[-1] < lr[0]:
        out.append(
            Violation("ratio-decay", f"mu_k/xi_k does not decrease between k=0 and k={stop - 1}")
        )
    k0 = problem.ratio_monotone_from
    if k0 is not None:
        if k0 > stop - 1:
            out.append(Violation("certificate", f"ratio_monotone_from={k0} beyond last index {stop - 1}", k0))
        else:
            p = problem.ratio_stride
            tail = lr[k0:]
            tol = _MONO_RTOL * np.maximum(1.0, np.abs(tail[:-p]))
            bad = np.flatnonzero(tail[p:] > tail[:-p] + tol)
            if bad.size:
                idx = k0 + int(bad[0]) + p
                out.append(Violation(
                    "certificate",
                    f"ratio increases at k={idx} (stride {p}) despite certificate from {k0}",
                    idx,
                ))
    return out


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Finitely supported coefficients ``<f, w_k>`` in the eigenbasis.

    Exact zeros are dropped on construction, so ``{}`` is the zero element.
    """

    entries: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.entries).items():
            k = int(k)
            if k < 0:
                raise ValueError("coefficient indices must be >= 0")
            v = float(v)
            if v != 0.0:
                clean[k] = v
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @classmethod
    def from_dense(cls, values: Iterable[float], offset: int = 0) -> "CoefficientVector":
        return cls({offset + i: v for i, v in enumerate(np.asarray(values, dtype=float).ravel())})

    def to_dense(self, size: Optional[int] = None) -> np.ndarray:
        if size is None:
            size = self.stop
        out = np.zeros(size)
        for k, v in self.entries.items():
            if k < size:
                out[k] = v
        return out

    @property
    def support(self) -> list:
        return list(self.entries)

    @property
    def stop(self) -> int:
        """One past the largest supported index (0 for the zero vector)."""
        return max(self.entries) + 1 if self.entries else 0

    def get(self, k: int) -> float:
        return self.entries.get(k, 0.0)

    def truncate(self, n: int) -> "CoefficientVector":
        """Partial sum ``S_n``: keep indices below ``n``."""
        return CoefficientVector({k: v for k, v in self.entries.items() if k < n})

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, CoefficientVector):
            return NotImplemented
        return self.entries == other.entries

    def __add__(self, other: "CoefficientVector") -> "CoefficientVector":
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0.0) + v
        return CoefficientVector(out)

    def __sub__(self, other: "CoefficientVector") -> "CoefficientVector":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "CoefficientVector":
        return CoefficientVector({k: scalar * v for k, v in self.entries.items()})

    __rmul__ = __mul__

    def __repr__(self):
        return f"CoefficientVector({self.entries!r})"

    def to_record(self) -> dict:
        return {"index": list(self.entries), "value": list(self.entries.values())}

    @classmethod
    def from_record(cls, rec: Mapping) -> "CoefficientVector":
        idx, val = rec["index"], rec["value"]
        if len(idx) != len(val):
            raise ValueError("index and value lists differ in length")
        return cls(dict(zip(idx, val)))


@dataclass(frozen=True)
class NoisyObservation:
    """Data ``f^δ`` known to lie within ``delta`` of the exact element in H-norm."""

    coeffs: CoefficientVector
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")


def h_norm(v: CoefficientVector) -> float:
    """``||v||_H`` by Parseval."""
    if not v.entries:
        return 0.0
    return float(np.linalg.norm(np.fromiter(v.entries.values(), float)))


def w_norm(problem: SpectralProblem, v: CoefficientVector) -> float:
    """``||v||_W = (Σ ξ_k² v_k²)^{1/2}``, weights applied in log-space."""
    if not v.entries:
        return 0.0
    idx = np.fromiter(v.entries, int)
    vals = np.fromiter(v.entries.values(), float)
    lx = problem.xi.log_values(idx) if idx.max() > problem.last_index else problem._log_xi_table[idx]
    return float(np.linalg.norm(np.exp(lx + np.log(np.abs(vals)))))
