"""Truncation method: keep the first ``n`` coefficients of the data, apply ``A``.

The information map returns ``[<f^δ, w_k>]_{k<n}``, the algorithm multiplies
each entry by ``μ_k``.  Its worst-case error over the unit ball of ``W`` and
all δ-perturbations is known in closed form::

    ε(n) = ( sup_{k>=n} μ_k²/ξ_k² + δ² μ_{n-1}² )^{1/2}
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .exceptions import HorizonError
from .spectral import (
    CoefficientVector,
    NoisyObservation,
    SpectralProblem,
    log_mu,
    n_delta,
    tail_sup_ratio,
)

__all__ = [
    "TruncationErrorBreakdown",
    "NDeltaRule",
    "MinimizeFormula",
    "MatchedOrder",
    "SelectionStrategy",
    "info_map",
    "reconstruct",
    "apply",
    "worst_case_error",
    "select_n",
]


@dataclass(frozen=True)
class TruncationErrorBreakdown:
    """Exact worst-case error of the truncation method at level ``n``."""

    n: int
    tail_term: float
    noise_term: float
    total: float


@dataclass(frozen=True)
class NDeltaRule:
    """``n = max(1, N_δ)``."""

    name = "n_delta"


@dataclass(frozen=True)
class MinimizeFormula:
    """Argmin of the exact error over ``1 <= n <= n_max``.

    ``n_max=None`` scans to ``N_δ + margin``; beyond ``N_δ`` the error cannot
    improve by more than a factor ``√2``.
    """

    n_max: Optional[int] = None
    margin: int = 8
    name = "minimize"

    def __post_init__(self):
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be >= 1")


@dataclass(frozen=True)
class MatchedOrder:
    """Smallest ``n`` whose scale reaches ``constant/δ``.

    The scale is ``log ξ_n`` unless ``log_scale(problem, n)`` is given, so the
    default reproduces ``1/ξ_n ≍ δ`` with implied constant ``constant``.
    """

    constant: float = 1.0
    log_scale: Optional[Callable[[SpectralProblem, int], float]] = None
    name = "matched"

    def __post_init__(self):
        if not self.constant > 0:
            raise ValueError("matching constant must be positive")


SelectionStrategy = Union[NDeltaRule, MinimizeFormula, MatchedOrder]


def _check_n(n: int) -> int:
    n = int(n)
    if n < 1:
        raise ValueError("truncation level n must be >= 1 (the method references mu_{n-1})")
    return n


def info_map(f_delta: CoefficientVector, n: int) -> np.ndarray:
    """First ``n`` coefficients of the data, zeros where unsupported."""
    return f_delta.to_dense(_check_n(n))


def reconstruct(problem: SpectralProblem, x) -> CoefficientVector:
    """``Σ_{k<n} μ_k x_k w_k`` as a coefficient vector."""
    x = np.asarray(x, dtype=float).ravel()
    _check_n(x.size)
    lm = problem.log_mu_values(x.size)
    out = {}
    for k in np.flatnonzero(x):
        out[int(k)] = math.copysign(math.exp(lm[k] + math.log(abs(x[k]))), x[k])
    return CoefficientVector(out)


def apply(problem: SpectralProblem, obs, n: int) -> CoefficientVector:
    """``A S_n f^δ``; ``obs`` may be a :class:`NoisyObservation` or bare coefficients."""
    coeffs = obs.coeffs if isinstance(obs, NoisyObservation) else obs
    return reconstruct(problem, info_map(coeffs, n))


def worst_case_error(problem: SpectralProblem, delta: float, n: int) -> TruncationErrorBreakdown:
    """Exact worst-case error of the truncation method with ``n`` terms.

    Equality, not an upper bound: the extremal pair of
    :func:`optrecover.adversary.extremal_pair` attains it.
    """
    n = _check_n(n)
    if not delta > 0:
        raise ValueError("delta must be positive")
    tail = tail_sup_ratio(problem, n)
    noise = math.exp(math.log(delta) + log_mu(problem, n - 1))
    return TruncationErrorBreakdown(n=n, tail_term=tail, noise_term=noise, total=math.hypot(tail, noise))


def select_n(problem: SpectralProblem, delta: float, strategy: SelectionStrategy = NDeltaRule()) -> int:
    """Truncation level chosen by ``strategy`` (always ``>= 1``)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if isinstance(strategy, NDeltaRule):
        return max(1, n_delta(problem, delta))
    if isinstance(strategy, MinimizeFormula):
        n_max = strategy.n_max
        if n_max is None:
            n_max = max(1, n_delta(problem, delta)) + strategy.margin
        best_n, best = 1, math.inf
        for n in range(1, n_max + 1):
            total = worst_case_error(problem, delta, n).total
            if total < best:
                best_n, best = n, total
        return best_n
    if isinstance(strategy, MatchedOrder):
        target = math.log(strategy.constant / delta)
        target -= 1e-13 * max(1.0, abs(target))
        if strategy.log_scale is None:
            hits = np.flatnonzero(problem.log_xi_values(problem.last_index + 1) >= target)
            if hits.size:
                return max(1, int(hits[0]))
        else:
            for n in range(0, problem.last_index + 1):
                if strategy.log_scale(problem, n) >= target:
                    return max(1, n)
        raise HorizonError(f"matching rule not met up to index {problem.last_index}")
    raise TypeError(f"unknown selection strategy {strategy!r}")
