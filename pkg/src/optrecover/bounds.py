"""Lower bounds on the optimal recovery error and optimality diagnostics.

Any continuous ``n``-functional information map combined with any algorithm
has worst-case error at least::

    max{ μ_{N_δ}/ξ_{N_δ},  min_{0<=k<=n} μ_k/ξ_k }

The sandwich report places the exact truncation error between these lower
bounds and checks which optimality inequalities apply at ``(δ, n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import FrozenSet, Optional

import numpy as np

from .sequences import GeneralForm
from .spectral import SpectralProblem, log_mu, log_xi, n_delta, ratio
from .truncation import worst_case_error

__all__ = [
    "SandwichReport",
    "RecoveryReport",
    "lower_bound_delta",
    "lower_bound_n_delta",
    "k_delta",
    "matching_window",
    "sandwich",
    "recovery_report",
    "check_undertruncation",
    "check_overtruncation",
    "check_matched_noise",
    "WINDOW_LOW",
    "WINDOW_HIGH",
]

# c' and c'' operationalising 1/ξ_n ≍ δ as c'/δ <= ξ_n <= c''/δ
WINDOW_LOW = 0.5
WINDOW_HIGH = 2.0

# relative slack on checked inequalities (round-off at equality cases)
RTOL = 1e-12

SQRT2 = math.sqrt(2.0)


def lower_bound_delta(problem: SpectralProblem, delta: float) -> float:
    """``μ_{N_δ}/ξ_{N_δ}``, a lower bound for every method at noise level δ."""
    return ratio(problem, n_delta(problem, delta))


def lower_bound_n_delta(problem: SpectralProblem, delta: float, n: int) -> float:
    """Lower bound for methods using ``n`` continuous functionals of the data."""
    if n < 0:
        raise ValueError("n must be >= 0")
    prefix_min = math.exp(float(np.min(problem.log_ratio_values(n + 1))))
    return max(lower_bound_delta(problem, delta), prefix_min)


def k_delta(problem: SpectralProblem, delta: float) -> float:
    """Optimality constant ``K_δ`` of the choice ``n = N_δ``.

    ``K_δ = (1 + (ξ_N/μ_N · μ_{N-1}/ξ_{N-1})²)^{1/2}`` with ``N = N_δ``; the
    inner quotient is formed in log-space.

    Raises
    ------
    ValueError
        If ``N_δ = 0`` (no index ``N_δ - 1``).
    """
    nd = n_delta(problem, delta)
    if nd == 0:
        raise ValueError("K_delta is undefined when N_delta = 0")
    log_inner = (log_xi(problem, nd) - log_mu(problem, nd)) + (log_mu(problem, nd - 1) - log_xi(problem, nd - 1))
    return math.sqrt(1.0 + math.exp(2.0 * log_inner))


def matching_window(problem: SpectralProblem, delta: float, low: float = WINDOW_LOW, high: float = WINDOW_HIGH) -> list:
    """Indices ``k`` with ``low/δ <= ξ_k <= high/δ``; may be empty for fast-growing ξ."""
    lo = math.log(low / delta)
    hi = math.log(high / delta)
    lx = problem.log_xi_values(problem.last_index + 1)
    return [int(k) for k in np.flatnonzero((lx >= lo) & (lx <= hi))]


def check_undertruncation(problem: SpectralProblem, delta: float, n: int) -> Optional[bool]:
    """For monotone ratio and ``n < N_δ``: ``ε(n) <= √2 μ_n/ξ_n``.  ``None`` if not applicable."""
    if not problem.monotone or n < 1 or n >= n_delta(problem, delta):
        return None
    return worst_case_error(problem, delta, n).total <= SQRT2 * ratio(problem, n) * (1 + RTOL)


def check_overtruncation(problem: SpectralProblem, delta: float, n: int) -> Optional[bool]:
    """For monotone ratio and ``n > N_δ >= 1``: ``ε(n) >= ε(N_δ)/√2``."""
    nd = n_delta(problem, delta)
    if not problem.monotone or nd < 1 or n <= nd:
        return None
    return worst_case_error(problem, delta, n).total >= worst_case_error(problem, delta, nd).total / SQRT2 * (1 - RTOL)


def check_matched_noise(problem: SpectralProblem, delta: float, c: float = 1.0) -> Optional[bool]:
    """If ``δ <= c/ξ_{N_δ}`` (``c >= 1``): ``ε(N_δ) <= (1+c²)^{1/2} μ_{N_δ}/ξ_{N_δ}``."""
    if c < 1:
        raise ValueError("c must be >= 1")
    nd = n_delta(problem, delta)
    if not problem.monotone or nd < 1:
        return None
    if math.log(delta) > math.log(c) - log_xi(problem, nd) + RTOL:
        return None
    bound = math.sqrt(1.0 + c * c) * ratio(problem, nd)
    return worst_case_error(problem, delta, nd).total <= bound * (1 + RTOL)


@dataclass(frozen=True)
class SandwichReport:
    """Lower bounds, exact truncation error and verified optimality flags at ``(δ, n)``."""

    delta: float
    n: int
    n_delta: int
    lower_R_delta: float
    lower_R_N_delta: float
    upper_truncation: float
    k_delta: float
    ratio_upper_to_lower: float
    flags: FrozenSet[str] = field(default_factory=frozenset)
    window_empty: bool = False

    def to_record(self) -> dict:
        return {
            "delta": self.delta,
            "n": self.n,
            "n_delta": self.n_delta,
            "lower_R_delta": self.lower_R_delta,
            "lower_R_N_delta": self.lower_R_N_delta,
            "upper_truncation": self.upper_truncation,
            "k_delta": self.k_delta,
            "ratio_upper_to_lower": self.ratio_upper_to_lower,
            "flags": ";".join(sorted(self.flags)),
            "window_empty": self.window_empty,
        }


def sandwich(problem: SpectralProblem, delta: float, n: int, c: float = 1.0) -> SandwichReport:
    """Assemble bounds at ``(δ, n)`` and flag every optimality inequality whose hypothesis
    holds and whose inequality was verified numerically.

    Flags: ``TH3``, ``TH4``, ``TH6``, ``TH7``, ``TH8`` (with constant ``c``)
    and ``TH9-regime`` (ξ in the slowly growing family and ``ξ_n`` inside the
    matching window).  ``window_empty`` is set when ξ is in that family but
    no index lands in the window at this δ.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    nd = n_delta(problem, delta)
    lower_d = lower_bound_delta(problem, delta)
    lower_nd = lower_bound_n_delta(problem, delta, n)
    total = worst_case_error(problem, delta, n).total
    kd = k_delta(problem, delta) if nd >= 1 else math.nan
    flags = set()

    if check_undertruncation(problem, delta, n):
        flags.add("TH3")
    if problem.monotone and nd >= 1 and n == nd:
        if total <= kd * lower_d * (1 + RTOL):
            flags.add("TH4")
        upper7 = math.hypot(ratio(problem, nd), ratio(problem, nd - 1))
        if lower_d <= total * (1 + RTOL) and total <= upper7 * (1 + RTOL):
            flags.add("TH7")
        if check_matched_noise(problem, delta, c):
            flags.add("TH8")
    if check_overtruncation(problem, delta, n):
        flags.add("TH6")

    window_empty = False
    xi = problem.xi
    if isinstance(xi, GeneralForm) and xi.beta <= 1.0:
        window = matching_window(problem, delta)
        if not window:
            window_empty = True
        elif n in window:
            flags.add("TH9-regime")

    return SandwichReport(
        delta=delta,
        n=n,
        n_delta=nd,
        lower_R_delta=lower_d,
        lower_R_N_delta=lower_nd,
        upper_truncation=total,
        k_delta=kd,
        ratio_upper_to_lower=total / lower_nd,
        flags=frozenset(flags),
        window_empty=window_empty,
    )


@dataclass(frozen=True)
class RecoveryReport:
    """What a recovery run used and how good it is guaranteed to be."""

    delta: float
    n: int
    n_delta: int
    strategy: str
    tail_term: float
    noise_term: float
    total: float
    lower_R_delta: float
    lower_R_N_delta: float
    optimality_ratio: float
    flags: FrozenSet[str] = field(default_factory=frozenset)

    def to_record(self) -> dict:
        rec = dict(self.__dict__)
        rec["flags"] = sorted(self.flags)
        return rec


def recovery_report(problem: SpectralProblem, delta: float, n: int, strategy: str = "") -> RecoveryReport:
    """Error split and lower bounds for a truncation run at level ``n``.

    Flags: ``clamped`` when ``N_δ = 0`` forced ``n = 1``; ``no-decay`` when
    ``μ_k/ξ_k`` does not decrease over the horizon (degenerate smoothness).
    """
    nd = n_delta(problem, delta)
    br = worst_case_error(problem, delta, n)
    lower_d = lower_bound_delta(problem, delta)
    lower_nd = lower_bound_n_delta(problem, delta, n)
    flags = set()
    if nd == 0 and n == 1:
        flags.add("clamped")
    lr = problem.log_ratio_values(problem.last_index + 1)
    if not lr[-1] < lr[0]:
        flags.add("no-decay")
    return RecoveryReport(
        delta=delta,
        n=n,
        n_delta=nd,
        strategy=strategy,
        tail_term=br.tail_term,
        noise_term=br.noise_term,
        total=br.total,
        lower_R_delta=lower_d,
        lower_R_N_delta=lower_nd,
        optimality_ratio=br.total / lower_nd,
        flags=frozenset(flags),
    )
