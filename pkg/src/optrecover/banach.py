"""Error bounds in ``L_q(Q)``, ``2 <= q <= ∞``, on a compact domain ``Q``.

The upper bound for the truncation method needs two summability constants
valid at the truncation level ``N``::

    (Σ_{k<=N} μ_k²)^{1/2}        <= c1 μ_N
    (Σ_{k>=N} μ_k²/ξ_k²)^{1/2}   <= c2 μ_N/ξ_N

and a uniform bound ``χ`` on the sup-norms of the basis functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import NotCertifiableError
from .spectral import SpectralProblem, log_mu, n_delta, ratio

__all__ = [
    "BanachContext",
    "Constants",
    "GridFunction",
    "certify_constants",
    "lq_norm",
    "lq_lower_bound",
    "lq_upper_bound",
    "TWO_PI",
    "TRIG_CHI",
]

TWO_PI = 2.0 * math.pi
#: sup-norm of the normalised trigonometric basis functions
TRIG_CHI = 1.0 / math.sqrt(math.pi)

# trailing window used to read off the tail decay pattern
_TAIL_WINDOW = 32
# growth of a constant over the second half of the horizon still read as bounded
_BOUNDED_RTOL = 1e-6


def _exponent(q: float) -> float:
    """``1/q`` with ``q = inf`` mapped to 0."""
    if not q >= 2:
        raise ValueError("q must lie in [2, inf]")
    return 0.0 if math.isinf(q) else 1.0 / q


@dataclass(frozen=True)
class GridFunction:
    """Samples of a function on the uniform grid ``x_j = j * length / n`` of ``[0, length)``."""

    samples: np.ndarray
    length: float = TWO_PI

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size < 2:
            raise ValueError("a grid function needs at least two samples")
        object.__setattr__(self, "samples", s)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.samples.size) * (self.length / self.samples.size)

    @property
    def step(self) -> float:
        return self.length / self.samples.size

    @classmethod
    def from_xy(cls, x, values, length: float = TWO_PI, rtol: float = 1e-9) -> "GridFunction":
        """Build from explicit abscissae, which must be ``j * length / n``."""
        x = np.asarray(x, dtype=float).ravel()
        values = np.asarray(values, dtype=float).ravel()
        if x.size != values.size:
            raise ValueError("x and values differ in length")
        expected = np.arange(x.size) * (length / max(x.size, 1))
        if not np.allclose(x, expected, rtol=0.0, atol=rtol * length):
            raise ValueError("samples are not on the uniform grid j*length/n of [0, length)")
        return cls(values, length)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.samples - other.samples, self.length)


def lq_norm(g: GridFunction, q: float, refine: int = 1) -> float:
    """``(∫_Q |g|^q)^{1/q}`` by the rectangle rule; ``q = inf`` gives ``max |g|``.

    The rectangle rule is spectrally accurate for smooth periodic integrands.
    For ``q = inf`` the grid maximum underestimates the true sup by
    ``O(h²)``; ``refine > 1`` first upsamples by FFT zero-padding, which is
    exact for band-limited samples.
    """
    p = _exponent(q)
    s = g.samples
    if refine > 1:
        from scipy.signal import resample

        s = resample(s, s.size * refine)
    if p == 0.0:
        return float(np.max(np.abs(s)))
    h = g.length / s.size
    # scale before powering to keep |s|^q in range
    scale = float(np.max(np.abs(s)))
    if scale == 0.0:
        return 0.0
    return scale * float(h * np.sum((np.abs(s) / scale) ** q)) ** p


@dataclass(frozen=True)
class Constants:
    """Summability constants valid for every ``N <= horizon``.

    ``bounded`` is False when either constant still grows over the second
    half of the horizon, i.e. the sequences are not exponentially increasing
    and the constants would blow up as ``N -> ∞``.
    """

    c1: float
    c2: float
    horizon: int
    bounded: bool
    tail_method: str


def _tail_sum_bound(log_r: np.ndarray) -> tuple:
    """Upper bound for ``Σ_{k>H} r_k²`` from the decay of ``r`` near ``H = len-1``.

    Returns ``(log_bound, method)``.  Geometric when the consecutive quotients
    ``r_{k+1}/r_k`` are nonincreasing across the trailing window, otherwise a
    dyadic power-law bound using the decay seen over the last doubling.
    """
    h = log_r.size - 1
    w = min(_TAIL_WINDOW, h)
    if w < 2:
        raise NotCertifiableError("horizon too short to read the tail decay")
    steps = np.diff(log_r[h - w:])  # log quotients, <= 0 when decaying
    half = steps.size // 2
    log_rho = float(steps.max())
    if log_rho < 0 and steps[half:].max() <= steps[:half].max() + 1e-12:
        rho2 = math.exp(2 * log_rho)
        return 2 * log_r[h] + math.log(rho2 / (1.0 - rho2)), "geometric"
    # decay exponent p over [H/2, H]: r_H <= r_{H/2} 2^{-p}
    p = (log_r[h // 2] - log_r[h]) / math.log(h / (h // 2))
    if not p > 0.5:
        raise NotCertifiableError(
            f"mu_k/xi_k decays like k^-{p:.3g} near the horizon; squares are not summably bounded"
        )
    # dyadic blocks (2^j H, 2^{j+1} H]: each ≤ 2^j H r_H² 2^{-2pj}
    log_sum = math.log(h) - math.log1p(-(2.0 ** (1.0 - 2.0 * p)))
    return 2 * log_r[h] + log_sum, "power-law"


def certify_constants(problem: SpectralProblem, horizon: Optional[int] = None) -> Constants:
    """Smallest ``c1, c2`` satisfying both summability conditions for all ``N <= horizon``.

    ``c1`` is a direct scan of partial sums.  ``c2`` sums ``μ_k²/ξ_k²`` up to
    the horizon and adds a tail bound for the rest (see :func:`_tail_sum_bound`).

    Raises
    ------
    NotCertifiableError
        If the ratio is not certified monotone or its squares are not
        summable with a certifiable tail.
    """
    if horizon is None:
        horizon = problem.last_index
    if problem.ratio_monotone_from is None:
        raise NotCertifiableError("the L_q bounds need a monotone ratio certificate")
    if horizon < 4:
        raise ValueError("horizon must be >= 4")
    m = horizon + 1
    p = problem.ratio_stride
    lm = problem.log_mu_values(m)
    lr_ext = problem.log_ratio_values(m + p - 1)
    lr = lr_ext[:m]
    # stride-p certificate: sup_{j>=k} r_j = max(r_k, ..., r_{k+p-1})
    envelope = np.max(np.lib.stride_tricks.sliding_window_view(lr_ext, p), axis=1)

    # log(Σ_{k<=N} μ_k²)^{1/2} - log μ_N
    log_c1 = 0.5 * np.logaddexp.accumulate(2 * lm) - lm
    # log(Σ_{k>=N} r_k²)^{1/2} - log r_N, with the tail beyond the horizon bounded
    log_tail, method = _tail_sum_bound(envelope)
    rev = np.logaddexp.accumulate(np.append(2 * lr, log_tail)[::-1])[::-1][:-1]
    log_c2 = 0.5 * rev - lr

    half = horizon // 2
    bounded = bool(
        log_c1[half:].max() <= log_c1[: half + 1].max() + _BOUNDED_RTOL
        and log_c2[half:].max() <= log_c2[: half + 1].max() + _BOUNDED_RTOL
    )
    return Constants(
        c1=float(math.exp(log_c1.max())),
        c2=float(math.exp(log_c2.max())),
        horizon=horizon,
        bounded=bounded,
        tail_method=method,
    )


@dataclass(frozen=True)
class BanachContext:
    """Data of the ``L_q(Q)`` setting: exponent, ``|Q|``, basis bound and constants."""

    q: float
    measure_Q: float
    chi: float
    c1: float
    c2: float
    horizon: int

    def __post_init__(self):
        _exponent(self.q)
        if not (self.measure_Q > 0 and self.chi > 0 and self.c1 > 0 and self.c2 > 0):
            raise ValueError("measure_Q, chi, c1, c2 must be positive")

    @classmethod
    def for_problem(
        cls,
        problem: SpectralProblem,
        q: float,
        horizon: Optional[int] = None,
        measure_Q: float = TWO_PI,
        chi: float = TRIG_CHI,
    ) -> "BanachContext":
        """Context with constants certified on ``problem`` (defaults: ``Q = [0, 2π]``, trig basis)."""
        cs = certify_constants(problem, horizon)
        return cls(q=q, measure_Q=measure_Q, chi=chi, c1=cs.c1, c2=cs.c2, horizon=cs.horizon)


def lq_lower_bound(problem: SpectralProblem, ctx: BanachContext, delta: float, n: int) -> float:
    """``|Q|^{1/q - 1/2} max{μ_{N_δ}/ξ_{N_δ}, μ_n/ξ_n}``."""
    nd = n_delta(problem, delta)
    factor = ctx.measure_Q ** (_exponent(ctx.q) - 0.5)
    return factor * max(ratio(problem, nd), ratio(problem, n))


def lq_upper_bound(problem: SpectralProblem, ctx: BanachContext, delta: float, n: int) -> float:
    """``max{c1, c2} |Q|^{1/q} χ (μ_n/ξ_n + δ μ_{n-1})`` for the truncation method."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > ctx.horizon:
        raise NotCertifiableError(f"constants certified only up to N={ctx.horizon}, got n={n}")
    noise = math.exp(math.log(delta) + log_mu(problem, n - 1))
    factor = max(ctx.c1, ctx.c2) * ctx.measure_Q ** _exponent(ctx.q) * ctx.chi
    return factor * (ratio(problem, n) + noise)
