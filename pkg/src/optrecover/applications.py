"""Two concrete problems solved by truncation.

Numerical differentiation
    ``A f = -f''`` on zero-mean ``2π``-periodic functions, eigenbasis
    ``w_{2k} = cos((k+1)x)/√π``, ``w_{2k+1} = sin((k+1)x)/√π`` with
    ``μ_{2k} = μ_{2k+1} = (k+1)²`` and smoothness ``ξ_k = k̄^γ``, ``γ > 2``.

Backward parabolic equation
    ``u' = L u``, ``u(0) = f``; recover ``u(t) = Σ e^{λ_k t} <f, w_k> w_k``
    with smoothness ``ξ_k = k̄^s e^{λ_k T}``, ``0 <= t <= T``.

The basis is normalised (the cosines and sines above divided by ``√π``) so
that it is orthonormal in ``L²(0, 2π)``; its sup-norm bound is ``1/√π``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import adversary, banach
from .bounds import RecoveryReport, lower_bound_n_delta, recovery_report
from .exceptions import NotCertifiableError
from .sequences import ExpOfLambda, Power, PowerLambda, PowerPaired
from .spectral import CoefficientVector, NoisyObservation, SpectralProblem, h_norm
from .truncation import MatchedOrder, SelectionStrategy, apply, select_n, worst_case_error

__all__ = [
    "SQRT_PI",
    "DEFAULT_SAMPLES",
    "analyze",
    "synthesize",
    "basis_function",
    "numdiff_problem",
    "differentiate",
    "HeatProblem",
    "diffuse",
    "solve_backward",
    "NumDiff",
    "Heat",
    "Custom",
    "RateRow",
    "RateTable",
    "rate_experiment",
    "matching_sensitivity",
    "error_coefficients",
    "add_white_noise",
]

SQRT_PI = math.sqrt(math.pi)
DEFAULT_SAMPLES = 4096
APP_HORIZON = 1024


def basis_function(k: int, x) -> np.ndarray:
    """``w_k(x)``: ``cos((k//2+1)x)/√π`` for even k, ``sin`` for odd k."""
    m = k // 2 + 1
    trig = np.cos if k % 2 == 0 else np.sin
    return trig(m * np.asarray(x, dtype=float)) / SQRT_PI


def analyze(signal: banach.GridFunction, rtol: float = 1e-13) -> CoefficientVector:
    """Coefficients of uniform samples on ``[0, 2π)`` in the normalised basis.

    Rectangle-rule inner products via the real FFT.  The mean is dropped
    (zero-mean space) and so is the Nyquist mode, whose sine is invisible on
    the grid.  Coefficients below ``rtol`` times the largest one are FFT
    round-off and are dropped; ``rtol=0`` keeps them all.
    """
    if not math.isclose(signal.length, banach.TWO_PI, rel_tol=1e-12):
        raise ValueError("signals must live on [0, 2*pi)")
    n = signal.samples.size
    if n < 4:
        raise ValueError("need at least 4 samples")
    spec = np.fft.rfft(signal.samples)
    m_max = (n - 1) // 2
    scale = 2.0 * SQRT_PI / n
    cos_c = scale * spec.real[1 : m_max + 1]
    sin_c = -scale * spec.imag[1 : m_max + 1]
    dense = np.empty(2 * m_max)
    dense[0::2] = cos_c
    dense[1::2] = sin_c
    if dense.size and rtol > 0:
        dense[np.abs(dense) <= rtol * np.abs(dense).max()] = 0.0
    return CoefficientVector.from_dense(dense)


def synthesize(coeffs: CoefficientVector, grid: Union[int, banach.GridFunction] = DEFAULT_SAMPLES) -> banach.GridFunction:
    """Evaluate ``Σ c_k w_k`` on a uniform grid of ``[0, 2π)``.

    ``grid`` is a sample count or a grid function whose grid is reused.
    """
    n = grid if isinstance(grid, (int, np.integer)) else grid.samples.size
    x = np.arange(n) * (banach.TWO_PI / n)
    out = np.zeros(n)
    for k, c in coeffs.entries.items():
        out += c * basis_function(k, x)
    return banach.GridFunction(out)


def add_white_noise(signal: banach.GridFunction, sigma: float, seed=0) -> tuple:
    """Add Gaussian noise of standard deviation ``sigma`` to the samples.

    Returns ``(noisy, delta)`` where ``delta`` is the realised coefficient
    norm of the added noise after analysis (Parseval), i.e. the level to pass
    to the recovery routines.
    """
    rng = np.random.default_rng(seed)
    noise = banach.GridFunction(sigma * rng.standard_normal(signal.samples.size), signal.length)
    delta = h_norm(analyze(noise))
    return banach.GridFunction(signal.samples + noise.samples, signal.length), delta


# --------------------------------------------------------------------------
# numerical differentiation


def numdiff_problem(gamma: float, horizon: int = APP_HORIZON) -> SpectralProblem:
    """``μ`` of ``-d²/dx²`` with smoothness ``k̄^γ``.

    The ratio is monotone for ``γ >= 4``; for ``2 < γ < 4`` the odd-to-even
    steps increase it, so the certificate is stride 2.
    """
    if not gamma > 2:
        raise ValueError(f"numerical differentiation needs gamma > 2, got {gamma}")
    return SpectralProblem(
        mu=PowerPaired(2.0),
        xi=Power(gamma),
        ratio_monotone_from=0,
        ratio_stride=1 if gamma >= 4 else 2,
        horizon=horizon,
    )


def differentiate(
    signal: Union[banach.GridFunction, CoefficientVector],
    delta: float,
    gamma: float,
    strategy: Optional[SelectionStrategy] = None,
    n_samples: int = DEFAULT_SAMPLES,
) -> tuple:
    """Estimate ``-f''`` from noisy data by truncation.

    Parameters
    ----------
    signal : GridFunction or CoefficientVector
        Noisy samples on ``[0, 2π)`` or noisy coefficients.
    delta : float
        Noise level in ``L²`` (coefficient) norm.
    gamma : float
        Smoothness exponent, ``> 2``.
    strategy : SelectionStrategy, optional
        Defaults to the matched rule ``n^γ >= 1/δ``, which coincides with
        ``N_δ`` here.
    n_samples : int
        Output grid size when ``signal`` is given as coefficients.

    Returns
    -------
    (GridFunction, RecoveryReport)
    """
    problem = numdiff_problem(gamma)
    if strategy is None:
        strategy = MatchedOrder()
    if isinstance(signal, banach.GridFunction):
        coeffs, grid = analyze(signal), signal
    else:
        coeffs, grid = signal, n_samples
    n = select_n(problem, delta, strategy)
    est = apply(problem, NoisyObservation(coeffs, delta), n)
    return synthesize(est, grid), recovery_report(problem, delta, n, strategy.name)


# --------------------------------------------------------------------------
# backward parabolic equation


@dataclass(frozen=True)
class HeatProblem:
    """Backward parabolic recovery of ``u(t)`` from ``u(0)``.

    ``s`` is the power in the smoothness weights ``ξ_k = k̄^s e^{λ_k T}``.
    ``lam`` defaults to ``λ_k = k^γ``.
    """

    t: float
    T: float = 1.0
    s: float = 0.0
    gamma: float = 1.0
    lam: Optional[object] = None

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if self.t > self.T:
            raise ValueError(f"t={self.t} exceeds T={self.T}")
        if self.s < 0:
            raise ValueError("s must be >= 0")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if self.lam is None:
            object.__setattr__(self, "lam", PowerLambda(self.gamma))

    def problem(self, horizon: int = APP_HORIZON) -> SpectralProblem:
        # ratio k̄^{-s} e^{-λ_k (T-t)} is nonincreasing for any nondecreasing λ
        return SpectralProblem(
            mu=ExpOfLambda(self.lam, self.t),
            xi=ExpOfLambda(self.lam, self.T, power=self.s),
            ratio_monotone_from=0,
            horizon=horizon,
        )


def diffuse(hp: HeatProblem, u_t: CoefficientVector) -> CoefficientVector:
    """Coefficients of the data ``f = u(0)`` whose backward solution at ``t`` is ``u_t``."""
    idx = np.fromiter(u_t.entries, int)
    if not idx.size:
        return CoefficientVector()
    lam = np.asarray(hp.lam(idx), dtype=float)
    vals = np.fromiter(u_t.entries.values(), float) * np.exp(-lam * hp.t)
    return CoefficientVector(dict(zip(idx.tolist(), vals.tolist())))


def solve_backward(hp: HeatProblem, obs: NoisyObservation, strategy: Optional[SelectionStrategy] = None) -> tuple:
    """Recover the coefficients of ``u(t)`` from noisy ``u(0)``.

    The default level is the smallest ``n`` with ``s ln n̄ + λ_n T >= ln(1/δ)``.
    Returns ``(CoefficientVector, RecoveryReport)``.
    """
    problem = hp.problem()
    if strategy is None:
        strategy = MatchedOrder()
    n = select_n(problem, obs.delta, strategy)
    return apply(problem, obs, n), recovery_report(problem, obs.delta, n, strategy.name)


# --------------------------------------------------------------------------
# rate experiments


@dataclass(frozen=True)
class NumDiff:
    gamma: float
    horizon: int = APP_HORIZON

    def problem(self) -> SpectralProblem:
        return numdiff_problem(self.gamma, self.horizon)

    @property
    def axis(self) -> str:
        return "log_delta"

    @property
    def label(self) -> str:
        return f"numdiff(gamma={self.gamma:g})"


@dataclass(frozen=True)
class Heat:
    hp: HeatProblem
    horizon: int = APP_HORIZON

    def problem(self) -> SpectralProblem:
        return self.hp.problem(self.horizon)

    @property
    def axis(self) -> str:
        # at t = T the error is a power of ln(1/δ), not of δ
        return "log_log_inv_delta" if self.hp.t == self.hp.T else "log_delta"

    @property
    def label(self) -> str:
        hp = self.hp
        return f"heat(t={hp.t:g},T={hp.T:g},s={hp.s:g},gamma={hp.gamma:g})"


@dataclass(frozen=True)
class Custom:
    """Any spectral problem, read in the trigonometric basis for ``L_q`` errors."""

    spectral: SpectralProblem
    label: str = "spectral"

    def problem(self) -> SpectralProblem:
        return self.spectral

    @property
    def axis(self) -> str:
        return "log_delta"


App = Union[NumDiff, Heat, Custom]


def error_coefficients(problem: SpectralProblem, instance: adversary.AttackInstance, n: int) -> CoefficientVector:
    """Coefficients of ``A f - A S_n f^δ`` for one attack instance."""
    mu = np.exp(problem.log_mu_values(max(instance.f.stop, instance.f_delta.stop, n)))
    a_f = CoefficientVector({k: mu[k] * v for k, v in instance.f.entries.items()})
    return a_f - apply(problem, instance.f_delta, n)


@dataclass(frozen=True)
class LqCell:
    q: float
    lower: float
    upper: float
    empirical: float


@dataclass(frozen=True)
class RateRow:
    delta: float
    n: int
    tail: float
    noise: float
    total: float
    lower: float
    empirical_max: float
    slope_so_far: float
    lq: tuple = ()


@dataclass(frozen=True)
class RateTable:
    """Per-δ exact errors, bounds and attack results, plus the fitted rate.

    ``slope`` is the least-squares slope of ``log total`` against ``axis``
    (``log δ``, or ``log ln(1/δ)`` in the severely ill-posed case); it is
    ``None`` when fewer than two rows exist.
    """

    label: str
    axis: str
    rows: tuple
    slope: Optional[float]
    intercept: Optional[float]
    residual: Optional[float]
    qs: tuple = ()
    flags: frozenset = field(default_factory=frozenset)

    @property
    def columns(self) -> list:
        cols = ["delta", "n", "tail", "noise", "total", "lower", "empirical_max", "slope_so_far"]
        for q in self.qs:
            tag = _q_tag(q)
            cols += [f"lq_lower_{tag}", f"lq_upper_{tag}", f"lq_empirical_{tag}"]
        return cols

    def records(self) -> list:
        out = []
        for r in self.rows:
            rec = [r.delta, r.n, r.tail, r.noise, r.total, r.lower, r.empirical_max, r.slope_so_far]
            for cell in r.lq:
                rec += [cell.lower, cell.upper, cell.empirical]
            out.append(rec)
        return out


def _q_tag(q: float) -> str:
    return "inf" if math.isinf(q) else f"{q:g}"


def _axis_values(axis: str, deltas: np.ndarray) -> np.ndarray:
    if axis == "log_delta":
        return np.log(deltas)
    return np.log(np.log(1.0 / deltas))


def _fit(x: np.ndarray, y: np.ndarray) -> tuple:
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


# attack instances per δ that are also synthesised on the grid for L_q errors
GRID_ATTACKS = 16


def rate_experiment(
    app: App,
    deltas: Sequence[float],
    trials: int = 200,
    seed: int = 0,
    q: Sequence[float] = (),
    strategy: Optional[SelectionStrategy] = None,
    n_samples: int = DEFAULT_SAMPLES,
    fit: bool = True,
    horizon: Optional[int] = None,
) -> RateTable:
    """Exact error, lower bound and worst observed attack error over a δ-sweep.

    For each δ the level ``n`` is chosen by ``strategy`` (matched rule by
    default).  The attack set is the extremal pair plus ``trials`` random
    feasible instances seeded by ``(seed, row index)``.  For every ``q`` the
    ``L_q`` bounds are evaluated and the first ``GRID_ATTACKS`` instances are
    synthesised on an ``n_samples`` grid to measure their ``L_q`` error.

    Rows are sorted by decreasing δ.  ``fit=True`` requires at least two
    deltas.  ``horizon`` caps the range over which the ``L_q`` constants are
    certified (default: the problem's last index).
    """
    deltas = np.array(sorted((float(d) for d in deltas), reverse=True))
    if deltas.size == 0 or (fit and deltas.size < 2):
        raise ValueError("a rate fit needs at least two deltas")
    if strategy is None:
        strategy = MatchedOrder()
    problem = app.problem()
    contexts = []
    flags = set()
    if q:
        try:
            consts = banach.certify_constants(problem, horizon)
            if not consts.bounded:
                flags.add("constants-unbounded")
            contexts = [
                banach.BanachContext(q=qq, measure_Q=banach.TWO_PI, chi=banach.TRIG_CHI,
                                     c1=consts.c1, c2=consts.c2, horizon=consts.horizon)
                for qq in q
            ]
        except NotCertifiableError:
            flags.add("lq-uncertified")

    x_all = _axis_values(app.axis, deltas)
    rows = []
    for j, delta in enumerate(deltas):
        n = select_n(problem, delta, strategy)
        br = worst_case_error(problem, delta, n)
        lower = lower_bound_n_delta(problem, delta, n)
        instances = [adversary.extremal_pair(problem, delta, n)]
        instances += list(adversary.random_instances(problem, delta, n, trials, seed=(seed, j)))
        emp = max(adversary.empirical_error(problem, inst, n) for inst in instances)

        cells = []
        if q:
            grids = [synthesize(error_coefficients(problem, inst, n), n_samples)
                     for inst in instances[: GRID_ATTACKS + 1]]
            for qq, ctx in zip(q, contexts or [None] * len(q)):
                if ctx is None:
                    cells.append(LqCell(qq, math.nan, math.nan, math.nan))
                    continue
                cells.append(LqCell(
                    q=qq,
                    lower=banach.lq_lower_bound(problem, ctx, delta, n),
                    upper=banach.lq_upper_bound(problem, ctx, delta, n),
                    empirical=max(banach.lq_norm(g, qq) for g in grids),
                ))

        totals = np.array([r.total for r in rows] + [br.total])
        slope_so_far = _fit(x_all[: j + 1], np.log(totals))[0] if j >= 1 else math.nan
        rows.append(RateRow(delta, n, br.tail_term, br.noise_term, br.total, lower, emp, slope_so_far, tuple(cells)))

    slope = intercept = residual = None
    if len(rows) >= 2:
        slope, intercept, residual = _fit(x_all, np.log([r.total for r in rows]))
    else:
        flags.add("no-fit")
    return RateTable(
        label=app.label,
        axis=app.axis,
        rows=tuple(rows),
        slope=slope,
        intercept=intercept,
        residual=residual,
        qs=tuple(q),
        flags=frozenset(flags),
    )


def matching_sensitivity(app: App, deltas: Sequence[float], constants: Sequence[float] = (0.5, 1.0, 2.0)) -> dict:
    """Fitted slope for each matching constant (no attacks, exact errors only)."""
    out = {}
    for c in constants:
        table = rate_experiment(app, deltas, trials=0, strategy=MatchedOrder(constant=c))
        out[c] = table.slope
    return out
