"""Extremal inputs, empirical errors and a brute-force worst-case oracle.

The oracle never calls the closed-form error.  It builds every one-hot
instance pair (one tail index carrying the whole W-budget, one head index
carrying the whole noise budget), measures their empirical errors directly,
and spot-checks the result against random feasible points.  Because both
the objective and the constraints are separable and linear in the squared
coefficients, the maximum over the feasible set sits at such a pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .spectral import (
    CoefficientVector,
    SpectralProblem,
    h_norm,
    log_xi,
    n_delta,
    tail_argmax,
    w_norm,
)

__all__ = [
    "AttackInstance",
    "OracleResult",
    "extremal_source",
    "extremal_pair",
    "empirical_error",
    "brute_force_worst_case",
    "random_instances",
    "random_attack",
    "FEASIBILITY_RTOL",
]

FEASIBILITY_RTOL = 1e-12

# random noise is confined to indices below n + NOISE_SPREAD
NOISE_SPREAD = 16
# random signal support defaults to indices up to n + SIGNAL_SPREAD
SIGNAL_SPREAD = 32
# random search sample count of the brute-force oracle
ORACLE_SAMPLES = 256


@dataclass(frozen=True)
class AttackInstance:
    """An element ``f`` of the unit W-ball and data ``f_delta`` within δ of it."""

    f: CoefficientVector
    f_delta: CoefficientVector
    label: str

    def is_feasible(self, problem: SpectralProblem, delta: float, rtol: float = FEASIBILITY_RTOL) -> bool:
        return (
            w_norm(problem, self.f) <= 1.0 + rtol
            and h_norm(self.f - self.f_delta) <= delta * (1.0 + rtol)
        )

    def to_record(self) -> dict:
        return {"label": self.label, "f": self.f.to_record(), "f_delta": self.f_delta.to_record()}

    @classmethod
    def from_record(cls, rec) -> "AttackInstance":
        return cls(
            f=CoefficientVector.from_record(rec["f"]),
            f_delta=CoefficientVector.from_record(rec["f_delta"]),
            label=rec["label"],
        )


def _unit_source(problem: SpectralProblem, k: int) -> CoefficientVector:
    return CoefficientVector({k: math.exp(-log_xi(problem, k))})


def extremal_source(problem: SpectralProblem, delta: float) -> AttackInstance:
    """``f = ξ_{N_δ}^{-1} w_{N_δ}`` observed as the zero vector.

    ``||f||_H = ξ_{N_δ}^{-1} <= δ``, so zero is admissible data for both
    ``f`` and ``-f``; no method can tell them apart.
    """
    nd = n_delta(problem, delta)
    return AttackInstance(f=_unit_source(problem, nd), f_delta=CoefficientVector(), label="extremal-source")


def extremal_pair(problem: SpectralProblem, delta: float, n: int) -> AttackInstance:
    """Pair attaining the truncation method's worst-case error at level ``n``.

    ``f = ξ_l^{-1} w_l`` with ``l >= n`` the smallest tail maximiser of
    ``μ_k/ξ_k``, and ``f^δ = f + δ w_{n-1}``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ell = tail_argmax(problem, n)
    f = _unit_source(problem, ell)
    return AttackInstance(f=f, f_delta=f + CoefficientVector({n - 1: delta}), label="extremal-pair")


def _log_mu_at(problem: SpectralProblem, idx: np.ndarray) -> np.ndarray:
    if idx.size and idx.max() > problem.last_index:
        return problem.mu.log_values(idx)
    return problem._log_mu_table[idx]


def _weighted_norm(problem: SpectralProblem, v: CoefficientVector) -> float:
    """``(Σ μ_k² v_k²)^{1/2}`` with μ applied in log-space."""
    if not v.entries:
        return 0.0
    idx = np.fromiter(v.entries, int)
    vals = np.fromiter(v.entries.values(), float)
    return float(np.linalg.norm(np.exp(_log_mu_at(problem, idx) + np.log(np.abs(vals)))))


def empirical_error(problem: SpectralProblem, instance: AttackInstance, n: int) -> float:
    """``||A f - A S_n f^δ||_H`` evaluated coefficientwise."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tail = CoefficientVector({k: v for k, v in instance.f.entries.items() if k >= n})
    head = (instance.f - instance.f_delta).truncate(n)
    return math.hypot(_weighted_norm(problem, tail), _weighted_norm(problem, head))


@dataclass(frozen=True)
class OracleResult:
    """Brute-force worst case over one-hot pairs, with a random-search cross-check."""

    value: float
    witness: AttackInstance
    sampled_max: float
    samples: int

    @property
    def confirmed(self) -> bool:
        return self.sampled_max <= self.value * (1.0 + FEASIBILITY_RTOL)


def _sphere(rng: np.random.Generator, size: int, shape=()) -> np.ndarray:
    x = rng.standard_normal(tuple(shape) + (size,))
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def brute_force_worst_case(
    problem: SpectralProblem,
    delta: float,
    n: int,
    horizon: int,
    samples: int = ORACLE_SAMPLES,
    seed: int = 0,
) -> OracleResult:
    """Maximise the truncation error over feasible inputs supported on ``[0, horizon]``.

    Enumerates every one-hot pair ``(j, i)`` with tail index ``n <= j <= horizon``
    and noise index ``i < n``, computes each pair's empirical error, and keeps
    the largest (ties: smallest ``j``, largest ``i``).  Then draws ``samples``
    random feasible points and records the largest error seen among them.

    Parameters
    ----------
    horizon : int
        Largest index ``M`` allowed in the support; must satisfy ``M >= n``.
    samples : int
        Random-search sample count (default 256).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if horizon < n:
        raise ValueError(f"oracle horizon {horizon} below truncation level {n}")
    m = horizon + 1
    lm = problem.log_mu_values(m)
    lx = problem.log_xi_values(m)
    mu = np.exp(lm)

    # one-hot instances: f = e_j / ξ_j, f^δ = f + δ e_i
    tail_idx = np.arange(n, m)
    noise_idx = np.arange(n - 1, -1, -1)
    f_val = np.exp(-lx[tail_idx])
    # error² of instance (j, i) = Σ_{k>=n} (μ_k f_k)² + Σ_{k<n} (μ_k (f_k - f^δ_k))²
    tail_sq = (mu[tail_idx] * f_val) ** 2
    noise_sq = (mu[noise_idx] * delta) ** 2
    err = np.sqrt(tail_sq[:, None] + noise_sq[None, :])
    flat = int(np.argmax(err))
    a, b = divmod(flat, noise_idx.size)
    j, i = int(tail_idx[a]), int(noise_idx[b])
    f = CoefficientVector({j: f_val[a]})
    witness = AttackInstance(f=f, f_delta=f + CoefficientVector({i: delta}), label="extremal-pair")
    value = float(err[a, b])

    sampled = 0.0
    if samples > 0:
        rng = np.random.default_rng(seed)
        # signal on the unit W-sphere over [0, M], noise on the δ-sphere over [0, n)
        g = _sphere(rng, m, (samples,)) * rng.uniform(0.0, 1.0, (samples, 1)) ** 0.25
        fs = g * np.exp(-lx)
        e = _sphere(rng, n, (samples,)) * delta
        tail = np.sum((mu[n:] * fs[:, n:]) ** 2, axis=1)
        head = np.sum((mu[:n] * e) ** 2, axis=1)
        sampled = float(np.sqrt(tail + head).max())
    return OracleResult(value=value, witness=witness, sampled_max=sampled, samples=samples)


def _seed_seq(seed: Union[int, Sequence[int]], i: int) -> list:
    base = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    return base + [i]


def _perturb(f: CoefficientVector, e: CoefficientVector, budget: float) -> CoefficientVector:
    """``f + e`` with the stored difference kept within ``budget``.

    Adding a small ``e`` to a large overlapping ``f`` rounds, so the stored
    difference can exceed ``||e||``; shrink ``e`` until it fits.
    """
    fd = f + e
    for _ in range(8):
        actual = h_norm(fd - f)
        if actual <= budget:
            break
        e = e * (budget / actual * (1.0 - 1e-12))
        fd = f + e
    return fd


def random_instances(
    problem: SpectralProblem,
    delta: float,
    n: int,
    trials: int,
    seed: Union[int, Sequence[int]] = 0,
    horizon: Optional[int] = None,
):
    """Yield ``trials`` feasible random instances, deterministic in ``seed``.

    Each trial draws its own generator from ``(seed, trial index)``, so any
    subset of trials can be regenerated independently.  Signal support is a
    random subset of ``[0, horizon]`` (one-hot a quarter of the time), noise
    support a random subset of ``[0, n + 16)``; both directions are uniform on
    their spheres and both radii are either the full budget or uniform in it.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if horizon is None:
        horizon = min(problem.last_index, n + SIGNAL_SPREAD)
    horizon = max(horizon, n)
    noise_stop = n + NOISE_SPREAD
    for t in range(trials):
        rng = np.random.default_rng(_seed_seq(seed, t))
        if rng.uniform() < 0.25:
            size = 1
        else:
            size = int(rng.integers(1, min(horizon + 1, 12) + 1))
        idx = np.sort(rng.choice(horizon + 1, size=size, replace=False))
        direction = _sphere(rng, size)
        radius = 1.0 if rng.uniform() < 0.5 else rng.uniform()
        lx = problem.log_xi_values(horizon + 1)[idx]
        f = CoefficientVector(dict(zip(idx.tolist(), (radius * direction * np.exp(-lx)).tolist())))

        nsize = int(rng.integers(1, min(noise_stop, 8) + 1))
        nidx = np.sort(rng.choice(noise_stop, size=nsize, replace=False))
        nradius = delta if rng.uniform() < 0.5 else delta * rng.uniform()
        e = CoefficientVector(dict(zip(nidx.tolist(), (nradius * _sphere(rng, nsize)).tolist())))
        yield AttackInstance(f=f, f_delta=_perturb(f, e, nradius), label="random")


def random_attack(
    problem: SpectralProblem,
    delta: float,
    n: int,
    trials: int,
    seed: Union[int, Sequence[int]] = 0,
    horizon: Optional[int] = None,
) -> list:
    """Empirical errors of ``trials`` random feasible instances."""
    return [
        empirical_error(problem, inst, n)
        for inst in random_instances(problem, delta, n, trials, seed, horizon)
    ]
