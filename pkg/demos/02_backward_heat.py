"""Recover an earlier heat-equation state from noisy data at time 0.

Going backward from u(0) to u(t) multiplies mode k by e^{k t}.  Recovery is
possible only for initial states smooth enough that xi_k = k^s e^{k T} is
finite in norm; the achievable accuracy depends on how far t is from T.
"""

import math

import numpy as np

from optrecover.applications import Heat, HeatProblem, diffuse, rate_experiment, solve_backward
from optrecover.spectral import CoefficientVector, NoisyObservation

hp = HeatProblem(t=0.5, T=1.0, s=0.0)
u_t = CoefficientVector({k: (-1) ** k * math.exp(-1.2 * k) for k in range(40)})
data = diffuse(hp, u_t)  # u(0)

rng = np.random.default_rng(3)
delta = 1e-6
noise = rng.standard_normal(60)
noise *= delta / np.linalg.norm(noise)
noisy = data + CoefficientVector.from_dense(noise)

estimate, report = solve_backward(hp, NoisyObservation(noisy, delta))
err = np.linalg.norm(estimate.to_dense(60) - u_t.to_dense(60))
print(f"t = T/2: n = {report.n}, worst case {report.total:.3e}, actual error {err:.3e}")

# moderate regime: error ~ delta^((T - t)/T)
deltas = [10.0**-k for k in range(2, 11)]
mid = rate_experiment(Heat(hp), deltas, trials=50)
print(f"t = T/2: slope against log delta {mid.slope:.3f} (theory 0.5)")

# at t = T only smoothness s helps: error ~ (ln 1/delta)^(-s/gamma)
severe = rate_experiment(Heat(HeatProblem(t=1.0, T=1.0, s=2.0)), deltas, trials=50)
print(f"t = T:   exponent against ln(1/delta) {severe.slope:.3f} (theory -2)")
for r in severe.rows:
    print(f"  delta {r.delta:7.0e}  n {r.n:3d}  total {r.total:.3e}")
