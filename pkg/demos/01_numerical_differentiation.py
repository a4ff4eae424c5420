"""Differentiate a noisy periodic signal twice and watch the error rate."""

import numpy as np

from optrecover.applications import NumDiff, add_white_noise, analyze, differentiate, numdiff_problem, rate_experiment
from optrecover.banach import TWO_PI, GridFunction, lq_norm
from optrecover.spectral import w_norm

n = 1024
x = np.arange(n) * TWO_PI / n
f = 0.3 * np.sin(x) + 0.02 * np.cos(2 * x) + 0.0005 * np.sin(3 * x)
exact = 0.3 * np.sin(x) + 0.08 * np.cos(2 * x) + 0.0045 * np.sin(3 * x)  # -f''

# the guarantee covers signals in the unit ball of sum xi_k^2 c_k^2, xi_k = k^4
print(f"smoothness norm of f: {w_norm(numdiff_problem(4.0), analyze(GridFunction(f))):.3f}")

# white noise on the samples; delta is its norm in coefficient space
noisy, delta = add_white_noise(GridFunction(f), sigma=1e-4, seed=1)
print(f"realised noise level delta = {delta:.3e}")

# smoothness gamma = 4: the level n is the first index with n^4 >= 1/delta
estimate, report = differentiate(noisy, delta, gamma=4.0)
err = lq_norm(GridFunction(estimate.samples - exact), 2)
print(f"n = {report.n}, guaranteed worst case {report.total:.3e}, actual L2 error {err:.3e}")
print(f"lower bound for any method {report.lower_R_N_delta:.3e}")

# the guaranteed error decays like delta^((gamma-2)/gamma) = delta^0.5
table = rate_experiment(NumDiff(4.0), [10.0**-k for k in range(2, 8)], trials=100, seed=0)
print(f"\n{'delta':>8} {'n':>4} {'total':>11} {'lower':>11} {'worst attack':>12}")
for r in table.rows:
    print(f"{r.delta:8.0e} {r.n:4d} {r.total:11.3e} {r.lower:11.3e} {r.empirical_max:12.3e}")
print(f"fitted slope {table.slope:.3f} (theory 0.5)")
