"""The truncation error formula is exact: nothing feasible does worse, and
one explicit pair does exactly as badly."""

from optrecover.adversary import brute_force_worst_case, empirical_error, extremal_pair, random_attack
from optrecover.bounds import sandwich
from optrecover.sequences import GeneralForm
from optrecover.spectral import SpectralProblem
from optrecover.truncation import select_n, worst_case_error

# mu_k = e^{k/2}, xi_k = e^k: a geometric problem
problem = SpectralProblem(GeneralForm(alpha=0.5), GeneralForm(alpha=1.0), ratio_monotone_from=0, horizon=200)

for delta in (1e-1, 1e-3, 1e-6):
    n = select_n(problem, delta)
    total = worst_case_error(problem, delta, n).total
    pair = extremal_pair(problem, delta, n)
    oracle = brute_force_worst_case(problem, delta, n, horizon=n + 40)
    attacks = random_attack(problem, delta, n, trials=2000, seed=(0, n))
    print(f"delta {delta:.0e}: n={n:2d}  formula {total:.6e}  oracle {oracle.value:.6e}  "
          f"pair {empirical_error(problem, pair, n):.6e}  best random {max(attacks):.6e}")

# where the truncation error sits between the lower bounds
print()
for delta in (1e-2, 1e-4, 1e-8):
    rep = sandwich(problem, delta, select_n(problem, delta))
    print(f"delta {delta:.0e}: lower {rep.lower_R_delta:.3e} <= total {rep.upper_truncation:.3e}"
          f" <= K*lower {rep.k_delta * rep.lower_R_delta:.3e}  flags {sorted(rep.flags)}")
