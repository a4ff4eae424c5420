"""Truncation errors measured in L_q, 2 <= q <= inf, against certified bounds."""

import math

from optrecover.adversary import extremal_pair, random_instances
from optrecover.applications import error_coefficients, numdiff_problem, synthesize
from optrecover.banach import BanachContext, certify_constants, lq_lower_bound, lq_norm, lq_upper_bound

problem = numdiff_problem(4.0, horizon=512)
consts = certify_constants(problem)
print(f"c1 = {consts.c1:.3f}, c2 = {consts.c2:.3f} up to N = {consts.horizon} "
      f"({consts.tail_method} tail, bounded: {consts.bounded})")

delta, n = 1e-4, 10
for q in (2.0, 4.0, math.inf):
    ctx = BanachContext.for_problem(problem, q)
    worst = 0.0
    for inst in [extremal_pair(problem, delta, n), *random_instances(problem, delta, n, 50, seed=2)]:
        g = synthesize(error_coefficients(problem, inst, n), 2048)
        worst = max(worst, lq_norm(g, q, refine=4 if math.isinf(q) else 1))
    print(f"q = {q:>4}: lower {lq_lower_bound(problem, ctx, delta, n):.3e}  "
          f"observed {worst:.3e}  upper {lq_upper_bound(problem, ctx, delta, n):.3e}")
