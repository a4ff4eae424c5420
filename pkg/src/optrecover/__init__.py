"""Optimal recovery of unbounded operators from noisy spectral data.

The truncation method ``A S_N f^δ = Σ_{k<N} μ_k <f^δ, w_k> w_k`` with its
exact worst-case error, matching lower bounds, adversarial checks and
``L_q`` bounds, plus numerical differentiation and backward heat solvers.
"""

from .exceptions import ConfigError, HorizonError, NotCertifiableError, UncertifiedTailError
from .sequences import (
    ExpOfLambda,
    GeneralForm,
    Power,
    PowerLambda,
    PowerPaired,
    Tabulated,
    kbar,
    rule_from_dict,
    rule_to_dict,
)
from .spectral import (
    CoefficientVector,
    NoisyObservation,
    SpectralProblem,
    h_norm,
    log_mu,
    log_xi,
    n_delta,
    ratio,
    tail_argmax,
    tail_sup_ratio,
    validate,
    w_norm,
)
from .truncation import (
    MatchedOrder,
    MinimizeFormula,
    NDeltaRule,
    TruncationErrorBreakdown,
    apply,
    info_map,
    reconstruct,
    select_n,
    worst_case_error,
)
from .bounds import (
    RecoveryReport,
    SandwichReport,
    k_delta,
    lower_bound_delta,
    lower_bound_n_delta,
    matching_window,
    recovery_report,
    sandwich,
)
from .adversary import (
    AttackInstance,
    brute_force_worst_case,
    empirical_error,
    extremal_pair,
    extremal_source,
    random_attack,
)
from .banach import BanachContext, GridFunction, certify_constants, lq_lower_bound, lq_norm, lq_upper_bound
from .applications import (
    Custom,
    Heat,
    HeatProblem,
    NumDiff,
    RateTable,
    analyze,
    differentiate,
    rate_experiment,
    solve_backward,
    synthesize,
)

__version__ = "0.1.0"
