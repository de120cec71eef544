"""Exact solutions of empirical risk minimization regularized by f-divergences
on weighted-atom reference measures."""

from .divergences import DivergenceSpec, all_specs, canonicalize, make_divergence
from .equivalence import RiskTransform, transform_risks, verify_equivalence
from .errors import (
    DomainError,
    EmptyFeasibleSet,
    FdrError,
    Infeasible,
    InfiniteDivergence,
    NotAbsolutelyContinuous,
    NotApplicable,
    NotAProbability,
    NotConverged,
    NotStrictlyConvex,
    OutOfDomain,
    PositivityViolated,
    StaleBeta,
    TransformInfeasible,
    UnknownDivergence,
)
from .kernels import BACKEND
from .model_space import (
    DiscreteModelSpace,
    RiskSummary,
    expected_risk,
    f_divergence,
    kl,
    load_space,
    summarize,
)
from .posterior import (
    GibbsPosterior,
    build_posterior,
    dual_value,
    duality_gap,
    jensen_bound_check,
    primal_value,
    risk_gap_identities,
    risk_monotone_in_lambda,
    solve_posterior,
    objective_identities,
)
from .solver import (
    NormalizationResult,
    SolverConfig,
    closed_form_beta_chi2,
    closed_form_beta_kl,
    constraint_integral,
    is_feasible,
    lambda_star_estimate,
    solve_normalization,
)
from .special import lambert_w0, wright_omega

__version__ = "0.1.0"
