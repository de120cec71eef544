"""Risk transforms that make one divergence's solution another's.

Given the solution ``u_i`` of the problem regularized by ``f``, the risks
``r_i = -lam * gdot(u_i) - c`` make ``u`` the solution of the problem
regularized by ``g``, with normalization constant exactly ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FdrError, Infeasible, NotConverged, TransformInfeasible
from .model_space import DiscreteModelSpace
from .posterior import build_posterior
from .solver import DEFAULT_CONFIG, SolverConfig, rn_at, solve_normalization

EQUIV_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class RiskTransform:
    source: str
    target: str
    lam: float
    n_value: float
    c_shift: float
    risks: np.ndarray
    source_rn: np.ndarray

    def space(self, base: DiscreteModelSpace) -> DiscreteModelSpace:
        """The reference measure of ``base`` carrying the transformed risks."""
        return base.with_risks(self.risks, allow_negative_risks=True)


def transform_risks(
    space: DiscreteModelSpace,
    spec_f,
    spec_g,
    lam: float,
    c_shift: float = 0.0,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> RiskTransform:
    """Solve the ``f`` problem and map its risks through ``-lam * gdot(fdot_inv(.)) - c``."""
    n = solve_normalization(space, spec_f, lam, cfg).beta
    u = rn_at(space, spec_f, lam, n)
    if np.any(u <= 0.0):
        raise TransformInfeasible(
            f"source density underflows to zero on {int(np.sum(u <= 0.0))} atoms; "
            f"{spec_g.name} derivative is undefined there"
        )
    with np.errstate(divide="ignore"):
        r = -lam * np.asarray(spec_g.fdot(u), dtype=float) - c_shift
    if not np.all(np.isfinite(r)):
        raise TransformInfeasible("transformed risks are not finite")
    r.flags.writeable = False
    u.flags.writeable = False
    return RiskTransform(spec_f.name, spec_g.name, float(lam), n, float(c_shift), r, u)


def verify_equivalence(
    space: DiscreteModelSpace,
    spec_f,
    spec_g,
    lam: float,
    c_shift: float = 0.0,
    cfg: SolverConfig = DEFAULT_CONFIG,
    tol: float = EQUIV_TOL,
) -> dict:
    """Solve both problems independently and compare their densities.

    Raises ``TransformInfeasible`` if the target problem cannot be solved.
    """
    tr = transform_risks(space, spec_f, spec_g, lam, c_shift, cfg)
    target_space = tr.space(space)
    try:
        res = solve_normalization(target_space, spec_g, lam, cfg)
        target = build_posterior(target_space, spec_g, lam, res.beta)
    except (Infeasible, NotConverged) as exc:
        raise TransformInfeasible(f"target problem under {spec_g.name} failed: {exc}") from exc
    except FdrError as exc:
        raise TransformInfeasible(str(exc)) from exc
    diff = float(np.max(np.abs(target.rn - tr.source_rn)))
    beta_gap = res.beta - c_shift
    return {
        "source": spec_f.name,
        "target": spec_g.name,
        "lambda": float(lam),
        "source_beta": tr.n_value,
        "target_beta": res.beta,
        "c_shift": c_shift,
        "max_rn_discrepancy": diff,
        "beta_minus_c": beta_gap,
        "holds": diff <= tol and abs(beta_gap) <= tol,
        "transformed_risks": tr.risks.tolist(),
    }
