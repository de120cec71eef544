"""Solution measure of the regularized problem and its exact identities.

Every check returns signed residuals; tolerance policy belongs to callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotApplicable, OutOfDomain, StaleBeta
from .model_space import DiscreteModelSpace, expected_risk, f_divergence, kl, summarize
from .solver import (
    DEFAULT_CONFIG,
    SolverConfig,
    closed_form_beta_kl,
    rn_at,
    solve_normalization,
)

STALE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class GibbsPosterior:
    """Density ``rn`` w.r.t. the reference and posterior masses ``weights``."""

    lam: float
    beta: float
    rn: np.ndarray
    weights: np.ndarray
    divergence_name: str
    normalization_residual: float

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())


def build_posterior(space: DiscreteModelSpace, spec, lam: float, beta: float) -> GibbsPosterior:
    """Evaluate ``g_i = fdot_inv(-(beta + L_i) / lam)`` and re-check normalization."""
    g = rn_at(space, spec, lam, beta)
    total = float(np.dot(g, space.weights))
    if not abs(total - 1.0) <= STALE_TOL:
        raise StaleBeta(
            f"beta={beta!r} gives total mass {total!r} at lambda={lam!r}; re-solve the normalization"
        )
    g.flags.writeable = False
    p = g * space.weights
    p.flags.writeable = False
    return GibbsPosterior(float(lam), float(beta), g, p, spec.name, abs(total - 1.0))


def solve_posterior(space, spec, lam, cfg: SolverConfig = DEFAULT_CONFIG):
    """Solve for the normalization and build the posterior. Returns ``(posterior, result)``."""
    res = solve_normalization(space, spec, lam, cfg)
    return build_posterior(space, spec, lam, res.beta), res


def primal_value(space: DiscreteModelSpace, spec, posterior: GibbsPosterior) -> float:
    """Expected risk plus ``lam`` times the divergence from the reference."""
    return expected_risk(space, posterior.rn) + posterior.lam * f_divergence(space, posterior.rn, spec)


def dual_value(space: DiscreteModelSpace, spec, lam: float, beta: float) -> float:
    """``G(b) = lam * sum_i q_i f*(-(b + L_i)/lam) + b``; minimized at the normalization."""
    v = -(float(beta) + space.risks) / lam
    return lam * float(np.dot(spec.fstar(v), space.weights)) + float(beta)


def duality_gap(space, spec, lam, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Primal optimum minus the dual optimum ``-G(beta*)``."""
    post, _ = solve_posterior(space, spec, lam, cfg)
    return primal_value(space, spec, post) + dual_value(space, spec, lam, post.beta)


def relaxed_reverse_kl_beta(spec, lam: float, beta: float) -> float:
    """Translate a reverse relative entropy constant into the ``f(u) = -log u`` form."""
    return beta + lam * (spec.fdot(1.0) + 1.0)


def objective_identities(space, spec, lam, cfg: SolverConfig = DEFAULT_CONFIG) -> dict:
    """Signed residuals of the exact objective identities at the solution.

    ``primal_dual_sum``: primal value plus ``lam * sum f*(v) q + N``.
    ``reference_form``: ``R_Q + lam * sum (f(g)/g) q + lam * sum f*(v) (1/g) q + N``,
    which weights the conjugate by ``dQ/dP = 1/g`` against the reference;
    ``reference_form_scale`` is the magnitude of its summed terms.
    KL adds ``kl_cgf`` (primal value plus ``lam`` times the cumulant generating
    function of ``-L`` at ``1/lam``). Reverse KL adds ``reverse_kl_risk``:
    posterior risk minus ``lam - b``, where ``b`` is the constant of the
    ``-log u`` form.
    """
    post, res = solve_posterior(space, spec, lam, cfg)
    n = post.beta
    g = post.rn
    q = space.weights
    v = -(n + space.risks) / lam
    fstar = np.asarray(spec.fstar(v), dtype=float)
    primal = primal_value(space, spec, post)
    r_q = summarize(space).r_Q
    out = {
        "lambda": float(lam),
        "beta": n,
        "normalization_residual": res.residual,
        "primal_dual_sum": primal + lam * float(np.dot(fstar, q)) + n,
    }
    if np.all(g > 0.0):
        fg = np.asarray(spec.f(g), dtype=float)
        # per-atom terms grow like 1/g and cancel pairwise; the scale bounds
        # the rounding error of the residual
        out["reference_form"] = r_q + lam * float(np.dot((fg + fstar) / g, q)) + n
        out["reference_form_scale"] = abs(r_q) + abs(n) + lam * float(
            np.dot((np.abs(fg) + np.abs(fstar)) / g, q)
        )
    else:
        out["reference_form"] = math.nan
        out["reference_form_scale"] = math.inf
    if spec.name == "kl":
        out["kl_cgf"] = primal + closed_form_beta_kl(space, lam)
    if spec.name == "reverse_kl":
        r_p = expected_risk(space, g)
        out["reverse_kl_risk"] = r_p - (lam - relaxed_reverse_kl_beta(spec, lam, n))
    return out


def risk_gap_identities(space, spec, lam, cfg: SolverConfig = DEFAULT_CONFIG) -> dict:
    """Residual of the reference-minus-posterior risk identity.

    KL: ``R_Q - R_P - lam * (D(P||Q) + D(Q||P))``.
    Reverse KL: ``R_Q - R_P - lam * sum (1/g - 1) q``.
    """
    if spec.name not in ("kl", "reverse_kl"):
        raise NotApplicable(f"no risk gap identity for {spec.name}")
    post, _ = solve_posterior(space, spec, lam, cfg)
    g = post.rn
    r_p = expected_risk(space, g)
    r_q = summarize(space).r_Q
    if spec.name == "kl":
        ones = np.ones_like(g)
        d_pq = kl(space, g, ones)
        d_qp = kl(space, ones, g)
        residual = r_q - r_p - lam * (d_pq + d_qp)
        return {"lambda": float(lam), "risk_gap": r_q - r_p, "d_pq": d_pq, "d_qp": d_qp, "residual": residual}
    inv_term = float(np.dot(1.0 / g - 1.0, space.weights))
    residual = r_q - r_p - lam * inv_term
    return {"lambda": float(lam), "risk_gap": r_q - r_p, "inverse_term": inv_term, "residual": residual}


def jensen_bound_check(space, spec, lam, cfg: SolverConfig = DEFAULT_CONFIG) -> dict:
    """Compare the optimum with ``-lam * f*(-(R_Q + N)/lam) - N``.

    Convexity of ``f*`` makes the bound hold; ``slack`` is bound minus optimum.
    """
    post, _ = solve_posterior(space, spec, lam, cfg)
    n = post.beta
    r_q = summarize(space).r_Q
    arg = -(r_q + n) / lam
    try:
        bound = -lam * spec.fstar(arg) - n
    except OutOfDomain as exc:
        raise NotApplicable(f"bound is vacuous: {exc}") from exc
    primal = primal_value(space, spec, post)
    return {"lambda": float(lam), "optimum": primal, "bound": float(bound), "slack": float(bound) - primal}


def risk_monotone_in_lambda(space, spec, lambdas, cfg: SolverConfig = DEFAULT_CONFIG, tol: float = 1e-10) -> dict:
    """Posterior risk along an ascending grid of factors, with the chain check.

    ``worst_violation`` is the largest amount by which the chain
    ``delta* <= R(P_1) <= ... <= R(P_k) <= R_Q`` is broken (zero or negative
    when it holds).
    """
    lams = [float(x) for x in lambdas]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("lambdas must be strictly ascending")
    summ = summarize(space)
    risks, betas = [], []
    for lam in lams:
        post, _ = solve_posterior(space, spec, lam, cfg)
        risks.append(expected_risk(space, post.rn))
        betas.append(post.beta)
    chain = [summ.delta_star] + risks + [summ.r_Q]
    worst = max(a - b for a, b in zip(chain, chain[1:]))
    return {
        "lambdas": lams,
        "risks": risks,
        "betas": betas,
        "delta_star": summ.delta_star,
        "r_Q": summ.r_Q,
        "worst_violation": worst,
        "holds": worst <= tol,
    }


def ordering_check(space: DiscreteModelSpace, spec, posterior: GibbsPosterior) -> dict:
    """Density ordering against risk and the maximum-density bound.

    Reports the largest increase of ``g`` along increasing risk, whether tied
    risks get bitwise-identical densities, whether strictly smaller risk gives
    strictly larger density wherever the densities are representable (nonzero),
    and the gap between ``max g`` and ``fdot_inv(-(delta* + beta)/lam)`` with
    the attaining set compared to the argmin set.
    """
    L = space.risks
    g = posterior.rn
    order = np.argsort(L, kind="stable")
    Ls, gs = L[order], g[order]
    dL = np.diff(Ls)
    dg = np.diff(gs)
    increase = float(np.max(dg)) if dg.size else 0.0
    ties_exact = bool(np.all(dg[dL == 0.0] == 0.0)) if dg.size else True
    strict = (dL > 0.0) & (gs[1:] > 0.0)
    strict_ok = bool(np.all(dg[strict] < 0.0)) if dg.size else True
    summ = summarize(space)
    # same vectorized path as the posterior so the comparison can be exact
    g_max_formula = float(
        spec.fdot_inv(np.array([-(summ.delta_star + posterior.beta) / posterior.lam]))[0]
    )
    g_max = float(g.max())
    attained = set(int(i) for i in np.flatnonzero(g == g_max))
    return {
        "max_increase": increase,
        "ties_exact": ties_exact,
        "strict_where_positive": strict_ok,
        "max_gap": g_max - g_max_formula,
        "argmax_is_argmin": attained == set(summ.argmin_set),
    }


def tilted_risk(space: DiscreteModelSpace, spec, posterior: GibbsPosterior) -> float:
    """Risk under the reference tilted by ``1 / f''(g)``, normalized over the reference."""
    w = kernels.inv_curvature(spec.kind, np.asarray(posterior.rn, dtype=float)) * space.weights
    return float(np.dot(space.risks, w) / w.sum())


def ode_residual(space, spec, lam, cfg: SolverConfig = DEFAULT_CONFIG) -> dict:
    """``N - (lam * N' - R_tilted)`` with ``N'`` from a central difference at step ``fd_step * lam``."""
    h = cfg.fd_step * lam
    post, _ = solve_posterior(space, spec, lam, cfg)
    n_plus = solve_normalization(space, spec, lam + h, cfg).beta
    n_minus = solve_normalization(space, spec, lam - h, cfg).beta
    slope = (n_plus - n_minus) / (2.0 * h)
    r_t = tilted_risk(space, spec, post)
    residual = post.beta - (lam * slope - r_t)
    return {
        "lambda": float(lam),
        "beta": post.beta,
        "slope": slope,
        "tilted_risk": r_t,
        "residual": residual,
        "relative": abs(residual) / (1.0 + abs(post.beta)),
    }
