"""Normalization constant of the f-divergence regularized Gibbs measure.

For a regularization factor ``lam`` the constant ``beta`` solves::

    I(beta) = sum_i q_i * fdot_inv(-(beta + L_i) / lam) = 1

``I`` is strictly decreasing in ``b`` on the open interval where every
argument lies in ``dom_J``. The root is bracketed, bisected, and then
polished with at most three Newton steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    EmptyFeasibleSet,
    Infeasible,
    NotConverged,
    OutOfDomain,
    PositivityViolated,
)
from .model_space import DiscreteModelSpace, summarize

NEWTON_STEPS = 3


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10
    max_iterations: int = 200
    bracket_growth: float = 2.0
    fd_step: float = 1e-4

    def __post_init__(self):
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.bracket_growth > 1.0:
            raise ValueError("bracket_growth must exceed 1")
        if not self.fd_step > 0.0:
            raise ValueError("fd_step must be positive")


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class NormalizationResult:
    beta: float
    residual: float
    iterations: int
    bracket: tuple
    feasible: bool
    lam: float = math.nan
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "residual": self.residual,
            "iterations": self.iterations,
            "feasible": self.feasible,
            "lambda": self.lam,
            "bracket": list(self.bracket),
            "degenerate": self.degenerate,
        }


def _check_lam(lam):
    lam = float(lam)
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError(f"lambda must be positive and finite, got {lam!r}")
    return lam


def _arrays(space):
    return (
        np.ascontiguousarray(space.risks, dtype=float),
        np.ascontiguousarray(space.weights, dtype=float),
    )


def feasible_interval(space: DiscreteModelSpace, spec, lam: float) -> tuple:
    """Open interval of ``b`` for which every argument ``-(b + L_i)/lam`` is in ``dom_J``."""
    lam = _check_lam(lam)
    vlo, vhi = spec.dom_J
    lo = -float(space.risks.min()) - lam * vhi if math.isfinite(vhi) else -math.inf
    hi = -float(space.risks.max()) - lam * vlo if math.isfinite(vlo) else math.inf
    return lo, hi


def rn_at(space: DiscreteModelSpace, spec, lam: float, b: float) -> np.ndarray:
    """Per-atom ``fdot_inv(-(b + L_i) / lam)`` with domain and sign checks."""
    lam = _check_lam(lam)
    v = -(float(b) + space.risks) / lam
    ok = spec.in_domain(v)
    if not np.all(ok):
        i = int(np.flatnonzero(~ok)[0])
        raise OutOfDomain(
            f"{spec.name}: atom {i} has argument {v[i]!r} outside dom_J={spec.dom_J}", index=i
        )
    with np.errstate(over="ignore", divide="ignore"):
        g = np.asarray(spec.fdot_inv(v), dtype=float)
    # exact zeros from underflow are tolerated; negative or NaN values are not
    bad = ~(g >= 0.0)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise PositivityViolated(f"{spec.name}: fdot_inv is {g[i]!r} on atom {i}", index=i)
    return g


def constraint_integral(space: DiscreteModelSpace, spec, lam: float, b: float) -> float:
    """``I(b) = sum_i q_i fdot_inv(-(b + L_i)/lam)``."""
    return float(np.dot(rn_at(space, spec, lam, b), space.weights))


def _boundary_limit(spec, lam, b_max, risks, weights):
    """Limit of ``I`` as ``b`` rises to a finite upper end of the feasible interval.

    Atoms attaining the largest risk reach the lower end of ``dom_J`` where the
    inverse derivative vanishes; the rest stay inside the domain.
    """
    top = risks.max()
    inner = risks < top
    if not np.any(inner):
        return 0.0
    g = spec.fdot_inv(-(b_max + risks[inner]) / lam)
    return float(np.dot(np.atleast_1d(g), weights[inner]))


def is_feasible(space: DiscreteModelSpace, spec, lam: float) -> bool:
    """Whether some ``beta`` normalizes the candidate density at this ``lam``."""
    lam = _check_lam(lam)
    b_min, b_max = feasible_interval(space, spec, lam)
    if not b_min < b_max:
        return False
    if math.isfinite(b_max):
        risks, weights = _arrays(space)
        return _boundary_limit(spec, lam, b_max, risks, weights) < 1.0
    return True


def _inside(b, b_min, b_max):
    return b_min < b < b_max


def solve_normalization(
    space: DiscreteModelSpace,
    spec,
    lam: float,
    cfg: SolverConfig = DEFAULT_CONFIG,
    bracket: tuple | None = None,
) -> NormalizationResult:
    """Root of ``I(b) = 1``.

    ``bracket`` optionally overrides the starting pair; invalid starting
    points are moved or expanded geometrically by ``cfg.bracket_growth``.
    Raises ``Infeasible`` when no normalizing constant exists.
    """
    lam = _check_lam(lam)
    summ = summarize(space)
    slope_at_one = float(spec.fdot(1.0))

    if not summ.separable:
        beta = -summ.r_Q - lam * slope_at_one
        res = abs(constraint_integral(space, spec, lam, beta) - 1.0)
        return NormalizationResult(beta, res, 0, (beta, beta), True, lam, degenerate=True)

    risks, weights = _arrays(space)
    kind, shift = spec.kind, spec.shift
    b_min, b_max = feasible_interval(space, spec, lam)
    if not b_min < b_max:
        raise Infeasible(lam, f"lambda={lam!r}: the feasible interval for b is empty")
    if math.isfinite(b_max) and _boundary_limit(spec, lam, b_max, risks, weights) >= 1.0:
        raise Infeasible(lam)

    def ev(b):
        return kernels.constraint_sum(kind, shift, lam, b, risks, weights)

    # at hi_seed the lowest-risk atoms get density one and the rest less, so
    # I <= 1; at lo_seed the highest-risk atoms get one and the rest more
    if bracket is None:
        lo, hi = -summ.max_risk - lam * slope_at_one, -summ.delta_star - lam * slope_at_one
    else:
        lo, hi = sorted(float(x) for x in bracket)
    growth = cfg.bracket_growth
    step = max(hi - lo, lam * 1e-3, 1e-12)
    evals = 0

    # reference point strictly inside the interval
    for ref in (hi, lo, 0.5 * (b_min + b_max)):
        if _inside(ref, b_min, b_max):
            break
    else:
        ref = b_max - 1.0 if math.isfinite(b_max) else b_min + 1.0
    lo = lo if _inside(lo, b_min, b_max) else ref
    hi = hi if _inside(hi, b_min, b_max) else ref

    # push lo left until I(lo) >= 1
    i_lo = ev(lo)
    evals += 1
    d = step
    while not i_lo >= 1.0:
        if evals > cfg.max_iterations:
            raise Infeasible(lam, f"lambda={lam!r}: no lower bracket found")
        if i_lo < 1.0:
            hi = lo
        cand = lo - d
        d *= growth
        if cand <= b_min:
            cand = b_min + (lo - b_min) / growth
        lo = cand
        i_lo = ev(lo)
        evals += 1

    # push hi right until I(hi) <= 1
    i_hi = ev(hi)
    evals += 1
    d = step
    while not i_hi <= 1.0:
        if evals > cfg.max_iterations:
            raise Infeasible(lam, f"lambda={lam!r}: no upper bracket found")
        if i_hi > 1.0:
            lo = max(lo, hi)
        cand = hi + d
        d *= growth
        if cand >= b_max:
            cand = b_max - (b_max - hi) / growth
        hi = cand
        i_hi = ev(hi)
        evals += 1

    bracket_out = (lo, hi)
    if abs(i_lo - 1.0) <= cfg.tolerance:
        b, val, n = lo, i_lo, 0
    elif abs(i_hi - 1.0) <= cfg.tolerance:
        b, val, n = hi, i_hi, 0
    else:
        b, val, n = kernels.bisect(
            kind, shift, lam, lo, hi, risks, weights, cfg.tolerance, cfg.max_iterations
        )

    # Newton polish; keep a step only if it stays bracketed and helps
    for _ in range(NEWTON_STEPS):
        total, slope = kernels.constraint_sum_and_slope(kind, shift, lam, b, risks, weights)
        if total == 1.0 or not slope < 0.0:
            break
        nb = b - (total - 1.0) / slope
        if not (lo <= nb <= hi and _inside(nb, b_min, b_max)) or nb == b:
            break
        nval = ev(nb)
        n += 1
        if abs(nval - 1.0) >= abs(val - 1.0):
            break
        b, val = nb, nval

    residual = abs(val - 1.0)
    if not residual <= cfg.tolerance:
        raise NotConverged(
            f"lambda={lam!r}: residual {residual:.3e} exceeds tolerance {cfg.tolerance:.1e} "
            f"after {n} iterations"
        )
    return NormalizationResult(float(b), residual, evals + n, bracket_out, True, lam)


def closed_form_beta_kl(space: DiscreteModelSpace, lam: float) -> float:
    """``lam * log sum_i q_i exp(-L_i / lam)``, shifted for stability."""
    lam = _check_lam(lam)
    d = float(space.risks.min())
    t = np.expm1(-(space.risks - d) / lam)
    return -d + lam * math.log1p(float(np.dot(space.weights, t)))


def closed_form_beta_chi2(space: DiscreteModelSpace, lam: float, spec=None) -> float:
    """Normalization constant for the Pearson generator ``u**2 - 1`` (or a shift of it).

    The density is affine in the risk, ``g_i = 1 + (R_Q - L_i) / (2 lam)``,
    which gives ``beta = -R_Q - lam * fdot(1)``: ``-(2 lam + R_Q)`` for the raw
    generator and ``-R_Q`` for ``(u - 1)**2``. Raises ``Infeasible`` unless
    every density value is positive, i.e. ``2 lam + R_Q > max_i L_i``.
    """
    lam = _check_lam(lam)
    slope_at_one = 2.0 if spec is None else float(spec.fdot(1.0))
    summ = summarize(space)
    if summ.separable and not 2.0 * lam + summ.r_Q > summ.max_risk:
        raise Infeasible(
            lam,
            f"lambda={lam!r}: 2*lambda + R_Q = {2 * lam + summ.r_Q!r} does not exceed "
            f"max risk {summ.max_risk!r}",
        )
    return -summ.r_Q - lam * slope_at_one


def chi2_lambda_star(space: DiscreteModelSpace) -> float:
    """Infimum of feasible factors for the Pearson generator: ``(max L - R_Q) / 2``."""
    summ = summarize(space)
    return 0.5 * (summ.max_risk - summ.r_Q)


def js_fixed_point_constant(beta: float, lam: float) -> float:
    """``exp(-beta / lam) / 2``, the constant of the Jensen-Shannon fixed-point form."""
    return 0.5 * math.exp(-beta / lam)


def lambda_star_estimate(
    space: DiscreteModelSpace,
    spec,
    cfg: SolverConfig = DEFAULT_CONFIG,
    rel_tol: float = 1e-6,
    cap: float = 1e9,
) -> float:
    """Infimum of the feasible regularization factors.

    Zero when the inverse derivative is positive everywhere, or when every
    factor down to a negligible floor is feasible. Otherwise a geometric
    bisection on the exact feasibility predicate.
    """
    if spec.strictly_positive_inverse:
        return 0.0
    summ = summarize(space)
    if not summ.separable:
        return 0.0
    scale = max(1.0, summ.max_risk - summ.delta_star)
    hi = min(scale, cap)
    while not is_feasible(space, spec, hi):
        hi *= cfg.bracket_growth
        if hi > cap:
            raise EmptyFeasibleSet(f"{spec.name}: no feasible lambda below {cap:g}")
    floor = 1e-12 * scale
    lo = hi
    while is_feasible(space, spec, lo):
        lo /= cfg.bracket_growth
        if lo < floor:
            return 0.0
    while hi / lo - 1.0 > rel_tol:
        mid = math.sqrt(lo * hi)
        if is_feasible(space, spec, mid):
            hi = mid
        else:
            lo = mid
    return hi
