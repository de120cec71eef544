"""Randomized conformance suite for the solver's structural guarantees.

Each check produces one ``PropertyReport`` per (property, divergence,
instance). Reports are sorted by a canonical key so that a fixed seed gives
byte-identical JSON.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .divergences import all_specs, canonicalize
from .errors import FdrError, NotApplicable
from .model_space import DiscreteModelSpace, expected_risk, summarize
from .posterior import (
    duality_gap,
    jensen_bound_check,
    ode_residual,
    ordering_check,
    risk_monotone_in_lambda,
    solve_posterior,
    objective_identities,
)
from .solver import DEFAULT_CONFIG, SolverConfig, is_feasible, lambda_star_estimate, solve_normalization

PASS, FAIL, NA = "pass", "fail", "not-applicable"
ATOM_COUNTS = (2, 5, 20, 100)
EPS = np.finfo(float).eps

PROPERTIES = (
    "continuity_in_lambda",
    "density_order",
    "derivative_positivity",
    "duality_gap",
    "feasible_set_convexity",
    "jensen_bound",
    "max_density_bound",
    "mutual_absolute_continuity",
    "normalization",
    "normalization_monotone_in_lambda",
    "normalization_ode",
    "objective_identities",
    "risk_monotone_in_lambda",
)


@dataclass(frozen=True)
class PropertyReport:
    property: str
    divergence: str
    instance: int
    seed: int
    n_atoms: int
    lam: float
    status: str
    worst_residual: float
    tolerance: float
    detail: str = ""

    def key(self):
        return (self.property, self.divergence, self.instance)


def random_space(rng: np.random.Generator, n: int | None = None) -> DiscreteModelSpace:
    """Atoms from ``ATOM_COUNTS``; uniform [0, 10] or exponential (mean 2) risks;
    uniform or normalized-positive-random weights."""
    if n is None:
        n = int(rng.choice(ATOM_COUNTS))
    if rng.random() < 0.5:
        risks = rng.uniform(0.0, 10.0, n)
    else:
        risks = rng.exponential(2.0, n)
    if rng.random() < 0.5:
        weights = np.full(n, 1.0 / n)
    else:
        w = rng.random(n) + 1e-3
        weights = w / w.sum()
    return DiscreteModelSpace.from_risks(risks, weights)


def log_convex_probe(spec, n: int = 400, rtol: float = 1e-9) -> bool:
    """Empirical log-convexity of ``fdot_inv`` on its domain.

    Samples ``v = fdot(u)`` for log-spaced ``u`` and checks that the slopes of
    ``v -> log u`` are nondecreasing.
    """
    u = np.logspace(-3, 3, n)
    v = np.asarray(spec.fdot(u), dtype=float)
    logu = np.log(u)
    slopes = np.diff(logu) / np.diff(v)
    return bool(np.all(np.diff(slopes) >= -rtol * np.abs(slopes[1:])))


def _report(prop, spec, k, seed, space, lam, worst, tol, detail="", status=None):
    worst = float(worst)
    if status is None:
        status = PASS if worst <= tol else FAIL
    return PropertyReport(prop, spec.name, k, seed, len(space), float(lam), status, worst, float(tol), detail)


def _pick_lambda(rng, space, spec):
    lam = float(10.0 ** rng.uniform(-1.0, 1.0))
    if not is_feasible(space, spec, lam):
        lam = 2.0 * lambda_star_estimate(space, spec)
    return lam


def _instance_checks(spec, k, seed, space, lam, cfg, probe_ok):
    out = []
    add = out.append
    summ = summarize(space)
    post, res = solve_posterior(space, spec, lam, cfg)
    g = post.rn
    q = space.weights

    add(_report("normalization", spec, k, seed, space, lam, abs(float(np.dot(g, q)) - 1.0), 1e-8))
    add(_report("mutual_absolute_continuity", spec, k, seed, space, lam, float(np.sum(g <= 0.0)), 0.0,
                "count of atoms with zero density"))

    oc = ordering_check(space, spec, post)
    bad_order = max(oc["max_increase"], 0.0) + (0.0 if oc["ties_exact"] else 1.0) + (
        0.0 if oc["strict_where_positive"] else 1.0)
    add(_report("density_order", spec, k, seed, space, lam, bad_order, 0.0,
                "largest density increase along increasing risk; ties exact; strict where positive"))
    bad_max = abs(oc["max_gap"]) + (0.0 if oc["argmax_is_argmin"] else 1.0)
    add(_report("max_density_bound", spec, k, seed, space, lam, bad_max, 0.0,
                "max density minus its closed form; attaining set equals argmin set"))

    add(_report("duality_gap", spec, k, seed, space, lam, abs(duality_gap(space, spec, lam, cfg)), 1e-7))

    ident = objective_identities(space, spec, lam, cfg)
    ref_tol = max(1e-8, 64.0 * EPS * ident["reference_form_scale"])
    worst_ident = max(abs(ident["primal_dual_sum"]), abs(ident["reference_form"]) * (1e-8 / ref_tol))
    add(_report("objective_identities", spec, k, seed, space, lam, worst_ident, 1e-8,
                f"reference-form residual rescaled by rounding bound {ref_tol:.3e}"))

    try:
        jb = jensen_bound_check(space, spec, lam, cfg)
        add(_report("jensen_bound", spec, k, seed, space, lam, max(-jb["slack"], 0.0), 1e-10,
                    f"slack {jb['slack']:.6e}"))
    except NotApplicable as exc:
        add(_report("jensen_bound", spec, k, seed, space, lam, 0.0, 1e-10, str(exc), NA))

    canon = canonicalize(spec)
    pos = float(np.dot(np.asarray(canon.fdot(g[g > 0]), dtype=float) * g[g > 0], q[g > 0]))
    add(_report("derivative_positivity", spec, k, seed, space, lam, max(-pos, 0.0), 1e-10,
                f"sum fdot(g) g q = {pos:.6e} in canonical form"))

    ode = ode_residual(space, spec, lam, cfg)
    add(_report("normalization_ode", spec, k, seed, space, lam, ode["relative"], 1e-3))

    n0 = res.beta
    n1 = solve_normalization(space, spec, lam * (1.0 + 1e-6), cfg).beta
    add(_report("continuity_in_lambda", spec, k, seed, space, lam, abs(n1 - n0) / (1.0 + abs(n0)), 1e-3))

    lams = lam * np.logspace(-1.0, 1.0, 20)
    lams = [x for x in lams if is_feasible(space, spec, x)]
    mono = risk_monotone_in_lambda(space, spec, lams, cfg)
    add(_report("risk_monotone_in_lambda", spec, k, seed, space, lam, max(mono["worst_violation"], 0.0), 1e-10,
                f"{len(lams)} feasible grid points"))

    if probe_ok:
        betas = mono["betas"]
        rise = max((b - a for a, b in zip(betas, betas[1:])), default=0.0)
        add(_report("normalization_monotone_in_lambda", spec, k, seed, space, lam, max(rise, 0.0),
                    1e-10 * (1.0 + max(abs(b) for b in betas))))
    else:
        add(_report("normalization_monotone_in_lambda", spec, k, seed, space, lam, 0.0, 0.0,
                    "inverse derivative failed the log-convexity probe", NA))

    scan = np.logspace(-3.0, 3.0, 25)
    flags = [is_feasible(space, spec, x) for x in scan]
    drops = sum(1 for a, b in zip(flags, flags[1:]) if a and not b)
    detail = f"{sum(flags)}/{len(flags)} scanned factors feasible"
    if spec.name == "chi_squared" and summ.separable:
        star = lambda_star_estimate(space, spec, cfg)
        lam0, lam1 = 0.5 * star, 1.5 * star
        probe = lam1 + lam1 * np.linspace(0.05, 1.0, 10)
        drops += int(is_feasible(space, spec, lam0)) + int(not is_feasible(space, spec, lam1))
        drops += sum(1 for x in probe if not is_feasible(space, spec, x))
        detail += f"; designed probe around lambda*={star:.6g}"
    add(_report("feasible_set_convexity", spec, k, seed, space, lam, float(drops), 0.0, detail))
    return out


def run_suite(seed: int = 42, n_instances: int = 10, config: SolverConfig = DEFAULT_CONFIG) -> list:
    rng = np.random.default_rng(seed)
    specs = all_specs()
    probes = {s.name: log_convex_probe(s) for s in specs}
    reports = []
    for k in range(n_instances):
        space = random_space(rng)
        for spec in specs:
            lam = _pick_lambda(rng, space, spec)
            try:
                reports.extend(_instance_checks(spec, k, seed, space, lam, config, probes[spec.name]))
            except FdrError as exc:
                for prop in PROPERTIES:
                    reports.append(_report(prop, spec, k, seed, space, lam, math.inf, 0.0,
                                           f"{type(exc).__name__}: {exc}", FAIL))
    reports.sort(key=PropertyReport.key)
    return reports


def summarize_reports(reports) -> dict:
    out = {}
    for r in reports:
        c = out.setdefault(r.property, {PASS: 0, FAIL: 0, NA: 0})
        c[r.status] += 1
    return out


def reports_to_json(reports) -> str:
    def clean(x):
        return x if not (isinstance(x, float) and not math.isfinite(x)) else repr(x)

    rows = [{k: clean(v) for k, v in asdict(r).items()} for r in reports]
    return json.dumps(rows, sort_keys=True, indent=1)


__all__ = [
    "PROPERTIES",
    "PropertyReport",
    "expected_risk",
    "log_convex_probe",
    "random_space",
    "reports_to_json",
    "run_suite",
    "summarize_reports",
]
