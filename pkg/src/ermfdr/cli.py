"""Command-line entry point: ``ermfdr <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from .divergences import NAMES, make_divergence
from .equivalence import verify_equivalence
from .errors import FdrError, Infeasible, NotApplicable
from .experiment import ExperimentConfig, records_to_csv, records_to_json, run_sweep
from .model_space import expected_risk, f_divergence, load_space
from .posterior import (
    build_posterior,
    dual_value,
    duality_gap,
    jensen_bound_check,
    ode_residual,
    ordering_check,
    primal_value,
    risk_gap_identities,
    objective_identities,
)
from .properties import reports_to_json, run_suite, summarize_reports
from .solver import SolverConfig, solve_normalization


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=1)


def _rows_csv(rows) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _spec(args, attr="divergence", form_attr="form"):
    return make_divergence(getattr(args, attr), getattr(args, form_attr, None))


def _cfg(args) -> SolverConfig:
    return SolverConfig(tolerance=args.tol, max_iterations=args.max_iter)


def cmd_solve(args):
    space = load_space(args.space)
    spec = _spec(args)
    try:
        res = solve_normalization(space, spec, args.lam, _cfg(args))
        out = {"beta": res.beta, "residual": res.residual, "iterations": res.iterations, "feasible": True}
    except Infeasible as exc:
        out = {"beta": None, "residual": None, "iterations": 0, "feasible": False, "error": str(exc)}
    _emit(args, _dump(out))
    return 0


def cmd_sweep(args):
    space = load_space(args.space)
    spec = _spec(args)
    cfg = _cfg(args)
    rows = []
    for lam in np.logspace(math.log10(args.lambda_min), math.log10(args.lambda_max), args.n_lambdas):
        lam = float(lam)
        row = {"lambda": lam, "feasible": False, "beta": math.nan, "risk": math.nan,
               "divergence_value": math.nan, "primal": math.nan, "dual": math.nan}
        try:
            res = solve_normalization(space, spec, lam, cfg)
        except Infeasible:
            rows.append(row)
            continue
        post = build_posterior(space, spec, lam, res.beta)
        row.update(
            feasible=True,
            beta=res.beta,
            risk=expected_risk(space, post.rn),
            divergence_value=f_divergence(space, post.rn, spec),
            primal=primal_value(space, spec, post),
            dual=-dual_value(space, spec, lam, res.beta),
        )
        rows.append(row)
    _emit(args, _rows_csv(rows) if args.format == "csv" else _dump(rows))
    return 0


def _single_report(space, spec, lam, cfg):
    res = solve_normalization(space, spec, lam, cfg)
    post = build_posterior(space, spec, lam, res.beta)
    report = {
        "divergence": spec.name,
        "form": spec.form,
        "lambda": lam,
        "normalization": res.to_dict(),
        "duality_gap": duality_gap(space, spec, lam, cfg),
        "objective_identities": objective_identities(space, spec, lam, cfg),
        "ordering": ordering_check(space, spec, post),
        "ode": ode_residual(space, spec, lam, cfg),
    }
    for key, fn in (("jensen_bound", jensen_bound_check), ("risk_gap", risk_gap_identities)):
        try:
            report[key] = fn(space, spec, lam, cfg)
        except NotApplicable as exc:
            report[key] = {"not_applicable": str(exc)}
    return report


def cmd_check(args):
    cfg = _cfg(args)
    if args.suite:
        reports = run_suite(args.seed, args.n_instances, cfg)
        if args.summary:
            _emit(args, _dump(summarize_reports(reports)))
        else:
            _emit(args, reports_to_json(reports))
        return 0 if all(r.status != "fail" for r in reports) else 1
    if not (args.space and args.divergence and args.lam):
        raise SystemExit("check needs --space, --divergence and --lambda (or --suite)")
    space = load_space(args.space)
    _emit(args, _dump(_single_report(space, _spec(args), args.lam, cfg)))
    return 0


def cmd_equivalence(args):
    space = load_space(args.space)
    rep = verify_equivalence(
        space, make_divergence(args.source), make_divergence(args.target), args.lam, args.c, _cfg(args)
    )
    if args.format == "csv":
        rows = [{"atom": i, "risk": float(L), "transformed_risk": float(r)}
                for i, (L, r) in enumerate(zip(space.risks, rep["transformed_risks"]))]
        _emit(args, _rows_csv(rows))
    else:
        _emit(args, _dump(rep))
    return 0 if rep["holds"] else 1


def cmd_experiment(args):
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if overrides:
        cfg = ExperimentConfig.from_mapping({**cfg.__dict__, **overrides})
    records = run_sweep(cfg)
    _emit(args, records_to_json(records) if args.format == "json" else records_to_csv(records))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--tol", type=float, default=1e-10)
    solver.add_argument("--max-iter", type=int, default=200)

    p = argparse.ArgumentParser(prog="ermfdr", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def div_args(sp, required=True):
        sp.add_argument("--divergence", choices=NAMES, required=required)
        sp.add_argument("--form", default=None, help="canonical, relaxed (reverse_kl) or raw (chi_squared)")

    s = sub.add_parser("solve", parents=[common, solver], help="normalization constant for one factor")
    div_args(s)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--space", required=True)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("sweep", parents=[common, solver], help="solve over a log-spaced factor grid")
    div_args(s)
    s.add_argument("--space", required=True)
    s.add_argument("--lambda-min", type=float, default=1e-2)
    s.add_argument("--lambda-max", type=float, default=1e2)
    s.add_argument("--n-lambdas", type=int, default=30)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("check", parents=[common, solver], help="identity residuals, or the randomized suite")
    div_args(s, required=False)
    s.add_argument("--space")
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--suite", action="store_true")
    s.add_argument("--n-instances", type=int, default=10)
    s.add_argument("--summary", action="store_true", help="with --suite, print pass/fail counts only")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("equivalence", parents=[common, solver], help="risk transform between divergences")
    s.add_argument("--from", dest="source", choices=NAMES, required=True)
    s.add_argument("--to", dest="target", choices=NAMES, required=True)
    s.add_argument("--space", required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--c", type=float, default=0.0, help="constant subtracted from transformed risks")
    s.set_defaults(func=cmd_equivalence)

    s = sub.add_parser("experiment", parents=[common], help="synthetic train/test factor sweep")
    s.add_argument("--config", default=None, help="TOML or JSON file with ExperimentConfig fields")
    s.add_argument("--trials", type=int, default=None)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check" and args.seed is None:
        args.seed = 42
    try:
        return args.func(args)
    except FdrError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
