"""Regularization-factor sweeps on a synthetic linear classification task.

The reference measure is uniform over a square grid of 2D linear
classifiers ``x -> sign(x . theta)``, the loss is zero-one (ties count as
errors), and each trial draws a fresh train/test pair from two Gaussian
blobs. Zero-one risks take at most ``n + 1`` distinct values, so each risk
field is compressed to its distinct values before solving.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .divergences import make_divergence
from .errors import Infeasible
from .model_space import DiscreteModelSpace, compress, summarize
from .solver import DEFAULT_CONFIG, SolverConfig, rn_at, solve_normalization

CSV_FIELDS = (
    "divergence",
    "lambda",
    "train_mean",
    "train_std",
    "test_mean",
    "test_std",
    "gap_mean",
    "gap_std",
    "beta_mean",
    "feasible_frac",
)
CHAIN_TOL = 1e-10


@dataclass(frozen=True)
class ExperimentConfig:
    grid_bounds: tuple = (-50.0, 50.0)
    resolution: int = 101
    divergences: tuple = ("kl", "reverse_kl", "jensen_shannon", "hellinger")
    lambda_min: float = 1e-2
    lambda_max: float = 1e2
    n_lambdas: int = 30
    trials: int = 100
    n_train: int = 500
    n_test: int = 500
    mean: tuple = (1.0, 1.0)
    scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid_bounds", tuple(float(x) for x in self.grid_bounds))
        object.__setattr__(self, "divergences", tuple(self.divergences))
        object.__setattr__(self, "mean", tuple(float(x) for x in self.mean))
        lo, hi = self.grid_bounds
        if not lo < hi:
            raise ValueError("grid_bounds must be increasing")
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if not 0.0 < self.lambda_min <= self.lambda_max or self.n_lambdas < 1:
            raise ValueError("lambda grid must be positive and ascending")
        if self.n_lambdas > 1 and self.lambda_min == self.lambda_max:
            raise ValueError("lambda grid must be strictly ascending")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("train and test sizes must be positive")
        if len(self.mean) != 2 or self.scale < 0.0:
            raise ValueError("mean must have two entries and scale must be nonnegative")
        for name in self.divergences:
            make_divergence(name)

    @property
    def lambdas(self) -> np.ndarray:
        return np.logspace(math.log10(self.lambda_min), math.log10(self.lambda_max), self.n_lambdas)

    @classmethod
    def from_mapping(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = str(path)
        if path.lower().endswith(".json"):
            with open(path) as fh:
                return cls.from_mapping(json.load(fh))
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            return cls.from_mapping(tomllib.load(fh))


@dataclass
class Dataset:
    x: np.ndarray
    y: np.ndarray

    def __len__(self):
        return self.y.size

    def split(self, n_first: int):
        return Dataset(self.x[:n_first], self.y[:n_first]), Dataset(self.x[n_first:], self.y[n_first:])


def generate_dataset(config: ExperimentConfig, seed, n: int | None = None) -> Dataset:
    """Labels uniform on {-1, +1}; features ``y * mean + scale * N(0, I)``."""
    rng = np.random.default_rng(seed)
    n = config.n_train + config.n_test if n is None else n
    y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    x = y[:, None] * np.asarray(config.mean)[None, :] + config.scale * rng.standard_normal((n, 2))
    return Dataset(x, y)


def model_grid(config: ExperimentConfig) -> np.ndarray:
    lo, hi = config.grid_bounds
    axis = np.linspace(lo, hi, config.resolution)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([a.ravel(), b.ravel()])


def zero_one_risks(data: Dataset, grid: np.ndarray) -> np.ndarray:
    """Fraction of points with ``y * (x . theta) <= 0`` for each grid row."""
    margins = (grid @ data.x.T) * data.y[None, :]
    return np.count_nonzero(margins <= 0.0, axis=1) / len(data)


def risk_field(data: Dataset, grid: np.ndarray) -> DiscreteModelSpace:
    """Uniform reference over the grid with zero-one empirical risks."""
    n = grid.shape[0]
    return DiscreteModelSpace(grid, np.full(n, 1.0 / n), zero_one_risks(data, grid))


@dataclass
class SweepRecord:
    divergence: str
    lam: float
    train_mean: float
    train_std: float
    test_mean: float
    test_std: float
    gap_mean: float
    gap_std: float
    beta_mean: float
    feasible_frac: float
    # not part of the CSV schema
    r_q_mean: float = math.nan
    delta_star_mean: float = math.nan
    chain_worst: float = math.nan
    train_values: list = field(default_factory=list, repr=False)

    def row(self) -> dict:
        return {
            "divergence": self.divergence,
            "lambda": self.lam,
            "train_mean": self.train_mean,
            "train_std": self.train_std,
            "test_mean": self.test_mean,
            "test_std": self.test_std,
            "gap_mean": self.gap_mean,
            "gap_std": self.gap_std,
            "beta_mean": self.beta_mean,
            "feasible_frac": self.feasible_frac,
        }


def _mean_std(values):
    if not values:
        return math.nan, math.nan
    a = np.asarray(values, dtype=float)
    return float(a.mean()), float(a.std())


def _trial(config, grid, seed, lambdas, specs, cfg):
    data = generate_dataset(config, seed)
    train, test = data.split(config.n_train)
    space = risk_field(train, grid)
    test_risks = zero_one_risks(test, grid)
    small, inverse = compress(space)
    summ = summarize(small)
    out = {}
    for spec in specs:
        rows = []
        for lam in lambdas:
            try:
                beta = solve_normalization(small, spec, lam, cfg).beta
            except Infeasible:
                rows.append(None)
                continue
            g = rn_at(small, spec, lam, beta)
            r_train = float(np.dot(small.risks * g, small.weights))
            r_test = float(np.dot(test_risks * g[inverse], space.weights))
            rows.append((r_train, r_test, beta))
        chain = [summ.delta_star] + [r[0] for r in rows if r is not None] + [summ.r_Q]
        worst = max(a - b for a, b in zip(chain, chain[1:]))
        out[spec.name] = (rows, worst)
    return out, summ


def run_sweep(config: ExperimentConfig, cfg: SolverConfig = DEFAULT_CONFIG) -> list:
    """Average train/test posterior risks over independent trials for each (divergence, lambda)."""
    grid = model_grid(config)
    lambdas = [float(x) for x in config.lambdas]
    specs = [make_divergence(name) for name in config.divergences]
    seeds = np.random.SeedSequence(config.seed).spawn(config.trials)
    per_trial = []
    r_qs, deltas = [], []
    for s in seeds:
        res, summ = _trial(config, grid, s, lambdas, specs, cfg)
        per_trial.append(res)
        r_qs.append(summ.r_Q)
        deltas.append(summ.delta_star)
    r_q_mean = float(np.mean(r_qs))
    delta_mean = float(np.mean(deltas))
    records = []
    for spec in specs:
        chain_worst = max(t[spec.name][1] for t in per_trial)
        for j, lam in enumerate(lambdas):
            vals = [t[spec.name][0][j] for t in per_trial]
            ok = [v for v in vals if v is not None]
            tr = [v[0] for v in ok]
            te = [v[1] for v in ok]
            gap = [b - a for a, b in zip(tr, te)]
            tm, ts = _mean_std(tr)
            em, es = _mean_std(te)
            gm, gs = _mean_std(gap)
            bm, _ = _mean_std([v[2] for v in ok])
            records.append(
                SweepRecord(
                    spec.name, lam, tm, ts, em, es, gm, gs, bm, len(ok) / len(vals),
                    r_q_mean, delta_mean, chain_worst, tr,
                )
            )
    return records


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        row = r.row()
        w.writerow([_fmt(row[k]) for k in CSV_FIELDS])
    return buf.getvalue()


def records_to_json(records) -> str:
    rows = []
    for r in records:
        d = asdict(r)
        d.pop("train_values")
        d = {k: (repr(v) if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}
        rows.append(d)
    return json.dumps(rows, sort_keys=True, indent=1)


def chains_hold(records, tol: float = CHAIN_TOL) -> bool:
    return all(r.chain_worst <= tol for r in records)
