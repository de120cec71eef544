"""Weighted-atom reference measures and the quantities derived from their risks."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InfiniteDivergence, NotAbsolutelyContinuous, NotAProbability

SEP_TOL = 1e-12
WEIGHT_TOL = 1e-12
RN_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DiscreteModelSpace:
    """Reference measure over a finite list of models, with per-model risks.

    ``atoms`` has shape ``(n, d)``; ``weights`` and ``risks`` have shape
    ``(n,)``. Weights must be strictly positive and sum to one. Risks must be
    finite and, unless ``allow_negative_risks`` is set, nonnegative.
    """

    atoms: np.ndarray
    weights: np.ndarray
    risks: np.ndarray
    allow_negative_risks: bool = field(default=False)

    def __post_init__(self):
        risks = np.array(self.risks, dtype=float).reshape(-1)
        n = risks.size
        if n < 1:
            raise ValueError("a model space needs at least one atom")
        atoms = np.asarray(self.atoms if self.atoms is not None else np.zeros((n, 1)), dtype=float)
        if atoms.ndim == 1:
            atoms = atoms.reshape(n, -1) if atoms.size else np.zeros((n, 1))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if atoms.shape[0] != n or weights.size != n:
            raise ValueError(
                f"atoms ({atoms.shape[0]}), weights ({weights.size}) and risks ({n}) must have equal length"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise NotAProbability("weights must be finite and strictly positive")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise NotAProbability(f"weights sum to {weights.sum()!r}, not 1")
        if not np.all(np.isfinite(risks)):
            raise ValueError("risks must be finite")
        if not self.allow_negative_risks and np.any(risks < 0.0):
            raise ValueError("risks must be nonnegative")
        for name, arr in (("atoms", atoms), ("weights", weights), ("risks", risks)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @classmethod
    def from_risks(cls, risks, weights=None, atoms=None, allow_negative_risks=False):
        """Build a space from risks alone; weights default to uniform."""
        risks = np.asarray(risks, dtype=float).reshape(-1)
        n = risks.size
        if n < 1:
            raise ValueError("a model space needs at least one atom")
        if weights is None:
            weights = np.full(n, 1.0 / n)
        if atoms is None:
            atoms = np.arange(n, dtype=float).reshape(n, 1)
        return cls(atoms, weights, risks, allow_negative_risks)

    def __len__(self):
        return self.risks.size

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def with_risks(self, risks, allow_negative_risks=True) -> "DiscreteModelSpace":
        """Same atoms and weights with a replacement risk vector."""
        return DiscreteModelSpace(self.atoms, self.weights, risks, allow_negative_risks)


@dataclass(frozen=True)
class RiskSummary:
    delta_star: float
    r_Q: float
    separable: bool
    argmin_set: tuple
    max_risk: float


def summarize(space: DiscreteModelSpace, sep_tol: float = SEP_TOL) -> RiskSummary:
    """Smallest attained risk, expected risk under the reference, separability."""
    L = space.risks
    lo = float(L.min())
    hi = float(L.max())
    r_q = float(np.dot(space.weights, L))
    # rounding can push the weighted mean a hair outside [min, max]
    r_q = min(max(r_q, lo), hi)
    argmin = tuple(int(i) for i in np.flatnonzero(L == lo))
    return RiskSummary(
        delta_star=lo,
        r_Q=r_q,
        separable=(hi - lo) > sep_tol,
        argmin_set=argmin,
        max_risk=hi,
    )


def _check_rn(space, rn, tol=RN_TOL, name="rn"):
    rn = np.asarray(rn, dtype=float).reshape(-1)
    if rn.size != len(space):
        raise ValueError(f"{name} has {rn.size} entries, space has {len(space)} atoms")
    if np.any(~np.isfinite(rn)) or np.any(rn < 0.0):
        raise NotAProbability(f"{name} must be finite and nonnegative")
    total = float(np.dot(rn, space.weights))
    if abs(total - 1.0) > tol:
        raise NotAProbability(f"{name} integrates to {total!r} against the reference, not 1")
    return rn


def expected_risk(space: DiscreteModelSpace, rn, tol: float = RN_TOL) -> float:
    """Expected risk under the measure with density ``rn`` w.r.t. the reference."""
    rn = _check_rn(space, rn, tol)
    return float(np.sum(space.risks * rn * space.weights))


def f_divergence(space: DiscreteModelSpace, rn, spec, tol: float = RN_TOL) -> float:
    """``sum_i f(rn_i) q_i`` with ``f(0)`` taken as the right limit."""
    rn = _check_rn(space, rn, tol)
    zero = rn == 0.0
    if np.any(zero):
        if not np.isfinite(spec.f_at_zero):
            raise InfiniteDivergence(f"{spec.name}: f(0) is infinite and the density vanishes on some atom")
        vals = np.empty_like(rn)
        vals[zero] = spec.f_at_zero
        vals[~zero] = spec.f(rn[~zero])
    else:
        vals = np.asarray(spec.f(rn), dtype=float)
    return float(np.dot(vals, space.weights))


def kl(space: DiscreteModelSpace, rn_num, rn_den, tol: float = RN_TOL) -> float:
    """Relative entropy of the ``rn_num`` measure w.r.t. the ``rn_den`` measure."""
    num = _check_rn(space, rn_num, tol, "rn_num")
    den = _check_rn(space, rn_den, tol, "rn_den")
    pos = num > 0.0
    if np.any(den[pos] <= 0.0):
        raise NotAbsolutelyContinuous("rn_den vanishes where rn_num is positive")
    terms = np.zeros_like(num)
    terms[pos] = num[pos] * np.log(num[pos] / den[pos])
    return float(np.dot(terms, space.weights))


def compress(space: DiscreteModelSpace):
    """Merge atoms with identical risks, summing their weights.

    Returns ``(compressed_space, inverse)`` where ``inverse[i]`` is the index of
    atom ``i``'s group. Every quantity the solver computes depends on an atom
    only through its risk, so per-atom results expand back via ``inverse``.
    """
    uniq, inverse = np.unique(space.risks, return_inverse=True)
    w = np.bincount(inverse, weights=space.weights, minlength=uniq.size)
    w = w / w.sum()
    small = DiscreteModelSpace(
        uniq.reshape(-1, 1), w, uniq, allow_negative_risks=space.allow_negative_risks
    )
    return small, inverse


def load_csv(path) -> DiscreteModelSpace:
    """Load ``theta_1,...,theta_d[,weight],risk`` rows. Missing weights are uniform."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if "risk" not in cols:
            raise ValueError(f"{path}: missing 'risk' column")
        theta_cols = sorted(
            (c for c in cols if c.startswith("theta_")), key=lambda c: int(c.split("_", 1)[1])
        )
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no rows")
    risks = np.array([float(r["risk"]) for r in rows])
    atoms = (
        np.array([[float(r[c]) for c in theta_cols] for r in rows])
        if theta_cols
        else np.zeros((len(rows), 1))
    )
    if "weight" in cols:
        weights = _renormalize(np.array([float(r["weight"]) for r in rows]))
    else:
        weights = np.full(len(rows), 1.0 / len(rows))
    return DiscreteModelSpace(atoms, weights, risks)


def _renormalize(weights, slack=1e-5):
    # files often carry weights rounded to a few digits
    total = weights.sum()
    if abs(total - 1.0) <= slack:
        return weights / total
    return weights


def load_json(path) -> DiscreteModelSpace:
    doc = json.loads(Path(path).read_text())
    risks = np.asarray(doc["risks"], dtype=float)
    weights = doc.get("weights")
    atoms = doc.get("atoms")
    return DiscreteModelSpace.from_risks(
        risks,
        None if weights is None else _renormalize(np.asarray(weights, dtype=float)),
        None if atoms is None else np.asarray(atoms, dtype=float),
    )


def load_space(path) -> DiscreteModelSpace:
    """Dispatch on file extension (``.json`` or anything else as CSV)."""
    if str(path).lower().endswith(".json"):
        return load_json(path)
    return load_csv(path)


def space_to_json(space: DiscreteModelSpace) -> dict:
    return {
        "atoms": space.atoms.tolist(),
        "weights": space.weights.tolist(),
        "risks": space.risks.tolist(),
    }
