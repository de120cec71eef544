"""Catalog of strictly convex generators ``f`` and their calculus objects.

Every catalog entry is a *base* generator plus an affine shift ``s``::

    f_s(u) = f(u) - s * (u - 1)

which leaves the divergence unchanged but moves the derivative by ``-s``.
The shift is what ``canonicalize`` adjusts, and it is also how the compiled
kernels identify a spec (``kind``, ``shift``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import NotStrictlyConvex, OutOfDomain, UnknownDivergence
from .special import wright_omega

NAMES = ("kl", "reverse_kl", "jeffreys", "jensen_shannon", "hellinger", "chi_squared")

# kernel ids shared with the compiled core
KL, NEGLOG, JEFFREYS, JS, HELLINGER, CHI2 = range(6)

LN2 = math.log(2.0)
INF = math.inf


def _out(x):
    """Return a Python float for 0-d results, the array otherwise."""
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _u(u):
    return np.asarray(u, dtype=float)


@dataclass(frozen=True)
class _Base:
    f: Callable
    fdot: Callable
    fdot_inv: Callable  # assumes the argument is inside dom
    fddot: Callable
    fstar: Callable  # assumes the argument is inside dom
    dom: tuple
    fdot_at_zero: float
    f_at_zero: float


def _xlogx_ratio(u):
    # u * log(2u / (u + 1)) with the 0 * log 0 = 0 convention
    with np.errstate(divide="ignore", invalid="ignore"):
        t = u * np.log(2.0 * u / (u + 1.0))
    return np.where(u > 0, t, 0.0)


def _js_inv(v):
    # e^v / (2 - e^v), with 2 - e^v = -2 expm1(v - ln 2) for accuracy near ln 2
    return np.exp(v) / (-2.0 * np.expm1(v - LN2))


def _jeffreys_inv(v):
    return 1.0 / wright_omega(1.0 - v)


def _jeffreys_star(v):
    w = wright_omega(1.0 - v)
    return w + 1.0 / w + v - 2.0


_BASES = {
    KL: _Base(
        f=lambda u: np.where(u > 0, u * np.log(np.where(u > 0, u, 1.0)), 0.0) - u + 1.0,
        fdot=np.log,
        fdot_inv=np.exp,
        fddot=lambda u: 1.0 / u,
        fstar=lambda v: np.expm1(v),
        dom=(-INF, INF),
        fdot_at_zero=-INF,
        f_at_zero=1.0,
    ),
    # f(u) = -log u; the canonical reverse relative entropy is this with shift -1
    NEGLOG: _Base(
        f=lambda u: -np.log(u),
        fdot=lambda u: -1.0 / u,
        fdot_inv=lambda v: -1.0 / v,
        fddot=lambda u: 1.0 / (u * u),
        fstar=lambda v: -1.0 - np.log(-v),
        dom=(-INF, 0.0),
        fdot_at_zero=-INF,
        f_at_zero=INF,
    ),
    JEFFREYS: _Base(
        f=lambda u: (u - 1.0) * np.log(u),
        fdot=lambda u: np.log(u) + 1.0 - 1.0 / u,
        fdot_inv=_jeffreys_inv,
        fddot=lambda u: 1.0 / u + 1.0 / (u * u),
        fstar=_jeffreys_star,
        dom=(-INF, INF),
        fdot_at_zero=-INF,
        f_at_zero=INF,
    ),
    JS: _Base(
        f=lambda u: _xlogx_ratio(u) + np.log(2.0 / (u + 1.0)),
        fdot=lambda u: LN2 - np.log1p(1.0 / u),
        fdot_inv=_js_inv,
        fddot=lambda u: 1.0 / (u * (u + 1.0)),
        fstar=lambda v: -LN2 - np.log(-np.expm1(v - LN2)),
        dom=(-INF, LN2),
        fdot_at_zero=-INF,
        f_at_zero=LN2,
    ),
    HELLINGER: _Base(
        f=lambda u: (1.0 - np.sqrt(u)) ** 2,
        fdot=lambda u: 1.0 - 1.0 / np.sqrt(u),
        fdot_inv=lambda v: 1.0 / (1.0 - v) ** 2,
        fddot=lambda u: 0.5 * u ** -1.5,
        fstar=lambda v: v / (1.0 - v),
        dom=(-INF, 1.0),
        fdot_at_zero=-INF,
        f_at_zero=1.0,
    ),
    # raw Pearson generator f(u) = u^2 - 1
    CHI2: _Base(
        f=lambda u: u * u - 1.0,
        fdot=lambda u: 2.0 * u,
        fdot_inv=lambda v: 0.5 * v,
        fddot=lambda u: np.full_like(u, 2.0),
        fstar=lambda v: 0.25 * v * v + 1.0,
        dom=(0.0, INF),
        fdot_at_zero=0.0,
        f_at_zero=-1.0,
    ),
}


@dataclass(frozen=True)
class DivergenceSpec:
    """A generator ``f`` with derivative, inverse derivative and conjugate.

    All callables accept scalars or arrays. ``fdot_inv`` and ``fstar`` raise
    ``OutOfDomain`` for arguments outside the open interval ``dom_J``.
    """

    name: str
    form: str
    kind: int
    shift: float
    f: Callable
    fdot: Callable
    fdot_inv: Callable
    fddot: Callable
    fstar: Callable
    dom_J: tuple
    fdot_at_zero: float
    f_at_zero: float
    strictly_positive_inverse: bool
    log_convex_inverse: bool

    @property
    def is_canonical(self) -> bool:
        return self.fdot(1.0) == 0.0

    def in_domain(self, v):
        v = np.asarray(v, dtype=float)
        lo, hi = self.dom_J
        return (v > lo) & (v < hi)

    def __repr__(self):
        return f"DivergenceSpec({self.name!r}, form={self.form!r}, shift={self.shift!r})"


def _build(name, form, kind, shift, positive, log_convex):
    base = _BASES[kind]
    lo, hi = base.dom[0] - shift, base.dom[1] - shift

    def check(v):
        v = np.asarray(v, dtype=float)
        ok = (v > lo) & (v < hi)
        if not np.all(ok):
            bad = np.flatnonzero(~np.atleast_1d(ok))[0]
            raise OutOfDomain(
                f"{name}: argument {np.atleast_1d(v)[bad]!r} outside dom_J=({lo}, {hi})",
                index=int(bad),
            )
        return v

    def f(u):
        u = _u(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            return _out(base.f(u) - shift * (u - 1.0))

    def fdot(u):
        with np.errstate(divide="ignore"):
            return _out(base.fdot(_u(u)) - shift)

    def fdot_inv(v):
        return _out(base.fdot_inv(check(v) + shift))

    def fddot(u):
        return _out(base.fddot(_u(u)))

    def fstar(v):
        return _out(base.fstar(check(v) + shift) - shift)

    return DivergenceSpec(
        name=name,
        form=form,
        kind=kind,
        shift=float(shift),
        f=f,
        fdot=fdot,
        fdot_inv=fdot_inv,
        fddot=fddot,
        fstar=fstar,
        dom_J=(lo, hi),
        fdot_at_zero=base.fdot_at_zero - shift,
        f_at_zero=base.f_at_zero + shift,
        strictly_positive_inverse=positive,
        log_convex_inverse=log_convex,
    )


# name -> (kind, {form: shift}, default form, strictly positive inverse, log-convex inverse)
_CATALOG = {
    "kl": (KL, {"canonical": 0.0}, "canonical", True, True),
    "reverse_kl": (NEGLOG, {"canonical": -1.0, "relaxed": 0.0}, "canonical", False, True),
    "jeffreys": (JEFFREYS, {"canonical": 0.0}, "canonical", True, True),
    "jensen_shannon": (JS, {"canonical": 0.0}, "canonical", False, True),
    "hellinger": (HELLINGER, {"canonical": 0.0}, "canonical", True, True),
    "chi_squared": (CHI2, {"raw": 0.0, "canonical": 2.0}, "raw", False, False),
}


def make_divergence(name: str, form: str | None = None) -> DivergenceSpec:
    """Build a catalog spec.

    ``form`` selects the affine representative: ``reverse_kl`` accepts
    ``"canonical"`` (default) or ``"relaxed"`` (``f(u) = -log u``);
    ``chi_squared`` accepts ``"raw"`` (default, ``u**2 - 1``) or
    ``"canonical"`` (``(u - 1)**2``).
    """
    key = name.lower()
    if key in ("total_variation", "tv"):
        raise NotStrictlyConvex("total variation |u - 1| is neither strictly convex nor differentiable at 1")
    if key not in _CATALOG:
        raise UnknownDivergence(f"unknown divergence {name!r}; expected one of {NAMES}")
    kind, forms, default, positive, log_convex = _CATALOG[key]
    form = default if form in (None, "default") else form
    if form not in forms:
        raise UnknownDivergence(f"{key} has no form {form!r}; expected one of {sorted(forms)}")
    return _build(key, form, kind, forms[form], positive, log_convex)


def canonicalize(spec: DivergenceSpec) -> DivergenceSpec:
    """Shift ``f`` by ``-fdot(1) * (u - 1)`` so that ``fdot(1) = 0``."""
    slope = spec.fdot(1.0)
    if not math.isfinite(slope):
        raise ValueError(f"fdot(1) is not finite for {spec!r}")
    if slope == 0.0:
        return spec
    out = _build(
        spec.name,
        "canonical",
        spec.kind,
        spec.shift + slope,
        spec.strictly_positive_inverse,
        spec.log_convex_inverse,
    )
    return out


def all_specs(include_relaxed: bool = False) -> list[DivergenceSpec]:
    specs = [make_divergence(n) for n in NAMES]
    if include_relaxed:
        specs.append(make_divergence("reverse_kl", "relaxed"))
    return specs


def with_form(spec: DivergenceSpec, form: str) -> DivergenceSpec:
    return make_divergence(spec.name, form)


__all__ = [
    "DivergenceSpec",
    "NAMES",
    "all_specs",
    "canonicalize",
    "make_divergence",
    "replace",
    "with_form",
]
