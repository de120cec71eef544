import math

import mpmath
import numpy as np
import pytest

from conftest import make_random_space
from ermfdr.divergences import all_specs, make_divergence
from ermfdr.errors import NotApplicable, StaleBeta
from ermfdr.model_space import DiscreteModelSpace, expected_risk, summarize
from ermfdr.posterior import (
    build_posterior,
    dual_value,
    duality_gap,
    jensen_bound_check,
    ode_residual,
    ordering_check,
    primal_value,
    risk_gap_identities,
    risk_monotone_in_lambda,
    solve_posterior,
    objective_identities,
)
from ermfdr.solver import is_feasible, lambda_star_estimate, solve_normalization

KL = make_divergence("kl")
RKL = make_divergence("reverse_kl")


def feasible_lambda(space, spec, lam):
    return lam if is_feasible(space, spec, lam) else 2.0 * lambda_star_estimate(space, spec)


class TestExamples:
    def test_kl_two_atom(self, two_atom):
        post, _ = solve_posterior(two_atom, KL, 1.0)
        mpmath.mp.dps = 40
        z = (1 + mpmath.e ** -1) / 2
        assert post.rn[0] == pytest.approx(float(1 / z), rel=1e-13)
        assert post.rn[1] == pytest.approx(float(mpmath.e ** -1 / z), rel=1e-13)
        assert post.total_mass == pytest.approx(1.0, abs=1e-14)
        # optimum is -lam * log E_Q exp(-L / lam)
        assert primal_value(two_atom, KL, post) == pytest.approx(float(-mpmath.log(z)), abs=1e-12)

    def test_reverse_kl_relaxed(self, two_atom):
        spec = make_divergence("reverse_kl", "relaxed")
        post, _ = solve_posterior(two_atom, spec, 1.0)
        np.testing.assert_allclose(post.rn, [math.sqrt(2.0), 2.0 - math.sqrt(2.0)], rtol=1e-12)

    def test_chi_squared(self, two_atom):
        spec = make_divergence("chi_squared")
        post, _ = solve_posterior(two_atom, spec, 1.0)
        np.testing.assert_allclose(post.rn, [1.25, 0.75], rtol=1e-12)
        assert primal_value(two_atom, spec, post) == pytest.approx(0.4375, abs=1e-12)

    def test_weights(self, two_atom):
        post, _ = solve_posterior(two_atom, KL, 1.0)
        np.testing.assert_allclose(post.weights, post.rn * two_atom.weights)
        assert not post.rn.flags.writeable

    def test_stale_beta(self, two_atom):
        beta = solve_normalization(two_atom, KL, 1.0).beta
        build_posterior(two_atom, KL, 1.0, beta)
        with pytest.raises(StaleBeta):
            build_posterior(two_atom, KL, 1.0, beta + 1e-3)


class TestDuality:
    def test_gap(self, rng):
        for _ in range(20):
            space = make_random_space(rng)
            for spec in all_specs(include_relaxed=True):
                lam = feasible_lambda(space, spec, float(10 ** rng.uniform(-1, 1)))
                assert abs(duality_gap(space, spec, lam)) <= 1e-7

    def test_dual_minimized_at_solution(self, rng):
        for _ in range(10):
            space = make_random_space(rng, 2, 50)
            for spec in all_specs():
                lam = feasible_lambda(space, spec, 1.0)
                beta = solve_normalization(space, spec, lam).beta
                g0 = dual_value(space, spec, lam, beta)
                for d in (1e-3, 1e-2):
                    for b in (beta - d, beta + d):
                        try:
                            val = dual_value(space, spec, lam, b)
                        except Exception:
                            continue  # outside the conjugate domain
                        assert val >= g0 - 1e-12


class TestIdentities:
    def test_objective_identities(self, rng):
        eps = np.finfo(float).eps
        for _ in range(20):
            space = make_random_space(rng)
            for spec in all_specs(include_relaxed=True):
                lam = feasible_lambda(space, spec, float(10 ** rng.uniform(-1, 1)))
                out = objective_identities(space, spec, lam)
                assert abs(out["primal_dual_sum"]) <= 1e-8
                bound = max(1e-8, 64 * eps * out["reference_form_scale"])
                assert abs(out["reference_form"]) <= bound
                if spec.name == "kl":
                    assert abs(out["kl_cgf"]) <= 1e-8
                if spec.name == "reverse_kl":
                    assert abs(out["reverse_kl_risk"]) <= 1e-8

    def test_reference_form_well_conditioned(self, two_atom):
        for spec in all_specs():
            out = objective_identities(two_atom, spec, 3.0)
            assert abs(out["reference_form"]) <= 1e-12

    @pytest.mark.parametrize("name", ["kl", "reverse_kl"])
    def test_risk_gap(self, name, rng):
        spec = make_divergence(name)
        for _ in range(20):
            space = make_random_space(rng)
            for lam in (0.3, 1.0, 5.0):
                out = risk_gap_identities(space, spec, lam)
                assert abs(out["residual"]) <= 1e-8
                assert out["risk_gap"] >= 0.0

    def test_risk_gap_not_applicable(self, two_atom):
        with pytest.raises(NotApplicable):
            risk_gap_identities(two_atom, make_divergence("hellinger"), 1.0)

    def test_jensen_bound(self, rng):
        checked = 0
        for _ in range(20):
            space = make_random_space(rng)
            for spec in all_specs():
                lam = feasible_lambda(space, spec, 1.0)
                try:
                    out = jensen_bound_check(space, spec, lam)
                except NotApplicable:
                    continue
                checked += 1
                assert out["slack"] >= -1e-10
        assert checked >= 60


class TestMonotonicity:
    def test_chain(self, rng):
        lams = np.logspace(-2, 2, 25)
        for _ in range(10):
            space = make_random_space(rng, 2, 80)
            for spec in all_specs():
                grid = [x for x in lams if is_feasible(space, spec, x)]
                out = risk_monotone_in_lambda(space, spec, grid)
                assert out["holds"], (spec.name, out["worst_violation"])

    def test_ascending_required(self, two_atom):
        with pytest.raises(ValueError):
            risk_monotone_in_lambda(two_atom, KL, [1.0, 0.5])

    def test_limits(self, two_atom):
        summ = summarize(two_atom)
        small, _ = solve_posterior(two_atom, KL, 1e-3)
        big, _ = solve_posterior(two_atom, KL, 1e4)
        assert expected_risk(two_atom, small.rn) == pytest.approx(summ.delta_star, abs=1e-12)
        assert expected_risk(two_atom, big.rn) == pytest.approx(summ.r_Q, abs=1e-4)


class TestOrdering:
    def test_random(self, rng):
        for _ in range(20):
            space = make_random_space(rng)
            for spec in all_specs(include_relaxed=True):
                lam = feasible_lambda(space, spec, float(10 ** rng.uniform(-1, 1)))
                post, _ = solve_posterior(space, spec, lam)
                oc = ordering_check(space, spec, post)
                assert oc["max_increase"] <= 0.0
                assert oc["ties_exact"] and oc["strict_where_positive"]
                assert oc["max_gap"] == 0.0
                assert oc["argmax_is_argmin"]

    def test_ties(self):
        space = DiscreteModelSpace.from_risks([0.5, 2.0, 0.5, 2.0, 7.0], [0.1, 0.2, 0.3, 0.25, 0.15])
        for spec in all_specs():
            lam = feasible_lambda(space, spec, 1.0)
            post, _ = solve_posterior(space, spec, lam)
            assert post.rn[0] == post.rn[2]
            assert post.rn[1] == post.rn[3]
            assert post.rn[0] > post.rn[1] > post.rn[4]
            assert ordering_check(space, spec, post)["argmax_is_argmin"]


class TestOde:
    def test_relative_residual(self, rng):
        for _ in range(10):
            space = make_random_space(rng, 2, 100)
            for spec in all_specs():
                lam = feasible_lambda(space, spec, float(10 ** rng.uniform(-1, 1)))
                assert ode_residual(space, spec, lam)["relative"] <= 1e-3

    def test_kl_slope_closed_form(self, two_atom):
        # for KL the derivative of the constant is (N + R_P) / lam
        lam = 0.7
        out = ode_residual(two_atom, KL, lam)
        post, _ = solve_posterior(two_atom, KL, lam)
        exact = (post.beta + expected_risk(two_atom, post.rn)) / lam
        assert out["slope"] == pytest.approx(exact, rel=1e-7)
