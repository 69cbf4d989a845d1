import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swdpwr.errors import ValidationError
from swdpwr.links import (
    conditional_moments,
    gauss_hermite_rule,
    get_link,
    identify_conditional_params,
    identify_marginal_params,
    time_effect_vector,
)

QUAD = gauss_hermite_rule(30)
QUAD60 = gauss_hermite_rule(60)


class TestQuadrature:
    def test_one_point_rule(self):
        rule = gauss_hermite_rule(1)
        assert rule.nodes == pytest.approx([0.0])
        assert rule.weights == pytest.approx([math.sqrt(math.pi)])

    def test_two_point_rule(self):
        rule = gauss_hermite_rule(2)
        assert sorted(rule.nodes) == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)])
        assert rule.weights == pytest.approx([math.sqrt(math.pi) / 2] * 2)

    def test_degree_exactness(self):
        # integral of x^2 e^{-x^2} over the real line is sqrt(pi)/2
        rule = gauss_hermite_rule(30)
        value = float(np.dot(rule.weights, rule.nodes**2))
        assert value == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-12)

    def test_weight_sum_and_symmetry(self):
        for n in (5, 30, 61):
            rule = gauss_hermite_rule(n)
            assert float(rule.weights.sum()) == pytest.approx(math.sqrt(math.pi), abs=1e-12)
            assert float(rule.nodes.sum()) == pytest.approx(0.0, abs=1e-12)

    def test_node_count_bounds(self):
        for bad in (0, 201, -3):
            with pytest.raises(ValidationError):
                gauss_hermite_rule(bad)


class TestTimeEffects:
    def test_five_periods(self):
        assert time_effect_vector(-0.020, 5) == pytest.approx(
            [0.0, -0.005, -0.010, -0.015, -0.020]
        )

    def test_zero(self):
        assert time_effect_vector(0.0, 7) == pytest.approx([0.0] * 7)

    def test_midpoint(self):
        assert time_effect_vector(0.3, 3) == pytest.approx([0.0, 0.15, 0.3])


class TestLinks:
    @settings(max_examples=60, deadline=None)
    @given(
        kind=st.sampled_from(["identity", "log", "logit"]),
        p=st.floats(min_value=0.001, max_value=0.999),
    )
    def test_inverse_round_trip(self, kind, p):
        link = get_link(kind)
        assert float(link.ginv(np.array([link.g(p)]))[0]) == pytest.approx(p, abs=1e-14)

    def test_dginv_matches_finite_differences(self):
        for kind in ("identity", "log", "logit"):
            link = get_link(kind)
            x = np.linspace(-2.0, -0.1, 7) if kind == "log" else np.linspace(-2.0, 2.0, 7)
            h = 1e-6
            fd = (link.ginv(x + h) - link.ginv(x - h)) / (2 * h)
            assert np.allclose(link.dginv(x), fd, rtol=1e-7, atol=1e-9)


class TestMarginalIdentification:
    def test_identity_example(self):
        p = identify_marginal_params(0.15, 0.15, 0.20, None, get_link("identity"))
        assert p.mu == pytest.approx(0.15)
        assert p.gammaJ == 0.0
        assert p.beta == pytest.approx(0.05)
        assert p.tau == 0.0

    def test_log_example(self):
        p = identify_marginal_params(0.05, 0.049, 0.035, None, get_link("log"))
        assert p.mu == pytest.approx(-2.996, abs=5e-4)
        assert p.gammaJ == pytest.approx(-0.020, abs=5e-4)
        assert p.beta == pytest.approx(-0.336, abs=5e-4)

    def test_equal_rates_give_zero_effects(self):
        for kind in ("identity", "log", "logit"):
            p = identify_marginal_params(0.3, 0.3, 0.3, None, get_link(kind))
            assert p.gammaJ == 0.0
            assert p.beta == 0.0

    def test_supplying_both_effect_forms_is_contradictory(self):
        with pytest.raises(ValidationError) as err:
            identify_marginal_params(0.15, 0.15, 0.2, 0.05, get_link("identity"))
        assert err.value.code == "E-CONTRADICT"

    def test_out_of_range_rate_rejected(self):
        with pytest.raises(ValidationError) as err:
            identify_marginal_params(0.15, 1.2, 0.2, None, get_link("identity"))
        assert err.value.code == "E-PROB"


class TestConditionalMoments:
    def test_degenerate_logit(self):
        p, rho = conditional_moments(0.0, 0.0, get_link("logit"), QUAD)
        assert p == 0.5
        assert rho == 0.0

    def test_identity_icc_formula(self):
        # tau^2 solving alpha0 = tau^2/(tau^2 + mu(1-mu)) at mu=0.2, alpha0=0.01
        tau2 = 0.01 * 0.2 * 0.8 / 0.99
        assert tau2 == pytest.approx(0.0016162, abs=5e-8)
        p, rho = conditional_moments(0.2, math.sqrt(tau2), get_link("identity"), QUAD)
        assert p == pytest.approx(0.2, abs=1e-12)
        assert rho == pytest.approx(0.01, abs=1e-12)

    def test_monotone_in_mu_and_tau(self):
        from scipy.optimize import brentq

        link = get_link("logit")
        ps = [conditional_moments(m, 0.3, link, QUAD)[0] for m in np.linspace(-2, 2, 9)]
        assert all(a < b for a, b in zip(ps, ps[1:]))
        rhos = []
        for tau in np.linspace(0.05, 1.0, 8):
            # hold the marginal mean at 0.2 by re-solving the intercept
            mu = brentq(
                lambda m: conditional_moments(m, tau, link, QUAD)[0] - 0.2, -10.0, 10.0
            )
            rhos.append(conditional_moments(mu, tau, link, QUAD)[1])
        assert all(a < b for a, b in zip(rhos, rhos[1:]))

    def test_tau_zero_limit_exact(self):
        for kind in ("identity", "log", "logit"):
            link = get_link(kind)
            mu = -1.0 if kind != "identity" else 0.3
            p, rho = conditional_moments(mu, 0.0, link, QUAD)
            assert p == float(link.ginv(np.array([mu]))[0])
            assert rho == 0.0

    def test_node_doubling_stability(self):
        for kind, mu, tau in (("logit", -1.4, 0.25), ("log", -2.0, 0.3)):
            link = get_link(kind)
            p30, r30 = conditional_moments(mu, tau, link, QUAD)
            p60, r60 = conditional_moments(mu, tau, link, QUAD60)
            assert abs(p30 - p60) < 1e-10
            assert abs(r30 - r60) < 1e-10


class TestConditionalIdentification:
    def test_identity_is_linear(self):
        p = identify_conditional_params(0.2, 0.25, 0.38, None, 0.01, get_link("identity"), QUAD)
        assert p.mu == pytest.approx(0.2)
        assert p.gammaJ == pytest.approx(0.05)
        assert p.beta == pytest.approx(0.13)
        assert p.tau**2 == pytest.approx(0.01 * 0.16 / 0.99, rel=1e-12)

    def test_logit_requires_integration(self):
        p = identify_conditional_params(0.2, 0.25, 0.38, None, 0.01, get_link("logit"), QUAD)
        assert p.beta == pytest.approx(0.616, abs=2e-3)
        naive = math.log(0.38 / 0.62) - math.log(0.25 / 0.75)
        assert abs(p.beta - naive) > 1e-3

    def test_round_trip(self):
        link = get_link("logit")
        p = identify_conditional_params(0.2, 0.25, 0.38, None, 0.01, link, QUAD)
        pm, rho = conditional_moments(p.mu, p.tau, link, QUAD)
        assert pm == pytest.approx(0.2, abs=1e-8)
        assert rho == pytest.approx(0.01, abs=1e-8)
        b = math.sqrt(2) * p.tau * QUAD.nodes
        w = QUAD.normalized_weights
        end0 = float(np.dot(w, link.ginv(p.mu + p.gammaJ + b)))
        end1 = float(np.dot(w, link.ginv(p.mu + p.gammaJ + p.beta + b)))
        assert end0 == pytest.approx(0.25, abs=1e-8)
        assert end1 == pytest.approx(0.38, abs=1e-8)

    def test_log_round_trip_against_closed_form(self):
        # log link admits closed forms: p = exp(mu + tau^2/2),
        # rho = p*(exp(tau^2)-1)/(1-p); the solver must agree.
        link = get_link("log")
        p = identify_conditional_params(0.1, 0.12, 0.2, None, 0.05, link, QUAD)
        tau2 = math.log(1 + 0.05 * (1 - 0.1) / 0.1)
        assert p.tau**2 == pytest.approx(tau2, rel=1e-6)
        assert p.mu == pytest.approx(math.log(0.1) - tau2 / 2, rel=1e-6)
        assert p.gammaJ == pytest.approx(math.log(0.12 / 0.1), rel=1e-6)
        assert p.beta == pytest.approx(math.log(0.2 / 0.12), rel=1e-6)

    def test_zero_icc_reduces_to_marginal(self):
        for kind in ("identity", "log", "logit"):
            link = get_link(kind)
            cond = identify_conditional_params(0.2, 0.25, 0.38, None, 0.0, link, QUAD)
            marg = identify_marginal_params(0.2, 0.25, 0.38, None, link)
            assert cond.tau == 0.0
            assert cond.mu == pytest.approx(marg.mu, abs=1e-10)
            assert cond.gammaJ == pytest.approx(marg.gammaJ, abs=1e-10)
            assert cond.beta == pytest.approx(marg.beta, abs=1e-10)
