import itertools
import math

import numpy as np
import pytest

from swdpwr.design import Design
from swdpwr.errors import ValidationError
from swdpwr.glmm import (
    ClusterOutcomeTable,
    cluster_outcome_distribution,
    expected_information,
    glmm_quadrature,
    invert_information,
    var_beta_conditional,
    _all_cell_predictors,
    _sequence_groups,
)
from swdpwr.links import (
    IdentifiedParams,
    gauss_hermite_rule,
    get_link,
    identify_conditional_params,
)

RULE = gauss_hermite_rule(30)
RULE60 = gauss_hermite_rule(60)
D12X3 = Design.from_rows([(6, (0, 1, 1)), (6, (0, 0, 1))])
IDENT = get_link("identity")
LOGIT = get_link("logit")

PAR_IDENT = identify_conditional_params(0.2, 0.25, 0.38, None, 0.01, IDENT, RULE)
PAR_LOGIT = identify_conditional_params(0.2, 0.25, 0.38, None, 0.01, LOGIT, RULE)


def make_table(alloc, params, K, link, time_effects, J, rule=RULE, collapse=True):
    design = Design.from_rows([(2, alloc)])
    preds = _all_cell_predictors(design, params, time_effects)
    quad = glmm_quadrature(preds, params.tau, link, rule)
    return cluster_outcome_distribution(
        alloc, params, K, link, quad, time_effects, J, collapse=collapse
    )


class TestOutcomeDistribution:
    def test_fair_coin_configs(self):
        params = IdentifiedParams(mu=0.5, gammaJ=0.0, beta=0.0, tau=0.0)
        table = make_table((0, 1), params, 1, IDENT, True, 2)
        Y = np.array(list(itertools.product([0, 1], repeat=2))).T
        logp, _ = table.log_prob_and_scores(Y)
        assert np.allclose(np.exp(logp), 0.25, atol=1e-14)

    def test_normalization_and_marginal_mean(self):
        table = make_table((0, 1, 1), PAR_IDENT, 50, IDENT, True, 3)
        psum, svec, _ = table.accumulate()
        assert abs(psum - 1.0) < 1e-10
        # E[y_1]/K equals the identified start rate
        Y = table.decode(np.arange(table.n_configs))
        logp, _ = table.log_prob_and_scores(Y)
        mean1 = float(np.dot(np.exp(logp), Y[0])) / 50
        assert mean1 == pytest.approx(0.2, abs=1e-6)

    def test_score_identity(self):
        for link, params in ((IDENT, PAR_IDENT), (LOGIT, PAR_LOGIT)):
            table = make_table((0, 1, 1), params, 50, link, True, 3)
            psum, svec, _ = table.accumulate()
            assert abs(psum - 1.0) < 1e-10
            assert np.max(np.abs(svec)) < 1e-8

    def test_tau_zero_factorizes_into_binomials(self):
        from scipy.stats import binom

        params = IdentifiedParams(mu=0.3, gammaJ=0.1, beta=0.2, tau=0.0)
        table = make_table((0, 1), params, 4, IDENT, True, 2)
        Y = table.decode(np.arange(table.n_configs))
        logp, _ = table.log_prob_and_scores(Y)
        h = [0.3, 0.3 + 0.1 + 0.2]
        expected = binom.pmf(Y[0], 4, h[0]) * binom.pmf(Y[1], 4, h[1])
        assert np.allclose(np.exp(logp), expected, rtol=1e-12)

    def test_budget_guard(self):
        with pytest.raises(ValidationError) as err:
            make_table_with_budget()
        assert err.value.code == "E-BUDGET"
        assert "reduce K" in err.value.message


def make_table_with_budget():
    design = Design.from_rows([(2, (0, 1, 1, 1))])
    preds = _all_cell_predictors(design, PAR_LOGIT, True)
    quad = glmm_quadrature(preds, PAR_LOGIT.tau, LOGIT, RULE)
    return cluster_outcome_distribution(
        (0, 1, 1, 1), PAR_LOGIT, 140, LOGIT, quad, True, 4, budget=5e8
    )


class TestScores:
    def test_finite_difference_check(self):
        # central differences of log P against the analytic score, holding the
        # standardized quadrature rule frozen
        rng = np.random.default_rng(3)
        for link, params in ((IDENT, PAR_IDENT), (LOGIT, PAR_LOGIT)):
            design = Design.from_rows([(2, (0, 1, 1))])
            preds = _all_cell_predictors(design, params, True)
            quad = glmm_quadrature(preds, params.tau, link, RULE)
            table = cluster_outcome_distribution((0, 1, 1), params, 20, link, quad, True, 3)
            Y = table.decode(rng.integers(0, table.n_configs, size=20))
            _, scores = table.log_prob_and_scores(Y)

            def logp_at(p2: IdentifiedParams):
                q2 = quad.rescaled(p2.tau) if p2.tau != params.tau else quad
                trials, gpreds, coef = _sequence_groups(
                    (0, 1, 1), p2, 20, 3, True, collapse=True
                )
                t2 = ClusterOutcomeTable(
                    trials=trials, predictors=gpreds, coef=coef, quad=q2,
                    link=link, include_tau=True,
                )
                return t2.log_prob_and_scores(Y)[0]

            eps = 1e-5
            import dataclasses

            fields = ["mu", "gammaJ", "beta", "tau"]
            # theta order: mu, gamma_2, gamma_3, beta, tau; gamma_2 = gammaJ/2
            # under the linear rule, so perturb gammaJ to test the beta/tau
            # coordinates and the last time-effect coordinate
            for name, idx in (("mu", 0), ("beta", 3), ("tau", 4)):
                hi = dataclasses.replace(params, **{name: getattr(params, name) + eps})
                lo = dataclasses.replace(params, **{name: getattr(params, name) - eps})
                fd = (logp_at(hi) - logp_at(lo)) / (2 * eps)
                denom = np.maximum(np.abs(scores[idx]), 1e-3)
                assert np.max(np.abs(fd - scores[idx]) / denom) < 1e-4

    def test_gamma_coordinate_finite_difference(self):
        # gamma_J is a free coordinate of the information; perturbing gammaJ
        # moves gamma_j by (j-1)/(J-1), so the combination of score components
        # weighted that way must match the finite difference.
        link, params = LOGIT, PAR_LOGIT
        design = Design.from_rows([(2, (0, 1, 1))])
        preds = _all_cell_predictors(design, params, True)
        quad = glmm_quadrature(preds, params.tau, link, RULE)
        table = cluster_outcome_distribution((0, 1, 1), params, 12, link, quad, True, 3)
        rng = np.random.default_rng(5)
        Y = table.decode(rng.integers(0, table.n_configs, size=10))
        _, scores = table.log_prob_and_scores(Y)
        import dataclasses

        eps = 1e-5
        hi = dataclasses.replace(params, gammaJ=params.gammaJ + eps)
        lo = dataclasses.replace(params, gammaJ=params.gammaJ - eps)

        def logp_at(p2):
            trials, gpreds, coef = _sequence_groups((0, 1, 1), p2, 12, 3, True, True)
            t2 = ClusterOutcomeTable(
                trials=trials, predictors=gpreds, coef=coef, quad=quad,
                link=link, include_tau=True,
            )
            return t2.log_prob_and_scores(Y)[0]

        fd = (logp_at(hi) - logp_at(lo)) / (2 * eps)
        combo = 0.5 * scores[1] + 1.0 * scores[2]
        denom = np.maximum(np.abs(combo), 1e-3)
        assert np.max(np.abs(fd - combo) / denom) < 1e-4


class TestInformation:
    def test_symmetric_and_psd(self):
        info = expected_information(D12X3, PAR_IDENT, 50, IDENT, RULE, True)
        assert np.allclose(info, info.T, atol=0)
        eig = np.linalg.eigvalsh(info)
        assert eig.min() >= -1e-10 * abs(eig.max())

    def test_collapsed_equals_full_enumeration(self):
        params = IdentifiedParams(mu=0.3, gammaJ=0.0, beta=0.15, tau=0.12)
        for alloc, K in (((0, 1, 1), 4), ((0, 0, 1), 3)):
            collapsed = make_table(alloc, params, K, IDENT, False, len(alloc), collapse=True)
            full = make_table(alloc, params, K, IDENT, False, len(alloc), collapse=False)
            pc, sc, ic = collapsed.accumulate()
            pf, sf, if_ = full.accumulate()
            assert pc == pytest.approx(pf, rel=1e-12)
            assert np.allclose(ic, if_, rtol=1e-10, atol=1e-12)

    def test_tau_versus_tau_squared_reparameterization(self):
        # transforming the nuisance coordinate tau -> tau^2 rescales its
        # score row/column and must leave the beta block of the inverse alone
        info = expected_information(D12X3, PAR_IDENT, 50, IDENT, RULE, True)
        p = info.shape[0]
        D = np.eye(p)
        D[-1, -1] = 1.0 / (2.0 * PAR_IDENT.tau)
        info2 = D @ info @ D
        v1 = np.linalg.inv(info)[3, 3]
        v2 = np.linalg.inv(info2)[3, 3]
        assert v1 == pytest.approx(v2, rel=1e-10)

    def test_node_doubling_stability_on_power_scale(self):
        var30 = var_beta_conditional(D12X3, PAR_IDENT, 50, IDENT, RULE, True)
        var60 = var_beta_conditional(D12X3, PAR_IDENT, 50, IDENT, RULE60, True)
        assert var30 == pytest.approx(var60, rel=1e-9)


class TestVarBeta:
    def test_worked_identity_example(self):
        var = var_beta_conditional(D12X3, PAR_IDENT, 50, IDENT, RULE, True)
        from swdpwr.engine import wald_power

        assert wald_power(PAR_IDENT.beta, var, 0.05) == pytest.approx(0.899, abs=2e-3)

    def test_k_guard_with_time_effects(self):
        with pytest.raises(ValidationError) as err:
            var_beta_conditional(D12X3, PAR_IDENT, 151, IDENT, RULE, True)
        assert err.value.code == "E-K150"
        assert "150" in err.value.message

    def test_large_k_allowed_without_time_effects(self):
        params = IdentifiedParams(mu=0.24, gammaJ=0.0, beta=-0.046, tau=0.17)
        d = Design.from_rows([(3, (0, 1, 1, 1)), (3, (0, 0, 0, 1))])
        var = var_beta_conditional(d, params, 200, IDENT, RULE, False)
        assert var > 0

    def test_tau_zero_matches_glm_information(self):
        # with no random effect the information is the standard binomial GLM one
        params = IdentifiedParams(mu=0.3, gammaJ=0.0, beta=0.2, tau=0.0)
        d = Design.from_rows([(2, (0, 1)), (2, (0, 0))])
        info = expected_information(d, params, 6, IDENT, RULE, False)
        # I(theta) = sum_cells n_cell * x x' / (p(1-p)) for the identity link
        expected = np.zeros((2, 2))
        for mult, alloc in d.rows:
            for x in alloc:
                p = 0.3 + 0.2 * x
                z = np.array([1.0, float(x)])
                expected += mult * 6 * np.outer(z, z) / (p * (1 - p))
        assert np.allclose(info, expected, rtol=1e-10)

    def test_singular_information_detected(self):
        # every cluster treated in period 2 exactly: beta collinear with gamma_2
        d = Design.from_rows([(4, (0, 1))])
        params = IdentifiedParams(mu=0.3, gammaJ=0.05, beta=0.1, tau=0.05)
        with pytest.raises(ValidationError) as err:
            var_beta_conditional(d, params, 5, IDENT, RULE, True)
        assert err.value.code == "E-SINGULAR"
