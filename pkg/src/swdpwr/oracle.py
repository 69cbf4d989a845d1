"""Independent verification harnesses for the analytic engines.

Everything here recomputes a quantity the engines produce analytically,
either by dense linear algebra or by seeded Monte Carlo, and is used by the
test suite and the ``oracle`` CLI subcommand. Oracles read the engine
modules; the engines never import this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .correlation import dense_correlation
from .design import Design, design_summaries
from .engine import wald_power
from .gee import var_beta_continuous
from .glmm import ClusterOutcomeTable, GlmmQuadrature, expected_information, glmm_quadrature, _all_cell_predictors, _grouped_rows, _sequence_groups
from .links import IdentifiedParams, LinkFunction, QuadratureRule, time_effect_vector

DENSE_LIMIT = 2000


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _uniform_open(gen: np.random.Generator, size) -> np.ndarray:
    # Strictly inside (0, 1) so the inverse normal CDF stays finite.
    return (gen.integers(0, 2**53, size=size).astype(np.float64) + 0.5) / 2**53


def _normals(gen: np.random.Generator, size) -> np.ndarray:
    return ndtri(_uniform_open(gen, size))


def _design_matrix(alloc, J: int, time_effects: bool, K: int) -> np.ndarray:
    q = (J + 1) if time_effects else 2
    Z = np.zeros((J * K, q))
    Z[:, 0] = 1.0
    for j in range(J):
        rows = slice(j * K, (j + 1) * K)
        if time_effects and j >= 1:
            Z[rows, j] = 1.0
        Z[rows, -1] = alloc[j]
    return Z


def dense_variance_crosscheck(
    design: Design,
    K: int,
    sigma_t2: float,
    alpha0: float,
    alpha1: float,
    alpha2: float,
    time_effects: bool,
) -> tuple[float, float]:
    """Closed-form continuous variance vs a dense (sum Z'V^-1 Z)^-1 solve."""
    if design.J * K > DENSE_LIMIT:
        raise ValueError("cluster too large for the dense cross-check")
    summary = design_summaries(design)
    closed = var_beta_continuous(summary, K, sigma_t2, alpha0, alpha1, alpha2, time_effects)
    V = sigma_t2 * dense_correlation(alpha0, alpha1, alpha2, design.J, K)
    q = (design.J + 1) if time_effects else 2
    info = np.zeros((q, q))
    for mult, alloc in design.rows:
        Z = _design_matrix(alloc, design.J, time_effects, K)
        info += mult * (Z.T @ np.linalg.solve(V, Z))
    dense = float(np.linalg.inv(info)[-1, -1])
    return closed, dense


def cluster_means_variance(
    summary, K: int, sigma_e2: float, tau2: float, time_effects: bool
) -> float:
    """Cluster-means weighted-least-squares variance (single random effect).

    Equals the closed form when alpha0 = alpha1 = alpha2 = tau2/(sigma_e2+tau2)
    and sigma_t2 = sigma_e2 + tau2.
    """
    U, W, V, I, J = summary.U, summary.W, summary.V, summary.I, summary.J
    s2 = sigma_e2 / K
    if time_effects:
        num = I * s2 * (s2 + J * tau2)
        den = (I * U - W) * s2 + (U * U + I * J * U - J * W - I * V) * tau2
    else:
        num = I * J * (s2 + J * tau2) * s2
        den = (I * J * U - U * U) * s2 + I * J * (J * U - V) * tau2
    return num / den


@dataclass
class McInformation:
    """Monte Carlo estimate of the expected information with standard errors."""

    info: np.ndarray
    se: np.ndarray
    analytic: np.ndarray
    replicates: int

    @property
    def max_abs_z(self) -> float:
        z = (self.info - self.analytic) / np.where(self.se > 0, self.se, np.inf)
        return float(np.max(np.abs(z)))


def mc_score_information(
    design: Design,
    params: IdentifiedParams,
    K: int,
    link: LinkFunction,
    rule: QuadratureRule,
    time_effects: bool,
    replicates: int = 100_000,
    seed: int = 20240801,
) -> McInformation:
    """Estimate E[s s'] by simulating cluster outcomes; checks the enumeration.

    Simulates the random effect (truncated where the quadrature is), draws
    per-group binomial counts, and averages score outer products using the
    same score evaluation as the enumerated information.
    """
    if replicates < 10_000:
        raise ValueError("use at least 10^4 replicates")
    preds = _all_cell_predictors(design, params, time_effects)
    quad = glmm_quadrature(preds, params.tau, link, rule)
    analytic = expected_information(design, params, K, link, rule, time_effects)
    gen = _rng(seed)
    p = analytic.shape[0]
    total = np.zeros((p, p))
    total_var = np.zeros((p, p))
    from .glmm import valid_effect_interval, CUTOFF, PROB_CLAMP

    blo, bhi = valid_effect_interval(preds, link)
    lo = max(blo, -CUTOFF * params.tau)
    hi = min(bhi, CUTOFF * params.tau)
    u_lo = 0.5 * math.erfc(-(lo / params.tau) / math.sqrt(2)) if params.tau > 0 else 0.0
    u_hi = 0.5 * math.erfc(-(hi / params.tau) / math.sqrt(2)) if params.tau > 0 else 1.0
    if quad.scheme == "hermite":
        u_lo, u_hi = 0.0, 1.0
    for mult, alloc in _grouped_rows(design):
        trials, gpreds, coef = _sequence_groups(
            alloc, params, K, design.J, time_effects, collapse=not time_effects
        )
        table = ClusterOutcomeTable(
            trials=trials,
            predictors=gpreds,
            coef=coef,
            quad=quad,
            link=link,
            include_tau=params.tau > 0,
        )
        if params.tau > 0:
            u = u_lo + (u_hi - u_lo) * _uniform_open(gen, replicates)
            b = params.tau * ndtri(u)
        else:
            b = np.zeros(replicates)
        Y = np.empty((len(trials), replicates), dtype=np.int64)
        for g in range(len(trials)):
            h = np.clip(link.ginv(gpreds[g] + b), PROB_CLAMP, 1 - PROB_CLAMP)
            Y[g] = gen.binomial(int(trials[g]), h)
        _, scores = table.log_prob_and_scores(Y)
        prod_mean = (scores @ scores.T) / replicates
        sq = scores * scores
        second_moment = (sq @ sq.T) / replicates
        total += mult * prod_mean
        total_var += (mult**2) * (second_moment - prod_mean * prod_mean) / replicates
    return McInformation(
        info=total, se=np.sqrt(total_var), analytic=analytic, replicates=replicates
    )


@dataclass
class McContinuousResult:
    empirical_var: float
    analytic_var: float
    empirical_power: float
    analytic_power: float
    replicates: int


def mc_empirical_power_continuous(
    design: Design,
    K: int,
    sigma_t2: float,
    alpha0: float,
    alpha1: float,
    alpha2: float,
    beta: float,
    time_effects: bool,
    type_i_error: float = 0.05,
    replicates: int = 5000,
    seed: int = 20240802,
) -> McContinuousResult:
    """Simulate the mixed model and refit by WLS with the known covariance.

    Variance components are reconstructed from the correlations:
    sigma_b2 = alpha1*sigma_t2, sigma_c2 = (alpha0-alpha1)*sigma_t2,
    sigma_pi2 = (alpha2-alpha1)*sigma_t2 and the residual takes the rest;
    any negative component is an error.
    """
    if replicates < 2000:
        raise ValueError("use at least 2000 replicates")
    s_b2 = alpha1 * sigma_t2
    s_c2 = (alpha0 - alpha1) * sigma_t2
    s_pi2 = (alpha2 - alpha1) * sigma_t2
    s_e2 = sigma_t2 - s_b2 - s_c2 - s_pi2
    for name, v in (("sigma_b2", s_b2), ("sigma_c2", s_c2), ("sigma_pi2", s_pi2), ("sigma_e2", s_e2)):
        if v < 0:
            raise ValueError(f"correlations imply a negative variance component {name}")

    J = design.J
    summary = design_summaries(design)
    analytic_var = var_beta_continuous(summary, K, sigma_t2, alpha0, alpha1, alpha2, time_effects)
    analytic_power = wald_power(beta, analytic_var, type_i_error)

    V = sigma_t2 * dense_correlation(alpha0, alpha1, alpha2, J, K)
    q = (J + 1) if time_effects else 2
    info = np.zeros((q, q))
    projectors = {}
    for mult, alloc in design.rows:
        if alloc not in projectors:
            Z = _design_matrix(alloc, J, time_effects, K)
            ZtVinv = Z.T @ np.linalg.inv(V)
            projectors[alloc] = ZtVinv
        info += mult * (projectors[alloc] @ _design_matrix(alloc, J, time_effects, K))
    covar = np.linalg.inv(info)
    beta_row = covar[-1, :]

    gam = time_effect_vector(0.0, J) if not time_effects else time_effect_vector(0.1, J)
    gen = _rng(seed)
    beta_hats = np.zeros(replicates)
    for mult, alloc in design.rows:
        mean = np.repeat(np.array([gam[j] + alloc[j] * beta for j in range(J)]), K)
        for _ in range(mult):
            b = math.sqrt(s_b2) * _normals(gen, (replicates, 1))
            c = math.sqrt(s_c2) * np.repeat(_normals(gen, (replicates, J)), K, axis=1)
            pi = math.sqrt(s_pi2) * np.tile(_normals(gen, (replicates, K)), (1, J))
            eps = math.sqrt(s_e2) * _normals(gen, (replicates, J * K))
            Y = mean[None, :] + b + c + pi + eps
            beta_hats += Y @ (projectors[alloc].T @ beta_row)
    se = math.sqrt(analytic_var)
    z = float(ndtri(1.0 - type_i_error / 2.0))
    shifted = np.abs(beta_hats) / se
    return McContinuousResult(
        empirical_var=float(beta_hats.var(ddof=1)),
        analytic_var=analytic_var,
        empirical_power=float(np.mean(shifted > z)),
        analytic_power=analytic_power,
        replicates=replicates,
    )
