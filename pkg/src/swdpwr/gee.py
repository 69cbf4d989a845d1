"""Model-based variance of the treatment effect under the marginal model.

Continuous outcomes admit a closed form in the design counts (U, W, V) and
the two largest-eigenspace eigenvalues of the working correlation. Binary
outcomes assemble the model-based information cluster by cluster; because
rows of the derivative matrix repeat within a cluster-period cell, the
JK-dimensional quadratic form reduces to a J x J computation using the
closed-form inverse correlation.
"""

from __future__ import annotations

import math

import numpy as np

from .correlation import block_eigenvalues, inverse_block_correlation
from .design import Design, DesignSummary
from .errors import MSG_PROB, E_PROB, E_SINGULAR, ValidationError
from .links import IdentifiedParams, LinkFunction, time_effect_vector

RCOND_MIN = 1e-12


def var_beta_continuous(
    summary: DesignSummary,
    K: int,
    sigma_t2: float,
    alpha0: float,
    alpha1: float,
    alpha2: float,
    time_effects: bool,
) -> float:
    """Closed-form Var(beta-hat) for continuous outcomes."""
    eig = block_eigenvalues(alpha0, alpha1, alpha2, summary.J, K)
    l3, l4 = eig.lambda3, eig.lambda4
    U, W, V, I, J = summary.U, summary.W, summary.V, summary.I, summary.J
    if time_effects:
        den = (U * U + I * J * U - J * W - I * V) * l4 - (U * U - I * V) * l3
    else:
        den = (I * J * U - I * V) * l4 - (U * U - I * V) * l3
    if den <= 0:
        raise ValidationError(
            E_SINGULAR,
            "The treatment effect is not estimable for this design "
            "(degenerate allocation).",
        )
    return (sigma_t2 / K) * I * J * l3 * l4 / den


def _grouped_rows(design: Design) -> list[tuple[int, tuple[int, ...]]]:
    counts: dict[tuple[int, ...], int] = {}
    order: list[tuple[int, ...]] = []
    for mult, alloc in design.rows:
        if alloc not in counts:
            counts[alloc] = 0
            order.append(alloc)
        counts[alloc] += mult
    return [(counts[a], a) for a in order]


def binary_marginal_information(
    design: Design,
    K: int,
    link: LinkFunction,
    params: IdentifiedParams,
    alpha0: float,
    alpha1: float,
    alpha2: float,
    time_effects: bool,
) -> np.ndarray:
    """Model-based information sum_i D_i' V_i^-1 D_i for the GEE estimator.

    The parameter vector is (mu, gamma_2..gamma_J, beta) with time effects
    and (mu, beta) without. Dispersion is 1 for binary outcomes.
    """
    J = design.J
    eig = block_eigenvalues(alpha0, alpha1, alpha2, J, K)
    rinv = inverse_block_correlation(eig, J, K)
    t_diag, t_period, t_individual, t_other = rinv.entries
    # Summing R^-1 entries over the K x K individual block of a period pair.
    cell_same = K * t_diag + K * (K - 1) * t_period
    cell_diff = K * t_individual + K * (K - 1) * t_other

    q = (1 + (J - 1) + 1) if time_effects else 2
    gam = time_effect_vector(params.gammaJ, J) if time_effects else np.zeros(J)
    info = np.zeros((q, q))
    for mult, alloc in _grouped_rows(design):
        x = params.mu + gam + np.array(alloc, dtype=float) * params.beta
        p = link.ginv(x)
        if np.any(p <= 0.0) or np.any(p >= 1.0):
            raise ValidationError(E_PROB, MSG_PROB)
        d = link.dginv(x)
        a = p * (1.0 - p)
        Z = np.zeros((J, q))
        Z[:, 0] = 1.0
        if time_effects:
            for j in range(1, J):
                Z[j, j] = 1.0
        Z[:, -1] = np.array(alloc, dtype=float)
        scale = d / np.sqrt(a)
        # F = sum_{j,l} scale_j scale_l Q_{jl} z_j z_l'
        zs = Z * scale[:, None]
        total = zs.sum(axis=0)
        F = (cell_same - cell_diff) * (zs.T @ zs) + cell_diff * np.outer(total, total)
        info += mult * F
    return info


def var_beta_binary_marginal(
    design: Design,
    K: int,
    link: LinkFunction,
    params: IdentifiedParams,
    alpha0: float,
    alpha1: float,
    alpha2: float,
    time_effects: bool,
) -> float:
    """Var(beta-hat) as the last diagonal element of the inverse information."""
    info = binary_marginal_information(
        design, K, link, params, alpha0, alpha1, alpha2, time_effects
    )
    eigvals = np.linalg.eigvalsh(info)
    if eigvals[0] <= 0 or eigvals[0] / eigvals[-1] < RCOND_MIN:
        raise ValidationError(
            E_SINGULAR,
            "The information matrix for this design is singular or too "
            "ill-conditioned; the treatment effect is not identifiable.",
        )
    cov = np.linalg.inv(info)
    return float(cov[-1, -1])
