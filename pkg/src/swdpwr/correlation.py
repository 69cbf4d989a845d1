"""Block exchangeable and nested exchangeable within-cluster correlation.

The JK x JK working correlation of a cluster has entries 1 on the diagonal,
alpha0 for two individuals in the same period, alpha2 for the same individual
in two periods, and alpha1 otherwise. It has four distinct eigenvalues, which
give a closed-form inverse on the projector basis {residual, individual-mean,
period-mean, grand-mean}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    MSG_PD,
    MSG_QAQISH,
    MSG_W_A0A1,
    MSG_W_ALPHA2,
    E_PD,
    E_QAQISH,
    W_A0A1,
    W_ALPHA2,
    ValidationError,
    WarningRecord,
)

# Eigenvalues this close to zero are treated as non-positive-definite.
PD_TOL = 1e-12


@dataclass(frozen=True)
class CorrelationParams:
    """User-facing intraclass correlations (alpha2 unset for cross-sectional)."""

    alpha0: float
    alpha1: float
    alpha2: float | None = None


@dataclass(frozen=True)
class BlockEigen:
    """Spectral decomposition of the block exchangeable correlation.

    Multiplicities: (J-1)(K-1), K-1, J-1, 1. Positive definite iff every
    eigenvalue with a nonzero multiplicity is positive.
    """

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    mult1: int
    mult2: int
    mult3: int
    mult4: int

    @property
    def values(self) -> tuple[float, float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3, self.lambda4)

    @property
    def mults(self) -> tuple[int, int, int, int]:
        return (self.mult1, self.mult2, self.mult3, self.mult4)


def resolve_correlations(
    params: CorrelationParams, type: str, model: str, family: str
) -> tuple[tuple[float, float, float], list[WarningRecord]]:
    """Apply the design-type resolution rules to the supplied correlations.

    Cross-sectional designs have no repeated measures, so alpha2 is set to
    alpha1 (with a warning if a value was supplied). The conditional binary
    model uses a single intra-cluster correlation, so alpha1 is forced to
    alpha0 when they differ.
    """
    warnings: list[WarningRecord] = []
    a0 = params.alpha0
    a1 = params.alpha1
    a2 = params.alpha2
    if model == "conditional" and family == "binomial" and a1 != a0:
        warnings.append(WarningRecord(W_A0A1, MSG_W_A0A1))
        a1 = a0
    if type == "cross-sectional":
        if a2 is not None:
            warnings.append(WarningRecord(W_ALPHA2, MSG_W_ALPHA2))
        a2 = a1
    elif a2 is None:
        a2 = a1
    return (a0, a1, a2), warnings


def block_eigenvalues(
    alpha0: float, alpha1: float, alpha2: float, J: int, K: int, check_pd: bool = True
) -> BlockEigen:
    """Eigenvalues of the block exchangeable correlation for J periods, K per cell."""
    l1 = 1 - alpha0 + alpha1 - alpha2
    l2 = 1 - alpha0 - (J - 1) * alpha1 + (J - 1) * alpha2
    l3 = 1 + (K - 1) * (alpha0 - alpha1) - alpha2
    l4 = 1 + (K - 1) * alpha0 + (J - 1) * (K - 1) * alpha1 + (J - 1) * alpha2
    eig = BlockEigen(
        lambda1=l1,
        lambda2=l2,
        lambda3=l3,
        lambda4=l4,
        mult1=(J - 1) * (K - 1),
        mult2=K - 1,
        mult3=J - 1,
        mult4=1,
    )
    if check_pd:
        for lam, mult in zip(eig.values, eig.mults):
            if mult > 0 and lam <= PD_TOL:
                raise ValidationError(E_PD, MSG_PD)
    return eig


@dataclass(frozen=True)
class InverseBlockCorrelation:
    """Closed-form inverse of the block exchangeable correlation.

    ``inv_eigen`` are the reciprocals 1/lambda_i on the four projector
    eigenspaces; ``entries`` are the four distinct matrix entries of the
    inverse (diagonal, same period, same individual, neither), enough to
    apply R^-1 in O(JK) without forming it.
    """

    inv_eigen: tuple[float, float, float, float]
    J: int
    K: int

    @property
    def entries(self) -> tuple[float, float, float, float]:
        i1, i2, i3, i4 = self.inv_eigen
        J, K = self.J, self.K
        c4 = i4 - i2 - i3 + i1
        t_diag = i1 + (i2 - i1) / J + (i3 - i1) / K + c4 / (J * K)
        t_period = (i3 - i1) / K + c4 / (J * K)
        t_individual = (i2 - i1) / J + c4 / (J * K)
        t_other = c4 / (J * K)
        return (t_diag, t_period, t_individual, t_other)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply R^-1 to a length-JK vector in period-major order, O(JK)."""
        J, K = self.J, self.K
        v = np.asarray(vec, dtype=float).reshape(J, K)
        period_mean = v.mean(axis=1, keepdims=True)
        indiv_mean = v.mean(axis=0, keepdims=True)
        grand = v.mean()
        i1, i2, i3, i4 = self.inv_eigen
        # Orthogonal projector decomposition: residual, individual, period, grand.
        p_grand = grand
        p_period = period_mean - grand
        p_indiv = indiv_mean - grand
        p_resid = v - period_mean - indiv_mean + grand
        out = i1 * p_resid + i2 * p_indiv + i3 * p_period + i4 * p_grand
        return out.reshape(-1)

    def dense(self) -> np.ndarray:
        """Materialize the inverse matrix (for tests and small problems)."""
        t0, t1, t2, t3 = self.entries
        J, K = self.J, self.K
        out = dense_block_matrix(t0, t1, t2, t3, J, K)
        return out


def inverse_block_correlation(eig: BlockEigen, J: int, K: int) -> InverseBlockCorrelation:
    """Invert the correlation via its spectrum; requires positive definiteness."""
    for lam, mult in zip(eig.values, eig.mults):
        if mult > 0 and lam <= PD_TOL:
            raise ValidationError(E_PD, MSG_PD)
    inv = tuple(1.0 / lam if mult > 0 else 0.0 for lam, mult in zip(eig.values, eig.mults))
    # Empty eigenspaces never contribute, but keep their reciprocal finite for
    # the entry formulas: reuse a populated eigenvalue consistent with the
    # degenerate limit (K=1 merges lambda1 with lambda2 and lambda3 with lambda4).
    i1, i2, i3, i4 = inv
    if eig.mult1 == 0:
        i1 = i2 if eig.mult2 > 0 else (i3 if eig.mult3 > 0 else i4)
    if eig.mult2 == 0:
        i2 = i4
    if eig.mult3 == 0:
        i3 = i4
    return InverseBlockCorrelation(inv_eigen=(i1, i2, i3, i4), J=J, K=K)


def dense_block_matrix(
    diag: float, same_period: float, same_individual: float, other: float, J: int, K: int
) -> np.ndarray:
    """Dense JK x JK matrix with the four-entry exchangeable pattern (period-major)."""
    JK = J * K
    out = np.full((JK, JK), other)
    for j in range(J):
        blk = slice(j * K, (j + 1) * K)
        out[blk, blk] = same_period
    idx = np.arange(JK)
    per = idx // K
    ind = idx % K
    same_ind = ind[:, None] == ind[None, :]
    diff_per = per[:, None] != per[None, :]
    out[same_ind & diff_per] = same_individual
    out[idx, idx] = diag
    return out


def dense_correlation(alpha0: float, alpha1: float, alpha2: float, J: int, K: int) -> np.ndarray:
    """Dense block exchangeable correlation matrix (test oracle)."""
    return dense_block_matrix(1.0, alpha0, alpha2, alpha1, J, K)


def qaqish_bounds_check(
    alpha0: float,
    alpha1: float,
    alpha2: float,
    cell_means: list[list[float]],
    K: int,
    type: str,
) -> None:
    """Check the binary-outcome feasibility bounds on all within-cluster pairs.

    For each pair of binary outcomes with means (mi, mj) and correlation a,
    E[Yi Yj] = mi*mj + a*sqrt(vi*vj) must lie inside the Frechet bounds
    [max(0, mi+mj-1), min(mi, mj)]. Pairs are formed per distinct treatment
    sequence: same-period pairs use alpha0 (they exist only when K >= 2),
    cross-period different-individual pairs use alpha1, and cross-period
    same-individual pairs use alpha2 (cohort designs; for cross-sectional
    designs alpha2 has already been set to alpha1).
    """
    tol = 1e-12

    def ok(mi: float, mj: float, a: float) -> bool:
        e = mi * mj + a * math.sqrt(mi * (1 - mi) * mj * (1 - mj))
        return max(0.0, mi + mj - 1.0) - tol <= e <= min(mi, mj) + tol

    for means in cell_means:
        J = len(means)
        for j in range(J):
            if K >= 2 and not ok(means[j], means[j], alpha0):
                raise ValidationError(E_QAQISH, MSG_QAQISH)
            for l in range(j + 1, J):
                if K >= 2 and not ok(means[j], means[l], alpha1):
                    raise ValidationError(E_QAQISH, MSG_QAQISH)
                if (type == "cohort" or K == 1) and not ok(means[j], means[l], alpha2):
                    raise ValidationError(E_QAQISH, MSG_QAQISH)
