"""Conditional-model variance via exact expected Fisher information.

For binary cross-sectional designs, the marginal likelihood of one cluster
integrates the per-period binomial counts over the cluster random effect.
The expected information is the probability-weighted sum of score outer
products over every outcome configuration, enumerated per distinct treatment
sequence. Without time effects the periods sharing a mean collapse into
control/intervention totals, which keeps large K tractable.

The random effect is integrated by Gauss-Hermite quadrature. Identity and
log links bound the random effect support (cell probabilities must stay in
(0, 1)); when that bound bites inside +/- CUTOFF standard deviations, the
integral switches to a Gauss-Legendre rule over the valid interval with the
normal density renormalized there. The integrand is smooth on that interval,
so the rule converges where raw Gauss-Hermite would oscillate with the node
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gammaln

from .design import Design
from .errors import (
    MSG_BUDGET,
    MSG_K150,
    MSG_PROB,
    E_BUDGET,
    E_K150,
    E_PROB,
    E_SINGULAR,
    ValidationError,
)
from .kernels import accumulate_outcome_information
from .links import SQRT2, IdentifiedParams, LinkFunction, QuadratureRule, time_effect_vector

# Probabilities are clamped this far inside (0, 1) at quadrature nodes.
PROB_CLAMP = 1e-12
# The random effect is integrated over at most +/- CUTOFF*tau.
CUTOFF = 8.0
# Solver guard: reciprocal condition numbers below this raise E-SINGULAR.
RCOND_MIN = 1e-12

DEFAULT_BUDGET = 5e8
K_LIMIT_TIME_EFFECTS = 150


def _std_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / SQRT2)


@dataclass(frozen=True)
class GlmmQuadrature:
    """Nodes in random-effect space with normalized weights.

    ``dbdtau`` is the derivative of each node position in the scale family
    b = tau * c (c fixed); the tau-score flows through it.
    """

    nodes: np.ndarray
    weights: np.ndarray
    dbdtau: np.ndarray
    scheme: str
    tau: float

    def rescaled(self, tau: float) -> "GlmmQuadrature":
        """Same standardized rule evaluated at a different tau (for finite
        differencing the tau-score)."""
        if self.tau == 0:
            raise ValueError("cannot rescale a degenerate rule")
        scale = tau / self.tau
        return GlmmQuadrature(
            nodes=self.nodes * scale,
            weights=self.weights,
            dbdtau=self.dbdtau,
            scheme=self.scheme,
            tau=tau,
        )


def valid_effect_interval(predictors: np.ndarray, link: LinkFunction) -> tuple[float, float]:
    """Random-effect range keeping every cell mean strictly inside (0, 1)."""
    lo = -math.inf
    hi = math.inf
    if link.kind == "identity":
        lo = -float(np.min(predictors))
        hi = 1.0 - float(np.max(predictors))
    elif link.kind == "log":
        hi = -float(np.max(predictors))
    return lo, hi


def glmm_quadrature(
    predictors: np.ndarray, tau: float, link: LinkFunction, rule: QuadratureRule
) -> GlmmQuadrature:
    """Build the integration rule for the random effect.

    Uses the supplied Gauss-Hermite rule when the valid interval covers
    +/- CUTOFF*tau; otherwise a Gauss-Legendre rule with the same node count
    on the clipped interval, weighted by the truncated-normal density.
    """
    if tau == 0.0:
        return GlmmQuadrature(
            nodes=np.zeros(1), weights=np.ones(1), dbdtau=np.zeros(1), scheme="point", tau=0.0
        )
    blo, bhi = valid_effect_interval(predictors, link)
    lo = max(blo, -CUTOFF * tau)
    hi = min(bhi, CUTOFF * tau)
    if hi <= lo:
        raise ValidationError(E_PROB, MSG_PROB)
    if blo <= -CUTOFF * tau and bhi >= CUTOFF * tau:
        b = SQRT2 * tau * rule.nodes
        return GlmmQuadrature(
            nodes=b,
            weights=rule.normalized_weights.copy(),
            dbdtau=SQRT2 * rule.nodes,
            scheme="hermite",
            tau=tau,
        )
    xg, wg = leggauss(rule.n)
    b = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
    dens = np.exp(-b * b / (2 * tau * tau)) / (tau * math.sqrt(2 * math.pi))
    mass = _std_normal_cdf(hi / tau) - _std_normal_cdf(lo / tau)
    w = 0.5 * (hi - lo) * wg * dens / mass
    return GlmmQuadrature(nodes=b, weights=w, dbdtau=b / tau, scheme="legendre", tau=tau)


@dataclass
class ClusterOutcomeTable:
    """Enumerable outcome distribution of one treatment sequence.

    Holds per-group log-pmf and score-factor tables over the quadrature
    nodes; groups are periods (with time effects) or the control/intervention
    pools (without).
    """

    trials: np.ndarray  # observations per group
    predictors: np.ndarray  # linear predictor per group, random effect excluded
    coef: np.ndarray  # (n_fixed, G) multipliers of the fixed coordinates
    quad: GlmmQuadrature
    link: LinkFunction
    include_tau: bool
    _T: np.ndarray | None = None
    _S: np.ndarray | None = None

    def __post_init__(self):
        G = len(self.trials)
        M = len(self.quad.nodes)
        nmax = int(self.trials.max())
        T = np.zeros((G, M, nmax + 1))
        S = np.zeros((G, M, nmax + 1))
        for g in range(G):
            N = int(self.trials[g])
            x = self.predictors[g] + self.quad.nodes
            h = np.clip(self.link.ginv(x), PROB_CLAMP, 1.0 - PROB_CLAMP)
            dh = self.link.dginv(x)
            v = np.arange(N + 1)
            logc = gammaln(N + 1) - gammaln(v + 1) - gammaln(N - v + 1)
            T[g, :, : N + 1] = (
                logc[None, :]
                + v[None, :] * np.log(h)[:, None]
                + (N - v)[None, :] * np.log1p(-h)[:, None]
            )
            S[g, :, : N + 1] = (v[None, :] - N * h[:, None]) * (dh / (h * (1.0 - h)))[:, None]
        self._T = T
        self._S = S

    @property
    def sizes(self) -> np.ndarray:
        return self.trials + 1

    @property
    def n_configs(self) -> int:
        return int(np.prod(self.sizes))

    @property
    def n_params(self) -> int:
        return self.coef.shape[0] + (1 if self.include_tau else 0)

    def decode(self, idx: np.ndarray) -> np.ndarray:
        """Configuration indices -> (G, n) count matrix, row-major order."""
        sizes = self.sizes
        G = len(sizes)
        out = np.empty((G, len(idx)), dtype=np.int64)
        rem = np.asarray(idx, dtype=np.int64).copy()
        for g in range(G - 1, -1, -1):
            out[g] = rem % sizes[g]
            rem //= sizes[g]
        return out

    def log_prob_and_scores(self, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """log P(y) and the score vector for explicit count configurations."""
        Y = np.asarray(Y, dtype=np.int64)
        G = len(self.trials)
        w = self.quad.weights
        L = self._T[0][:, Y[0]].copy()
        for g in range(1, G):
            L += self._T[g][:, Y[g]]
        mx = L.max(axis=0)
        E = w[:, None] * np.exp(L - mx)
        den = E.sum(axis=0)
        logp = mx + np.log(den)
        q = np.stack([(E * self._S[g][:, Y[g]]).sum(axis=0) for g in range(G)])
        u = self.coef @ q
        if self.include_tau:
            EZ = E * self.quad.dbdtau[:, None]
            r = np.zeros(Y.shape[1])
            for g in range(G):
                r += (EZ * self._S[g][:, Y[g]]).sum(axis=0)
            u = np.vstack([u, r])
        return logp, u / den

    def accumulate(self) -> tuple[float, np.ndarray, np.ndarray]:
        """(sum P, sum P*s, sum P*s*s') over the full configuration space."""
        return accumulate_outcome_information(
            self._T,
            self._S,
            self.sizes,
            self.quad.weights,
            self.quad.dbdtau,
            self.coef,
            self.include_tau,
            0,
            self.n_configs,
        )


def _sequence_groups(
    alloc: tuple[int, ...],
    params: IdentifiedParams,
    K: int,
    J: int,
    time_effects: bool,
    collapse: bool,
):
    """Group structure (trial counts, predictors, coefficient rows) for one sequence."""
    if time_effects:
        gam = time_effect_vector(params.gammaJ, J)
        trials = np.full(J, K, dtype=np.int64)
        preds = params.mu + gam + np.array(alloc, dtype=float) * params.beta
        coef = [np.ones(J)]
        for l in range(1, J):
            row = np.zeros(J)
            row[l] = 1.0
            coef.append(row)
        coef.append(np.array(alloc, dtype=float))
        return trials, preds, np.array(coef)
    if not collapse:
        trials = np.full(J, K, dtype=np.int64)
        preds = params.mu + np.array(alloc, dtype=float) * params.beta
        coef = np.array([np.ones(J), np.array(alloc, dtype=float)])
        return trials, preds, coef
    j0 = sum(1 for a in alloc if a == 0)
    j1 = J - j0
    trials, preds, xrow = [], [], []
    if j0:
        trials.append(j0 * K)
        preds.append(params.mu)
        xrow.append(0.0)
    if j1:
        trials.append(j1 * K)
        preds.append(params.mu + params.beta)
        xrow.append(1.0)
    coef = np.array([np.ones(len(trials)), np.array(xrow)])
    return np.array(trials, dtype=np.int64), np.array(preds), coef


def _grouped_rows(design: Design) -> list[tuple[int, tuple[int, ...]]]:
    """Merge duplicate sequences so multiplicity scaling is a single multiply."""
    counts: dict[tuple[int, ...], int] = {}
    order: list[tuple[int, ...]] = []
    for mult, alloc in design.rows:
        if alloc not in counts:
            counts[alloc] = 0
            order.append(alloc)
        counts[alloc] += mult
    return [(counts[a], a) for a in order]


def _all_cell_predictors(
    design: Design, params: IdentifiedParams, time_effects: bool
) -> np.ndarray:
    J = design.J
    gam = time_effect_vector(params.gammaJ, J) if time_effects else np.zeros(J)
    preds = set()
    for _, alloc in design.rows:
        for j in range(J):
            preds.add(params.mu + gam[j] + alloc[j] * params.beta)
    return np.array(sorted(preds))


def cluster_outcome_distribution(
    sequence: tuple[int, ...],
    params: IdentifiedParams,
    K: int,
    link: LinkFunction,
    quad: GlmmQuadrature,
    time_effects: bool,
    J: int | None = None,
    budget: float = DEFAULT_BUDGET,
    collapse: bool = True,
) -> ClusterOutcomeTable:
    """Outcome distribution of one sequence under the shared quadrature."""
    J = len(sequence) if J is None else J
    trials, preds, coef = _sequence_groups(tuple(sequence), params, K, J, time_effects, collapse)
    table = ClusterOutcomeTable(
        trials=trials,
        predictors=preds,
        coef=coef,
        quad=quad,
        link=link,
        include_tau=params.tau > 0,
    )
    if table.n_configs * len(quad.nodes) > budget:
        raise ValidationError(E_BUDGET, MSG_BUDGET)
    return table


def expected_information(
    design: Design,
    params: IdentifiedParams,
    K: int,
    link: LinkFunction,
    rule: QuadratureRule,
    time_effects: bool,
    budget: float = DEFAULT_BUDGET,
    collapse: bool = True,
) -> np.ndarray:
    """Expected Fisher information over theta for the whole design.

    theta is (mu, gamma_2..gamma_J, beta[, tau]) with time effects and
    (mu, beta[, tau]) without; tau is present when positive.
    """
    preds = _all_cell_predictors(design, params, time_effects)
    means = link.ginv(preds)
    if np.any(means <= 0.0) or np.any(means >= 1.0):
        raise ValidationError(E_PROB, MSG_PROB)
    quad = glmm_quadrature(preds, params.tau, link, rule)
    rows = _grouped_rows(design)
    total_evals = 0
    tables = []
    for mult, alloc in rows:
        table = cluster_outcome_distribution(
            alloc, params, K, link, quad, time_effects, design.J, budget, collapse
        )
        total_evals += table.n_configs * len(quad.nodes)
        if total_evals > budget:
            raise ValidationError(E_BUDGET, MSG_BUDGET)
        tables.append((mult, table))
    p = tables[0][1].n_params
    info = np.zeros((p, p))
    for mult, table in tables:
        _, _, seq_info = table.accumulate()
        info += mult * seq_info
    return info


def invert_information(info: np.ndarray) -> np.ndarray:
    """Invert a symmetric information matrix, guarding conditioning."""
    eig = np.linalg.eigvalsh(info)
    if eig[0] <= 0 or eig[0] / eig[-1] < RCOND_MIN:
        raise ValidationError(
            E_SINGULAR,
            "The information matrix for this design is singular or too "
            "ill-conditioned; the treatment effect is not identifiable.",
        )
    return np.linalg.inv(info)


def var_beta_conditional(
    design: Design,
    params: IdentifiedParams,
    K: int,
    link: LinkFunction,
    rule: QuadratureRule,
    time_effects: bool,
    budget: float = DEFAULT_BUDGET,
) -> float:
    """Large-sample variance of the treatment-effect MLE."""
    if time_effects and K > K_LIMIT_TIME_EFFECTS:
        raise ValidationError(E_K150, MSG_K150)
    info = expected_information(design, params, K, link, rule, time_effects, budget)
    beta_index = design.J if time_effects else 1
    cov = invert_information(info)
    return float(cov[beta_index, beta_index])
