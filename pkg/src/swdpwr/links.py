"""Link functions and identification of regression parameters from rates.

Investigators specify anticipated response rates (start/end of study,
control/intervention); these are translated to the baseline, time-effect and
treatment-effect parameters on the link scale. For the conditional model the
random effect must be integrated out, so identification solves quadrature
equations; for the marginal model it is a direct link transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.optimize import brentq

from .errors import (
    MSG_CONTRADICT,
    E_BRACKET,
    E_CONTRADICT,
    E_PROB,
    E_QUAD,
    MSG_PROB,
    ValidationError,
)

SQRT_PI = math.sqrt(math.pi)
SQRT2 = math.sqrt(2.0)

# Absolute tolerance for root solves on the link scale.
ROOT_TOL = 1e-12
ROOT_MAXITER = 200


@dataclass(frozen=True)
class LinkFunction:
    """A link g with inverse and the derivative of the inverse."""

    kind: str
    g: Callable[[float], float]
    ginv: Callable[[np.ndarray], np.ndarray]
    dginv: Callable[[np.ndarray], np.ndarray]


def _expit(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _dexpit(x):
    p = _expit(x)
    return p * (1.0 - p)


_LINKS = {
    "identity": LinkFunction(
        "identity",
        g=lambda p: p,
        ginv=lambda x: np.asarray(x, dtype=float),
        dginv=lambda x: np.ones_like(np.asarray(x, dtype=float)),
    ),
    "log": LinkFunction(
        "log",
        g=math.log,
        ginv=lambda x: np.exp(np.asarray(x, dtype=float)),
        dginv=lambda x: np.exp(np.asarray(x, dtype=float)),
    ),
    "logit": LinkFunction(
        "logit",
        g=lambda p: math.log(p / (1.0 - p)),
        ginv=_expit,
        dginv=_dexpit,
    ),
}


def get_link(kind: str) -> LinkFunction:
    try:
        return _LINKS[kind]
    except KeyError:
        raise KeyError(f"unknown link {kind!r}") from None


@dataclass(frozen=True)
class IdentifiedParams:
    """Regression parameters on the link scale; tau is the random-effect SD
    (zero under the marginal model)."""

    mu: float
    gammaJ: float
    beta: float
    tau: float = 0.0


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite rule for weight exp(-x^2); weights sum to sqrt(pi)."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def normalized_weights(self) -> np.ndarray:
        return self.weights / SQRT_PI


def gauss_hermite_rule(n: int) -> QuadratureRule:
    """Standard n-point Gauss-Hermite rule.

    Integrals against a normal density use the substitution
    E[f(b)] = (1/sqrt(pi)) * sum_m w_m f(sqrt(2)*tau*z_m) for b ~ N(0, tau^2).
    """
    if not isinstance(n, int) or not (1 <= n <= 200):
        raise ValidationError(E_QUAD, f"quadrature node count must be in [1, 200], got {n}")
    nodes, weights = hermgauss(n)
    return QuadratureRule(nodes=nodes, weights=weights)


def time_effect_vector(gammaJ: float, J: int) -> np.ndarray:
    """Per-period time effects: linear in the period index, gamma_1 = 0."""
    if J < 2:
        raise ValueError("J must be at least 2")
    return np.arange(J) * (gammaJ / (J - 1))


def solve_monotone(
    f: Callable[[float], float],
    target: float,
    x0: float,
    step: float = 1.0,
    what: str = "parameter",
) -> float:
    """Solve f(x) = target for increasing f by bracket growth + brentq."""
    lo = x0 - step
    hi = x0 + step
    grow = step
    for _ in range(80):
        if f(lo) <= target:
            break
        grow *= 2.0
        lo -= grow
    else:
        raise ValidationError(
            E_BRACKET, f"could not bracket the {what} solve for target rate {target}"
        )
    grow = step
    for _ in range(80):
        if f(hi) >= target:
            break
        grow *= 2.0
        hi += grow
    else:
        raise ValidationError(
            E_BRACKET, f"could not bracket the {what} solve for target rate {target}"
        )
    return brentq(lambda x: f(x) - target, lo, hi, xtol=ROOT_TOL, maxiter=ROOT_MAXITER)


def _check_rate(p: float) -> None:
    if not (0.0 < p < 1.0):
        raise ValidationError(E_PROB, MSG_PROB)


def identify_marginal_params(
    p_start: float,
    p_end0: float,
    p_end1: float | None,
    beta: float | None,
    link: LinkFunction,
) -> IdentifiedParams:
    """Marginal-model identification: direct transforms on the link scale."""
    if p_end1 is not None and beta is not None:
        raise ValidationError(E_CONTRADICT, MSG_CONTRADICT)
    if p_end1 is None and beta is None:
        raise ValidationError(
            E_CONTRADICT, "one of meanresponse_end1 or effectsize_beta is required"
        )
    _check_rate(p_start)
    _check_rate(p_end0)
    mu = link.g(p_start)
    gammaJ = link.g(p_end0) - mu
    if beta is None:
        _check_rate(p_end1)
        b = link.g(p_end1) - link.g(p_end0)
    else:
        b = beta
    return IdentifiedParams(mu=mu, gammaJ=gammaJ, beta=b, tau=0.0)


def conditional_moments(
    mu_c: float, tau: float, link: LinkFunction, quad: QuadratureRule
) -> tuple[float, float]:
    """Marginal mean and ICC implied by a conditional intercept and tau.

    The ICC is the ratio Var(E(Y|b)) / Var(Y) for a control-condition
    response. For the identity link the package follows the
    tau^2/(tau^2 + mu(1-mu)) convention; log and logit use the variance
    ratio computed by quadrature.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if tau == 0.0:
        p = float(link.ginv(np.array([mu_c]))[0])
        return p, 0.0
    b = SQRT2 * tau * quad.nodes
    w = quad.normalized_weights
    h = link.ginv(mu_c + b)
    p = float(np.dot(w, h))
    if link.kind == "identity":
        rho = tau * tau / (tau * tau + p * (1.0 - p))
    else:
        eh2 = float(np.dot(w, h * h))
        rho = (eh2 - p * p) / (p * (1.0 - p))
    return p, rho


def _conditional_mean(
    offset: float, tau: float, link: LinkFunction, quad: QuadratureRule
) -> float:
    if tau == 0.0:
        return float(link.ginv(np.array([offset]))[0])
    b = SQRT2 * tau * quad.nodes
    return float(np.dot(quad.normalized_weights, link.ginv(offset + b)))


def identify_conditional_params(
    p_start: float,
    p_end0: float,
    p_end1: float | None,
    beta: float | None,
    rho: float,
    link: LinkFunction,
    quad: QuadratureRule,
) -> IdentifiedParams:
    """Conditional-model identification for binary outcomes.

    Solves (mu, tau) so the implied marginal control-start mean and ICC hit
    (p_start, rho), then the time effect so the control-end mean hits p_end0,
    then the treatment effect so the intervention-end mean hits p_end1 (when
    beta is not supplied directly). Identity-link solves are linear and exact.
    """
    if p_end1 is not None and beta is not None:
        raise ValidationError(E_CONTRADICT, MSG_CONTRADICT)
    if p_end1 is None and beta is None:
        raise ValidationError(
            E_CONTRADICT, "one of meanresponse_end1 or effectsize_beta is required"
        )
    _check_rate(p_start)
    _check_rate(p_end0)
    if not (0.0 <= rho < 1.0):
        raise ValidationError(E_PROB, f"intra-cluster correlation {rho} out of [0, 1)")

    if link.kind == "identity":
        mu = p_start
        tau = math.sqrt(rho * p_start * (1.0 - p_start) / (1.0 - rho)) if rho > 0 else 0.0
        gammaJ = p_end0 - p_start
        if beta is None:
            _check_rate(p_end1)
            b = p_end1 - p_end0
        else:
            b = beta
        return IdentifiedParams(mu=mu, gammaJ=gammaJ, beta=b, tau=tau)

    def mu_for(tau: float) -> float:
        return solve_monotone(
            lambda m: _conditional_mean(m, tau, link, quad),
            p_start,
            link.g(p_start),
            what="baseline",
        )

    if rho == 0.0:
        tau = 0.0
    else:
        def rho_of(tau: float) -> float:
            return conditional_moments(mu_for(tau), tau, link, quad)[1]

        hi = 0.5
        for _ in range(64):
            if rho_of(hi) >= rho:
                break
            hi *= 2.0
        else:
            raise ValidationError(
                E_BRACKET, f"could not bracket tau for intra-cluster correlation {rho}"
            )
        tau = brentq(lambda t: rho_of(t) - rho, 0.0, hi, xtol=ROOT_TOL, maxiter=ROOT_MAXITER)
    mu = mu_for(tau)

    gammaJ = solve_monotone(
        lambda gj: _conditional_mean(mu + gj, tau, link, quad),
        p_end0,
        link.g(p_end0) - link.g(p_start),
        what="time effect",
    )
    if beta is None:
        _check_rate(p_end1)
        b = solve_monotone(
            lambda bb: _conditional_mean(mu + gammaJ + bb, tau, link, quad),
            p_end1,
            link.g(p_end1) - link.g(p_end0),
            what="treatment effect",
        )
    else:
        b = beta
    return IdentifiedParams(mu=mu, gammaJ=gammaJ, beta=b, tau=tau)


def conditional_cell_means(
    params: IdentifiedParams,
    allocations: list[tuple[int, ...]],
    J: int,
    link: LinkFunction,
    quad: QuadratureRule,
    time_effects: bool,
) -> list[list[float]]:
    """Implied marginal means per (sequence, period) for the conditional model."""
    gam = time_effect_vector(params.gammaJ, J) if time_effects else np.zeros(J)
    out = []
    for alloc in allocations:
        out.append(
            [
                _conditional_mean(
                    params.mu + gam[j] + alloc[j] * params.beta, params.tau, link, quad
                )
                for j in range(J)
            ]
        )
    return out


def marginal_cell_means(
    params: IdentifiedParams,
    allocations: list[tuple[int, ...]],
    J: int,
    link: LinkFunction,
    time_effects: bool,
) -> list[list[float]]:
    """Cell means per (sequence, period) for the marginal model."""
    gam = time_effect_vector(params.gammaJ, J) if time_effects else np.zeros(J)
    out = []
    for alloc in allocations:
        x = params.mu + gam + np.array(alloc, dtype=float) * params.beta
        out.append([float(v) for v in link.ginv(x)])
    return out
