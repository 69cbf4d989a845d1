"""Scenario validation, dispatch to the variance engines, and Wald power.

The validation order mirrors the documented warning/error behaviour: design
and argument checks first, then the warning fixups (forced cross-sectional
type, forced identity link, ignored sigma2/alpha2, alpha1 := alpha0), then
identification, positive definiteness, binary feasibility bounds, and the
enumeration guards. Every warning path still produces a result.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

from scipy.special import erfc, ndtri

from . import gee, glmm
from .correlation import block_eigenvalues, qaqish_bounds_check, resolve_correlations, CorrelationParams
from .design import Design, design_summaries, total_sample_size
from .errors import (
    MSG_ALPHA,
    MSG_CONTRADICT,
    MSG_ICC,
    MSG_K150,
    MSG_PROB,
    MSG_W_LINK,
    MSG_W_SIGMA2,
    MSG_W_TYPE,
    E_ALPHA,
    E_CONTRADICT,
    E_ENUM,
    E_ICC_RANGE,
    E_K150,
    E_MISSING,
    E_PROB,
    E_SINGULAR,
    W_LINK,
    W_SIGMA2,
    W_TYPE,
    ValidationError,
    WarningRecord,
)
from .links import (
    IdentifiedParams,
    QuadratureRule,
    conditional_cell_means,
    gauss_hermite_rule,
    get_link,
    identify_conditional_params,
    identify_marginal_params,
    marginal_cell_means,
)

FAMILIES = ("binomial", "gaussian")
MODELS = ("conditional", "marginal")
LINKS = ("identity", "log", "logit")
TYPES = ("cross-sectional", "cohort")

DEFAULT_QUAD_NODES = 30


@dataclass
class ScenarioSpec:
    """The full user input surface.

    Defaults mirror the published argument table: meanresponse_end0 falls
    back to meanresponse_start, alpha1 to alpha0/2; sigma2 is only meaningful
    for continuous outcomes.
    """

    K: int
    design: Design
    family: str = "binomial"
    model: str = "conditional"
    link: str = "identity"
    type: str = "cross-sectional"
    meanresponse_start: float | None = None
    meanresponse_end0: float | None = None
    meanresponse_end1: float | None = None
    effectsize_beta: float | None = None
    sigma2: float | None = None
    typeIerror: float = 0.05
    alpha0: float = 0.1
    alpha1: float | None = None
    alpha2: float | None = None
    quad_nodes: int | None = None
    enum_budget: float = glmm.DEFAULT_BUDGET


@dataclass
class NormalizedScenario:
    """Validation output: resolved enums, identified parameters, resolved ICCs."""

    design: Design
    K: int
    family: str
    model: str
    link: str
    type: str
    params: IdentifiedParams
    alpha0: float
    alpha1: float
    alpha2: float
    sigma2: float | None
    typeIerror: float
    time_effects: bool
    quad: QuadratureRule
    enum_budget: float
    warnings: list[WarningRecord] = field(default_factory=list)


@dataclass
class PowerReport:
    """Result echo: resolved scenario, Var(beta-hat) and the attained power."""

    I: int
    J: int
    K: int
    total_sample_size: int
    family: str
    model: str
    link: str
    type: str
    mu: float
    beta: float
    gammaJ: float
    tau: float
    alpha0: float
    alpha1: float
    alpha2: float
    typeIerror: float
    var_beta: float
    power: float
    time_effects: bool
    design: list[dict]
    warnings: list[WarningRecord] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["warnings"] = [w.as_dict() for w in self.warnings]
        return out

    def text(self) -> str:
        """The two summary lines followed by the result field block."""
        lines = [
            f"This {self.type} study has total sample size of {self.total_sample_size}",
            (
                f"Power for this scenario is {format_power(self.power)} for the "
                f"alternative hypothesis treatment effect beta = {format_trim(self.beta)} "
                f"( Type I error = {format_trim(self.typeIerror)} )"
            ),
            "",
            f"I = {self.I}",
            f"J = {self.J}",
            f"K = {self.K}",
            f"Total sample size = {self.total_sample_size}",
            f"Family = {self.family}",
            f"Model = {self.model}",
            f"Link = {self.link}",
            f"Type = {self.type}",
            f"Baseline (mu): {format_fixed(self.mu)}",
            f"Treatment effect (beta): {format_fixed(self.beta)}",
            f"Time effect (gamma J): {format_fixed(self.gammaJ)}",
            f"alpha0: {format_fixed(self.alpha0)}",
            f"alpha1: {format_fixed(self.alpha1)}",
            f"alpha2: {format_fixed(self.alpha2)}",
            f"Type I error = {format_fixed(self.typeIerror)}",
            f"Power = {format_power(self.power)}",
        ]
        return "\n".join(lines)


def round_half_away(x: float, digits: int = 3) -> float:
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def format_power(p: float) -> str:
    """3-decimal display; an exact 1 prints as ``1``."""
    r = round_half_away(p, 3)
    if r >= 1.0:
        return "1"
    return f"{r:.3f}"


def format_fixed(x: float) -> str:
    return f"{round_half_away(x, 3):.3f}"


def format_trim(x: float) -> str:
    s = f"{round_half_away(x, 3):.3f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-") else "0"


def std_normal_cdf(x: float) -> float:
    return 0.5 * float(erfc(-x / math.sqrt(2.0)))


def wald_power(beta_a: float, var_beta: float, type_i_error: float) -> float:
    """Two-sided Wald test power at the alternative beta_a."""
    if var_beta <= 0:
        raise ValidationError(E_SINGULAR, "variance of the treatment effect must be positive")
    if not (0.0 < type_i_error < 1.0):
        raise ValidationError(E_ALPHA, MSG_ALPHA)
    if beta_a == 0.0:
        # At the null, power equals the test size identically.
        return type_i_error
    z = float(ndtri(1.0 - type_i_error / 2.0))
    ratio = abs(beta_a) / math.sqrt(var_beta)
    return std_normal_cdf(ratio - z) + std_normal_cdf(-ratio - z)


def default_quad_nodes() -> int:
    env = os.environ.get("SWDPWR_QUAD_NODES", "")
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return DEFAULT_QUAD_NODES


def _require(value, message: str):
    if value is None:
        raise ValidationError(E_MISSING, message)
    return value


def _check_rates_range(*rates: float | None) -> None:
    supplied = [r for r in rates if r is not None]
    if any(r >= 1.0 or r <= 0.0 for r in supplied):
        raise ValidationError(E_PROB, MSG_PROB)


def validate_scenario(spec: ScenarioSpec) -> NormalizedScenario:
    """Normalize and validate a scenario, collecting warnings.

    Raises ValidationError with a stable code on the first fatal problem.
    """
    warnings: list[WarningRecord] = []

    if spec.family not in FAMILIES:
        raise ValidationError(E_ENUM, f"unknown family {spec.family!r}; use one of {FAMILIES}")
    if spec.model not in MODELS:
        raise ValidationError(E_ENUM, f"unknown model {spec.model!r}; use one of {MODELS}")
    if spec.link not in LINKS:
        raise ValidationError(E_ENUM, f"unknown link {spec.link!r}; use one of {LINKS}")
    if spec.type not in TYPES:
        raise ValidationError(E_ENUM, f"unknown type {spec.type!r}; use one of {TYPES}")
    if not isinstance(spec.design, Design):
        raise ValidationError(E_MISSING, "a design is required")
    if spec.K is None or int(spec.K) != spec.K or spec.K < 1:
        raise ValidationError(E_MISSING, "K must be a positive integer")
    K = int(spec.K)
    design = spec.design
    warnings.extend(design.warnings)

    summary = design_summaries(design)
    if summary.U == 0 or summary.U == design.I * design.J:
        raise ValidationError(
            E_SINGULAR,
            "the design is entirely control or entirely intervention, so the "
            "treatment effect is not estimable",
        )

    family, model, link, dtype = spec.family, spec.model, spec.link, spec.type

    # Warning fixups, in the documented order.
    if family == "binomial" and model == "conditional" and dtype == "cohort":
        warnings.append(WarningRecord(W_TYPE, MSG_W_TYPE))
        dtype = "cross-sectional"
    if family == "gaussian" and link != "identity":
        warnings.append(WarningRecord(W_LINK, MSG_W_LINK))
        link = "identity"
    sigma2 = spec.sigma2
    if family == "binomial" and sigma2 is not None and sigma2 != 0:
        warnings.append(WarningRecord(W_SIGMA2, MSG_W_SIGMA2))
        sigma2 = None
    if family == "binomial":
        sigma2 = None
    if family == "gaussian":
        if sigma2 is None or sigma2 <= 0:
            raise ValidationError(
                E_MISSING, "sigma2 (the marginal outcome variance) is required and must "
                "be positive for continuous outcomes"
            )

    if not (0.0 < spec.typeIerror < 1.0):
        raise ValidationError(E_ALPHA, MSG_ALPHA)

    alpha0 = spec.alpha0
    alpha1 = spec.alpha1 if spec.alpha1 is not None else alpha0 / 2.0
    alpha2 = spec.alpha2
    for a in (alpha0, alpha1) + ((alpha2,) if alpha2 is not None else ()):
        if not (0.0 <= a <= 1.0):
            raise ValidationError(E_ICC_RANGE, MSG_ICC)

    if spec.meanresponse_end1 is not None and spec.effectsize_beta is not None:
        raise ValidationError(E_CONTRADICT, MSG_CONTRADICT)

    start = spec.meanresponse_start
    end0 = spec.meanresponse_end0 if spec.meanresponse_end0 is not None else start
    end1 = spec.meanresponse_end1
    beta = spec.effectsize_beta

    (a0, a1, a2), corr_warnings = resolve_correlations(
        CorrelationParams(alpha0, alpha1, alpha2), dtype, model, family
    )
    warnings.extend(corr_warnings)

    nodes = spec.quad_nodes if spec.quad_nodes is not None else default_quad_nodes()
    quad = gauss_hermite_rule(nodes)

    if family == "binomial":
        _require(start, "meanresponse_start is required for binary outcomes")
        if end1 is None and beta is None:
            raise ValidationError(
                E_MISSING, "one of meanresponse_end1 or effectsize_beta is required"
            )
        _check_rates_range(start, end0, end1)
        time_effects = end0 != start
        if model == "conditional":
            params = identify_conditional_params(start, end0, end1, beta, a0, get_link(link), quad)
        else:
            params = identify_marginal_params(start, end0, end1, beta, get_link(link))
    else:
        if beta is None and end1 is None:
            raise ValidationError(
                E_MISSING,
                "continuous outcomes need effectsize_beta (or meanresponse_end1 "
                "with meanresponse_start/meanresponse_end0)",
            )
        if end1 is not None and start is None:
            raise ValidationError(
                E_MISSING,
                "meanresponse_start and meanresponse_end0 are required when the "
                "effect is given through meanresponse_end1",
            )
        if start is None and spec.meanresponse_end0 is not None:
            raise ValidationError(
                E_MISSING, "meanresponse_start must accompany meanresponse_end0"
            )
        time_effects = start is not None and end0 is not None and end0 != start
        mu = start if start is not None else 0.0
        gammaj = (end0 - start) if time_effects else 0.0
        b = beta if beta is not None else end1 - end0
        params = IdentifiedParams(mu=mu, gammaJ=gammaj, beta=b, tau=0.0)

    # Positive definiteness of the working correlation (all models).
    block_eigenvalues(a0, a1, a2, design.J, K)

    if family == "binomial":
        allocations = [alloc for _, alloc in design.rows]
        if model == "conditional":
            means = conditional_cell_means(
                params, allocations, design.J, get_link(link), quad, time_effects
            )
        else:
            means = marginal_cell_means(params, allocations, design.J, get_link(link), time_effects)
        flat = [m for row in means for m in row]
        if any(m <= 0.0 or m >= 1.0 for m in flat):
            raise ValidationError(E_PROB, MSG_PROB)
        qaqish_bounds_check(a0, a1, a2, means, K, dtype)
        if model == "conditional" and time_effects and K > glmm.K_LIMIT_TIME_EFFECTS:
            raise ValidationError(E_K150, MSG_K150)

    return NormalizedScenario(
        design=design,
        K=K,
        family=family,
        model=model,
        link=link,
        type=dtype,
        params=params,
        alpha0=a0,
        alpha1=a1,
        alpha2=a2,
        sigma2=sigma2,
        typeIerror=spec.typeIerror,
        time_effects=time_effects,
        quad=quad,
        enum_budget=spec.enum_budget,
        warnings=warnings,
    )


def compute_power(spec: ScenarioSpec) -> PowerReport:
    """Validate, dispatch to the right variance engine, and evaluate power."""
    sc = validate_scenario(spec)
    summary = design_summaries(sc.design)
    if sc.family == "gaussian":
        var = gee.var_beta_continuous(
            summary, sc.K, sc.sigma2, sc.alpha0, sc.alpha1, sc.alpha2, sc.time_effects
        )
    elif sc.model == "marginal":
        var = gee.var_beta_binary_marginal(
            sc.design, sc.K, get_link(sc.link), sc.params,
            sc.alpha0, sc.alpha1, sc.alpha2, sc.time_effects,
        )
    else:
        var = glmm.var_beta_conditional(
            sc.design, sc.params, sc.K, get_link(sc.link), sc.quad,
            sc.time_effects, sc.enum_budget,
        )
    power = wald_power(sc.params.beta, var, sc.typeIerror)
    return PowerReport(
        I=sc.design.I,
        J=sc.design.J,
        K=sc.K,
        total_sample_size=total_sample_size(sc.design, sc.K, sc.type),
        family=sc.family,
        model=sc.model,
        link=sc.link,
        type=sc.type,
        mu=sc.params.mu,
        beta=sc.params.beta,
        gammaJ=sc.params.gammaJ,
        tau=sc.params.tau,
        alpha0=sc.alpha0,
        alpha1=sc.alpha1,
        alpha2=sc.alpha2,
        typeIerror=sc.typeIerror,
        var_beta=var,
        power=power,
        time_effects=sc.time_effects,
        design=[{"count": m, "allocation": list(a)} for m, a in sc.design.rows],
        warnings=sc.warnings,
    )


SWEEP_PARAMS = (
    "risk_difference",
    "effectsize_beta",
    "K",
    "typeIerror",
    "alpha0",
    "alpha1",
    "alpha2",
)


@dataclass
class SweepPoint:
    value: float
    report: PowerReport | None = None
    error_code: str | None = None
    error_message: str | None = None

    def as_dict(self) -> dict:
        out = {"value": self.value}
        if self.report is not None:
            out["report"] = self.report.as_dict()
        else:
            out["error"] = {"code": self.error_code, "message": self.error_message}
        return out


def _spec_at(spec: ScenarioSpec, parameter: str, value: float) -> ScenarioSpec:
    if parameter == "risk_difference":
        end0 = (
            spec.meanresponse_end0
            if spec.meanresponse_end0 is not None
            else spec.meanresponse_start
        )
        if end0 is None:
            raise ValidationError(
                E_MISSING, "risk_difference sweeps need meanresponse_start/meanresponse_end0"
            )
        return dataclasses.replace(
            spec, meanresponse_end1=end0 + value, effectsize_beta=None
        )
    if parameter == "effectsize_beta":
        return dataclasses.replace(spec, effectsize_beta=value, meanresponse_end1=None)
    if parameter == "K":
        return dataclasses.replace(spec, K=int(value))
    if parameter in ("typeIerror", "alpha0", "alpha1", "alpha2"):
        return dataclasses.replace(spec, **{parameter: value})
    raise ValidationError(E_ENUM, f"unknown sweep parameter {parameter!r}; use one of {SWEEP_PARAMS}")


def sweep_power(spec: ScenarioSpec, parameter: str, grid) -> list[SweepPoint]:
    """Evaluate power across a grid; per-point failures are captured inline."""
    grid = list(grid)
    if not grid:
        raise ValidationError(E_MISSING, "sweep grid must not be empty")
    if parameter not in SWEEP_PARAMS:
        raise ValidationError(
            E_ENUM, f"unknown sweep parameter {parameter!r}; use one of {SWEEP_PARAMS}"
        )
    points = []
    for value in grid:
        try:
            report = compute_power(_spec_at(spec, parameter, value))
            points.append(SweepPoint(value=value, report=report))
        except ValidationError as err:
            points.append(
                SweepPoint(value=value, error_code=err.code, error_message=err.message)
            )
    return points


def swdpower(
    K: int,
    design,
    family: str = "binomial",
    model: str = "conditional",
    link: str = "identity",
    type: str = "cross-sectional",
    meanresponse_start: float | None = None,
    meanresponse_end0: float | None = None,
    meanresponse_end1: float | None = None,
    effectsize_beta: float | None = None,
    sigma2: float | None = None,
    typeIerror: float = 0.05,
    alpha0: float = 0.1,
    alpha1: float | None = None,
    alpha2: float | None = None,
    quad_nodes: int | None = None,
) -> PowerReport:
    """Keyword-style front end mirroring the published argument table.

    ``design`` may be a Design, an I x J 0/1 matrix (nested sequence), or
    (multiplicity, allocation) rows.
    """
    if not isinstance(design, Design):
        rows = list(design)
        if rows and isinstance(rows[0], (list, tuple)) and len(rows[0]) == 2 and not isinstance(
            rows[0][1], (int, float)
        ):
            design = Design.from_rows([(int(m), tuple(a)) for m, a in rows])
        else:
            design = Design.from_matrix(rows)
    spec = ScenarioSpec(
        K=K,
        design=design,
        family=family,
        model=model,
        link=link,
        type=type,
        meanresponse_start=meanresponse_start,
        meanresponse_end0=meanresponse_end0,
        meanresponse_end1=meanresponse_end1,
        effectsize_beta=effectsize_beta,
        sigma2=sigma2,
        typeIerror=typeIerror,
        alpha0=alpha0,
        alpha1=alpha1,
        alpha2=alpha2,
        quad_nodes=quad_nodes,
    )
    return compute_power(spec)
