"""Power calculation for stepped wedge cluster randomized trials.

Covers binary and continuous outcomes, conditional (mixed-model MLE) and
marginal (GEE) frameworks, identity/log/logit links, cross-sectional and
cohort designs, with and without time effects.
"""

from .design import (
    Design,
    DesignSummary,
    design_summaries,
    parse_design,
    render_design,
    total_sample_size,
)
from .engine import (
    PowerReport,
    ScenarioSpec,
    SweepPoint,
    compute_power,
    sweep_power,
    swdpower,
    validate_scenario,
    wald_power,
)
from .errors import DesignParseError, SwdpwrError, ValidationError, WarningRecord
from .links import (
    IdentifiedParams,
    QuadratureRule,
    conditional_moments,
    gauss_hermite_rule,
    get_link,
    identify_conditional_params,
    identify_marginal_params,
    time_effect_vector,
)
from .version import __version__

__all__ = [
    "Design",
    "DesignSummary",
    "DesignParseError",
    "IdentifiedParams",
    "PowerReport",
    "QuadratureRule",
    "ScenarioSpec",
    "SwdpwrError",
    "SweepPoint",
    "ValidationError",
    "WarningRecord",
    "__version__",
    "compute_power",
    "conditional_moments",
    "design_summaries",
    "gauss_hermite_rule",
    "get_link",
    "identify_conditional_params",
    "identify_marginal_params",
    "parse_design",
    "render_design",
    "swdpower",
    "sweep_power",
    "time_effect_vector",
    "total_sample_size",
    "validate_scenario",
    "wald_power",
]
