"""Error and warning vocabulary shared across the package.

Every user-facing failure carries a stable machine-readable code plus a
human message; the CLI and HTTP layers map codes onto exit statuses and
response bodies without re-interpreting text.
"""

from __future__ import annotations

from dataclasses import dataclass


class SwdpwrError(Exception):
    """Base class for all package errors."""


class ValidationError(SwdpwrError):
    """Invalid scenario input. Carries a stable code for programmatic handling."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __repr__(self) -> str:  # pragma: no cover
        return f"ValidationError({self.code}: {self.message})"


class DesignParseError(ValidationError):
    """Malformed design file or matrix."""

    def __init__(self, message: str):
        super().__init__("E-DESIGN", message)


@dataclass(frozen=True)
class WarningRecord:
    """A non-fatal diagnostic; results remain reliable when warnings occur."""

    code: str
    message: str

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


# Error codes
E_ENUM = "E-ENUM"
E_CONTRADICT = "E-CONTRADICT"
E_MISSING = "E-MISSING"
E_ICC_RANGE = "E-ICC-RANGE"
E_ALPHA = "E-ALPHA"
E_PROB = "E-PROB"
E_PD = "E-PD"
E_QAQISH = "E-QAQISH"
E_K150 = "E-K150"
E_SINGULAR = "E-SINGULAR"
E_BUDGET = "E-BUDGET"
E_BRACKET = "E-BRACKET"
E_DESIGN = "E-DESIGN"
E_QUAD = "E-QUAD"

# Warning codes
W_TYPE = "W-TYPE"
W_A0A1 = "W-A0A1"
W_ALPHA2 = "W-ALPHA2"
W_SIGMA2 = "W-SIGMA2"
W_LINK = "W-LINK"
W_SHAPE = "W-SHAPE"

MSG_PD = (
    "Correlation matrix R is not positive definite. Please check whether the "
    "between-period correlation is unrealistically larger than the within-period "
    "correlation or the within-individual correlation."
)
MSG_QAQISH = (
    "Correlation parameters do not satisfy the restrictions of Qaqish (2003). "
    "Please check whether it is possible to reduce the effect size, or make "
    "adjustments to the intraclass correlations."
)
MSG_PROB = (
    "Violation of valid probability, given input parameters: "
    "max(meanresponse_start, meanresponse_end0, meanresponse_end1)>1. Please "
    "check whether any of these values are out of range and revise one or more of them."
)
MSG_ICC = (
    "Violate range of intraclass correlations: max(alpha0,alpha1,alpha2)>1. "
    "Please correct the values of correlation parameters, they must be between 0 and 1."
)
MSG_ALPHA = (
    "Type I error provided is larger than 1, it must be between 0 and 1, and is "
    "usually 0.05."
)
MSG_K150 = (
    "K should be at least smaller than 150 for this scenario as the running time "
    "is too long with this K for the power calculation of binary outcomes under "
    "conditional model with time effects. Please reduce K or use the model "
    "without time effects or use marginal models."
)
MSG_BUDGET = (
    "The outcome enumeration for this scenario is too large for exact "
    "calculation. Please reduce K or use the model without time effects or use "
    "marginal models."
)
MSG_CONTRADICT = (
    "Users are not allowed to supply meanresponse_start, meanresponse_end0, "
    "meanresponse_end1 and effectsize_beta at the same time."
)

MSG_W_TYPE = (
    "Conditional model with binary outcomes only allows for cross-sectional "
    'settings: type="cross-sectional" will be forced to resume the power calculation.'
)
MSG_W_A0A1 = (
    "alpha0 = alpha1 is to be ensured for conditional model with binary outcomes "
    "and cross-sectional designs: the value of alpha1 is set to the value of alpha0."
)
MSG_W_ALPHA2 = (
    "alpha2 is undefined and should not be an input for cross-sectional designs; "
    "the supplied value is ignored."
)
MSG_W_SIGMA2 = (
    "sigma2 is ignored: marginal variance should not be specified for binary outcomes."
)
MSG_W_LINK = (
    "Continuous outcomes are calculated with the link function forced to be identity."
)
