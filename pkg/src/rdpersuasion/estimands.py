"""Persuasion estimands as closed-form maps of boundary limits.

The scalar functions (``theta_rd``, ``theta_rd_upper_e``, ...) take population
or estimated limits. The sample-level functions fit the required boundary
limits with :mod:`rdpersuasion.locpoly` and propagate standard errors by the
delta method, treating left- and right-side fits as independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DataScenario, ExposureLimits, Sample, Side
from .errors import InvalidValue, ScenarioMismatch, WeakDenominator, WeakFirstStage
from .locpoly import BoundaryEstimate, FitSpec, Variant, fit, wls_sandwich

EPSILON_DEN = 0.01


@dataclass(frozen=True)
class PersuasionPoint:
    theta: float
    se: float = 0.0

    def __post_init__(self):
        if not self.se >= 0:
            raise InvalidValue(f"standard error must be nonnegative, got {self.se}")


@dataclass(frozen=True)
class PersuasionInterval:
    lower: PersuasionPoint
    upper: PersuasionPoint
    upper_is_logical_one: bool = False

    def __post_init__(self):
        if self.upper_is_logical_one and (self.upper.theta != 1.0 or self.upper.se != 0.0):
            raise InvalidValue("a logical upper bound must be exactly 1 with zero SE")

    @property
    def crossed(self) -> bool:
        """Estimated lower bound exceeds the estimated upper bound."""
        return self.lower.theta > self.upper.theta

    @classmethod
    def up_to_one(cls, lower: PersuasionPoint) -> "PersuasionInterval":
        return cls(lower, PersuasionPoint(1.0, 0.0), True)


def _check_den(den: float, eps: float, what: str):
    if not den > eps:
        raise WeakDenominator(f"{what} = {den:.6g} is not above epsilon_den = {eps}")


# -- closed forms -----------------------------------------------------------

def theta_rd(mu_plus: float, mu_minus: float, eps: float = EPSILON_DEN) -> float:
    """Outcome jump at the cutoff rescaled by the left-limit non-action share."""
    _check_den(1.0 - mu_minus, eps, "1 - mu_minus")
    return (mu_plus - mu_minus) / (1.0 - mu_minus)


def theta_rd_se(mu_plus, mu_minus, se_plus, se_minus, eps: float = EPSILON_DEN) -> float:
    if se_plus < 0 or se_minus < 0:
        raise InvalidValue("standard errors must be nonnegative")
    den = 1.0 - mu_minus
    _check_den(den, eps, "1 - mu_minus")
    g_plus = 1.0 / den
    g_minus = (mu_plus - 1.0) / den**2
    return math.sqrt((g_plus * se_plus) ** 2 + (g_minus * se_minus) ** 2)


def theta_rd_upper_from_joint(p11_plus, e_plus, p10_minus, eps: float = EPSILON_DEN) -> float:
    """Upper bound with (Y, D, W) observed, from joint limits.

    ``p11_plus`` is Pr(Y=1, D=1 | 0+), ``e_plus`` is Pr(D=1 | 0+) and
    ``p10_minus`` is Pr(Y=1, D=0 | 0-).
    """
    _check_den(1.0 - p10_minus, eps, "1 - Pr(Y=1, D=0 | 0-)")
    return (p11_plus + 1.0 - e_plus - p10_minus) / (1.0 - p10_minus)


def _upper_e_parts(p_plus, p_minus, exposure: ExposureLimits):
    a = min(1.0, p_plus + 1.0 - exposure.e_plus)
    b = max(0.0, p_minus - exposure.e_minus)
    return a, b


def theta_rd_upper_e(p_plus, p_minus, exposure: ExposureLimits, eps: float = EPSILON_DEN) -> float:
    """Upper bound when only (Y, W) is observed and exposure limits are known."""
    a, b = _upper_e_parts(p_plus, p_minus, exposure)
    _check_den(1.0 - b, eps, "1 - max(0, p_minus - e_minus)")
    return (a - b) / (1.0 - b)


def theta_rd_upper_e_se(p_plus, p_minus, se_plus, se_minus, exposure: ExposureLimits,
                        eps: float = EPSILON_DEN) -> float:
    # Capped branches are locally constant and contribute no sampling error.
    a, b = _upper_e_parts(p_plus, p_minus, exposure)
    se_a = 0.0 if p_plus + 1.0 - exposure.e_plus >= 1.0 else se_plus
    se_b = 0.0 if p_minus - exposure.e_minus <= 0.0 else se_minus
    return theta_rd_se(a, b, se_a, se_b, eps)


def theta_cl_star_star(p_plus, p_minus, exposure: ExposureLimits, eps: float = EPSILON_DEN) -> float:
    """Lower bound on the local-complier rate with known exposure limits."""
    return max(theta_rd(p_plus, p_minus, eps), (p_plus - p_minus) / exposure.jump)


def theta_cl_star_star_se(p_plus, p_minus, se_plus, se_minus, exposure: ExposureLimits,
                          eps: float = EPSILON_DEN) -> float:
    """Delta-method SE of whichever branch of the max is active."""
    rd = theta_rd(p_plus, p_minus, eps)
    if rd >= (p_plus - p_minus) / exposure.jump:
        return theta_rd_se(p_plus, p_minus, se_plus, se_minus, eps)
    return math.hypot(se_plus, se_minus) / exposure.jump


def dk_rate(p_plus, p_minus, exposure: ExposureLimits, eps: float = EPSILON_DEN) -> float:
    """Complier-scaled jump divided by the whole-population non-action share.

    Reported for comparison only: it mixes a complier quantity with a
    population normalisation and is not a persuasion rate for any
    subpopulation.
    """
    _check_den(1.0 - p_minus, eps, "1 - p_minus")
    return (p_plus - p_minus) / exposure.jump / (1.0 - p_minus)


def dk_rate_se(p_plus, p_minus, se_plus, se_minus, exposure: ExposureLimits,
               eps: float = EPSILON_DEN) -> float:
    return theta_rd_se(p_plus, p_minus, se_plus, se_minus, eps) / exposure.jump


# -- sample-level estimators -------------------------------------------------

@dataclass(frozen=True)
class RatioFit:
    """A persuasion estimate with the boundary fits it was built from."""

    point: PersuasionPoint
    fits: dict


def _require_full(sample: Sample):
    if sample.scenario is not DataScenario.FULL_TRIPLET or sample.d is None:
        raise ScenarioMismatch("this estimator needs (Y, D, W) observed jointly")


def _pair(sample, outcome, spec, variant):
    return (fit(sample, outcome, Side.RIGHT, spec, variant),
            fit(sample, outcome, Side.LEFT, spec, variant))


def _ratio_point(plus: BoundaryEstimate, minus: BoundaryEstimate, eps) -> PersuasionPoint:
    theta = theta_rd(plus.mu_hat, minus.mu_hat, eps)
    se = theta_rd_se(plus.mu_hat, minus.mu_hat, plus.se, minus.se, eps)
    return PersuasionPoint(theta, se)


def theta_rd_local(sample: Sample, spec: FitSpec, variant=Variant.CONVENTIONAL,
                   eps: float = EPSILON_DEN, outcome=None) -> RatioFit:
    """Local polynomial estimate of the sharp-design rate with its delta-method SE."""
    y = sample.y if outcome is None else outcome
    plus, minus = _pair(sample, y, spec, variant)
    return RatioFit(_ratio_point(plus, minus, eps), {"y_plus": plus, "y_minus": minus})


def theta_rd_upper_full(sample: Sample, spec: FitSpec, variant=Variant.CONVENTIONAL,
                        eps: float = EPSILON_DEN) -> RatioFit:
    """Upper bound via transformed outcomes ``Y*D + 1 - D`` (right) and ``Y*(1 - D)`` (left)."""
    _require_full(sample)
    y = sample.y.astype(float)
    d = sample.d.astype(float)
    plus = fit(sample, y * d + 1.0 - d, Side.RIGHT, spec, variant)
    minus = fit(sample, y * (1.0 - d), Side.LEFT, spec, variant)
    return RatioFit(_ratio_point(plus, minus, eps), {"u_plus": plus, "u_minus": minus})


def theta_rd_upper_joint(sample: Sample, spec: FitSpec, variant=Variant.CONVENTIONAL,
                         eps: float = EPSILON_DEN) -> float:
    """Same upper bound evaluated from separately fitted joint-frequency limits."""
    _require_full(sample)
    y = sample.y.astype(float)
    d = sample.d.astype(float)
    p11 = fit(sample, y * d, Side.RIGHT, spec, variant).mu_hat
    e_plus = fit(sample, d, Side.RIGHT, spec, variant).mu_hat
    p10 = fit(sample, y * (1.0 - d), Side.LEFT, spec, variant).mu_hat
    return theta_rd_upper_from_joint(p11, e_plus, p10, eps)


def theta_cl_star(sample: Sample, spec: FitSpec, variant=Variant.CONVENTIONAL,
                  eps: float = EPSILON_DEN) -> RatioFit:
    """Wald ratio with ``Y + D - Y*D`` as the pseudo-treatment.

    The SE treats all four boundary fits as independent, including the
    same-side numerator and denominator fits.
    """
    _require_full(sample)
    y = sample.y.astype(float)
    d = sample.d.astype(float)
    y_plus, y_minus = _pair(sample, y, spec, variant)
    t_plus, t_minus = _pair(sample, y + d - y * d, spec, variant)
    num = y_plus.mu_hat - y_minus.mu_hat
    den = t_plus.mu_hat - t_minus.mu_hat
    if not abs(den) > eps:
        raise WeakFirstStage(f"pseudo-treatment jump {den:.6g} is within epsilon_den = {eps}")
    var_num = y_plus.se**2 + y_minus.se**2
    var_den = t_plus.se**2 + t_minus.se**2
    se = math.sqrt(var_num / den**2 + (num / den**2) ** 2 * var_den)
    fits = {"y_plus": y_plus, "y_minus": y_minus, "t_plus": t_plus, "t_minus": t_minus}
    return RatioFit(PersuasionPoint(num / den, se), fits)


def global_poly_theta(sample: Sample, degree: int, eps: float = EPSILON_DEN,
                      outcome=None) -> PersuasionPoint:
    """Parametric sharp-design route.

    OLS of the outcome on an intercept, D, powers of the centred running
    variable and their interactions with D. The rate is
    ``coef_D / (1 - intercept)`` with an HC0 delta-method SE.
    """
    if degree < 0:
        raise InvalidValue("degree must be nonnegative")
    n = len(sample)
    if n <= 2 * (degree + 1):
        raise InvalidValue(f"need more than {2 * (degree + 1)} records for degree {degree}")
    y = sample.y if outcome is None else np.asarray(outcome, dtype=float)
    x = sample.w - sample.cutoff
    d = sample.right.astype(float)
    powers = np.vander(x, degree + 1, increasing=True)[:, 1:]
    X = np.column_stack([np.ones(n), d, powers, powers * d[:, None]])
    beta, cov = wls_sandwich(X, y)
    b0, bd = beta[0], beta[1]
    den = 1.0 - b0
    _check_den(den, eps, "1 - intercept")
    grad = np.array([bd / den**2, 1.0 / den])
    var = grad @ cov[:2, :2] @ grad
    return PersuasionPoint(float(bd / den), float(np.sqrt(max(var, 0.0))))


def fitted_limits(sample: Sample, spec: FitSpec, variant=Variant.CONVENTIONAL):
    """Right and left outcome limits as (BoundaryEstimate, BoundaryEstimate)."""
    return _pair(sample, sample.y, spec, variant)


def exposure_required(exposure: Optional[ExposureLimits]) -> ExposureLimits:
    if exposure is None:
        raise ScenarioMismatch("exposure limits are required for this estimand")
    return exposure
