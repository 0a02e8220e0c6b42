"""Confidence intervals and the estimation decision flow."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from statistics import NormalDist

from .core import DataScenario, DesignKind
from .errors import DomainError, IncoherentPlan, InvalidValue, NoVariance
from .estimands import PersuasionInterval, PersuasionPoint

_STD_NORMAL = NormalDist()


def norm_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def norm_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {p}")
    return _STD_NORMAL.inv_cdf(p)


class CIKind(str, enum.Enum):
    TWO_SIDED = "two_sided"
    ONE_SIDED_LOWER = "one_sided_lower"
    STOYE = "stoye"


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float
    kind: CIKind

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InvalidValue(f"interval endpoints out of order: {self.lo} > {self.hi}")
        if not 0.0 < self.level < 1.0:
            raise InvalidValue(f"confidence level must be in (0, 1), got {self.level}")
        object.__setattr__(self, "kind", CIKind(self.kind))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def two_sided_ci(theta: float, se: float, alpha: float = 0.05) -> ConfidenceInterval:
    _check_alpha(alpha)
    half = norm_quantile(1.0 - alpha / 2.0) * se
    return ConfidenceInterval(theta - half, theta + half, 1.0 - alpha, CIKind.TWO_SIDED)


def one_sided_lower_ci(theta: float, se: float, alpha: float = 0.05) -> ConfidenceInterval:
    """``[theta - z_{1-alpha} se, 1]``; the upper end is the logical maximum."""
    _check_alpha(alpha)
    lo = theta - norm_quantile(1.0 - alpha) * se
    return ConfidenceInterval(min(lo, 1.0), 1.0, 1.0 - alpha, CIKind.ONE_SIDED_LOWER)


def stoye_critical_value(se_lower: float, se_upper: float, delta_hat: float,
                         alpha: float = 0.05, tol: float = 1e-10) -> float:
    """Critical value for an interval-identified parameter.

    Solves ``Phi(c + Delta / max(se_lower, se_upper)) - Phi(-c) = 1 - alpha``
    by bisection on ``[0, z_{1-alpha/2} + 1]``. A negative ``delta_hat``
    (crossed bounds) is treated as zero.
    """
    if se_lower < 0 or se_upper < 0:
        raise InvalidValue("standard errors must be nonnegative")
    if not 0.0 < alpha < 0.5:
        raise DomainError(f"alpha must lie in (0, 0.5), got {alpha}")
    s = max(se_lower, se_upper)
    if s == 0.0:
        raise NoVariance("both bound standard errors are zero")
    shift = max(0.0, delta_hat) / s
    target = 1.0 - alpha

    def excess(c):
        return norm_cdf(c + shift) - norm_cdf(-c) - target

    lo, hi = 0.0, norm_quantile(1.0 - alpha / 2.0) + 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def stoye_ci(lower: PersuasionPoint, upper: PersuasionPoint, alpha: float = 0.05,
             upper_is_logical_one: bool = False) -> ConfidenceInterval:
    if upper_is_logical_one:
        return one_sided_lower_ci(lower.theta, lower.se, alpha)
    c = stoye_critical_value(lower.se, upper.se, upper.theta - lower.theta, alpha)
    lo = lower.theta - c * lower.se
    hi = upper.theta + c * upper.se
    if lo > hi:
        # Bounds crossed by more than the margins; collapse to the midpoint.
        lo = hi = 0.5 * (lo + hi)
    return ConfidenceInterval(lo, hi, 1.0 - alpha, CIKind.STOYE)


def interval_ci(interval: PersuasionInterval, alpha: float = 0.05) -> ConfidenceInterval:
    return stoye_ci(interval.lower, interval.upper, alpha, interval.upper_is_logical_one)


# -- decision flow ----------------------------------------------------------

class Target(str, enum.Enum):
    POPULATION = "population"
    LOCAL_COMPLIERS = "local_compliers"


class Estimand(str, enum.Enum):
    THETA_RD = "theta_rd"
    THETA_RD_U = "theta_rd_u"
    THETA_RD_U_E = "theta_rd_u_e"
    THETA_CL_STAR = "theta_cl_star"
    THETA_CL_STAR_STAR = "theta_cl_star_star"


class Identification(str, enum.Enum):
    POINT = "point"
    LOWER_BOUND = "lower_bound"
    INTERVAL = "interval"


_CI_FOR = {
    Identification.POINT: CIKind.TWO_SIDED,
    Identification.LOWER_BOUND: CIKind.ONE_SIDED_LOWER,
    Identification.INTERVAL: CIKind.STOYE,
}


@dataclass(frozen=True)
class AnalysisPlan:
    """Which estimands to compute and which interval to report.

    ``estimand_set`` lists the point estimand, the lower bound (whose upper
    end is the logical 1), or the (lower, upper) bound pair.
    """

    design: DesignKind
    mtr: bool
    scenario: DataScenario
    target: Target
    identification: Identification
    estimand_set: tuple
    ci_kind: CIKind

    def __post_init__(self):
        if not self.estimand_set:
            raise InvalidValue("a plan needs at least one estimand")
        if _CI_FOR[self.identification] is not self.ci_kind:
            raise InvalidValue(f"{self.ci_kind.value} does not match {self.identification.value}")
        n = 2 if self.identification is Identification.INTERVAL else 1
        if len(self.estimand_set) != n:
            raise InvalidValue("estimand_set size does not match the identification type")

    def to_dict(self):
        return {
            "design": self.design.value,
            "mtr": self.mtr,
            "scenario": self.scenario.value,
            "target": self.target.value,
            "identification": self.identification.value,
            "estimand_set": [e.value for e in self.estimand_set],
            "ci_kind": self.ci_kind.value,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            DesignKind(d["design"]), bool(d["mtr"]), DataScenario(d["scenario"]),
            Target(d["target"]), Identification(d["identification"]),
            tuple(Estimand(e) for e in d["estimand_set"]), CIKind(d["ci_kind"]),
        )


def _plan(design, mtr, scenario, target, ident, *estimands):
    return AnalysisPlan(design, mtr, scenario, target, ident, tuple(estimands), _CI_FOR[ident])


def decision_flow(design: DesignKind, mtr: bool, scenario: DataScenario,
                  target: Target) -> AnalysisPlan:
    design, scenario, target = DesignKind(design), DataScenario(scenario), Target(target)
    if design is DesignKind.SHARP:
        if target is Target.LOCAL_COMPLIERS:
            raise IncoherentPlan(
                "in a sharp design every unit at the cutoff is a complier; target the population"
            )
        if scenario is not DataScenario.FULL_TRIPLET:
            raise IncoherentPlan("a sharp design determines D from W; use the full-triplet scenario")
    args = (design, mtr, scenario, target)
    if not mtr:
        return _plan(*args, Identification.LOWER_BOUND, Estimand.THETA_RD)
    if design is DesignKind.SHARP:
        return _plan(*args, Identification.POINT, Estimand.THETA_RD)
    if target is Target.POPULATION:
        if scenario is DataScenario.FULL_TRIPLET:
            return _plan(*args, Identification.INTERVAL, Estimand.THETA_RD, Estimand.THETA_RD_U)
        if scenario is DataScenario.AGGREGATE_WITH_EXPOSURE:
            return _plan(*args, Identification.INTERVAL, Estimand.THETA_RD, Estimand.THETA_RD_U_E)
        return _plan(*args, Identification.LOWER_BOUND, Estimand.THETA_RD)
    if scenario is DataScenario.FULL_TRIPLET:
        return _plan(*args, Identification.POINT, Estimand.THETA_CL_STAR)
    if scenario is DataScenario.AGGREGATE_WITH_EXPOSURE:
        return _plan(*args, Identification.LOWER_BOUND, Estimand.THETA_CL_STAR_STAR)
    return _plan(*args, Identification.LOWER_BOUND, Estimand.THETA_RD)
