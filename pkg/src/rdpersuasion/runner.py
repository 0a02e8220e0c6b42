"""End-to-end analyses behind the CLI commands, and their reports."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import estimands as est
from .core import DataScenario, DesignKind, ExposureLimits, Sample, classify_scenario
from .errors import ConfigError
from .inference import (
    AnalysisPlan,
    CIKind,
    ConfidenceInterval,
    Estimand,
    Identification,
    Target,
    decision_flow,
    one_sided_lower_ci,
    stoye_ci,
    two_sided_ci,
)
from .locpoly import FitSpec, KernelKind, Variant, VarianceKind, rot_bandwidth
from .oracle import (
    PopulationLimits,
    attainable_range_a2b2,
    closed_form_a2b2,
    complete_table_a2b2,
)
from .sim import FuzzyDgp, SharpDgp, mc_study

DK_LABEL = "not a valid persuasion rate for any meaningful subpopulation"
LOW_N_EFF = 20
NEAR_EPS_FACTOR = 5.0


@dataclass
class RunConfig:
    cutoff: float = 0.0
    bandwidth: Optional[float] = None
    kernel: KernelKind = KernelKind.TRIANGULAR
    order: int = 1
    alpha: float = 0.05
    mtr: bool = True
    design: DesignKind = DesignKind.FUZZY
    target: Target = Target.POPULATION
    exposure: Optional[ExposureLimits] = None
    variant: Variant = Variant.CONVENTIONAL
    cluster_column: Optional[str] = None
    epsilon_den: float = 0.01
    seed: Optional[int] = None

    def __post_init__(self):
        self.kernel = KernelKind(self.kernel)
        self.design = DesignKind(self.design)
        self.target = Target(self.target)
        self.variant = Variant(self.variant)
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ConfigError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.epsilon_den > 0:
            raise ConfigError("epsilon_den must be positive")


@dataclass
class EstimateOut:
    name: str
    value: float
    se: float
    label: Optional[str] = None


@dataclass
class IntervalOut:
    lower: float
    upper: float
    crossed_flag: bool


@dataclass
class WarningOut:
    code: str
    message: str


@dataclass
class Diagnostics:
    n_eff_left: int
    n_eff_right: int
    bandwidth_used: float
    warnings: list = field(default_factory=list)


@dataclass
class Report:
    plan: AnalysisPlan
    estimates: list
    ci: ConfidenceInterval
    diagnostics: Diagnostics
    interval: Optional[IntervalOut] = None

    def to_dict(self):
        return {
            "plan": self.plan.to_dict(),
            "estimates": [asdict(e) for e in self.estimates],
            "interval": None if self.interval is None else asdict(self.interval),
            "ci": {"lo": self.ci.lo, "hi": self.ci.hi, "level": self.ci.level,
                   "kind": self.ci.kind.value},
            "diagnostics": asdict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, d):
        diag = dict(d["diagnostics"])
        diag["warnings"] = [WarningOut(**w) for w in diag["warnings"]]
        ci = d["ci"]
        return cls(
            plan=AnalysisPlan.from_dict(d["plan"]),
            estimates=[EstimateOut(**e) for e in d["estimates"]],
            ci=ConfidenceInterval(ci["lo"], ci["hi"], ci["level"], CIKind(ci["kind"])),
            diagnostics=Diagnostics(**diag),
            interval=None if d["interval"] is None else IntervalOut(**d["interval"]),
        )

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def table(self) -> str:
        p = self.plan
        lines = [
            f"design={p.design.value} mtr={p.mtr} scenario={p.scenario.value} "
            f"target={p.target.value} -> {p.identification.value}",
            f"{'estimand':<22}{'value':>12}{'se':>12}",
        ]
        for e in self.estimates:
            note = f"  ({e.label})" if e.label else ""
            lines.append(f"{e.name:<22}{e.value:>12.4f}{e.se:>12.4f}{note}")
        if self.interval is not None:
            flag = "  CROSSED" if self.interval.crossed_flag else ""
            lines.append(f"identified set: [{self.interval.lower:.4f}, {self.interval.upper:.4f}]{flag}")
        lines.append(f"{self.ci.level:.0%} {self.ci.kind.value} CI: [{self.ci.lo:.4f}, {self.ci.hi:.4f}]")
        dg = self.diagnostics
        lines.append(f"bandwidth={dg.bandwidth_used:.6g} n_eff left={dg.n_eff_left} right={dg.n_eff_right}")
        for w in dg.warnings:
            lines.append(f"warning[{w.code}]: {w.message}")
        return "\n".join(lines)


def dumps(obj) -> str:
    # json emits floats with repr, the shortest string that round-trips exactly.
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def _prepare(config: RunConfig, data: Sample, warnings: list) -> Sample:
    if config.design is DesignKind.SHARP:
        derived = (data.w >= data.cutoff).astype(np.int8)
        if data.d is None:
            warnings.append(WarningOut("d_derived_from_running",
                                       "sharp design: treatment set to 1(w >= cutoff)"))
            return Sample.from_arrays(data.y, data.w, derived, data.cluster, data.cutoff,
                                      DataScenario.FULL_TRIPLET)
        if not np.array_equal(data.d, derived):
            n_bad = int(np.count_nonzero(data.d != derived))
            warnings.append(WarningOut("sharp_design_violated",
                                       f"{n_bad} records have d != 1(w >= cutoff)"))
        return data
    scenario = classify_scenario(data.d is not None, config.exposure)
    if scenario is not data.scenario:
        return data.with_scenario(scenario)
    return data


def run_estimate(config: RunConfig, data: Sample, force_interval: bool = False) -> Report:
    """Plan the analysis from the design flags and data, then estimate it.

    With ``force_interval`` the population target is used and the report
    always carries an identified set (degenerate for point-identified plans).
    """
    warnings: list = []
    eps = config.epsilon_den
    if data.cutoff != config.cutoff:
        data = Sample.from_arrays(data.y, data.w, data.d, data.cluster, config.cutoff, data.scenario)
    data = _prepare(config, data, warnings)
    target = Target.POPULATION if force_interval else config.target
    plan = decision_flow(config.design, config.mtr, data.scenario, target)

    h = config.bandwidth if config.bandwidth is not None else rot_bandwidth(data)
    variance = (VarianceKind.CLUSTER_ROBUST if config.cluster_column
                else VarianceKind.HETEROSKEDASTICITY_ROBUST)
    if variance is VarianceKind.CLUSTER_ROBUST and data.cluster is None:
        raise ConfigError(f"cluster column {config.cluster_column!r} was not loaded")
    spec = FitSpec(bandwidth=h, order=config.order, kernel=config.kernel, variance=variance)
    variant = config.variant

    plus, minus = est.fitted_limits(data, spec, variant)
    if 1.0 - minus.mu_hat <= NEAR_EPS_FACTOR * eps:
        warnings.append(WarningOut("weak_denominator",
                                   f"1 - mu_minus = {1.0 - minus.mu_hat:.4g} is close to epsilon_den"))
    for side, fit_ in (("left", minus), ("right", plus)):
        if fit_.n_eff < LOW_N_EFF:
            warnings.append(WarningOut("low_n_eff", f"{side} side uses only {fit_.n_eff} records"))

    points = {}
    for name in plan.estimand_set:
        points[name] = _estimate(name, data, spec, variant, eps, plus, minus, config.exposure)

    estimates = [EstimateOut(n.value, p.theta, p.se) for n, p in points.items()]
    ident = plan.identification
    interval = None
    first = points[plan.estimand_set[0]]
    if ident is Identification.POINT:
        ci = two_sided_ci(first.theta, first.se, config.alpha)
        if force_interval:
            interval = IntervalOut(first.theta, first.theta, False)
    elif ident is Identification.LOWER_BOUND:
        ci = one_sided_lower_ci(first.theta, first.se, config.alpha)
        interval = IntervalOut(first.theta, 1.0, first.theta > 1.0)
    else:
        upper = points[plan.estimand_set[1]]
        ci = stoye_ci(first, upper, config.alpha)
        interval = IntervalOut(first.theta, upper.theta, first.theta > upper.theta)
    if interval is not None and interval.crossed_flag:
        warnings.append(WarningOut("bounds_crossed",
                                   f"estimated lower bound {interval.lower:.4f} exceeds upper bound {interval.upper:.4f}"))

    if config.exposure is not None:
        ex = config.exposure
        estimates.append(EstimateOut(
            "dk_rate",
            est.dk_rate(plus.mu_hat, minus.mu_hat, ex, eps),
            est.dk_rate_se(plus.mu_hat, minus.mu_hat, plus.se, minus.se, ex, eps),
            DK_LABEL,
        ))
    diag = Diagnostics(minus.n_eff, plus.n_eff, h, warnings)
    return Report(plan, estimates, ci, diag, interval)


def _estimate(name, data, spec, variant, eps, plus, minus, exposure):
    if name is Estimand.THETA_RD:
        return est.PersuasionPoint(
            est.theta_rd(plus.mu_hat, minus.mu_hat, eps),
            est.theta_rd_se(plus.mu_hat, minus.mu_hat, plus.se, minus.se, eps),
        )
    if name is Estimand.THETA_RD_U:
        return est.theta_rd_upper_full(data, spec, variant, eps).point
    if name is Estimand.THETA_CL_STAR:
        return est.theta_cl_star(data, spec, variant, eps).point
    ex = est.exposure_required(exposure)
    args = (plus.mu_hat, minus.mu_hat)
    ses = (plus.se, minus.se)
    if name is Estimand.THETA_RD_U_E:
        return est.PersuasionPoint(est.theta_rd_upper_e(*args, ex, eps),
                                   est.theta_rd_upper_e_se(*args, *ses, ex, eps))
    return est.PersuasionPoint(est.theta_cl_star_star(*args, ex, eps),
                               est.theta_cl_star_star_se(*args, *ses, ex, eps))


def run_oracle(pop: PopulationLimits, grid_step: float = 1e-3) -> dict:
    """Closed-form vs enumerated range of Pr(Y(0)=0, local complier)."""
    closed = closed_form_a2b2(pop)
    enum_ = attainable_range_a2b2(pop, grid_step)
    ok = all(abs(a - b) <= grid_step for a, b in zip(closed, enum_))
    complete_closed = complete_table_a2b2(pop)
    complete_enum = attainable_range_a2b2(pop, grid_step, complete=True, nuisance_points=3)
    return {
        "population": asdict(pop),
        "grid_step": grid_step,
        "closed_form": list(closed),
        "enumerated": list(enum_),
        "verdict": "PASS" if ok else "FAIL",
        "complete_tables": {
            "closed_form": list(complete_closed),
            "enumerated": list(complete_enum),
            "agrees_with_closed_form": all(abs(a - b) <= grid_step
                                           for a, b in zip(closed, complete_enum)),
        },
    }


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def dgp_from_config(cfg: dict):
    kind = cfg.get("design", "sharp").lower()
    q0 = _floats(cfg.get("q0", "0.4"))
    theta = _floats(cfg.get("theta", "0.25"))
    if kind == "sharp":
        return SharpDgp(q0, theta)
    if kind == "fuzzy":
        return FuzzyDgp(q0, theta, _floats(cfg.get("e_p", "0.9")), _floats(cfg.get("e_n", "0.3")))
    raise ConfigError(f"unknown dgp design {kind!r}")


def run_simulate(cfg: dict, n: int, reps: int, seed: int) -> dict:
    """Monte Carlo study for a DGP described by config keys.

    Recognised keys: design, q0, theta, e_p, e_n (comma-separated ascending
    polynomial coefficients), bandwidth, order, kernel, alpha, mtr, target,
    variant, epsilon_den, workers.
    """
    dgp = dgp_from_config(cfg)
    spec = FitSpec(
        bandwidth=float(cfg.get("bandwidth", 0.2)),
        order=int(cfg.get("order", 1)),
        kernel=KernelKind(cfg.get("kernel", "triangular")),
    )
    report = mc_study(
        dgp, n, reps, spec,
        alpha=float(cfg.get("alpha", 0.05)),
        seed=seed,
        mtr=parse_bool(cfg.get("mtr", "true")),
        target=Target(cfg.get("target", "population")),
        variant=Variant(cfg.get("variant", "conventional")),
        eps=float(cfg.get("epsilon_den", 0.01)),
        workers=int(cfg.get("workers", 1)),
    )
    out = report.to_dict()
    out["dgp"] = {k: list(v) for k, v in dgp.__dict__.items()}
    out["fit"] = {"bandwidth": spec.bandwidth, "order": spec.order, "kernel": spec.kernel.value}
    return out


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot read {text!r} as a boolean")
