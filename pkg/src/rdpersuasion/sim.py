"""Data-generating processes with known persuasion parameters.

Potential outcomes use nested thresholds on one uniform draw ``u``:
``Y(0) = 1{u <= q0(w)}`` and ``Y(1) = 1{u <= q0(w) + (1 - q0(w)) theta(w)}``,
so ``Y(1) >= Y(0)`` holds record by record. Fuzzy treatment is
``D = 1{v <= e(w)}`` with an independent uniform ``v``.

Randomness comes from numpy's PCG64 generator. A study seeded with ``s``
gives replication ``r`` the ``r``-th child of ``SeedSequence(s).spawn``,
so results do not depend on how replications are scheduled.

(Y(1), Y(0), V) is independent of W only when ``q0`` and ``theta`` are
constant; polynomial arms are fine for bias studies but the fuzzy
identification results assume the constant case.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P

from .core import DataScenario, DesignKind, ExposureLimits, Sample
from .errors import InvalidDgp, InvalidValue, PersuasionError
from .estimands import (
    theta_cl_star,
    theta_cl_star_star,
    theta_rd,
    theta_rd_local,
    theta_rd_upper_e,
    theta_rd_upper_from_joint,
    theta_rd_upper_full,
)
from .inference import (
    Estimand,
    Identification,
    Target,
    decision_flow,
    one_sided_lower_ci,
    stoye_ci,
    two_sided_ci,
)
from .locpoly import FitSpec, Variant

_CHECK_GRID = np.linspace(-1.0, 1.0, 2001)


def _coeffs(c) -> tuple:
    if np.isscalar(c):
        return (float(c),)
    return tuple(float(x) for x in c)


def _check_unit(coeffs, name, grid):
    vals = P.polyval(grid, coeffs)
    if np.any(vals < -1e-12) or np.any(vals > 1 + 1e-12):
        raise InvalidDgp(f"{name} leaves [0, 1] on its domain")


@dataclass(frozen=True)
class SharpDgp:
    """``q0`` and ``theta`` are ascending polynomial coefficients in w; W ~ U(-1, 1)."""

    q0: tuple = (0.4,)
    theta: tuple = (0.25,)

    def __post_init__(self):
        object.__setattr__(self, "q0", _coeffs(self.q0))
        object.__setattr__(self, "theta", _coeffs(self.theta))
        _check_unit(self.q0, "q0", _CHECK_GRID)
        _check_unit(self.theta, "theta", _CHECK_GRID)

    design = DesignKind.SHARP


@dataclass(frozen=True)
class FuzzyDgp:
    q0: tuple = (0.4,)
    theta: tuple = (0.25,)
    e_p: tuple = (0.9,)
    e_n: tuple = (0.3,)

    def __post_init__(self):
        for name in ("q0", "theta", "e_p", "e_n"):
            object.__setattr__(self, name, _coeffs(getattr(self, name)))
        _check_unit(self.q0, "q0", _CHECK_GRID)
        _check_unit(self.theta, "theta", _CHECK_GRID)
        _check_unit(self.e_p, "e_p", _CHECK_GRID[_CHECK_GRID >= 0])
        _check_unit(self.e_n, "e_n", _CHECK_GRID[_CHECK_GRID < 0])
        if not P.polyval(0.0, self.e_p) > P.polyval(0.0, self.e_n):
            raise InvalidDgp("exposure must jump up at the cutoff: e_p(0) > e_n(0)")

    design = DesignKind.FUZZY


Dgp = Union[SharpDgp, FuzzyDgp]


@dataclass(frozen=True)
class GroundTruth:
    theta_at_cutoff: float
    theta_compliers: float
    p_plus: float
    p_minus: float
    e_plus: float
    e_minus: float
    upper_bound_full: float
    lower_bound: float
    p11_plus: float
    p10_minus: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class SimDraw:
    """A generated sample with the latent quantities behind it."""

    sample: Sample
    y0: np.ndarray
    y1: np.ndarray
    mean_y: np.ndarray  # E[Y | W = w, D = d] at each record


def _draw(dgp: Dgp, n: int, rng: np.random.Generator) -> SimDraw:
    if n < 4:
        raise InvalidValue("n must be at least 4")
    w = rng.uniform(-1.0, 1.0, n)
    u = rng.uniform(0.0, 1.0, n)
    q0 = P.polyval(w, dgp.q0)
    q1 = q0 + (1.0 - q0) * P.polyval(w, dgp.theta)
    y0 = (u <= q0).astype(np.int8)
    y1 = (u <= q1).astype(np.int8)
    right = w >= 0.0
    if isinstance(dgp, FuzzyDgp):
        v = rng.uniform(0.0, 1.0, n)
        e = np.where(right, P.polyval(w, dgp.e_p), P.polyval(w, dgp.e_n))
        d = (v <= e).astype(np.int8)
    else:
        d = right.astype(np.int8)
    y = np.where(d == 1, y1, y0)
    mean_y = np.where(d == 1, q1, q0)
    sample = Sample.from_arrays(y, w, d, None, 0.0, DataScenario.FULL_TRIPLET)
    return SimDraw(sample, y0, y1, mean_y)


def draw(dgp: Dgp, n: int, seed) -> SimDraw:
    """Generate a sample together with both potential outcomes."""
    return _draw(dgp, n, np.random.default_rng(seed))


def gen_sharp(dgp: SharpDgp, n: int, seed) -> Sample:
    return draw(dgp, n, seed).sample


def gen_fuzzy(dgp: FuzzyDgp, n: int, seed) -> Sample:
    return draw(dgp, n, seed).sample


def true_params(dgp: Dgp) -> GroundTruth:
    """Population limits and persuasion parameters at w = 0."""
    q = float(P.polyval(0.0, dgp.q0))
    t = float(P.polyval(0.0, dgp.theta))
    if isinstance(dgp, FuzzyDgp):
        ep, em = float(P.polyval(0.0, dgp.e_p)), float(P.polyval(0.0, dgp.e_n))
    else:
        ep, em = 1.0, 0.0
    q1 = q + (1.0 - q) * t
    p_plus = ep * q1 + (1.0 - ep) * q
    p_minus = em * q1 + (1.0 - em) * q
    p11 = ep * q1
    p10 = (1.0 - em) * q
    return GroundTruth(
        theta_at_cutoff=t,
        theta_compliers=t,
        p_plus=p_plus,
        p_minus=p_minus,
        e_plus=ep,
        e_minus=em,
        upper_bound_full=theta_rd_upper_from_joint(p11, ep, p10, eps=0.0),
        lower_bound=theta_rd(p_plus, p_minus, eps=0.0),
        p11_plus=p11,
        p10_minus=p10,
    )


def population_value(estimand: Estimand, truth: GroundTruth) -> float:
    ex = ExposureLimits(truth.e_plus, truth.e_minus)
    return {
        Estimand.THETA_RD: truth.lower_bound,
        Estimand.THETA_RD_U: truth.upper_bound_full,
        Estimand.THETA_RD_U_E: theta_rd_upper_e(truth.p_plus, truth.p_minus, ex, eps=0.0),
        Estimand.THETA_CL_STAR: truth.theta_compliers,
        Estimand.THETA_CL_STAR_STAR: theta_cl_star_star(truth.p_plus, truth.p_minus, ex, eps=0.0),
    }[estimand]


# -- Monte Carlo study --------------------------------------------------------

@dataclass
class EstimandSummary:
    population: float
    mean: float
    bias: float
    rmse: float


@dataclass
class StudyReport:
    plan: dict
    target_value: float
    coverage: float
    interval_contains_target: float
    estimands: dict
    reps: int
    n: int
    seed: int
    failures: int
    truth: dict = field(default_factory=dict)

    def to_dict(self):
        d = dict(self.__dict__)
        d["estimands"] = {k: dict(v.__dict__) for k, v in self.estimands.items()}
        return d


def _one_rep(dgp, n, seed_seq, spec, variant, alpha, plan, noiseless, eps):
    sim = _draw(dgp, n, np.random.default_rng(seed_seq))
    s = sim.sample
    est = {}
    ident = plan.identification
    names = plan.estimand_set
    if Estimand.THETA_CL_STAR in names:
        est[Estimand.THETA_CL_STAR] = theta_cl_star(s, spec, variant, eps).point
    if Estimand.THETA_RD in names:
        outcome = sim.mean_y if noiseless else None
        est[Estimand.THETA_RD] = theta_rd_local(s, spec, variant, eps, outcome=outcome).point
    if Estimand.THETA_RD_U in names:
        est[Estimand.THETA_RD_U] = theta_rd_upper_full(s, spec, variant, eps).point
    if ident is Identification.POINT:
        pt = est[names[0]]
        ci = two_sided_ci(pt.theta, pt.se, alpha)
        plugin = (pt.theta, pt.theta)
    elif ident is Identification.LOWER_BOUND:
        pt = est[names[0]]
        ci = one_sided_lower_ci(pt.theta, pt.se, alpha)
        plugin = (pt.theta, 1.0)
    else:
        lo, hi = est[names[0]], est[names[1]]
        ci = stoye_ci(lo, hi, alpha)
        plugin = (lo.theta, hi.theta)
    return {k: v.theta for k, v in est.items()}, ci, plugin


def mc_study(dgp: Dgp, n: int, reps: int, spec: FitSpec, alpha: float = 0.05, seed: int = 0,
             mtr: bool = True, target: Target = Target.POPULATION,
             variant: Variant = Variant.CONVENTIONAL, noiseless: bool = False,
             eps: float = 0.01, workers: int = 1) -> StudyReport:
    """Repeat the decision-flow estimator on independently seeded samples.

    Coverage is the share of confidence intervals containing the target
    parameter (the population persuasion rate, or the local-complier rate).
    ``interval_contains_target`` is the same share for the plug-in estimate
    without sampling margins. With ``noiseless=True`` the sharp-design
    estimator is run on E[Y | W, D] instead of Y.
    """
    if reps < 50:
        raise InvalidValue(f"reps must be at least 50, got {reps}")
    scenario = DataScenario.FULL_TRIPLET
    plan = decision_flow(dgp.design, mtr, scenario, target)
    if plan.estimand_set[0] not in (Estimand.THETA_RD, Estimand.THETA_CL_STAR):
        raise InvalidValue("simulated samples observe D; exposure-only estimands are not studied")
    truth = true_params(dgp)
    target_value = (truth.theta_compliers if target is Target.LOCAL_COMPLIERS
                    else truth.theta_at_cutoff)
    children = np.random.SeedSequence(seed).spawn(reps)
    args = (spec, Variant(variant), alpha, plan, noiseless, eps)

    def run(ss):
        try:
            return _one_rep(dgp, n, ss, *args)
        except PersuasionError:
            return None

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, children))
    else:
        results = [run(ss) for ss in children]
    ok = [r for r in results if r is not None]
    if not ok:
        raise InvalidValue("every replication failed")
    covered = np.mean([ci.contains(target_value) for _, ci, _ in ok])
    in_plugin = np.mean([lo <= target_value <= hi for _, _, (lo, hi) in ok])
    summaries = {}
    for name in plan.estimand_set:
        vals = np.array([r[0][name] for r in ok])
        pop = population_value(name, truth)
        summaries[name.value] = EstimandSummary(
            population=pop,
            mean=float(vals.mean()),
            bias=float(vals.mean() - pop),
            rmse=float(math.sqrt(np.mean((vals - pop) ** 2))),
        )
    return StudyReport(
        plan=plan.to_dict(),
        target_value=target_value,
        coverage=float(covered),
        interval_contains_target=float(in_plugin),
        estimands=summaries,
        reps=reps,
        n=n,
        seed=int(seed),
        failures=reps - len(ok),
        truth=truth.to_dict(),
    )
