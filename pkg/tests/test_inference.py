import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdpersuasion.core import DataScenario, DesignKind
from rdpersuasion.errors import DomainError, IncoherentPlan, InvalidValue, NoVariance
from rdpersuasion.estimands import PersuasionInterval, PersuasionPoint
from rdpersuasion.inference import (
    AnalysisPlan,
    CIKind,
    ConfidenceInterval,
    Target,
    decision_flow,
    interval_ci,
    norm_cdf,
    norm_quantile,
    one_sided_lower_ci,
    stoye_ci,
    stoye_critical_value,
    two_sided_ci,
)

from .flow_table import EXPECTED

mpmath.mp.dps = 40

# Frozen from mpmath.findroot on the defining equation at 40 digits.
Z_975 = 1.959963984540054
Z_95 = 1.644853626951472
STOYE_1_1_1 = 1.681477442328154


def _mp_cdf(x):
    return float(mpmath.ncdf(x))


@pytest.mark.parametrize("x", [-8.0, -3.2, -1.0, -1e-3, 0.0, 0.5, 1.959964, 2.5, 6.0])
def test_norm_cdf_against_mpmath(x):
    assert norm_cdf(x) == pytest.approx(_mp_cdf(x), abs=1e-12)


def test_norm_cdf_examples():
    assert norm_cdf(0.0) == 0.5
    assert norm_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)


@given(st.floats(-30, 30))
def test_norm_cdf_symmetry(x):
    assert norm_cdf(-x) == pytest.approx(1.0 - norm_cdf(x), abs=1e-12)


@pytest.mark.parametrize("p, expected", [(0.5, 0.0), (0.975, Z_975), (0.95, Z_95)])
def test_norm_quantile_examples(p, expected):
    assert norm_quantile(p) == pytest.approx(expected, abs=1e-9)


def test_quantile_oracle_frozen():
    assert float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf("0.975") - 1)) == pytest.approx(
        Z_975, abs=1e-14)


def test_round_trip_grid():
    for p in np.concatenate([np.geomspace(1e-6, 0.5, 200), 1 - np.geomspace(1e-6, 0.5, 200)]):
        assert norm_cdf(norm_quantile(p)) == pytest.approx(p, abs=1e-9)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_norm_quantile_domain(p):
    with pytest.raises(DomainError):
        norm_quantile(p)


def test_two_sided_ci():
    ci = two_sided_ci(0.1432, 0.0684, 0.05)
    assert ci.lo == pytest.approx(0.0091, abs=1e-4)
    assert ci.hi == pytest.approx(0.2773, abs=1e-4)
    assert ci.kind is CIKind.TWO_SIDED and ci.level == pytest.approx(0.95)
    z = two_sided_ci(0.3, 0.0)
    assert z.lo == z.hi == 0.3
    w1, w2 = two_sided_ci(0, 0.1), two_sided_ci(0, 0.3)
    assert w2.hi - w2.lo == pytest.approx(3 * (w1.hi - w1.lo))


def test_one_sided_ci():
    ci = one_sided_lower_ci(0.1037, 0.02, 0.05)
    assert ci.lo == pytest.approx(0.0708, abs=1e-4)
    assert ci.hi == 1.0
    assert one_sided_lower_ci(0.4, 0.0).lo == 0.4


def test_ci_invariants():
    with pytest.raises(InvalidValue):
        ConfidenceInterval(0.5, 0.4, 0.95, CIKind.TWO_SIDED)
    with pytest.raises(InvalidValue):
        ConfidenceInterval(0.1, 0.4, 1.0, CIKind.TWO_SIDED)


def _mp_stoye(s_lo, s_hi, delta, alpha):
    shift = max(0.0, delta) / max(s_lo, s_hi)
    f = lambda c: mpmath.ncdf(c + shift) - mpmath.ncdf(-c) - (1 - alpha)  # noqa: E731
    return float(mpmath.findroot(f, 1.8))


def test_stoye_frozen_value():
    assert _mp_stoye(1, 1, 1, 0.05) == pytest.approx(STOYE_1_1_1, abs=1e-12)
    assert stoye_critical_value(1, 1, 1, 0.05) == pytest.approx(STOYE_1_1_1, abs=1e-8)


@pytest.mark.parametrize("s", [1e-3, 0.05, 1.0, 40.0])
def test_stoye_limits(s):
    assert stoye_critical_value(s, s, 0.0, 0.05) == pytest.approx(Z_975, abs=1e-5)
    assert stoye_critical_value(s, s, 1e6 * s, 0.05) == pytest.approx(Z_95, abs=1e-4)


@pytest.mark.parametrize("case", [(0.03, 0.05, 0.39, 0.05), (0.2, 0.1, 0.05, 0.1), (1, 2, 3, 0.01)])
def test_stoye_matches_mpmath(case):
    assert stoye_critical_value(*case) == pytest.approx(_mp_stoye(*case), abs=1e-8)


def test_stoye_negative_delta_truncated():
    assert stoye_critical_value(1, 1, -0.4) == stoye_critical_value(1, 1, 0.0)


def test_stoye_errors():
    with pytest.raises(NoVariance):
        stoye_critical_value(0.0, 0.0, 0.1)
    with pytest.raises(DomainError):
        stoye_critical_value(1, 1, 0.1, alpha=0.6)


@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1, 0.3])
def test_stoye_monotone_and_bounded(alpha):
    grid = np.linspace(0.0, 10.0, 100)
    cs = [stoye_critical_value(0.7, 1.0, d, alpha) for d in grid]
    assert all(b <= a + 1e-8 for a, b in zip(cs, cs[1:]))
    lo, hi = norm_quantile(1 - alpha), norm_quantile(1 - alpha / 2)
    assert all(lo - 1e-6 <= c <= hi + 1e-6 for c in cs)


@settings(max_examples=100)
@given(lo=st.floats(-1, 1), width=st.floats(-0.2, 1), s1=st.floats(1e-4, 1), s2=st.floats(1e-4, 1))
def test_stoye_ci_contains_plugin(lo, width, s1, s2):
    ci = stoye_ci(PersuasionPoint(lo, s1), PersuasionPoint(lo + width, s2))
    if width >= 0:
        assert ci.lo <= lo and ci.hi >= lo + width
    assert ci.kind is CIKind.STOYE


def test_stoye_ci_collapses_to_two_sided():
    pt = PersuasionPoint(0.2, 0.04)
    a, b = stoye_ci(pt, pt), two_sided_ci(0.2, 0.04)
    assert a.lo == pytest.approx(b.lo, abs=1e-8) and a.hi == pytest.approx(b.hi, abs=1e-8)


def test_stoye_ci_logical_one():
    lower = PersuasionPoint(0.1037, 0.02)
    ci = interval_ci(PersuasionInterval.up_to_one(lower))
    assert ci == one_sided_lower_ci(0.1037, 0.02)


def test_stoye_ci_example_and_coverage():
    lower, upper = PersuasionPoint(0.10, 0.03), PersuasionPoint(0.49, 0.05)
    ci = stoye_ci(lower, upper, 0.05)
    c = (0.10 - ci.lo) / 0.03
    assert Z_95 < c < Z_975
    assert ci.hi == pytest.approx(0.49 + c * 0.05)
    # Coverage of any point in the identified set, bounds estimated with normal noise.
    rng = np.random.default_rng(2024)
    reps = 100_000
    lo_hat = 0.10 + 0.03 * rng.standard_normal(reps)
    hi_hat = 0.49 + 0.05 * rng.standard_normal(reps)
    c_hat = np.array([stoye_critical_value(0.03, 0.05, d) for d in hi_hat - lo_hat])
    for theta in (0.10, 0.3, 0.49):
        cover = np.mean((lo_hat - c_hat * 0.03 <= theta) & (theta <= hi_hat + c_hat * 0.05))
        assert cover >= 0.945


# -- decision flow ---------------------------------------------------------------

COMBOS = list(itertools.product(DesignKind, [True, False], DataScenario, Target))


def test_lattice_size():
    assert len(COMBOS) == 24 == len(EXPECTED)


@pytest.mark.parametrize("design, mtr, scenario, target", COMBOS)
def test_decision_flow_truth_table(design, mtr, scenario, target):
    expected = EXPECTED[(design.value, mtr, scenario.value, target.value)]
    if expected is None:
        with pytest.raises(IncoherentPlan):
            decision_flow(design, mtr, scenario, target)
        return
    plan = decision_flow(design, mtr, scenario, target)
    ident, estimands, kind = expected
    assert plan.identification.value == ident
    assert tuple(e.value for e in plan.estimand_set) == estimands
    assert plan.ci_kind.value == kind
    assert AnalysisPlan.from_dict(plan.to_dict()) == plan


def test_plan_consistency_checked():
    plan = decision_flow(DesignKind.SHARP, True, DataScenario.FULL_TRIPLET, Target.POPULATION)
    d = plan.to_dict()
    d["ci_kind"] = "stoye"
    with pytest.raises(InvalidValue):
        AnalysisPlan.from_dict(d)
