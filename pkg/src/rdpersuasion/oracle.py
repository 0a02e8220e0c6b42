"""Brute-force checks of the identification results.

Closed-form bounds are compared with ranges obtained by enumerating joint
distributions of potential outcomes on a grid. The enumerations only use the
defining constraints, never the closed forms they are checked against.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .errors import IncoherentInputs, Infeasible, InvalidValue, WeakDenominator
from .estimands import EPSILON_DEN, theta_rd_upper_e, theta_rd_upper_from_joint
from .core import ExposureLimits

EQ_TOL = 1e-9


@dataclass(frozen=True)
class PopulationLimits:
    p_plus: float
    p_minus: float
    e_plus: float
    e_minus: float

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not 0.0 <= v <= 1.0:
                raise InvalidValue(f"{f.name}={v} is not a probability")
        if not self.e_plus > self.e_minus:
            raise InvalidValue("need e_plus > e_minus")

    @property
    def exposure(self) -> ExposureLimits:
        return ExposureLimits(self.e_plus, self.e_minus)


@dataclass(frozen=True)
class JointProbTable:
    """Masses of the (Y(0), Y(1)) types (0,0)/(0,1)/(1,1) in three V-strata.

    Stratum 1 is ``V <= e-``, stratum 2 ``e- < V <= e+`` (local compliers),
    stratum 3 ``V > e+``. There is no (1, 0) cell: monotone response is
    built into the layout.
    """

    a1: float
    b1: float
    c1: float
    a2: float
    b2: float
    c2: float
    a3: float
    b3: float
    c3: float

    def __post_init__(self):
        cells = np.array(astuple(self))
        if np.any(cells < -EQ_TOL):
            raise InvalidValue("joint probabilities must be nonnegative")
        if abs(cells.sum() - 1.0) > 1e-12:
            raise InvalidValue(f"joint probabilities sum to {cells.sum()!r}, not 1")


def _constraint_residuals(a1, b1, c1, a2, b2, c2, a3, b3, c3, pop):
    return (
        a1 + b1 + c1 - pop.e_minus,
        a2 + b2 + c2 - (pop.e_plus - pop.e_minus),
        a1 + a2 + a3 + b3 - (1.0 - pop.p_plus),
        a1 + a2 + a3 + b2 + b3 - (1.0 - pop.p_minus),
    )


def joint_table_constraints(table: JointProbTable, pop: PopulationLimits) -> bool:
    """True iff the table reproduces the observable exposure and outcome limits."""
    res = _constraint_residuals(*astuple(table), pop)
    return all(abs(r) <= EQ_TOL for r in res)


# -- Fréchet-Hoeffding bounds without monotone response ----------------------

def frechet_theta_bounds(p1: float, p0: float) -> tuple[float, float]:
    """Sharp interval for Pr(Y(1)=1 | Y(0)=0) given only the two marginals."""
    if not 1.0 - p0 > 0.0:
        raise WeakDenominator("Pr(Y(0)=1) must be below 1")
    return max(0.0, (p1 - p0) / (1.0 - p0)), min(p1 / (1.0 - p0), 1.0)


def frechet_theta_bounds_bruteforce(p1: float, p0: float, grid_step: float = 1e-3):
    """Enumerate 2x2 joint tables with the given marginals and collect theta.

    Tables are indexed by the candidate theta value on a grid; each candidate
    fixes Pr(Y0=0, Y1=1), the rest of the table follows from the marginals,
    and the table is kept only if all four cells are nonnegative.
    """
    if not 0.0 < grid_step <= 0.01:
        raise InvalidValue("grid_step must lie in (0, 0.01]")
    if not 1.0 - p0 > 0.0:
        raise WeakDenominator("Pr(Y(0)=1) must be below 1")
    t = np.linspace(0.0, 1.0, int(round(1.0 / grid_step)) + 1)
    p01 = t * (1.0 - p0)
    p00 = (1.0 - p0) - p01
    p11 = p1 - p01
    p10 = p0 - p11
    ok = (p00 >= -EQ_TOL) & (p01 >= -EQ_TOL) & (p11 >= -EQ_TOL) & (p10 >= -EQ_TOL)
    if not np.any(ok):
        raise Infeasible(f"no joint table matches marginals p1={p1}, p0={p0}")
    theta = p01[ok] / (1.0 - p0)
    return float(theta.min()), float(theta.max())


# -- the a2 + b2 system for local compliers ----------------------------------

def check_feasible(pop: PopulationLimits):
    """Raise :class:`Infeasible` naming the violated condition."""
    jump = pop.p_plus - pop.p_minus
    if jump < -EQ_TOL:
        raise Infeasible(f"outcome limits decrease across the cutoff: p_plus={pop.p_plus} < p_minus={pop.p_minus}")
    if jump > pop.e_plus - pop.e_minus + EQ_TOL:
        raise Infeasible(
            f"outcome jump {jump:.6g} exceeds the exposure jump {pop.e_plus - pop.e_minus:.6g}"
        )
    if jump > 1.0 - pop.p_minus + EQ_TOL:
        raise Infeasible(f"outcome jump {jump:.6g} exceeds 1 - p_minus = {1.0 - pop.p_minus:.6g}")


def closed_form_a2b2(pop: PopulationLimits) -> tuple[float, float]:
    """Interval for Pr(Y(0)=0, local complier) when c3 is left unconstrained."""
    check_feasible(pop)
    return (pop.p_plus - pop.p_minus,
            min(pop.e_plus - pop.e_minus, 1.0 - pop.p_minus))


def complete_table_a2b2(pop: PopulationLimits) -> tuple[float, float]:
    """Interval for a2 + b2 over tables whose nine cells are all nonnegative.

    Compared with :func:`closed_form_a2b2`, the lower end also respects
    ``c3 >= 0``, i.e. Pr(Y(0)=1, complier) <= p_minus, which gives
    ``a2 + b2 >= e+ - e- - p-``.
    """
    check_feasible(pop)
    jump = pop.p_plus - pop.p_minus
    lo = max(jump, pop.e_plus - pop.e_minus - pop.p_minus)
    return lo, min(pop.e_plus - pop.e_minus, 1.0 - pop.p_minus)


_CELLS = ("a1", "b1", "c1", "a2", "b2", "c2", "a3", "b3", "c3")


def _solve_cells(pop, a2, a1, c1, b3, complete):
    """Cells determined by the free parameters, with an admissibility mask."""
    pp, pm, ep, em = pop.p_plus, pop.p_minus, pop.e_plus, pop.e_minus
    A2, A1, C1, B3 = (g.ravel() for g in np.meshgrid(a2, a1, c1, b3, indexing="ij"))
    B2 = np.full_like(A2, pp - pm)
    B1 = em - A1 - C1
    C2 = (ep - em) - A2 - B2
    A3 = (1.0 - pp) - A1 - A2 - B3
    C3 = 1.0 - (A1 + B1 + C1 + A2 + B2 + C2 + A3 + B3)
    cells = dict(a1=A1, b1=B1, c1=C1, a2=A2, b2=B2, c2=C2, a3=A3, b3=B3, c3=C3)
    checked = _CELLS if complete else _CELLS[:-1]
    ok = np.ones_like(A2, dtype=bool)
    for k in checked:
        ok &= cells[k] >= -EQ_TOL
    for r in _constraint_residuals(*(cells[k] for k in _CELLS), pop):
        ok &= np.abs(r) <= EQ_TOL
    return cells, ok


def _grid(hi, step):
    return np.linspace(0.0, hi, max(2, int(np.ceil(hi / step - 1e-9)) + 1))


def enumerate_tables(pop: PopulationLimits, grid_step: float = 1e-3, nuisance_points: int = 7,
                     complete: bool = False):
    """Grid over the free parameters (a2, a1, c1, b3) of the constraint system.

    The remaining cells are solved from the four equality constraints, with
    ``b2 = p+ - p-`` and ``c3`` as the residual mass. A grid point is kept
    when every determined cell is nonnegative. With ``complete=False`` the
    residual ``c3`` is left unchecked, matching the inequalities behind
    :func:`closed_form_a2b2`; with ``complete=True`` it must be nonnegative
    too, matching :func:`complete_table_a2b2`.

    Returns a dict of flat cell arrays for the admissible points.
    """
    check_feasible(pop)
    a2 = _grid(1.0, grid_step)
    a1 = np.linspace(0.0, pop.e_minus, nuisance_points)
    c1 = np.linspace(0.0, pop.e_minus, nuisance_points)
    b3 = np.linspace(0.0, 1.0 - pop.p_plus, nuisance_points)
    cells, ok = _solve_cells(pop, a2, a1, c1, b3, complete)
    return {k: v[ok] for k, v in cells.items()}


def attainable_range_a2b2(pop: PopulationLimits, grid_step: float = 1e-3,
                          complete: bool = False, nuisance_points: int = 7,
                          chunk: int = 64) -> tuple[float, float]:
    """Smallest and largest a2 + b2 over the enumerated admissible tables.

    With ``complete=True`` the constraint ``c3 >= 0`` ties a1 to a2, so a1
    is gridded at ``grid_step`` instead of ``nuisance_points`` values, and
    the a2 axis is scanned in chunks to bound memory.
    """
    check_feasible(pop)
    a2_all = _grid(1.0, grid_step)
    if complete:
        a1 = _grid(pop.e_minus, grid_step) if pop.e_minus > 0 else np.zeros(1)
    else:
        a1 = np.linspace(0.0, pop.e_minus, nuisance_points)
    c1 = np.linspace(0.0, pop.e_minus, nuisance_points)
    b3 = np.linspace(0.0, 1.0 - pop.p_plus, nuisance_points)
    lo, hi = np.inf, -np.inf
    for i in range(0, len(a2_all), chunk):
        cells, ok = _solve_cells(pop, a2_all[i:i + chunk], a1, c1, b3, complete)
        if ok.any():
            s = cells["a2"][ok] + cells["b2"][ok]
            lo, hi = min(lo, s.min()), max(hi, s.max())
    if lo > hi:
        raise Infeasible("no admissible joint table on the grid")
    return float(lo), float(hi)


# -- bounds on the potential-outcome marginals --------------------------------

@dataclass(frozen=True)
class JointLimits:
    """Observable boundary limits when (Y, D, W) is observed jointly."""

    p11_plus: float   # Pr(Y=1, D=1 | 0+)
    p10_minus: float  # Pr(Y=1, D=0 | 0-)
    p_plus: float     # Pr(Y=1 | 0+)
    p_minus: float    # Pr(Y=1 | 0-)


def marginal_bounds_full(joint: JointLimits, pop: PopulationLimits):
    """Sharp intervals for Pr(Y(1)=1 | W=0) and Pr(Y(0)=1 | W=0) from joint limits.

    Returns ``(y1_interval, y0_interval)``.
    """
    j = joint
    checks = [
        (j.p11_plus <= j.p_plus + EQ_TOL, "Pr(Y=1,D=1|0+) exceeds Pr(Y=1|0+)"),
        (j.p11_plus <= pop.e_plus + EQ_TOL, "Pr(Y=1,D=1|0+) exceeds e+"),
        (j.p_plus - j.p11_plus <= 1.0 - pop.e_plus + EQ_TOL, "Pr(Y=1,D=0|0+) exceeds 1 - e+"),
        (j.p10_minus <= j.p_minus + EQ_TOL, "Pr(Y=1,D=0|0-) exceeds Pr(Y=1|0-)"),
        (j.p10_minus <= 1.0 - pop.e_minus + EQ_TOL, "Pr(Y=1,D=0|0-) exceeds 1 - e-"),
        (j.p_minus - j.p10_minus <= pop.e_minus + EQ_TOL, "Pr(Y=1,D=1|0-) exceeds e-"),
        (min(j.p11_plus, j.p10_minus) >= 0.0, "negative joint probability"),
        (abs(j.p_plus - pop.p_plus) <= EQ_TOL and abs(j.p_minus - pop.p_minus) <= EQ_TOL,
         "outcome limits disagree with the population limits"),
    ]
    for ok, msg in checks:
        if not ok:
            raise IncoherentInputs(msg)
    y1 = (j.p_plus, j.p11_plus + 1.0 - pop.e_plus)
    y0 = (j.p10_minus, j.p_minus)
    return y1, y0


def marginal_bounds_exposure(pop: PopulationLimits):
    """Sharp marginal intervals when only (Y, W) and the exposure limits are known."""
    y1 = (pop.p_plus, min(1.0, pop.p_plus + 1.0 - pop.e_plus))
    y0 = (max(0.0, pop.p_minus - pop.e_minus), pop.p_minus)
    return y1, y0


def upper_from_marginal_bounds(y1, y0) -> float:
    """Largest (a - b) / (1 - b) with a in ``y1`` and b in ``y0``."""
    a, b = y1[1], y0[0]
    return (a - b) / (1.0 - b)


def crosscheck_upper_bounds(joint: JointLimits, pop: PopulationLimits, eps: float = EPSILON_DEN):
    """Pairs (from marginal bounds, closed form) for both observability cases."""
    y1, y0 = marginal_bounds_full(joint, pop)
    full = (upper_from_marginal_bounds(y1, y0),
            theta_rd_upper_from_joint(joint.p11_plus, pop.e_plus, joint.p10_minus, eps))
    y1e, y0e = marginal_bounds_exposure(pop)
    eco = (upper_from_marginal_bounds(y1e, y0e),
           theta_rd_upper_e(pop.p_plus, pop.p_minus, pop.exposure, eps))
    return full, eco
