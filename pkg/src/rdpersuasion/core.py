"""Domain types, input validation and scenario classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    InsufficientSideData,
    InvalidValue,
    MixedTreatmentPresence,
    NonBinaryValue,
    ScenarioMismatch,
)


class DataScenario(str, enum.Enum):
    """What is observed: the (Y, D, W) triplet, (Y, W) plus known exposure
    limits, or (Y, W) alone."""

    FULL_TRIPLET = "full_triplet"
    AGGREGATE_WITH_EXPOSURE = "aggregate_with_exposure"
    OUTCOME_ONLY = "outcome_only"


class DesignKind(str, enum.Enum):
    SHARP = "sharp"
    FUZZY = "fuzzy"


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class Observation:
    y: int
    w: float
    d: Optional[int] = None
    cluster: Optional[str] = None


@dataclass(frozen=True)
class ExposureLimits:
    """Exposure rates just above (``e_plus``) and below (``e_minus``) the cutoff."""

    e_plus: float
    e_minus: float

    def __post_init__(self):
        for name in ("e_plus", "e_minus"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise InvalidValue(f"{name}={v} is not a probability")
        if not self.e_minus < self.e_plus:
            raise InvalidValue(
                f"exposure limits need e_minus < e_plus, got {self.e_minus} >= {self.e_plus}"
            )

    @property
    def jump(self) -> float:
        return self.e_plus - self.e_minus


def _readonly(a):
    if a is not None:
        a.setflags(write=False)
    return a


class Sample:
    """Validated, immutable collection of observations.

    Columns are stored as read-only numpy arrays; ``d`` and ``cluster`` are
    ``None`` when absent. Build instances with :func:`validate_sample` or
    :meth:`Sample.from_arrays`.
    """

    __slots__ = ("y", "w", "d", "cluster", "cutoff", "scenario")

    def __init__(self, y, w, d, cluster, cutoff, scenario):
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "w", _readonly(w))
        object.__setattr__(self, "d", _readonly(d))
        object.__setattr__(self, "cluster", _readonly(cluster))
        object.__setattr__(self, "cutoff", float(cutoff))
        object.__setattr__(self, "scenario", DataScenario(scenario))

    def __setattr__(self, name, value):
        raise AttributeError("Sample is immutable")

    @classmethod
    def from_arrays(
        cls,
        y,
        w,
        d=None,
        cluster=None,
        cutoff: float = 0.0,
        scenario: Optional[DataScenario] = None,
    ) -> "Sample":
        """Validate column arrays and build a sample.

        When ``scenario`` is omitted it is FullTriplet if ``d`` is given and
        OutcomeOnly otherwise.
        """
        y = np.asarray(y)
        w = np.asarray(w, dtype=float)
        if y.ndim != 1 or w.shape != y.shape:
            raise InvalidValue("y and w must be one-dimensional and of equal length")
        if len(y) == 0:
            raise InsufficientSideData("sample is empty")
        if not np.all(np.isfinite(w)):
            raise InvalidValue("running variable contains non-finite values")
        yb = _as_binary(y, "y")
        db = None
        if d is not None:
            d = np.asarray(d)
            if d.shape != y.shape:
                raise InvalidValue("d must have the same length as y")
            db = _as_binary(d, "d")
        if cluster is not None:
            cluster = np.asarray([str(c) for c in cluster], dtype=object)
            if cluster.shape != y.shape:
                raise InvalidValue("cluster must have the same length as y")
        if not math.isfinite(cutoff):
            raise InvalidValue("cutoff must be finite")
        if scenario is None:
            scenario = classify_scenario(db is not None, None)
        scenario = DataScenario(scenario)
        if scenario is DataScenario.FULL_TRIPLET and db is None:
            raise ScenarioMismatch("FullTriplet scenario requires the treatment column d")
        n_right = int(np.count_nonzero(w >= cutoff))
        n_left = len(w) - n_right
        if n_left < 2 or n_right < 2:
            raise InsufficientSideData(
                f"need at least 2 records per side of the cutoff, got left={n_left}, right={n_right}"
            )
        return cls(yb, w.copy(), db, cluster, cutoff, scenario)

    # -- views -------------------------------------------------------------
    def __len__(self):
        return len(self.y)

    @property
    def has_d(self) -> bool:
        return self.d is not None

    @property
    def right(self) -> np.ndarray:
        """Boolean mask of records on the right side (w >= cutoff)."""
        return self.w >= self.cutoff

    @property
    def records(self) -> list[Observation]:
        d = self.d if self.d is not None else [None] * len(self)
        cl = self.cluster if self.cluster is not None else [None] * len(self)
        return [
            Observation(int(yi), float(wi), None if di is None else int(di), ci)
            for yi, wi, di, ci in zip(self.y, self.w, d, cl)
        ]

    def with_scenario(self, scenario: DataScenario) -> "Sample":
        return Sample.from_arrays(self.y, self.w, self.d, self.cluster, self.cutoff, scenario)

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        if (self.cutoff, self.scenario) != (other.cutoff, other.scenario):
            return False
        for name in ("y", "w", "d", "cluster"):
            a, b = getattr(self, name), getattr(other, name)
            if (a is None) != (b is None):
                return False
            if a is not None and not np.array_equal(a, b):
                return False
        return True

    __hash__ = None

    def __repr__(self):
        n_right = int(np.count_nonzero(self.right))
        return (
            f"Sample(n={len(self)}, left={len(self) - n_right}, right={n_right}, "
            f"cutoff={self.cutoff}, scenario={self.scenario.value})"
        )


def _as_binary(a: np.ndarray, name: str) -> np.ndarray:
    bad = ~np.isin(a, (0, 1))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise NonBinaryValue(f"{name} must be 0 or 1; record {i} has {a[i]!r}")
    return a.astype(np.int8)


def validate_sample(
    records: Sequence[Observation],
    cutoff: float = 0.0,
    scenario: Optional[DataScenario] = None,
) -> Sample:
    """Check a list of observations and assemble a :class:`Sample`.

    Records with ``w == cutoff`` are placed on the right side.
    """
    if len(records) == 0:
        raise InsufficientSideData("no records")
    has_d = [r.d is not None for r in records]
    if any(has_d) and not all(has_d):
        raise MixedTreatmentPresence(
            f"treatment present in {sum(has_d)} of {len(records)} records"
        )
    has_cl = [r.cluster is not None for r in records]
    if any(has_cl) and not all(has_cl):
        raise InvalidValue("cluster labels must be present on all records or none")
    for i, r in enumerate(records):
        if r.y not in (0, 1):
            raise NonBinaryValue(f"y must be 0 or 1; record {i} has {r.y!r}")
        if r.d is not None and r.d not in (0, 1):
            raise NonBinaryValue(f"d must be 0 or 1; record {i} has {r.d!r}")
    y = np.array([r.y for r in records])
    w = np.array([r.w for r in records], dtype=float)
    d = np.array([r.d for r in records]) if all(has_d) else None
    cluster = [r.cluster for r in records] if all(has_cl) else None
    return Sample.from_arrays(y, w, d, cluster, cutoff, scenario)


def classify_scenario(sample_has_d: bool, exposure: Optional[ExposureLimits]) -> DataScenario:
    if sample_has_d:
        return DataScenario.FULL_TRIPLET
    if exposure is not None:
        return DataScenario.AGGREGATE_WITH_EXPOSURE
    return DataScenario.OUTCOME_ONLY
