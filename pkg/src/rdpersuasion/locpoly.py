"""One-sided local polynomial regression at the cutoff.

Boundary values are the intercepts of kernel-weighted least-squares fits on
either side of the cutoff, with heteroskedasticity-robust or cluster-robust
sandwich variances.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import Sample, Side
from .errors import DegenerateRunning, InsufficientSideData, InvalidValue, SingularDesign

MAX_ORDER = 4


class KernelKind(str, enum.Enum):
    TRIANGULAR = "triangular"
    UNIFORM = "uniform"
    EPANECHNIKOV = "epanechnikov"


class VarianceKind(str, enum.Enum):
    HETEROSKEDASTICITY_ROBUST = "hc"
    CLUSTER_ROBUST = "cluster"


class Variant(str, enum.Enum):
    CONVENTIONAL = "conventional"
    BIAS_CORRECTED = "bias_corrected"


@dataclass(frozen=True)
class FitSpec:
    bandwidth: float
    order: int = 1
    kernel: KernelKind = KernelKind.TRIANGULAR
    variance: VarianceKind = VarianceKind.HETEROSKEDASTICITY_ROBUST

    def __post_init__(self):
        if not (isinstance(self.order, (int, np.integer)) and 0 <= self.order <= MAX_ORDER):
            raise InvalidValue(f"order must be an integer in [0, {MAX_ORDER}], got {self.order!r}")
        if not (self.bandwidth > 0 and np.isfinite(self.bandwidth)):
            raise InvalidValue(f"bandwidth must be positive, got {self.bandwidth!r}")
        object.__setattr__(self, "kernel", KernelKind(self.kernel))
        object.__setattr__(self, "variance", VarianceKind(self.variance))


@dataclass(frozen=True)
class BoundaryEstimate:
    mu_hat: float
    se: float
    side: Side
    n_eff: int
    spec: FitSpec
    variant: Variant = Variant.CONVENTIONAL


def kernel_weight(kind: KernelKind, u):
    """Kernel weight K(u); zero outside ``|u| <= 1``. Works on scalars and arrays."""
    kind = KernelKind(kind)
    a = np.abs(np.asarray(u, dtype=float))
    if kind is KernelKind.TRIANGULAR:
        k = np.maximum(0.0, 1.0 - a)
    elif kind is KernelKind.UNIFORM:
        k = (a <= 1.0).astype(float)
    else:
        k = np.maximum(0.0, 0.75 * (1.0 - a * a))
    return float(k) if np.ndim(k) == 0 else k


def wls_sandwich(X, y, weights=None, clusters=None):
    """Weighted least squares with a sandwich covariance.

    Parameters
    ----------
    X : (n, k) array
        Design matrix.
    y : (n,) array
    weights : (n,) array, optional
        Nonnegative observation weights; unit weights when omitted.
    clusters : (n,) array, optional
        Cluster labels. Scores are summed within clusters before the outer
        product when given.

    Returns
    -------
    beta : (k,) array
    cov : (k, k) array
        ``B^-1 M B^-1`` with ``B = X'KX`` and ``M`` built from raw residuals
        (no degrees-of-freedom correction).
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    k = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    # QR of the root-weighted design avoids squaring its condition number.
    Xs = X * np.sqrt(k)[:, None]
    scale = np.linalg.norm(Xs, axis=0)
    if np.any(scale == 0):
        raise SingularDesign("design has an all-zero column")
    q, r = np.linalg.qr(Xs / scale)
    rdiag = np.abs(np.diag(r))
    if rdiag.min() <= 1e-8 * rdiag.max():
        rank = int(np.count_nonzero(rdiag > 1e-8 * rdiag.max()))
        raise SingularDesign(f"weighted design has rank {rank} < {X.shape[1]} columns")
    r_inv = np.linalg.solve(r, np.eye(r.shape[0])) / scale[:, None]
    beta = r_inv @ (q.T @ (np.sqrt(k) * y))
    resid = y - X @ beta
    scores = (X * k[:, None]) * resid[:, None]
    if clusters is not None:
        _, idx = np.unique(np.asarray(clusters), return_inverse=True)
        summed = np.zeros((idx.max() + 1, X.shape[1]))
        np.add.at(summed, idx, scores)
        scores = summed
    # (X'KX)^-1 = r_inv r_inv'
    half = scores @ r_inv @ r_inv.T
    cov = half.T @ half
    return beta, cov


def _fit(sample: Sample, outcome, side: Side, spec: FitSpec, order: int):
    side = Side(side)
    outcome = np.asarray(outcome, dtype=float)
    if outcome.shape != sample.w.shape:
        raise InvalidValue("outcome must have one value per record")
    on_side = sample.right if side is Side.RIGHT else ~sample.right
    x = sample.w - sample.cutoff
    u = x / spec.bandwidth
    k = kernel_weight(spec.kernel, u)
    keep = on_side & (k > 0)
    n_eff = int(np.count_nonzero(keep))
    if n_eff < order + 1:
        raise InsufficientSideData(
            f"{side.value} side has {n_eff} records with positive weight, need {order + 1}"
        )
    yk = outcome[keep]
    if not np.all(np.isfinite(yk)):
        raise InvalidValue("outcome contains non-finite values inside the bandwidth")
    # Regressors in bandwidth units; the intercept is unchanged by this scaling.
    X = np.vander(u[keep], order + 1, increasing=True)
    clusters = None
    if spec.variance is VarianceKind.CLUSTER_ROBUST:
        if sample.cluster is None:
            raise InvalidValue("cluster-robust variance requested but the sample has no clusters")
        clusters = sample.cluster[keep]
    beta, cov = wls_sandwich(X, yk, k[keep], clusters)
    se = float(np.sqrt(max(cov[0, 0], 0.0)))
    return float(beta[0]), se, n_eff


def fit_boundary(sample: Sample, outcome, side: Side, spec: FitSpec) -> BoundaryEstimate:
    """Local polynomial estimate of the one-sided limit of ``outcome`` at the cutoff.

    ``outcome`` is any per-record array aligned with ``sample`` (Y, a
    transformed outcome such as ``Y*D + 1 - D``, or D itself).
    """
    mu, se, n_eff = _fit(sample, outcome, side, spec, spec.order)
    return BoundaryEstimate(mu, se, Side(side), n_eff, spec, Variant.CONVENTIONAL)


def fit_boundary_bc(sample: Sample, outcome, side: Side, spec: FitSpec) -> BoundaryEstimate:
    """Bias-corrected boundary estimate.

    Fits a polynomial of order ``p + 1`` at the same bandwidth and reports
    its intercept and own sandwich standard error. This is the
    equal-bandwidth simplification of robust bias correction, not a
    replication of any particular package.
    """
    mu, se, n_eff = _fit(sample, outcome, side, spec, spec.order + 1)
    return BoundaryEstimate(mu, se, Side(side), n_eff, spec, Variant.BIAS_CORRECTED)


def fit(sample: Sample, outcome, side: Side, spec: FitSpec, variant: Variant) -> BoundaryEstimate:
    if Variant(variant) is Variant.BIAS_CORRECTED:
        return fit_boundary_bc(sample, outcome, side, spec)
    return fit_boundary(sample, outcome, side, spec)


def rot_bandwidth(sample: Sample) -> float:
    """Rule-of-thumb bandwidth ``1.84 * sd(w) * n**(-1/5)`` over the full sample.

    A quick default only; it is not an MSE- or coverage-optimal RD bandwidth.
    """
    n = len(sample)
    if n < 10:
        raise InsufficientSideData(f"rule-of-thumb bandwidth needs at least 10 records, got {n}")
    sd = float(np.std(sample.w))
    if sd == 0.0:
        raise DegenerateRunning("running variable has zero spread")
    return 1.84 * sd * n ** (-0.2)
