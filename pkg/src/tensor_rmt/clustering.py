"""Multi-view spectral clustering: tensor method, unfolding baseline,
limit-theory accuracy, and Gaussianity diagnostics of the fitted label
vector.

Both methods estimate the sample-mode direction of a p x n x m data
tensor and read labels off its signs. The limit theory predicts the
accuracy phi(alpha / sqrt(1 - alpha^2)) where alpha is the asymptotic
alignment of that direction with the normalized label vector and phi the
standard normal CDF; it also predicts that the rescaled fitted entries
are unit Gaussians around alpha * label.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sps

from .errors import DimensionMismatchError, ValidationError
from .rank_one import power_iteration
from .tensor import Tensor3, unfold
from .theory import LimitParams, compute_summary_stats

__all__ = [
    "ClusteringResult",
    "TheoryAccuracy",
    "GaussianityReport",
    "cluster_tensor",
    "cluster_unfold",
    "theory_accuracy",
    "gaussianity_check",
]


@dataclass(frozen=True)
class ClusteringResult:
    """Fitted sample-mode direction and the induced labels. loss01 and
    accuracy are None when no ground truth was supplied; accuracy is
    sign-invariant (max of the loss and its complement)."""

    y_hat: np.ndarray
    labels_hat: np.ndarray
    loss01: float | None
    accuracy: float | None
    method: str

    @property
    def n(self):
        return len(self.y_hat)


def _result(y_hat, labels, method):
    labels_hat = np.where(y_hat >= 0, 1, -1).astype(np.int64)
    loss01 = accuracy = None
    if labels is not None:
        labels = np.asarray(labels)
        if labels.shape != y_hat.shape:
            raise DimensionMismatchError("labels length mismatch")
        loss01 = float(np.mean(labels_hat != labels))
        accuracy = max(loss01, 1.0 - loss01)
    return ClusteringResult(y_hat=y_hat, labels_hat=labels_hat,
                            loss01=loss01, accuracy=accuracy, method=method)


def cluster_tensor(x, labels=None, **fit_opts):
    """Labels from the sample-mode factor of the best rank-one fit."""
    if not isinstance(x, Tensor3):
        raise ValidationError("expected Tensor3")
    fit = power_iteration(x, **fit_opts)
    return _result(fit.v, labels, "tensor")


def cluster_unfold(x, labels=None):
    """Baseline: labels from the leading left singular vector of the
    sample-mode unfolding."""
    if not isinstance(x, Tensor3):
        raise ValidationError("expected Tensor3")
    mat = unfold(x, 2)
    gram = mat @ mat.T
    y_hat = np.linalg.eigh(gram)[1][:, -1]
    return _result(y_hat, labels, "unfolding")


@dataclass(frozen=True)
class TheoryAccuracy:
    """Limit prediction: alpha is the asymptotic alignment of the fitted
    sample direction; below the spike transition the value comes from the
    heuristic regularized branch and `branch` says so."""

    alpha: float
    accuracy: float
    branch: str
    stats: object

    def __post_init__(self):
        if not 0.5 - 1e-12 <= self.accuracy <= 1.0 + 1e-12:
            raise ValidationError("accuracy must lie in [0.5, 1]")


def theory_accuracy(p, n, m, mu_norm, h_norm, epsilon_fallback=1e-3,
                    **stat_opts):
    """Asymptotic clustering accuracy for the p x n x m geometry at class
    separation mu_norm and view-strength norm h_norm."""
    if mu_norm < 0 or h_norm < 0:
        raise ValidationError("mu_norm and h_norm must be nonnegative")
    params = LimitParams.from_dims(p, n, m, beta_t=h_norm, beta_m=mu_norm)
    st = compute_summary_stats(params, epsilon_fallback=epsilon_fallback,
                               **stat_opts)
    alpha = min(st.alpha2, 1.0)
    if alpha >= 1.0 - 1e-15:
        acc = 1.0
    else:
        acc = float(sps.norm.cdf(alpha / np.sqrt(1.0 - alpha * alpha)))
    return TheoryAccuracy(alpha=alpha, accuracy=acc, branch=st.branch,
                          stats=st)


@dataclass(frozen=True)
class GaussianityReport:
    """Moment and distributional diagnostics of the normalized residuals
    r_i = (sqrt(n) y_hat_i - alpha y_i) / sqrt(1 - alpha^2) after global
    sign alignment. qq_dist is the sup CDF distance to N(0,1)."""

    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    qq_dist: float
    n: int
    passed: bool
    thresholds: dict
    residuals: np.ndarray


def gaussianity_check(y_hat, y, alpha, mean_tol=None, var_tol=0.1,
                      qq_tol=0.08):
    """Check the fitted sample direction against the limit's entrywise
    Gaussian description at alignment `alpha`.

    mean_tol defaults to 3/sqrt(n). Raises on alpha outside (0, 1).
    """
    y_hat = np.asarray(y_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y_hat.shape != y.shape or y_hat.ndim != 1:
        raise DimensionMismatchError("y_hat and y must be equal-length vectors")
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie strictly between 0 and 1")
    n = y_hat.size
    if mean_tol is None:
        mean_tol = 3.0 / np.sqrt(n)
    sign = 1.0 if float(y_hat @ y) >= 0 else -1.0
    resid = (np.sqrt(n) * sign * y_hat - alpha * y) / np.sqrt(1.0 - alpha ** 2)
    mean = float(resid.mean())
    var = float(resid.var())
    skew = float(sps.skew(resid))
    kurt = float(sps.kurtosis(resid))
    qq = float(sps.kstest(resid, "norm").statistic)
    passed = (abs(mean) < mean_tol) and (abs(var - 1.0) < var_tol) \
        and (qq < qq_tol)
    return GaussianityReport(
        mean=mean, variance=var, skewness=skew, excess_kurtosis=kurt,
        qq_dist=qq, n=n, passed=bool(passed),
        thresholds={"mean": float(mean_tol), "variance": float(var_tol),
                    "qq": float(qq_tol)},
        residuals=resid)
