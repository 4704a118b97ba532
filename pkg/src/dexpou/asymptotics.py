"""Asymptotic covariance of the estimates and confidence intervals.

The moment vector obeys a central limit theorem whose 4x4 limit covariance A
is the long-run covariance of the observable series (x, x^2, x^3, x y) over
consecutive observation pairs: lag-0 covariance plus tapered sums of the
lagged cross-covariances.  A is estimated with Bartlett weights
``w_k = 1 - k/(L+1)`` up to a truncation lag L (default ``ceil(m**(1/3))``,
user-overridable); the diagonal entries are the symmetric double sums, the
off-diagonals the two one-sided sums.

The covariance of the parameter estimates follows by the delta method:
``Sigma = B A B^T`` with ``B = (grad_theta h)^{-1} (grad_mu h~)``, the
Jacobian of the estimates with respect to the moment vector, rows and
columns ordered (p, rho, xi, theta).  Jacobians are evaluated at the plug-in
point (the estimates and the moment vector they imply).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft
from scipy.stats import norm

from .errors import SingularJacobian, TooShort
from .estimate import EstimationResult
from .model import (
    ModelParams,
    PARAM_ORDER,
    analytic_moments,
    jacobian_h,
    jacobian_tilde_h,
)
from .simulate import SamplePath

__all__ = [
    "CovarianceEstimate",
    "ConfidenceIntervals",
    "observable_series",
    "auto_bandwidth",
    "long_run_cov",
    "sigma_matrix",
    "covariance_estimate",
    "confidence_intervals",
]

MIN_SERIES_LENGTH = 30
MAX_JACOBIAN_COND = 1e12


@dataclass(frozen=True)
class CovarianceEstimate:
    """Long-run covariance A of the moment averages and delta-method
    covariance Sigma of (p, rho, xi, theta), plus the bandwidth used and the
    number of averaged terms ``n``."""

    A: np.ndarray
    Sigma: np.ndarray
    bandwidth: int
    n: int

    def min_eigenvalue_ratio(self) -> float:
        """min eigenvalue of Sigma over its trace (PSD check aid)."""
        eig = np.linalg.eigvalsh(self.Sigma)
        tr = float(np.trace(self.Sigma))
        return float(eig[0] / tr) if tr > 0 else 0.0


@dataclass(frozen=True)
class ConfidenceIntervals:
    """Per-parameter intervals at the given level.  ``intervals`` maps
    parameter name to (lower, upper); an unbounded upper endpoint is
    ``math.inf``.  Negative estimated variances are reported in
    ``warnings`` and produce no interval, never a NaN."""

    level: float
    intervals: dict
    warnings: tuple = ()


def observable_series(path: SamplePath) -> np.ndarray:
    """The four aligned series (X_j, X_j^2, X_j^3, X_j X_{j+1}), j = 1..n-1,
    as an array of shape (4, n-1).  Their means are exactly the sample
    moments used by the estimator."""
    x = path.values
    if len(x) < 2:
        raise ValueError(f"path must have >= 2 observations, got {len(x)}")
    head = x[:-1]
    return np.vstack([head, head**2, head**3, head * x[1:]])


def auto_bandwidth(m: int) -> int:
    """Default truncation lag ceil(m**(1/3))."""
    return math.ceil(m ** (1.0 / 3.0))


def long_run_cov(series: np.ndarray, bandwidth: Optional[int] = None) -> np.ndarray:
    """Bartlett-tapered long-run covariance matrix of the given series.

    ``series`` has shape (k, m).  Autocovariances are computed in one pass
    via FFT cross-correlation (zero-padded, so identical to the direct sums
    up to roundoff), then combined as
    ``C(0) + sum_k w_k (C(k) + C(k)^T)`` and symmetrized.
    """
    X = np.atleast_2d(np.asarray(series, dtype=float))
    k, m = X.shape
    if m < MIN_SERIES_LENGTH:
        raise TooShort(f"need >= {MIN_SERIES_LENGTH} points, got {m}")
    L = auto_bandwidth(m) if bandwidth is None else int(bandwidth)
    if L < 0:
        raise ValueError(f"bandwidth must be >= 0, got {bandwidth!r}")
    L = min(L, m - 1)
    X = X - X.mean(axis=1, keepdims=True)
    nfft = next_fast_len(m + L + 1)
    F = rfft(X, n=nfft, axis=1)
    # cross[i, j, lag] = (1/m) sum_t X[i, t] X[j, t + lag], lag = 0..L
    cross = irfft(np.conj(F)[:, None, :] * F[None, :, :], n=nfft, axis=2)
    cross = cross[:, :, :L + 1] / m
    A = cross[:, :, 0].copy()
    if L > 0:
        w = 1.0 - np.arange(1, L + 1) / (L + 1.0)
        tail = cross[:, :, 1:] @ w
        A += tail + tail.T
    return 0.5 * (A + A.T)


def sigma_matrix(A: np.ndarray, theta: float, rho: float, xi: float, p: float,
                 h: float) -> np.ndarray:
    """Delta-method covariance Sigma = B A B^T of (p, rho, xi, theta).

    B = (grad h)^{-1} grad h~ is the Jacobian of the estimates with respect
    to the moments; its rows are the gradients of the individual estimates,
    so the quadratic form must sandwich A as B A B^T.  The moment vector at
    which grad h~ is evaluated is reconstructed from the estimates (the
    pipeline inverts the moment system exactly, so this is the plug-in
    moment vector itself).
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (4, 4):
        raise ValueError(f"A must be 4x4, got shape {A.shape}")
    Jh = jacobian_h(theta, rho, xi, p, h)
    cond = np.linalg.cond(Jh)
    if not cond < MAX_JACOBIAN_COND:
        raise SingularJacobian(cond)
    implied = analytic_moments(
        ModelParams(theta=theta, eta=1.0 / rho, phi=1.0 / xi, p=p), h
    )
    Jt = jacobian_tilde_h(implied.to_array())
    B = np.linalg.solve(Jh, Jt)
    Sigma = B @ A @ B.T
    return 0.5 * (Sigma + Sigma.T)


def covariance_estimate(path: SamplePath, result: EstimationResult,
                        bandwidth: Optional[int] = None) -> CovarianceEstimate:
    """Assemble A and Sigma for an estimated path."""
    series = observable_series(path)
    m = series.shape[1]
    L = auto_bandwidth(m) if bandwidth is None else int(bandwidth)
    A = long_run_cov(series, L)
    Sigma = sigma_matrix(A, result.theta_hat, result.rho_hat, result.xi_hat,
                         result.p_hat, path.h)
    return CovarianceEstimate(A=A, Sigma=Sigma, bandwidth=min(L, m - 1), n=m)


def _reciprocal_interval(lo: float, hi: float) -> tuple:
    """Image of a positive-estimate interval under x -> 1/x.  A lower
    endpoint <= 0 maps to an unbounded upper endpoint."""
    upper = math.inf if lo <= 0 else 1.0 / lo
    return (1.0 / hi, upper)


def confidence_intervals(result: EstimationResult, cov: CovarianceEstimate,
                         level: float = 0.95) -> ConfidenceIntervals:
    """Normal-quantile intervals estimate +- z sqrt(Sigma_kk / n) for
    (p, rho, xi, theta); eta and phi intervals come from the reciprocal
    transform of the rho and xi intervals."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level!r}")
    z = norm.ppf(0.5 * (1.0 + level))
    estimates = {
        "p": result.p_hat,
        "rho": result.rho_hat,
        "xi": result.xi_hat,
        "theta": result.theta_hat,
    }
    intervals = {}
    warnings = []
    for k, name in enumerate(PARAM_ORDER):
        var = cov.Sigma[k, k]
        if var < 0:
            warnings.append(
                f"Sigma[{name},{name}] = {var:.6e} < 0 (PSD violation); "
                f"no interval for {name}"
            )
            continue
        half = z * math.sqrt(var / cov.n)
        est = estimates[name]
        intervals[name] = (float(est - half), float(est + half))
    if "rho" in intervals:
        intervals["eta"] = _reciprocal_interval(*intervals["rho"])
    if "xi" in intervals:
        intervals["phi"] = _reciprocal_interval(*intervals["xi"])
    return ConfidenceIntervals(level=level, intervals=intervals,
                               warnings=tuple(warnings))
