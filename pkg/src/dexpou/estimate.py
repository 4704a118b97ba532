"""Moment calibration: from an observed path to (theta, eta, phi, p).

Pipeline: sample moments -> closed-form theta -> reduced statistics
(f1, f2, f3) -> scalar root problem g(p) = 0 on (0, 1) -> back-substitution
for rho, xi -> eta = 1/rho, phi = 1/xi.  Assumes the lam = sigma = 1
calibration convention throughout.

All four sample moments are averaged over the same index set j = 1..n-1 (the
lag product needs pairs), which preserves the exact algebraic identities the
solver relies on.  Every precondition failure raises a typed error from
:mod:`dexpou.errors`; nothing is clamped or silently repaired.  Root
uniqueness is diagnosed (sign-change count over a grid), never assumed: with
multiple sign changes the solver refuses and reports all roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DiscriminantNonpositive,
    MultipleRoots,
    NonPositiveAutocov,
    NonPositiveRate,
    NonPositiveTheta,
    NonPositiveVariance,
    NoRoot,
)
from .model import StationaryMoments
from .simulate import SamplePath

__all__ = [
    "EmpiricalMoments",
    "FVector",
    "RootScan",
    "EstimationResult",
    "empirical_moments",
    "empirical_char_fn",
    "empirical_joint_char_fn",
    "estimate_theta",
    "compute_f",
    "g_of_p",
    "g_values",
    "solve_p",
    "recover_rho_xi",
    "estimate_from_moments",
    "estimate_all",
]

GRID_EPS = 1e-6          # root search domain is [GRID_EPS, 1 - GRID_EPS]
DEFAULT_GRID_SIZE = 2001
ROOT_G_TOL = 1e-12       # |g| tolerance at the refined root
ROOT_WIDTH_TOL = 1e-14   # bracket width tolerance of the refiner


@dataclass(frozen=True)
class EmpiricalMoments:
    """Sample moments mu1..mu4 over a common index set of ``n_used`` terms."""

    mu1: float
    mu2: float
    mu3: float
    mu4: float
    n_used: int
    h: float

    def to_array(self) -> np.ndarray:
        return np.array([self.mu1, self.mu2, self.mu3, self.mu4])

    @classmethod
    def from_stationary(cls, moments: StationaryMoments,
                        n_used: int = 0) -> "EmpiricalMoments":
        """Wrap exact analytic moments, e.g. to drive the pipeline without a
        path (the exact-inversion oracle)."""
        return cls(mu1=moments.m1, mu2=moments.m2, mu3=moments.m3,
                   mu4=moments.m4, n_used=n_used, h=moments.h)


@dataclass(frozen=True)
class FVector:
    """Reduced statistics f1 = theta mu1, f2 = theta (mu2 - mu1^2),
    f3 = (theta/2)(mu3 - mu2 mu1 - 2 mu1 (mu2 - mu1^2))."""

    f1: float
    f2: float
    f3: float
    theta_hat: float

    @property
    def discriminant(self) -> float:
        """f2 - f1^2; must be > 0 for the root problem to be solvable."""
        return self.f2 - self.f1**2


@dataclass(frozen=True)
class RootScan:
    """Outcome of the g(p) = 0 scan-and-refine search."""

    p_hat: float
    bracket: tuple
    sign_change_count: int
    g_prime_sign_constant: bool


@dataclass(frozen=True)
class EstimationResult:
    """Point estimates plus the uniqueness diagnostics of the root search."""

    theta_hat: float
    p_hat: float
    rho_hat: float
    xi_hat: float
    eta_hat: float
    phi_hat: float
    root_bracket: tuple
    sign_change_count: int
    g_prime_sign_constant: bool
    moments: Optional[EmpiricalMoments] = None
    f: Optional[FVector] = None
    g_curve: Optional[np.ndarray] = None  # sampled (p, g(p)) table

    def estimates_dict(self) -> dict:
        return {
            "theta": self.theta_hat,
            "p": self.p_hat,
            "rho": self.rho_hat,
            "xi": self.xi_hat,
            "eta": self.eta_hat,
            "phi": self.phi_hat,
        }


def empirical_moments(path: SamplePath) -> EmpiricalMoments:
    """Sample moments of the path, all averaged over j = 1..n-1."""
    x = path.values
    if len(x) < 2:
        raise ValueError(f"path must have >= 2 observations, got {len(x)}")
    head = x[:-1]
    return EmpiricalMoments(
        mu1=float(np.mean(head)),
        mu2=float(np.mean(head**2)),
        mu3=float(np.mean(head**3)),
        mu4=float(np.mean(head * x[1:])),
        n_used=len(x) - 1,
        h=path.h,
    )


def empirical_char_fn(path: SamplePath, u):
    """Empirical characteristic function (1/n) sum exp(i u X_j).
    Diagnostic only; compares against the analytic stationary CF."""
    x = path.values
    if len(x) == 0:
        raise ValueError("path is empty")
    u = np.asarray(u, dtype=float)
    val = np.mean(np.exp(1j * np.multiply.outer(u, x)), axis=-1)
    return complex(val) if val.ndim == 0 else val


def empirical_joint_char_fn(path: SamplePath, u, v):
    """Empirical joint CF (1/(n-1)) sum exp(i u X_j + i v X_{j+1})."""
    x = path.values
    if len(x) < 2:
        raise ValueError(f"path must have >= 2 observations, got {len(x)}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    val = np.mean(
        np.exp(1j * (np.multiply.outer(u, x[:-1]) + np.multiply.outer(v, x[1:]))),
        axis=-1,
    )
    return complex(val) if val.ndim == 0 else val


def estimate_theta(moments: EmpiricalMoments) -> float:
    """theta = ln((mu2 - mu1^2) / (mu4 - mu1^2)) / h.

    Raises the typed error naming the failed inequality when the variance,
    the lag autocovariance, or the resulting theta is not positive.
    """
    var = moments.mu2 - moments.mu1**2
    autocov = moments.mu4 - moments.mu1**2
    if var <= 0:
        raise NonPositiveVariance(f"mu2 - mu1^2 = {var:.6e} <= 0")
    if autocov <= 0:
        raise NonPositiveAutocov(f"mu4 - mu1^2 = {autocov:.6e} <= 0")
    if var <= autocov:
        raise NonPositiveTheta(
            f"(mu2 - mu1^2)/(mu4 - mu1^2) = {var / autocov:.6f} <= 1"
        )
    return math.log(var / autocov) / moments.h


def compute_f(moments: EmpiricalMoments, theta_hat: float) -> FVector:
    """Reduced statistics of the three remaining moment equations."""
    if not theta_hat > 0:
        raise ValueError(f"theta_hat must be > 0, got {theta_hat!r}")
    mu1, mu2, mu3 = moments.mu1, moments.mu2, moments.mu3
    var = mu2 - mu1**2
    f = FVector(
        f1=theta_hat * mu1,
        f2=theta_hat * var,
        f3=0.5 * theta_hat * (mu3 - mu2 * mu1 - 2.0 * mu1 * var),
        theta_hat=theta_hat,
    )
    if f.discriminant <= 0:
        raise DiscriminantNonpositive(
            f"f2 - f1^2 = {f.discriminant:.6e} <= 0"
        )
    return f


def g_values(p, f: FVector) -> np.ndarray:
    """Vectorized g over an array of p values in (0, 1)."""
    p = np.asarray(p, dtype=float)
    d = f.discriminant
    if d < 0:
        raise ValueError(f"f2 - f1^2 = {d:.6e} < 0")
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("p must lie strictly inside (0, 1)")
    q = 1.0 - p
    s = np.sqrt(p * q * d)
    return (q**2 * (f.f1 * p + s) ** 3
            + p**2 * (f.f1 * q - s) ** 3
            - f.f3 * p**2 * q**2)


def g_of_p(p: float, f: FVector) -> float:
    """The scalar root function whose zero in (0, 1) is the p estimate."""
    return float(g_values(p, f))


def solve_p(f: FVector, grid_size: int = DEFAULT_GRID_SIZE) -> RootScan:
    """Scan g on a uniform grid over [1e-6, 1 - 1e-6], count strict sign
    changes, and refine the bracketing interval with Brent's method.

    Exactly one sign change is required; zero raises :class:`NoRoot` and
    more than one raises :class:`MultipleRoots` carrying every refined root.
    The numerical-derivative sign-constancy of g over the grid is reported
    as a diagnostic (a constant-sign derivative certifies uniqueness).
    """
    if grid_size < 3:
        raise ValueError(f"grid_size must be >= 3, got {grid_size!r}")
    if f.discriminant <= 0:
        raise DiscriminantNonpositive(
            f"f2 - f1^2 = {f.discriminant:.6e} <= 0"
        )
    grid = np.linspace(GRID_EPS, 1.0 - GRID_EPS, grid_size)
    gv = g_values(grid, f)
    dg = np.diff(gv)
    g_prime_constant = bool(np.all(dg >= 0.0) or np.all(dg <= 0.0))

    signs = np.sign(gv)
    brackets = []
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
        brackets.append((grid[i], grid[i + 1]))
    exact_hits = [float(grid[i]) for i in np.flatnonzero(signs == 0)]

    roots = list(exact_hits)
    for lo, hi in brackets:
        roots.append(brentq(g_of_p, lo, hi, args=(f,), xtol=ROOT_WIDTH_TOL))
    count = len(roots)
    if count == 0:
        raise NoRoot("g(p) has no sign change on (0, 1)")
    if count > 1:
        raise MultipleRoots(sorted(roots))

    p_hat = float(roots[0])
    bracket = brackets[0] if brackets else (p_hat, p_hat)
    return RootScan(p_hat=p_hat,
                    bracket=(float(bracket[0]), float(bracket[1])),
                    sign_change_count=count,
                    g_prime_sign_constant=g_prime_constant)


def recover_rho_xi(p_hat: float, f: FVector) -> tuple:
    """Back-substitute: rho from the positive branch of the quadratic, then
    xi from the first moment equation.  rho > f1 holds on this branch, which
    is what makes xi positive for consistent inputs."""
    if not 0.0 < p_hat < 1.0:
        raise ValueError(f"p_hat must be in (0, 1), got {p_hat!r}")
    d = f.discriminant
    if d <= 0:
        raise DiscriminantNonpositive(f"f2 - f1^2 = {d:.6e} <= 0")
    q_hat = 1.0 - p_hat
    rho_hat = (f.f1 * p_hat + math.sqrt(p_hat * q_hat * d)) / p_hat
    xi_hat = (p_hat * rho_hat - f.f1) / q_hat
    if rho_hat <= 0 or xi_hat <= 0:
        raise NonPositiveRate(
            f"recovered rho = {rho_hat:.6e}, xi = {xi_hat:.6e}; both must be > 0"
        )
    return rho_hat, xi_hat


def estimate_from_moments(moments: EmpiricalMoments,
                          grid_size: int = DEFAULT_GRID_SIZE,
                          keep_g_curve: bool = False) -> EstimationResult:
    """Run the calibration pipeline on a moment vector (empirical or exact)."""
    theta_hat = estimate_theta(moments)
    f = compute_f(moments, theta_hat)
    scan = solve_p(f, grid_size=grid_size)
    rho_hat, xi_hat = recover_rho_xi(scan.p_hat, f)
    curve = None
    if keep_g_curve:
        grid = np.linspace(GRID_EPS, 1.0 - GRID_EPS, grid_size)
        curve = np.column_stack([grid, g_values(grid, f)])
    return EstimationResult(
        theta_hat=theta_hat,
        p_hat=scan.p_hat,
        rho_hat=rho_hat,
        xi_hat=xi_hat,
        eta_hat=1.0 / rho_hat,
        phi_hat=1.0 / xi_hat,
        root_bracket=scan.bracket,
        sign_change_count=scan.sign_change_count,
        g_prime_sign_constant=scan.g_prime_sign_constant,
        moments=moments,
        f=f,
        g_curve=curve,
    )


def estimate_all(path: SamplePath, grid_size: int = DEFAULT_GRID_SIZE,
                 keep_g_curve: bool = False) -> EstimationResult:
    """Full pipeline from a sample path to parameter estimates."""
    return estimate_from_moments(empirical_moments(path),
                                 grid_size=grid_size,
                                 keep_g_curve=keep_g_curve)
