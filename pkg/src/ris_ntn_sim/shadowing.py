"""Spatially correlated RIS-user shadowing and its scalar Kalman tracker.

The shadowing field has exponential spatial covariance; along a trajectory it
reduces to an AR(1) recursion whose coefficient is set by the per-block user
displacement. A scalar Kalman filter tracks the local shadowing state from
noisy reflected-pilot measurements, and the conservative level adds a
variance-proportional margin for robust codeword scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput


@dataclass(frozen=True)
class ShadowFieldParams:
    """Shadowing standard deviation (dB) and spatial correlation distance (m)."""

    sigma_ru: float = 6.0
    d_corr: float = 20.0

    def __post_init__(self):
        if self.sigma_ru < 0:
            raise InvalidInput("sigma_ru must be nonnegative")
        if self.d_corr <= 0:
            raise InvalidInput("d_corr must be positive")

    def stationary_q(self, rho: float) -> float:
        """Process-noise variance that keeps the AR(1) marginal at sigma^2."""
        return self.sigma_ru ** 2 * (1.0 - rho ** 2)


@dataclass(frozen=True)
class KalmanParams:
    """Filter-design process/measurement noise variances in dB^2."""

    q_x: float
    r_x: float

    def __post_init__(self):
        if self.q_x < 0:
            raise InvalidInput("q_x must be nonnegative")
        if self.r_x <= 0:
            raise InvalidInput("r_x must be positive")


@dataclass(frozen=True)
class ShadowTracker:
    """Filtered shadowing estimate (dB) and its error variance (dB^2)."""

    estimate: float = 0.0
    variance: float = 36.0

    def __post_init__(self):
        if self.variance < 0:
            raise InvalidInput("tracker variance must be nonnegative")


def spatial_cov(p: np.ndarray, p_other: np.ndarray, params: ShadowFieldParams) -> float:
    """Exponential covariance sigma^2 * exp(-|p-p'|/d_corr) in dB^2."""
    dist = float(np.linalg.norm(np.asarray(p, float) - np.asarray(p_other, float)))
    return params.sigma_ru ** 2 * np.exp(-dist / params.d_corr)


def ar1_rho(delta_s: float, d_corr: float) -> float:
    """Block-to-block correlation exp(-ds/d_corr) induced by user motion."""
    if delta_s < 0:
        raise InvalidInput("displacement must be nonnegative")
    return float(np.exp(-delta_s / d_corr))


def evolve_shadow(x_prev: float, rho: float, q_x: float,
                  rng: np.random.Generator) -> float:
    """One AR(1) step: rho*x + N(0, q_x).

    With q_x = sigma^2*(1-rho^2) the process is stationary with variance
    sigma^2, matching the spatial field restricted to the trajectory.
    """
    if not (0.0 < rho <= 1.0):
        raise InvalidInput("rho must be in (0,1]")
    noise = rng.normal(0.0, np.sqrt(q_x)) if q_x > 0 else 0.0
    return rho * x_prev + noise


def shadow_measurement(x_true: float, r_x: float, rng: np.random.Generator) -> float:
    """Reflected-pilot shadowing observation: truth plus N(0, r_x) noise."""
    if r_x < 0:
        raise InvalidInput("r_x must be nonnegative")
    noise = rng.normal(0.0, np.sqrt(r_x)) if r_x > 0 else 0.0
    return x_true + noise


def kf_step(tr: ShadowTracker, rho: float, meas: float,
            kp: KalmanParams) -> ShadowTracker:
    """One predict/update cycle of the scalar shadowing filter.

    Predict: x- = rho*x, P- = rho^2*P + q. Gain K = P-/(P- + r).
    Update: x = x- + K*(y - x-), P = (1-K)*P-.
    """
    x_pred = rho * tr.estimate
    p_pred = rho * rho * tr.variance + kp.q_x
    gain = p_pred / (p_pred + kp.r_x)
    estimate = x_pred + gain * (meas - x_pred)
    variance = (1.0 - gain) * p_pred
    return ShadowTracker(estimate=estimate, variance=variance)


def kf_predicted_variance(tr: ShadowTracker, rho: float, kp: KalmanParams) -> float:
    """Prior variance P[k|k-1] for the next step (innovation bookkeeping)."""
    return rho * rho * tr.variance + kp.q_x


def worst_case_shadow(tr: ShadowTracker, nu: float) -> float:
    """Conservative shadowing level: estimate + nu * sqrt(variance)."""
    if nu < 0:
        raise InvalidInput("nu must be nonnegative")
    return tr.estimate + nu * np.sqrt(tr.variance)


def sample_field_grid(points: np.ndarray, params: ShadowFieldParams,
                      rng: np.random.Generator, correlated: bool = False) -> np.ndarray:
    """Shadowing draws for a set of 2-D grid points.

    By default points are sampled i.i.d. N(0, sigma^2); with correlated=True a
    Cholesky factor of the exponential covariance over the grid is used.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if not correlated:
        return rng.normal(0.0, params.sigma_ru, size=n)
    diff = pts[:, None, :] - pts[None, :, :]
    cov = params.sigma_ru ** 2 * np.exp(-np.linalg.norm(diff, axis=2) / params.d_corr)
    cov[np.diag_indices(n)] += 1e-10 * params.sigma_ru ** 2
    return np.linalg.cholesky(cov) @ rng.standard_normal(n)
