"""Delay-estimation variances, the 2-D Fisher information matrix, and the PEB.

The two delay observations (direct delay, reflected excess delay) have
uncorrelated estimation errors whose variances scale inversely with bandwidth
squared and the respective estimation SNRs. The position error bound is
sqrt(tr(J^-1)) of the resulting 2x2 FIM, computed in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, SingularFim, ZeroSnr

DET_TOLERANCE = 1e-30  # SI units (m^-4); below this the geometry is unobservable


@dataclass(frozen=True)
class DelayVarParams:
    """Delay-variance coefficients and signal bandwidth."""

    kappa_d: float = 1e-2
    kappa_r: float = 1e-2
    bandwidth: float = 20e6

    def __post_init__(self):
        if min(self.kappa_d, self.kappa_r, self.bandwidth) <= 0:
            raise InvalidInput("kappa_d, kappa_r and bandwidth must be positive")


@dataclass(frozen=True)
class ReducedCov:
    """Diagonal covariance of the reduced delay observation pair (s^2)."""

    var_tau_d: float
    var_dtau_r: float

    def __post_init__(self):
        if not (self.var_tau_d > 0 and np.isfinite(self.var_tau_d)
                and self.var_dtau_r > 0 and np.isfinite(self.var_dtau_r)):
            raise InvalidInput("delay variances must be positive and finite")


def delay_variances(gamma_d: float, gamma_r: float, p: DelayVarParams) -> ReducedCov:
    """Variance models kappa/(B^2 * SNR) for the two delay estimates.

    Raises ZeroSnr when either SNR is zero: the corresponding variance is
    unbounded and the caller must censor the trial rather than propagate inf.
    """
    if gamma_d <= 0 or gamma_r <= 0:
        raise ZeroSnr(f"delay variance undefined at gamma_d={gamma_d}, gamma_r={gamma_r}")
    b2 = p.bandwidth ** 2
    return ReducedCov(var_tau_d=p.kappa_d / (b2 * gamma_d),
                      var_dtau_r=p.kappa_r / (b2 * gamma_r))


def fim(jac: np.ndarray, cov: ReducedCov) -> np.ndarray:
    """Position FIM J = H^T R^-1 H for the 2x2 delay Jacobian H."""
    h = np.asarray(jac, dtype=float)
    if h.shape != (2, 2):
        raise InvalidInput(f"jacobian must be 2x2, got {h.shape}")
    w = np.array([1.0 / cov.var_tau_d, 1.0 / cov.var_dtau_r])
    j = h.T @ (w[:, None] * h)
    return 0.5 * (j + j.T)  # exact symmetry despite rounding


def peb(f: np.ndarray) -> float:
    """Position error bound sqrt(tr(J^-1)) via the closed-form 2x2 inverse.

    Raises SingularFim when det(J) is at or below the tolerance, signalling
    unobservable geometry (e.g. parallel delay gradients).
    """
    j = np.asarray(f, dtype=float)
    det = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
    if det <= DET_TOLERANCE:
        raise SingularFim(f"FIM determinant {det} below tolerance")
    return float(np.sqrt((j[0, 0] + j[1, 1]) / det))


def peb_from_link(jac: np.ndarray, gamma_d: float, gamma_r: float,
                  p: DelayVarParams) -> float:
    """Convenience composition: SNRs -> variances -> FIM -> PEB."""
    return peb(fim(jac, delay_variances(gamma_d, gamma_r, p)))
