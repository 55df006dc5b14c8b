"""Scenario geometry: positions, distances, propagation delays, delay Jacobian.

The user moves in a horizontal plane at a known street-level height z0, so the
positioning state is 2-D while all distances are evaluated through the embedded
3-D position. Geometry is a value snapshot per coherence block; satellite
motion across blocks is the caller's responsibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry

SPEED_OF_LIGHT = 3e8  # m/s


@dataclass(frozen=True)
class Vec3:
    """A 3-D position in meters."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class UserPos2D:
    """Horizontal user position in meters (height lives in the scenario)."""

    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class ScenarioGeometry:
    """Satellite, RIS and user placement for one coherence block.

    Invariants: sat.z > ris.z > z0 >= 0 and the three nodes are distinct.
    """

    sat: Vec3
    ris: Vec3
    user: UserPos2D
    z0: float

    def __post_init__(self):
        vals = [*self.sat.as_array(), *self.ris.as_array(),
                self.user.x, self.user.y, self.z0]
        if not np.all(np.isfinite(vals)):
            raise DegenerateGeometry("non-finite coordinate in scenario geometry")
        if not (self.sat.z > self.ris.z > self.z0 >= 0):
            raise DegenerateGeometry(
                f"height ordering violated: sat.z={self.sat.z}, "
                f"ris.z={self.ris.z}, z0={self.z0}")

    @property
    def user3(self) -> Vec3:
        return embed_user(self.user, self.z0)


@dataclass(frozen=True)
class PathDelays:
    """Direct, hop and excess propagation delays in seconds."""

    tau_d: float
    tau_sr: float
    tau_ru: float
    tau_r: float
    delta_tau_r: float


def embed_user(u: UserPos2D, z0: float) -> Vec3:
    """Lift a 2-D user position to 3-D at the known height z0."""
    return Vec3(u.x, u.y, z0)


def distances(g: ScenarioGeometry) -> tuple[float, float, float]:
    """Euclidean distances (d_SU, d_SR, d_RU) of the three links.

    Raises DegenerateGeometry if any distance is zero.
    """
    sat = g.sat.as_array()
    ris = g.ris.as_array()
    usr = g.user3.as_array()
    d_su = float(np.linalg.norm(sat - usr))
    d_sr = float(np.linalg.norm(sat - ris))
    d_ru = float(np.linalg.norm(ris - usr))
    if min(d_su, d_sr, d_ru) <= 0.0:
        raise DegenerateGeometry("coincident nodes: zero link distance")
    return d_su, d_sr, d_ru


def path_delays(g: ScenarioGeometry, c: float = SPEED_OF_LIGHT) -> PathDelays:
    """Propagation delays of the direct and reflected paths.

    The reflected path traverses satellite -> RIS -> user, so its excess
    delay over the direct path is nonnegative by the triangle inequality.
    """
    d_su, d_sr, d_ru = distances(g)
    tau_d = d_su / c
    tau_sr = d_sr / c
    tau_ru = d_ru / c
    tau_r = tau_sr + tau_ru
    # clip the tiny negative residue floating point can leave on collinear setups
    delta = max(tau_r - tau_d, 0.0)
    return PathDelays(tau_d, tau_sr, tau_ru, tau_r, delta)


def delay_jacobian(g: ScenarioGeometry, c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """Jacobian of (tau_d, delta_tau_r) w.r.t. the 2-D user position.

    Derivatives are taken at fixed height z0 through the embedded 3-D
    position. Row 1 is the direct-delay gradient, row 2 the excess-delay
    gradient; units are seconds per meter.

    Returns
    -------
    numpy.ndarray
        2x2 matrix [[d tau_d/dx, d tau_d/dy],
                    [d dtau_r/dx, d dtau_r/dy]].
    """
    d_su, d_sr, d_ru = distances(g)
    sat = g.sat.as_array()
    ris = g.ris.as_array()
    usr = g.user3.as_array()
    grad_su = (usr - sat)[:2] / d_su   # gradient of d_SU w.r.t. (x, y)
    grad_ru = (usr - ris)[:2] / d_ru
    row1 = grad_su / c
    row2 = (grad_ru - grad_su) / c
    return np.vstack([row1, row2])
