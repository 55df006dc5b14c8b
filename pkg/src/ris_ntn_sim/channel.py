"""Blockage-aware link budget, large-scale gains, and complex channels.

Large-scale gains follow dB chains (free-space path loss + atmospheric +
excess/shadowing terms); the direct link additionally carries a multiplicative
blockage factor in (0, 1]. Small-scale structure is a dominant specular
component: the RIS-reflected channel is a phase-controlled coherent sum over
the array elements with unit element reflection gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .geometry import SPEED_OF_LIGHT, ScenarioGeometry, Vec3, distances, path_delays

THERMAL_NOISE_DBM_PER_HZ = -174.0


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power, noise power (linear watts), carrier and bandwidth."""

    tx_power: float
    noise_power: float
    carrier_freq: float
    bandwidth: float

    def __post_init__(self):
        if min(self.tx_power, self.noise_power, self.carrier_freq, self.bandwidth) <= 0:
            raise InvalidInput("link budget fields must be positive")

    @property
    def snr_scale(self) -> float:
        """P_t / sigma_w^2, the predetection SNR scale."""
        return self.tx_power / self.noise_power


@dataclass(frozen=True)
class LargeScaleParams:
    """dB-domain loss terms and the direct-link blockage factor."""

    atm_su_db: float = 1.0
    atm_sr_db: float = 0.8
    excess_su_db: float = 0.0
    excess_sr_db: float = 0.0
    shadow_ru_db: float = 0.0
    blockage: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.blockage <= 1.0):
            raise InvalidInput(f"blockage factor must be in (0,1], got {self.blockage}")
        vals = [self.atm_su_db, self.atm_sr_db, self.excess_su_db,
                self.excess_sr_db, self.shadow_ru_db]
        if not np.all(np.isfinite(vals)):
            raise InvalidInput("dB loss terms must be finite")


def _squarest_factorization(n: int) -> tuple[int, int]:
    r = int(np.sqrt(n))
    while n % r:
        r -= 1
    return r, n // r


@dataclass(frozen=True)
class RISSpec:
    """Planar RIS: element count, grid shape, spacing and orientation.

    Elements sit on a rows x cols grid in the plane spanned by axis_u and
    axis_v (orthonormal, both orthogonal to the surface normal), centered at
    the RIS position, spaced `spacing` wavelengths apart, indexed row-major.
    """

    n_elements: int
    rows: int = 0
    cols: int = 0
    spacing: float = 0.5  # in wavelengths
    normal: tuple[float, float, float] = (-1.0, 0.0, 0.0)
    axis_u: tuple[float, float, float] = (0.0, 1.0, 0.0)
    axis_v: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.n_elements < 1:
            raise InvalidInput("RIS needs at least one element")
        if self.spacing <= 0:
            raise InvalidInput("element spacing must be positive")
        if self.rows == 0 or self.cols == 0:
            r, c = _squarest_factorization(self.n_elements)
            object.__setattr__(self, "rows", r)
            object.__setattr__(self, "cols", c)
        if self.rows * self.cols != self.n_elements:
            raise InvalidInput("rows*cols must equal n_elements")
        triad = np.array([self.normal, self.axis_u, self.axis_v], dtype=float)
        if not np.allclose(triad @ triad.T, np.eye(3), atol=1e-9):
            raise InvalidInput("orientation triad must be orthonormal")

    def element_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """In-plane element offsets (u, v) in wavelengths, row-major."""
        off_u = (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.spacing
        off_v = (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.spacing
        vv, uu = np.meshgrid(off_v, off_u, indexing="ij")
        return uu.ravel(), vv.ravel()


@dataclass(frozen=True)
class RISConfig:
    """Per-element phase shifts in radians, each in [0, 2*pi)."""

    phases: np.ndarray

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=float)
        if ph.ndim != 1:
            raise InvalidInput("phases must be a 1-D vector")
        if np.any(ph < 0) or np.any(ph >= 2 * np.pi):
            raise InvalidInput("phases must lie in [0, 2*pi)")
        object.__setattr__(self, "phases", ph)

    def __len__(self) -> int:
        return self.phases.size


@dataclass(frozen=True)
class ChannelRealization:
    """Complex direct/reflected channels plus the per-link power gains."""

    h_d: complex
    h_r: complex
    beta_su: float
    beta_sr: float
    beta_ru: float


def fspl_db(d: float, f_c: float, c: float = SPEED_OF_LIGHT) -> float:
    """Free-space path loss 20*log10(4*pi*f_c*d/c) in dB."""
    if d <= 0 or f_c <= 0:
        raise InvalidInput(f"fspl needs positive distance and frequency, got d={d}, f_c={f_c}")
    return 20.0 * np.log10(4.0 * np.pi * f_c * d / c)


def link_budget(eirp_density_dbw_per_mhz: float, bandwidth_hz: float,
                noise_figure_db: float, carrier_freq_hz: float) -> LinkBudget:
    """Convert EIRP density, bandwidth and noise figure to linear powers.

    Transmit power integrates the EIRP density over the signal bandwidth;
    noise power is thermal density (-174 dBm/Hz) plus bandwidth and noise
    figure. Both are returned in linear watts.
    """
    if bandwidth_hz <= 0:
        raise InvalidInput("bandwidth must be positive")
    tx_dbw = eirp_density_dbw_per_mhz + 10.0 * np.log10(bandwidth_hz / 1e6)
    noise_dbw = (THERMAL_NOISE_DBM_PER_HZ - 30.0) + 10.0 * np.log10(bandwidth_hz) \
        + noise_figure_db
    return LinkBudget(tx_power=10.0 ** (tx_dbw / 10.0),
                      noise_power=10.0 ** (noise_dbw / 10.0),
                      carrier_freq=carrier_freq_hz,
                      bandwidth=bandwidth_hz)


def direct_gain(g: ScenarioGeometry, budget: LinkBudget,
                params: LargeScaleParams, c: float = SPEED_OF_LIGHT) -> float:
    """beta_SU: blockage factor times the nominal direct-link dB chain."""
    d_su, _, _ = distances(g)
    loss_db = fspl_db(d_su, budget.carrier_freq, c) + params.atm_su_db + params.excess_su_db
    return params.blockage * 10.0 ** (-loss_db / 10.0)


def sr_gain(g: ScenarioGeometry, budget: LinkBudget,
            params: LargeScaleParams, c: float = SPEED_OF_LIGHT) -> float:
    """beta_SR: satellite-RIS dB chain (FSPL + atmospheric + excess)."""
    _, d_sr, _ = distances(g)
    loss_db = fspl_db(d_sr, budget.carrier_freq, c) + params.atm_sr_db + params.excess_sr_db
    return 10.0 ** (-loss_db / 10.0)


def ru_gain(g: ScenarioGeometry, budget: LinkBudget,
            shadow_ru_db: float, c: float = SPEED_OF_LIGHT) -> float:
    """beta_RU: terrestrial hop, FSPL plus the local shadowing term only."""
    _, _, d_ru = distances(g)
    loss_db = fspl_db(d_ru, budget.carrier_freq, c) + shadow_ru_db
    return 10.0 ** (-loss_db / 10.0)


def array_response(spec: RISSpec, unit_dir: Vec3 | np.ndarray) -> np.ndarray:
    """Planar-array response for a unit propagation direction.

    Entry n is exp(j*2*pi*(r_n . u)) with r_n the element offset in
    wavelengths, so a broadside direction (along the surface normal) gives
    the all-ones vector.
    """
    d = unit_dir.as_array() if isinstance(unit_dir, Vec3) else np.asarray(unit_dir, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-9:
        raise InvalidInput(f"direction must be unit length, |d|={np.linalg.norm(d)}")
    off_u, off_v = spec.element_grid()
    proj = off_u * (np.asarray(spec.axis_u) @ d) + off_v * (np.asarray(spec.axis_v) @ d)
    return np.exp(2j * np.pi * proj)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def element_terms(g: ScenarioGeometry, spec: RISSpec, budget: LinkBudget,
                  params: LargeScaleParams, c: float = SPEED_OF_LIGHT) -> np.ndarray:
    """Per-element reflected-path terms before the RIS phase shifts.

    h_r(config) = sum_n element_terms[n] * exp(j*phi_n); the common factor
    sqrt(beta_SR*beta_RU)*exp(-j*2*pi*f_c*tau_r) is folded in.
    """
    delays = path_delays(g, c)
    b_sr = sr_gain(g, budget, params, c)
    b_ru = ru_gain(g, budget, params.shadow_ru_db, c)
    sat = g.sat.as_array()
    ris = g.ris.as_array()
    usr = g.user3.as_array()
    a_sr = array_response(spec, _unit(sat - ris))
    a_ru = array_response(spec, _unit(usr - ris))
    common = np.sqrt(b_sr * b_ru) * np.exp(-2j * np.pi * budget.carrier_freq * delays.tau_r)
    return common * a_ru * a_sr


def direct_channel(g: ScenarioGeometry, budget: LinkBudget,
                   params: LargeScaleParams, c: float = SPEED_OF_LIGHT) -> complex:
    """h_d = sqrt(beta_SU) * exp(-j*2*pi*f_c*tau_d)."""
    delays = path_delays(g, c)
    b_su = direct_gain(g, budget, params, c)
    return complex(np.sqrt(b_su) * np.exp(-2j * np.pi * budget.carrier_freq * delays.tau_d))


def reflected_channel(g: ScenarioGeometry, spec: RISSpec, config: RISConfig,
                      budget: LinkBudget, params: LargeScaleParams,
                      c: float = SPEED_OF_LIGHT) -> complex:
    """h_r for one RIS configuration: phase-shifted coherent element sum."""
    if len(config) != spec.n_elements:
        raise InvalidInput(f"config has {len(config)} phases for {spec.n_elements} elements")
    terms = element_terms(g, spec, budget, params, c)
    return complex(np.sum(terms * np.exp(1j * config.phases)))


def realize_channel(g: ScenarioGeometry, spec: RISSpec, config: RISConfig,
                    budget: LinkBudget, params: LargeScaleParams,
                    c: float = SPEED_OF_LIGHT) -> ChannelRealization:
    """Full channel snapshot for one block and one RIS configuration."""
    return ChannelRealization(
        h_d=direct_channel(g, budget, params, c),
        h_r=reflected_channel(g, spec, config, budget, params, c),
        beta_su=direct_gain(g, budget, params, c),
        beta_sr=sr_gain(g, budget, params, c),
        beta_ru=ru_gain(g, budget, params.shadow_ru_db, c),
    )


def snr(h_d: complex, h_r: complex, budget: LinkBudget) -> float:
    """Instantaneous SNR of the combined direct + reflected signal."""
    return budget.snr_scale * abs(h_d + h_r) ** 2


def gamma_d(h_d: complex, budget: LinkBudget) -> float:
    """Direct-path estimation SNR."""
    return budget.snr_scale * abs(h_d) ** 2


def gamma_r(h_r: complex, budget: LinkBudget) -> float:
    """Reflected-path estimation SNR."""
    return budget.snr_scale * abs(h_r) ** 2


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (np.asarray(x_db) / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * np.log10(x)
