"""Quantized phase sets and the three-family RIS codebook.

Each anchor position contributes three codewords built from the nominal
(unblocked, unshadowed) geometry:

* comm: element phases co-phase the reflected terms and align the aggregate
  reflected phase with the direct path, after a mild quadratic taper that
  widens the beam footprint (coverage at the cost of ~1 dB of peak gain);
* pos: the co-phasing profile whose global rotation maximizes the quantized
  coherent sum |h_r|; among rotations within 1% of the maximum the one least
  aligned with the direct path is chosen, so the comm and pos codewords stay
  distinct after quantization;
* balanced: the half-taper profile with its aggregate phase offset 60 degrees
  from the direct path - intermediate in both alignment and magnitude.

Construction is deterministic given the scenario; no randomness is involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .channel import LargeScaleParams, LinkBudget, RISConfig, RISSpec, element_terms
from .errors import InvalidConfig, InvalidInput
from .geometry import (SPEED_OF_LIGHT, ScenarioGeometry, UserPos2D, Vec3,
                       path_delays)

COMM_TAPER = 0.3          # quadratic taper strength of the comm family
BALANCED_TAPER = 0.15     # half of the comm taper
BALANCED_OFFSET = np.pi / 3.0
ROTATION_SCAN = 64        # trial global rotations per quantization step
SCAN_TOLERANCE = 0.01     # |h_r| slack when picking the least-aligned rotation


class Family(str, Enum):
    COMM = "comm"
    BALANCED = "balanced"
    POS = "pos"


@dataclass(frozen=True)
class PhaseSet:
    """The b-bit feasible phase set {0, 2pi/2^b, ..., 2pi(2^b-1)/2^b}."""

    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise InvalidInput("phase set needs at least one bit")

    @property
    def step(self) -> float:
        return 2.0 * np.pi / (2 ** self.bits)

    @property
    def values(self) -> np.ndarray:
        return np.arange(2 ** self.bits) * self.step


@dataclass(frozen=True)
class Codeword:
    config: RISConfig
    family: Family
    id: int
    anchor: UserPos2D


@dataclass(frozen=True)
class Codebook:
    codewords: tuple[Codeword, ...]
    n_elements: int
    bits: int

    def __post_init__(self):
        if len(self.codewords) < 1:
            raise InvalidConfig("codebook must hold at least one codeword")
        ids = [cw.id for cw in self.codewords]
        if len(set(ids)) != len(ids):
            raise InvalidConfig("codeword ids must be unique")
        for cw in self.codewords:
            if len(cw.config) != self.n_elements:
                raise InvalidConfig("codeword length does not match n_elements")

    def __len__(self) -> int:
        return len(self.codewords)

    def phase_matrix(self) -> np.ndarray:
        """M x N matrix of phases, row order = codeword order."""
        return np.vstack([cw.config.phases for cw in self.codewords])

    @cached_property
    def phase_factors(self) -> np.ndarray:
        """exp(j*phases), cached: the hot multiplier of the selection scan."""
        return np.exp(1j * self.phase_matrix())

    def anchors(self) -> list[UserPos2D]:
        seen: list[UserPos2D] = []
        for cw in self.codewords:
            if cw.anchor not in seen:
                seen.append(cw.anchor)
        return seen

    def to_json(self) -> str:
        payload = {
            "n_elements": self.n_elements,
            "bits": self.bits,
            "codewords": [
                {
                    "id": cw.id,
                    "family": cw.family.value,
                    "anchor": [cw.anchor.x, cw.anchor.y],
                    "phases": [float(p) for p in cw.config.phases],
                }
                for cw in self.codewords
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        payload = json.loads(text)
        cws = tuple(
            Codeword(config=RISConfig(np.asarray(entry["phases"], dtype=float)),
                     family=Family(entry["family"]),
                     id=int(entry["id"]),
                     anchor=UserPos2D(*entry["anchor"]))
            for entry in payload["codewords"]
        )
        return cls(codewords=cws, n_elements=int(payload["n_elements"]),
                   bits=int(payload["bits"]))


def quantize_phase(phi: float | np.ndarray, b: int) -> float | np.ndarray:
    """Nearest element of the b-bit phase set, with wraparound.

    Exact midpoints between two levels resolve toward the smaller phase value
    (the wraparound midpoint resolves to 0).
    """
    if b < 1:
        raise InvalidInput("need at least one phase bit")
    levels = 2 ** b
    step = 2.0 * np.pi / levels
    phi_arr = np.mod(np.asarray(phi, dtype=float), 2.0 * np.pi)
    k = np.floor(phi_arr / step)
    frac = phi_arr - k * step
    lo = np.mod(k, levels)
    hi = np.mod(k + 1, levels)
    tie = np.minimum(lo, hi)  # smaller phase value, so the wraparound tie -> 0
    k_sel = np.where(frac < step / 2.0, lo, np.where(frac > step / 2.0, hi, tie))
    out = k_sel * step
    return float(out) if np.isscalar(phi) or np.ndim(phi) == 0 else out


def _taper(spec: RISSpec, strength: float) -> np.ndarray:
    """Quadratic phase taper over the normalized element grid, in radians."""
    off_u, off_v = spec.element_grid()
    if spec.n_elements == 1:
        return np.zeros(1)
    scale_u = np.max(np.abs(off_u)) or 1.0
    scale_v = np.max(np.abs(off_v)) or 1.0
    r2 = (off_u / scale_u) ** 2 + (off_v / scale_v) ** 2
    return strength * np.pi * r2


def _direct_phase(g: ScenarioGeometry, budget: LinkBudget, c: float) -> float:
    return -2.0 * np.pi * budget.carrier_freq * path_delays(g, c).tau_d


def _nominal_terms(g: ScenarioGeometry, spec: RISSpec, budget: LinkBudget,
                   c: float) -> np.ndarray:
    nominal = LargeScaleParams(shadow_ru_db=0.0, blockage=1.0)
    return element_terms(g, spec, budget, nominal, c)


def _aligned_profile(g: ScenarioGeometry, spec: RISSpec, budget: LinkBudget,
                     b: int, taper_strength: float, offset: float,
                     c: float) -> np.ndarray:
    """Tapered co-phasing profile whose aggregate phase is offset from h_d."""
    terms = _nominal_terms(g, spec, budget, c)
    prof = _taper(spec, taper_strength) - np.angle(terms)
    aggregate = np.sum(terms * np.exp(1j * prof))
    prof += _direct_phase(g, budget, c) - np.angle(aggregate) + offset
    return quantize_phase(prof, b)


def comm_codeword(g: ScenarioGeometry, spec: RISSpec, budget: LinkBudget,
                  b: int, taper_strength: float = COMM_TAPER,
                  c: float = SPEED_OF_LIGHT) -> RISConfig:
    """Communication codeword: broadened beam aligned with the direct path."""
    return RISConfig(np.atleast_1d(
        _aligned_profile(g, spec, budget, b, taper_strength, 0.0, c)))


def pos_codeword(g: ScenarioGeometry, spec: RISSpec, b: int,
                 budget: LinkBudget | None = None,
                 c: float = SPEED_OF_LIGHT) -> RISConfig:
    """Positioning codeword: maximal quantized |h_r| at the nominal geometry.

    Scans global rotations over one quantization step; the quantized coherent
    sum is a periodic function of the rotation, so the scan finds the best
    achievable co-phasing. The direct-path phase only breaks near-ties (least
    aligned wins), keeping the codeword distinct from the comm family; it is
    ignored when no budget is supplied.
    """
    if budget is None:
        budget = LinkBudget(tx_power=1.0, noise_power=1.0, carrier_freq=2.2e9,
                            bandwidth=20e6)
        hd_phase = None
    else:
        hd_phase = _direct_phase(g, budget, c)
    terms = _nominal_terms(g, spec, budget, c)
    step = 2.0 * np.pi / (2 ** b)
    best: list[tuple[float, float, np.ndarray]] = []
    for trial in range(ROTATION_SCAN):
        psi = trial * step / ROTATION_SCAN
        prof = quantize_phase(psi - np.angle(terms), b)
        total = np.sum(terms * np.exp(1j * prof))
        align = np.cos(np.angle(total) - hd_phase) if hd_phase is not None else 0.0
        best.append((abs(total), float(align), np.atleast_1d(prof)))
    peak = max(entry[0] for entry in best)
    viable = [entry for entry in best if entry[0] >= (1.0 - SCAN_TOLERANCE) * peak]
    viable.sort(key=lambda entry: entry[1])
    return RISConfig(viable[0][2])


def balanced_codeword(g: ScenarioGeometry, spec: RISSpec, budget: LinkBudget,
                      b: int, c: float = SPEED_OF_LIGHT) -> RISConfig:
    """Balanced codeword: half taper, aggregate phase 60 degrees off-direct."""
    return RISConfig(np.atleast_1d(
        _aligned_profile(g, spec, budget, b, BALANCED_TAPER, BALANCED_OFFSET, c)))


def default_anchors(region_x: tuple[float, float], region_y: tuple[float, float],
                    count: int) -> list[UserPos2D]:
    """Evenly spaced anchor positions along the x-extent at mid-region y."""
    xs = np.linspace(region_x[0], region_x[1], count + 2)[1:-1]
    y_mid = 0.5 * (region_y[0] + region_y[1])
    return [UserPos2D(float(x), float(y_mid)) for x in xs]


def build_codebook(sat: Vec3, ris: Vec3, z0: float, spec: RISSpec,
                   budget: LinkBudget, b: int, M: int,
                   anchor_points: list[UserPos2D],
                   c: float = SPEED_OF_LIGHT) -> Codebook:
    """Assemble the M-codeword codebook: one comm/balanced/pos triple per anchor.

    Codeword ids follow anchor order with families ordered comm, balanced,
    pos within each anchor.
    """
    if M % 3 != 0 or M < 3:
        raise InvalidConfig(f"codebook size must be a positive multiple of 3, got {M}")
    if len(anchor_points) != M // 3:
        raise InvalidConfig(
            f"need {M // 3} anchor points for M={M}, got {len(anchor_points)}")
    codewords: list[Codeword] = []
    for anchor in anchor_points:
        g = ScenarioGeometry(sat=sat, ris=ris, user=anchor, z0=z0)
        triple = (
            (Family.COMM, comm_codeword(g, spec, budget, b, c=c)),
            (Family.BALANCED, balanced_codeword(g, spec, budget, b, c=c)),
            (Family.POS, pos_codeword(g, spec, b, budget=budget, c=c)),
        )
        for family, config in triple:
            codewords.append(Codeword(config=config, family=family,
                                      id=len(codewords), anchor=anchor))
    return Codebook(codewords=tuple(codewords), n_elements=spec.n_elements, bits=b)
