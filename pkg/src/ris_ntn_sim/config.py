"""Experiment configuration: defaults, JSON loading, validation, serialization.

The default values reproduce the main simulation parameter table of the
modeled scenario; every preset reads one ExperimentConfig so a single file
regenerates every output. Unknown keys are hard errors; omitted keys take the
defaults; an empty file means "all defaults".
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .channel import LinkBudget, RISSpec, link_budget
from .codebook import Codebook, build_codebook, default_anchors
from .controller import ModePolicy, UtilityRefs, compute_refs
from .errors import ParseError, ValidationError
from .geometry import UserPos2D, Vec3
from .positioning import DelayVarParams
from .shadowing import ShadowFieldParams

DEFAULTS: dict = {
    "geometry": {
        "sat": [350000.0, 0.0, 600000.0],
        "ris": [100.0, 0.0, 20.0],
        "z0": 1.5,
        "region_x": [30.0, 50.0],
        "region_y": [15.0, 35.0],
    },
    "link": {
        "carrier_freq_hz": 2.2e9,
        "bandwidth_hz": 20e6,
        "noise_figure_db": 7.0,
        "eirp_density_dbw_per_mhz": 31.0,
        "atm_su_db": 1.0,
        "atm_sr_db": 0.8,
        "excess_su_db": 0.0,
        "excess_sr_db": 0.0,
    },
    "ris": {
        "n_elements": 256,
        "bits": 2,
        "codebook_size": 9,
    },
    "shadowing": {
        "sigma_ru_db": 6.0,
        "d_corr_m": 20.0,
        "r_x_db2": 1.0,
        "q_x_db2": None,  # None: stationary truth sigma^2*(1-rho^2)
    },
    "policy": {
        "xi_l": 0.08,
        "xi_h": 0.30,
        "alpha_c": 0.92,
        "alpha_b": 0.55,
        "alpha_p": 0.15,
    },
    "robust": {
        "nu": 1.2,
    },
    "thresholds": {
        "gamma_th_db": 6.0,
        "eta_th_m": 18.0,
    },
    "blockage": {
        "xi_min": 0.01,
        "xi_max": 1.0,
    },
    "delay": {
        "kappa_d": 1e-2,
        "kappa_r": 1e-2,
    },
    "trials": {
        "tradeoff_realizations": 300,
        "switching_trajectories": 260,
        "trajectory_blocks": 40,
        "trajectory_step_m": 1.0,
        "tracker_warmup": 8,
        "family_trials_per_bin": 2000,
        "ordering_trials": 5000,
        "psucc_trials": 400,
        "peb_realizations": 200,
        "map_realizations": 50,
        "grid_nx": 25,
        "grid_ny": 8,
    },
    "seed": 20250809,
}


@dataclass
class ExperimentConfig:
    """Validated simulation parameters; see DEFAULTS for the schema."""

    data: dict = field(default_factory=lambda: copy.deepcopy(DEFAULTS))

    # -- section accessors -------------------------------------------------
    def __getitem__(self, section: str):
        return self.data[section]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    @property
    def sat(self) -> Vec3:
        return Vec3(*self.data["geometry"]["sat"])

    @property
    def ris(self) -> Vec3:
        return Vec3(*self.data["geometry"]["ris"])

    @property
    def z0(self) -> float:
        return float(self.data["geometry"]["z0"])

    @property
    def region_x(self) -> tuple[float, float]:
        return tuple(self.data["geometry"]["region_x"])

    @property
    def region_y(self) -> tuple[float, float]:
        return tuple(self.data["geometry"]["region_y"])

    @property
    def region_center(self) -> UserPos2D:
        rx, ry = self.region_x, self.region_y
        return UserPos2D(0.5 * (rx[0] + rx[1]), 0.5 * (ry[0] + ry[1]))

    def budget(self) -> LinkBudget:
        link = self.data["link"]
        return link_budget(link["eirp_density_dbw_per_mhz"], link["bandwidth_hz"],
                           link["noise_figure_db"], link["carrier_freq_hz"])

    def ris_spec(self, n_elements: int | None = None) -> RISSpec:
        return RISSpec(n_elements=n_elements or int(self.data["ris"]["n_elements"]))

    def policy(self) -> ModePolicy:
        return ModePolicy(**self.data["policy"])

    def delay_params(self) -> DelayVarParams:
        return DelayVarParams(kappa_d=self.data["delay"]["kappa_d"],
                              kappa_r=self.data["delay"]["kappa_r"],
                              bandwidth=self.data["link"]["bandwidth_hz"])

    def shadow_field(self) -> ShadowFieldParams:
        return ShadowFieldParams(sigma_ru=self.data["shadowing"]["sigma_ru_db"],
                                 d_corr=self.data["shadowing"]["d_corr_m"])

    def anchors(self) -> list[UserPos2D]:
        return default_anchors(self.region_x, self.region_y,
                               int(self.data["ris"]["codebook_size"]) // 3)

    def codebook(self, n_elements: int | None = None,
                 bits: int | None = None) -> Codebook:
        return build_codebook(self.sat, self.ris, self.z0,
                              self.ris_spec(n_elements), self.budget(),
                              bits or int(self.data["ris"]["bits"]),
                              int(self.data["ris"]["codebook_size"]),
                              self.anchors())

    def refs(self, codebook: Codebook, n_elements: int | None = None) -> UtilityRefs:
        return compute_refs(self.sat, self.ris, self.z0,
                            self.ris_spec(n_elements), self.budget(), codebook,
                            self.delay_params(), self.region_center)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def serialize(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True)


def _merge(base: dict, override: dict, path: str, problems: list[str]) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ParseError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                problems.append(f"{here}: expected an object")
                continue
            out[key] = _merge(base[key], value, here, problems)
        else:
            out[key] = value
    return out


def _validate(data: dict) -> list[str]:
    bad: list[str] = []

    def check(cond: bool, msg: str):
        if not cond:
            bad.append(msg)

    geo = data["geometry"]
    check(len(geo["sat"]) == 3 and len(geo["ris"]) == 3,
          "geometry.sat/ris must be 3-vectors")
    if len(geo["sat"]) == 3 and len(geo["ris"]) == 3:
        check(geo["sat"][2] > geo["ris"][2] > geo["z0"] >= 0,
              "geometry: need sat z > ris z > z0 >= 0")
    check(geo["region_x"][0] < geo["region_x"][1], "geometry.region_x is empty")
    check(geo["region_y"][0] < geo["region_y"][1], "geometry.region_y is empty")

    link = data["link"]
    check(link["carrier_freq_hz"] > 0, "link.carrier_freq_hz must be positive")
    check(link["bandwidth_hz"] > 0, "link.bandwidth_hz must be positive")

    ris = data["ris"]
    check(ris["n_elements"] >= 1, "ris.n_elements must be >= 1")
    check(ris["bits"] >= 1, "ris.bits must be >= 1")
    check(ris["codebook_size"] >= 3 and ris["codebook_size"] % 3 == 0,
          "ris.codebook_size must be a positive multiple of 3")

    sh = data["shadowing"]
    check(sh["sigma_ru_db"] >= 0, "shadowing.sigma_ru_db must be nonnegative")
    check(sh["d_corr_m"] > 0, "shadowing.d_corr_m must be positive")
    check(sh["r_x_db2"] > 0, "shadowing.r_x_db2 must be positive")
    if sh["q_x_db2"] is not None:
        check(sh["q_x_db2"] >= 0, "shadowing.q_x_db2 must be nonnegative")

    pol = data["policy"]
    check(0 < pol["xi_l"] < pol["xi_h"] <= 1,
          "policy: need 0 < xi_l < xi_h <= 1")
    check(1 >= pol["alpha_c"] > pol["alpha_b"] > pol["alpha_p"] >= 0,
          "policy: need 1 >= alpha_c > alpha_b > alpha_p >= 0")

    check(data["robust"]["nu"] >= 0, "robust.nu must be nonnegative")

    th = data["thresholds"]
    check(th["eta_th_m"] > 0, "thresholds.eta_th_m must be positive")

    blk = data["blockage"]
    check(0 < blk["xi_min"] <= blk["xi_max"] <= 1,
          "blockage: need 0 < xi_min <= xi_max <= 1")

    dl = data["delay"]
    check(dl["kappa_d"] > 0 and dl["kappa_r"] > 0,
          "delay coefficients must be positive")

    for key, value in data["trials"].items():
        if key in ("trajectory_step_m", "tracker_warmup"):
            check(value >= 0, f"trials.{key} must be nonnegative")
        else:
            check(int(value) >= 1, f"trials.{key} must be >= 1")

    check(int(data["seed"]) >= 0, "seed must be nonnegative")
    return bad


def config_from_dict(raw: dict) -> ExperimentConfig:
    problems: list[str] = []
    merged = _merge(DEFAULTS, raw, "", problems)
    problems += _validate(merged)
    if problems:
        raise ValidationError("; ".join(problems))
    return ExperimentConfig(data=merged)


def load_config(path: str | Path) -> ExperimentConfig:
    """Load a JSON config; an empty file yields the full default config."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return config_from_dict({})
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return config_from_dict(raw)
