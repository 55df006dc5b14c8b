"""Monte Carlo harness, per-trial records, metrics, and experiment presets.

Every preset consumes one ExperimentConfig and emits tidy CSV tables plus a
JSON sidecar. Trials derive their RNG streams from (master seed, preset code,
trial index), so runs are bit-reproducible and safely parallelizable; within a
trial every compared scheme consumes the identical realization.

Scheme vocabulary
-----------------
direct_only      RIS off; communication reference only (PEB undefined).
comm_only        genie benchmark: max instantaneous SNR over the codebook.
pos_only         genie benchmark: min PEB over the codebook.
joint_alpha_*    genie joint selection at a fixed weight (P/B/C).
joint_nominal    genie joint selection at the blockage-driven weight.
joint_robust     deployed controller: nearest-anchor evaluation, Kalman-
                 filtered shadowing plus the conservative margin.
joint_nonrobust  deployed ablation: nearest-anchor evaluation, raw per-
                 codeword sweep measurements, no filter, no margin.
continuous       ideal continuous-phase upper bound (closed form).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import LargeScaleParams
from .codebook import Codebook
from .config import ExperimentConfig
from .controller import (EvalContext, codebook_metrics, nearest_anchor,
                         scan_utilities, select_alpha)
from .errors import InvalidInput
from .geometry import ScenarioGeometry, UserPos2D
from .positioning import DelayVarParams
from .shadowing import (KalmanParams, ShadowTracker, ar1_rho, evolve_shadow,
                        kf_step, shadow_measurement, worst_case_shadow)

PRESET_CODES = {
    "peb-vs-x": 1,
    "tradeoff-alpha": 2,
    "switching": 3,
    "family-vs-blockage": 4,
    "decision-map": 5,
    "psucc-surface": 6,
    "spatial-maps": 7,
    "summary-tables": 8,
}

GENIE_SCHEMES = ("comm_only", "pos_only", "joint_alpha_p", "joint_alpha_b",
                 "joint_alpha_c", "joint_nominal")
DEPLOYED_SCHEMES = ("joint_robust", "joint_nonrobust")

PSUCC_N_GRID = (64, 128, 256, 512, 1024)
PSUCC_B_GRID = (1, 2, 3, 4, 5, 6)
SWITCHING_RX_GRID = tuple(float(x) for x in np.logspace(-1.0, 1.25, 7))
FAMILY_XI_GRID = (0.02, 0.05, 0.08, 0.15, 0.22, 0.30, 0.50, 0.75, 1.0)
TRADEOFF_ALPHAS = 21


def rng_for(seed: int, preset: str, *index: int) -> np.random.Generator:
    """Independent generator for one trial of one preset."""
    key = (PRESET_CODES[preset],) + tuple(int(i) for i in index)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(p_hat * (1 - p_hat) / trials + z * z / (4 * trials ** 2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def success_indicator(gamma_db: float, peb_m: float, gamma_th_db: float,
                      eta_th_m: float) -> bool:
    """Joint requirement: SNR at/above threshold and PEB at/below threshold."""
    if gamma_th_db is None or eta_th_m <= 0:
        raise InvalidInput("thresholds must be set and positive")
    if not np.isfinite(peb_m):
        return False
    return bool(gamma_db >= gamma_th_db and peb_m <= eta_th_m)


def switching_rate(selected_ids) -> float:
    """Fraction of adjacent blocks whose selected codeword changed."""
    ids = list(selected_ids)
    if len(ids) < 2:
        raise InvalidInput("switching rate needs at least two selections")
    changes = sum(1 for a, b in zip(ids, ids[1:]) if a != b)
    return changes / (len(ids) - 1)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    block: int
    scheme: str
    user_x: float
    user_y: float
    xi_blk: float
    x_ru_true_db: float
    x_ru_believed_db: float
    mode: str
    codeword_id: int          # -1 when no codeword applies (direct/continuous)
    family: str
    gamma_db: float
    peb_m: float              # nan when censored
    success: bool
    censored: bool


@dataclass
class Metrics:
    avg_snr_db: float
    avg_peb_m: float
    p_succ: float
    p_succ_lo: float
    p_succ_hi: float
    censored: int
    n: int


def aggregate(records: list[TrialRecord]) -> Metrics:
    """Pool records of one scheme: linear-mean SNR, censor-aware PEB mean."""
    gammas = np.array([10.0 ** (r.gamma_db / 10.0) for r in records])
    pebs = np.array([r.peb_m for r in records])
    finite = np.isfinite(pebs)
    successes = sum(r.success for r in records)
    lo, hi = wilson_interval(successes, len(records))
    snr_ok = np.isfinite(gammas)
    return Metrics(
        avg_snr_db=float(10.0 * np.log10(gammas[snr_ok].mean())) if snr_ok.any() else float("nan"),
        avg_peb_m=float(pebs[finite].mean()) if finite.any() else float("nan"),
        p_succ=successes / len(records) if records else float("nan"),
        p_succ_lo=lo, p_succ_hi=hi,
        censored=int((~finite).sum()), n=len(records))


# ---------------------------------------------------------------------------
# simulation context and the per-block engine
# ---------------------------------------------------------------------------

@dataclass
class SimContext:
    """Config-derived objects shared by all trials of one preset run."""

    cfg: ExperimentConfig
    spec: object
    budget: object
    codebook: Codebook
    refs: object
    policy: object
    dvp: DelayVarParams
    fieldp: object
    r_x: float
    q_override: float | None
    nu: float
    gamma_th_db: float
    eta_th_m: float
    xi_range: tuple[float, float]

    @classmethod
    def from_config(cls, cfg: ExperimentConfig, n_elements: int | None = None,
                    bits: int | None = None) -> "SimContext":
        spec = cfg.ris_spec(n_elements)
        codebook = cfg.codebook(n_elements, bits)
        return cls(cfg=cfg, spec=spec, budget=cfg.budget(), codebook=codebook,
                   refs=cfg.refs(codebook, n_elements), policy=cfg.policy(),
                   dvp=cfg.delay_params(), fieldp=cfg.shadow_field(),
                   r_x=float(cfg["shadowing"]["r_x_db2"]),
                   q_override=cfg["shadowing"]["q_x_db2"],
                   nu=float(cfg["robust"]["nu"]),
                   gamma_th_db=float(cfg["thresholds"]["gamma_th_db"]),
                   eta_th_m=float(cfg["thresholds"]["eta_th_m"]),
                   xi_range=(float(cfg["blockage"]["xi_min"]),
                             float(cfg["blockage"]["xi_max"])))

    def large_scale(self, xi: float, shadow_db: float) -> LargeScaleParams:
        link = self.cfg["link"]
        return LargeScaleParams(atm_su_db=link["atm_su_db"],
                                atm_sr_db=link["atm_sr_db"],
                                excess_su_db=link["excess_su_db"],
                                excess_sr_db=link["excess_sr_db"],
                                shadow_ru_db=shadow_db, blockage=xi)

    def geometry(self, user: UserPos2D) -> ScenarioGeometry:
        return ScenarioGeometry(sat=self.cfg.sat, ris=self.cfg.ris, user=user,
                                z0=self.cfg.z0)

    def kalman(self, rho: float) -> KalmanParams:
        q = self.fieldp.stationary_q(rho) if self.q_override is None else self.q_override
        # rho == 1 freezes the state; keep a strictly valid filter
        return KalmanParams(q_x=max(q, 0.0), r_x=self.r_x)


@dataclass
class TrajectoryState:
    """Mutable per-trajectory state threaded through run_block."""

    rng: np.random.Generator
    user: UserPos2D
    xi: float
    x_true: float
    tracker: ShadowTracker
    rho: float
    step_m: float
    block: int = 0


def new_trajectory(sim: SimContext, rng: np.random.Generator,
                   user: UserPos2D | None = None, xi: float | None = None,
                   step_m: float = 0.0) -> TrajectoryState:
    """Fresh trajectory: random user/blockage unless pinned by the caller."""
    if user is None:
        user = UserPos2D(rng.uniform(*sim.cfg.region_x),
                         rng.uniform(*sim.cfg.region_y))
    if xi is None:
        xi = float(rng.uniform(*sim.xi_range))
    rho = ar1_rho(step_m, sim.fieldp.d_corr) if step_m > 0 else 1.0
    x0 = float(rng.normal(0.0, sim.fieldp.sigma_ru))
    tracker = ShadowTracker(estimate=0.0, variance=sim.fieldp.sigma_ru ** 2)
    return TrajectoryState(rng=rng, user=user, xi=xi, x_true=x0, tracker=tracker,
                           rho=rho, step_m=step_m)


def _continuous_closed_form(sim: SimContext, g: ScenarioGeometry,
                            params: LargeScaleParams) -> tuple[float, float]:
    """Ideal-phase SNR/PEB: every reflected term coherent with the direct path."""
    from .channel import direct_gain, ru_gain, sr_gain
    from .controller import _peb_vector
    from .geometry import delay_jacobian
    b_su = direct_gain(g, sim.budget, params)
    b_sr = sr_gain(g, sim.budget, params)
    b_ru = ru_gain(g, sim.budget, params.shadow_ru_db)
    amp_r = sim.spec.n_elements * np.sqrt(b_sr * b_ru)
    rho_snr = sim.budget.snr_scale
    gam = rho_snr * (np.sqrt(b_su) + amp_r) ** 2
    g_d = rho_snr * b_su
    g_r = rho_snr * amp_r ** 2
    peb_arr = _peb_vector(delay_jacobian(g), g_d, np.array([g_r]), sim.dvp)
    return float(gam), float(peb_arr[0])


def run_block(state: TrajectoryState, sim: SimContext,
              schemes: tuple[str, ...]) -> list[TrialRecord]:
    """Advance one coherence block and score every scheme on it.

    The block realization (user position, blockage, shadowing, pilot and sweep
    measurements) is drawn once and shared; selections differ only through
    each scheme's believed context. Realized metrics always use the truth.
    """
    rng = state.rng
    if state.block > 0:
        if state.step_m > 0:
            state.user = UserPos2D(min(state.user.x + state.step_m,
                                       sim.cfg.region_x[1]), state.user.y)
        state.x_true = evolve_shadow(state.x_true, state.rho,
                                     sim.kalman(state.rho).q_x, rng)

    kp = sim.kalman(state.rho)
    pilot = shadow_measurement(state.x_true, kp.r_x, rng)
    sweep = state.x_true + rng.normal(0.0, np.sqrt(kp.r_x), size=len(sim.codebook))
    state.tracker = kf_step(state.tracker, state.rho, pilot, kp)
    x_wc = worst_case_shadow(state.tracker, sim.nu)

    alpha, mode = select_alpha(state.xi, sim.policy)
    params_true = sim.large_scale(state.xi, state.x_true)
    g_true = sim.geometry(state.user)
    mt = codebook_metrics(sim.codebook, EvalContext(
        g=g_true, spec=sim.spec, budget=sim.budget, params=params_true,
        dvp=sim.dvp))

    anchor = nearest_anchor(sim.codebook, state.user)
    g_anchor = sim.geometry(anchor)

    def believed_metrics(level):
        return codebook_metrics(sim.codebook, EvalContext(
            g=g_anchor, spec=sim.spec, budget=sim.budget, params=params_true,
            dvp=sim.dvp, x_ru_believed=level))

    fixed_alphas = {"joint_alpha_p": sim.policy.alpha_p,
                    "joint_alpha_b": sim.policy.alpha_b,
                    "joint_alpha_c": sim.policy.alpha_c,
                    "joint_nominal": alpha}

    records = []
    for scheme in schemes:
        idx = -1
        family = ""
        believed_db = state.x_true
        if scheme == "direct_only":
            gamma_db = 10.0 * np.log10(mt.gamma_d)
            peb_m = float("nan")
        elif scheme == "continuous":
            gam, peb_m = _continuous_closed_form(sim, g_true, params_true)
            gamma_db = 10.0 * np.log10(gam)
        else:
            if scheme == "comm_only":
                idx = int(np.argmax(mt.gamma))
            elif scheme == "pos_only":
                finite = np.isfinite(mt.peb)
                if not finite.any():
                    records.append(TrialRecord(
                        trial=-1, block=state.block, scheme=scheme,
                        user_x=state.user.x, user_y=state.user.y,
                        xi_blk=state.xi, x_ru_true_db=state.x_true,
                        x_ru_believed_db=believed_db, mode=mode.value,
                        codeword_id=-1, family="", gamma_db=float("nan"),
                        peb_m=float("nan"), success=False, censored=True))
                    continue
                idx = int(np.argmin(np.where(finite, mt.peb, np.inf)))
            elif scheme in fixed_alphas:
                idx = int(np.argmax(scan_utilities(mt, fixed_alphas[scheme],
                                                   sim.refs)))
            elif scheme == "joint_robust":
                believed_db = x_wc
                idx = int(np.argmax(scan_utilities(believed_metrics(x_wc),
                                                   alpha, sim.refs)))
            elif scheme == "joint_nonrobust":
                believed_db = float(sweep.mean())
                idx = int(np.argmax(scan_utilities(believed_metrics(sweep),
                                                   alpha, sim.refs)))
            else:
                raise InvalidInput(f"unknown scheme: {scheme}")
            family = sim.codebook.codewords[idx].family.value
            gamma_db = 10.0 * np.log10(mt.gamma[idx])
            peb_m = float(mt.peb[idx])
        records.append(TrialRecord(
            trial=-1, block=state.block, scheme=scheme, user_x=state.user.x,
            user_y=state.user.y, xi_blk=state.xi, x_ru_true_db=state.x_true,
            x_ru_believed_db=believed_db, mode=mode.value, codeword_id=idx,
            family=family, gamma_db=float(gamma_db), peb_m=peb_m,
            success=success_indicator(float(gamma_db), peb_m, sim.gamma_th_db,
                                      sim.eta_th_m),
            censored=not np.isfinite(peb_m)))
    state.block += 1
    return records


def static_trial(sim: SimContext, rng: np.random.Generator,
                 schemes: tuple[str, ...], trial_idx: int,
                 user: UserPos2D | None = None,
                 xi: float | None = None) -> list[TrialRecord]:
    """One independent single-block trial.

    The tracker is warmed with a few pilot-only blocks first: the deployed
    controller is mid-operation, not cold-starting, when a block is scored.
    """
    state = new_trajectory(sim, rng, user=user, xi=xi, step_m=0.0)
    kp = sim.kalman(state.rho)
    for _ in range(int(sim.cfg["trials"]["tracker_warmup"])):
        pilot = shadow_measurement(state.x_true, kp.r_x, rng)
        state.tracker = kf_step(state.tracker, state.rho, pilot, kp)
    records = run_block(state, sim, schemes)
    return [_with_trial(r, trial_idx) for r in records]


def _with_trial(r: TrialRecord, idx: int) -> TrialRecord:
    return TrialRecord(**{**r.__dict__, "trial": idx})


# ---------------------------------------------------------------------------
# CSV plumbing
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if not np.isfinite(value) else format(float(value), ".10g")
    return str(value)


@dataclass
class PresetResult:
    name: str
    tables: dict  # filename stem -> (header tuple, list of row dicts)
    sidecar: dict


def write_result(result: PresetResult, out_dir: str | Path) -> list[Path]:
    """Write every table plus the JSON sidecar; returns the file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for stem, (header, rows) in result.tables.items():
        path = out / f"{stem}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(row[col]) for col in header])
        paths.append(path)
    sidecar_path = out / f"{result.name.replace('-', '_')}.json"
    sidecar_path.write_text(json.dumps(result.sidecar, indent=2, sort_keys=True),
                            encoding="utf-8")
    paths.append(sidecar_path)
    return paths


def _sidecar(cfg: ExperimentConfig, preset: str, **extra) -> dict:
    return {"preset": preset, "seed": cfg.seed, "config": cfg.to_dict(), **extra}


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def preset_peb_vs_x(cfg: ExperimentConfig) -> PresetResult:
    """Average PEB/SNR across the street for four selection strategies."""
    sim = SimContext.from_config(cfg)
    schemes = ("comm_only", "pos_only", "joint_nonrobust", "joint_robust")
    xs = np.linspace(*cfg.region_x, int(cfg["trials"]["grid_nx"]))
    y_mid = cfg.region_center.y
    n_real = int(cfg["trials"]["peb_realizations"])
    rows = []
    for ix, x in enumerate(xs):
        pooled = {s: [] for s in schemes}
        for r in range(n_real):
            rng = rng_for(cfg.seed, "peb-vs-x", ix, r)
            for rec in static_trial(sim, rng, schemes, r,
                                    user=UserPos2D(float(x), y_mid)):
                pooled[rec.scheme].append(rec)
        for scheme in schemes:
            m = aggregate(pooled[scheme])
            rows.append({"x_m": float(x), "scheme": scheme,
                         "avg_peb_m": m.avg_peb_m, "avg_snr_db": m.avg_snr_db,
                         "trials": m.n, "censored": m.censored})
    header = ("x_m", "scheme", "avg_peb_m", "avg_snr_db", "trials", "censored")
    return PresetResult("peb-vs-x", {"peb_vs_x": (header, rows)},
                        _sidecar(cfg, "peb-vs-x", y_m=y_mid))


def preset_tradeoff_alpha(cfg: ExperimentConfig) -> PresetResult:
    """SNR-PEB tradeoff of the joint design as alpha sweeps 0..1."""
    sim = SimContext.from_config(cfg)
    n_real = int(cfg["trials"]["tradeoff_realizations"])
    alphas = [float(a) for a in np.linspace(0.0, 1.0, TRADEOFF_ALPHAS)]
    marked = [sim.policy.alpha_p, sim.policy.alpha_b, sim.policy.alpha_c]
    for m in marked:
        near = int(np.argmin([abs(a - m) for a in alphas]))
        if abs(alphas[near] - m) < 1e-9:
            alphas[near] = m   # snap the sweep point onto the exact weight
        else:
            alphas.append(m)
    alphas = sorted(alphas)

    # metrics are alpha-independent: compute each realization once
    per_real = []
    for r in range(n_real):
        rng = rng_for(cfg.seed, "tradeoff-alpha", r)
        state = new_trajectory(sim, rng)
        params = sim.large_scale(state.xi, state.x_true)
        g = sim.geometry(state.user)
        mt = codebook_metrics(sim.codebook, EvalContext(
            g=g, spec=sim.spec, budget=sim.budget, params=params, dvp=sim.dvp))
        cont = _continuous_closed_form(sim, g, params)
        per_real.append((mt, cont))

    rows = []
    for alpha in alphas:
        sel_gam, sel_peb = [], []
        cont_gam, cont_peb = [], []
        for mt, cont in per_real:
            idx = int(np.argmax(scan_utilities(mt, alpha, sim.refs)))
            sel_gam.append(mt.gamma[idx])
            sel_peb.append(mt.peb[idx])
            cont_gam.append(cont[0])
            cont_peb.append(cont[1])
        is_marked = any(abs(alpha - m) < 1e-12 for m in marked)
        for scheme, gams, pebs in (("joint", sel_gam, sel_peb),
                                   ("continuous", cont_gam, cont_peb)):
            gams = np.array(gams)
            pebs = np.array(pebs)
            finite = np.isfinite(pebs)
            rows.append({
                "alpha": alpha, "scheme": scheme,
                "avg_snr_db": float(10 * np.log10(gams.mean())),
                "avg_peb_m": float(pebs[finite].mean()) if finite.any() else float("nan"),
                "marked": is_marked, "trials": len(gams),
                "censored": int((~finite).sum())})

    for scheme in ("comm_only", "pos_only"):
        recs = []
        for r, (mt, _) in enumerate(per_real):
            if scheme == "comm_only":
                idx = int(np.argmax(mt.gamma))
            else:
                finite = np.isfinite(mt.peb)
                if not finite.any():
                    continue
                idx = int(np.argmin(np.where(finite, mt.peb, np.inf)))
            recs.append((mt.gamma[idx], mt.peb[idx]))
        gams = np.array([a for a, _ in recs])
        pebs = np.array([b for _, b in recs])
        finite = np.isfinite(pebs)
        rows.append({"alpha": float("nan"), "scheme": scheme,
                     "avg_snr_db": float(10 * np.log10(gams.mean())),
                     "avg_peb_m": float(pebs[finite].mean()) if finite.any() else float("nan"),
                     "marked": False, "trials": len(recs),
                     "censored": int((~finite).sum())})

    header = ("alpha", "scheme", "avg_snr_db", "avg_peb_m", "marked", "trials",
              "censored")
    return PresetResult("tradeoff-alpha", {"tradeoff_alpha": (header, rows)},
                        _sidecar(cfg, "tradeoff-alpha",
                                 gamma_th_db=sim.gamma_th_db,
                                 eta_th_m=sim.eta_th_m,
                                 marked_alphas=marked))


def _switching_cell(cfg_data: dict, rx_db2: float, rx_index: int,
                    n_traj: int) -> dict:
    """All trajectories of one shadowing-noise level (worker-safe)."""
    cfg = ExperimentConfig(data=cfg_data)
    sim = SimContext.from_config(cfg)
    sim.r_x = float(rx_db2)
    blocks = int(cfg["trials"]["trajectory_blocks"])
    step = float(cfg["trials"]["trajectory_step_m"])
    schemes = ("joint_robust", "joint_nonrobust")
    rates = {s: [] for s in schemes}
    gams = {s: [] for s in schemes}
    pebs = {s: [] for s in schemes}
    for t in range(n_traj):
        rng = rng_for(cfg.seed, "switching", rx_index, t)
        state = new_trajectory(sim, rng, step_m=step)
        ids = {s: [] for s in schemes}
        for _ in range(blocks):
            for rec in run_block(state, sim, schemes):
                ids[rec.scheme].append(rec.codeword_id)
                gams[rec.scheme].append(10 ** (rec.gamma_db / 10.0))
                if np.isfinite(rec.peb_m):
                    pebs[rec.scheme].append(rec.peb_m)
        for s in schemes:
            rates[s].append(switching_rate(ids[s]))
    out = {"rx_db2": float(rx_db2)}
    for s in schemes:
        arr = np.array(rates[s])
        out[s] = {"rate": float(arr.mean()),
                  "rate_se": float(arr.std(ddof=1) / np.sqrt(len(arr))),
                  "avg_snr_db": float(10 * np.log10(np.mean(gams[s]))),
                  "avg_peb_m": float(np.mean(pebs[s]))}
    diff = np.array(rates["joint_nonrobust"]) - np.array(rates["joint_robust"])
    out["diff_mean"] = float(diff.mean())
    out["diff_se"] = float(diff.std(ddof=1) / np.sqrt(len(diff)))
    return out


def preset_switching(cfg: ExperimentConfig, jobs: int = 1) -> PresetResult:
    """Codeword switching rate vs shadowing-estimation noise (robust ablation)."""
    n_traj = int(cfg["trials"]["switching_trajectories"])
    cells = _parallel(_switching_cell,
                      [(cfg.to_dict(), rx, i, n_traj)
                       for i, rx in enumerate(SWITCHING_RX_GRID)], jobs)
    rows = []
    for cell in cells:
        for scheme in ("joint_robust", "joint_nonrobust"):
            stats = cell[scheme]
            rows.append({"rx_db2": cell["rx_db2"], "scheme": scheme,
                         "switching_rate": stats["rate"],
                         "rate_se": stats["rate_se"],
                         "avg_snr_db": stats["avg_snr_db"],
                         "avg_peb_m": stats["avg_peb_m"],
                         "trajectories": n_traj})
        rows.append({"rx_db2": cell["rx_db2"], "scheme": "paired_diff",
                     "switching_rate": cell["diff_mean"],
                     "rate_se": cell["diff_se"],
                     "avg_snr_db": float("nan"), "avg_peb_m": float("nan"),
                     "trajectories": n_traj})
    header = ("rx_db2", "scheme", "switching_rate", "rate_se", "avg_snr_db",
              "avg_peb_m", "trajectories")
    return PresetResult("switching", {"switching": (header, rows)},
                        _sidecar(cfg, "switching", rx_grid=list(SWITCHING_RX_GRID)))


def preset_family_vs_blockage(cfg: ExperimentConfig) -> PresetResult:
    """Selection probability of the codeword families vs blockage factor."""
    sim = SimContext.from_config(cfg)
    n_per_bin = int(cfg["trials"]["family_trials_per_bin"])
    rows = []
    for ib, xi in enumerate(FAMILY_XI_GRID):
        counts = {"comm": 0, "balanced": 0, "pos": 0}
        for t in range(n_per_bin):
            rng = rng_for(cfg.seed, "family-vs-blockage", ib, t)
            recs = static_trial(sim, rng, ("joint_robust",), t, xi=float(xi))
            counts[recs[0].family] += 1
        _, mode = select_alpha(float(xi), sim.policy)
        for family in ("comm", "balanced", "pos"):
            lo, hi = wilson_interval(counts[family], n_per_bin)
            rows.append({"xi_blk": float(xi), "family": family,
                         "prob": counts[family] / n_per_bin,
                         "lo": lo, "hi": hi, "n": n_per_bin,
                         "mode": mode.value})
    header = ("xi_blk", "family", "prob", "lo", "hi", "n", "mode")
    return PresetResult("family-vs-blockage",
                        {"family_vs_blockage": (header, rows)},
                        _sidecar(cfg, "family-vs-blockage",
                                 xi_grid=list(FAMILY_XI_GRID)))


def preset_decision_map(cfg: ExperimentConfig) -> PresetResult:
    """Operating-mode regions over user x-position and blockage factor."""
    sim = SimContext.from_config(cfg)
    xs = np.linspace(*cfg.region_x, int(cfg["trials"]["grid_nx"]))
    xis = np.linspace(sim.xi_range[0], sim.xi_range[1], 21)
    rows = []
    for x in xs:
        for xi in xis:
            alpha, mode = select_alpha(float(xi), sim.policy)
            rows.append({"x_m": float(x), "xi_blk": float(xi),
                         "mode": mode.value, "alpha": alpha})
    header = ("x_m", "xi_blk", "mode", "alpha")
    return PresetResult("decision-map", {"decision_map": (header, rows)},
                        _sidecar(cfg, "decision-map"))


def _psucc_cell(cfg_data: dict, n_elements: int, bits: int,
                n_trials: int) -> dict:
    cfg = ExperimentConfig(data=cfg_data)
    sim = SimContext.from_config(cfg, n_elements=n_elements, bits=bits)
    successes = 0
    censored = 0
    for t in range(n_trials):
        # identical realizations for every (N, b) cell: common random numbers
        rng = rng_for(cfg.seed, "psucc-surface", t)
        rec = static_trial(sim, rng, ("joint_robust",), t)[0]
        successes += rec.success
        censored += rec.censored
    lo, hi = wilson_interval(successes, n_trials)
    return {"n_elements": n_elements, "bits": bits,
            "p_succ": successes / n_trials, "lo": lo, "hi": hi,
            "trials": n_trials, "censored": censored}


def preset_psucc_surface(cfg: ExperimentConfig, jobs: int = 1) -> PresetResult:
    """Joint success probability over RIS size and phase resolution."""
    n_trials = int(cfg["trials"]["psucc_trials"])
    tasks = [(cfg.to_dict(), n, b, n_trials)
             for n in PSUCC_N_GRID for b in PSUCC_B_GRID]
    cells = _parallel(_psucc_cell, tasks, jobs)
    header = ("n_elements", "bits", "p_succ", "lo", "hi", "trials", "censored")
    return PresetResult("psucc-surface", {"psucc_surface": (header, cells)},
                        _sidecar(cfg, "psucc-surface",
                                 n_grid=list(PSUCC_N_GRID),
                                 b_grid=list(PSUCC_B_GRID)))


def preset_spatial_maps(cfg: ExperimentConfig) -> PresetResult:
    """Average received SNR and PEB over the 2-D service region."""
    sim = SimContext.from_config(cfg)
    xs = np.linspace(*cfg.region_x, int(cfg["trials"]["grid_nx"]))
    ys = np.linspace(*cfg.region_y, int(cfg["trials"]["grid_ny"]))
    n_real = int(cfg["trials"]["map_realizations"])
    rows = []
    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            recs = []
            for r in range(n_real):
                rng = rng_for(cfg.seed, "spatial-maps", ix, iy, r)
                recs += static_trial(sim, rng, ("joint_robust",), r,
                                     user=UserPos2D(float(x), float(y)))
            m = aggregate(recs)
            rows.append({"x_m": float(x), "y_m": float(y),
                         "avg_snr_db": m.avg_snr_db, "avg_peb_m": m.avg_peb_m,
                         "trials": m.n, "censored": m.censored})
    header = ("x_m", "y_m", "avg_snr_db", "avg_peb_m", "trials", "censored")
    return PresetResult("spatial-maps", {"spatial_maps": (header, rows)},
                        _sidecar(cfg, "spatial-maps"))


def preset_summary_tables(cfg: ExperimentConfig, jobs: int = 1) -> PresetResult:
    """Headline metrics per scheme plus the switching-stability summary."""
    sim = SimContext.from_config(cfg)
    schemes = ("direct_only", "comm_only", "pos_only", "joint_alpha_p",
               "joint_alpha_b", "joint_alpha_c", "joint_nonrobust",
               "joint_robust", "continuous")
    n_trials = int(cfg["trials"]["ordering_trials"])
    pooled = {s: [] for s in schemes}
    for t in range(n_trials):
        rng = rng_for(cfg.seed, "summary-tables", t)
        for rec in static_trial(sim, rng, schemes, t):
            pooled[rec.scheme].append(rec)
    default_rows = []
    for scheme in schemes:
        m = aggregate(pooled[scheme])
        default_rows.append({"scheme": scheme, "avg_snr_db": m.avg_snr_db,
                             "avg_peb_m": m.avg_peb_m, "p_succ": m.p_succ,
                             "p_succ_lo": m.p_succ_lo, "p_succ_hi": m.p_succ_hi,
                             "trials": m.n, "censored": m.censored})

    # switching summary over a reduced sweep
    n_traj = max(int(cfg["trials"]["switching_trajectories"]) // 4, 20)
    rx_points = [SWITCHING_RX_GRID[0], SWITCHING_RX_GRID[len(SWITCHING_RX_GRID) // 2],
                 SWITCHING_RX_GRID[-1]]
    cells = _parallel(_switching_cell,
                      [(cfg.to_dict(), rx, 100 + i, n_traj)
                       for i, rx in enumerate(rx_points)], jobs)
    agg = {s: {"rate": [], "snr": [], "peb": []}
           for s in ("joint_robust", "joint_nonrobust")}
    for cell in cells:
        for s in agg:
            agg[s]["rate"].append(cell[s]["rate"])
            agg[s]["snr"].append(10 ** (cell[s]["avg_snr_db"] / 10.0))
            agg[s]["peb"].append(cell[s]["avg_peb_m"])
    non = agg["joint_nonrobust"]
    rob = agg["joint_robust"]
    non_snr = 10 * np.log10(np.mean(non["snr"]))
    rob_snr = 10 * np.log10(np.mean(rob["snr"]))
    switching_rows = [
        {"design": "non_robust", "switch_rate": float(np.mean(non["rate"])),
         "d_snr_db": 0.0, "d_peb_pct": 0.0},
        {"design": "robust", "switch_rate": float(np.mean(rob["rate"])),
         "d_snr_db": float(rob_snr - non_snr),
         "d_peb_pct": float(100.0 * (np.mean(rob["peb"]) - np.mean(non["peb"]))
                            / np.mean(non["peb"]))},
    ]
    return PresetResult(
        "summary-tables",
        {"summary_default": (("scheme", "avg_snr_db", "avg_peb_m", "p_succ",
                              "p_succ_lo", "p_succ_hi", "trials", "censored"),
                             default_rows),
         "summary_switching": (("design", "switch_rate", "d_snr_db",
                                "d_peb_pct"), switching_rows)},
        _sidecar(cfg, "summary-tables", switching_rx_points=rx_points,
                 switching_trajectories=n_traj))


def _parallel(fn, tasks: list[tuple], jobs: int) -> list:
    """Map over tasks, optionally with processes; result order is task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(*task) for task in tasks]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_star_apply, [(fn, t) for t in tasks]))


def _star_apply(packed):
    fn, task = packed
    return fn(*task)


PRESETS = {
    "peb-vs-x": preset_peb_vs_x,
    "tradeoff-alpha": preset_tradeoff_alpha,
    "switching": preset_switching,
    "family-vs-blockage": preset_family_vs_blockage,
    "decision-map": preset_decision_map,
    "psucc-surface": preset_psucc_surface,
    "spatial-maps": preset_spatial_maps,
    "summary-tables": preset_summary_tables,
}

PARALLEL_PRESETS = {"switching", "psucc-surface", "summary-tables"}


def run_preset(name: str, cfg: ExperimentConfig, jobs: int = 1) -> PresetResult:
    if name not in PRESETS:
        raise InvalidInput(f"unknown preset: {name}")
    if name in PARALLEL_PRESETS:
        return PRESETS[name](cfg, jobs=jobs)
    return PRESETS[name](cfg)
