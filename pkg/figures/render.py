#!/usr/bin/env python3
"""Render simulator CSV outputs into publication-style figures.

Usage:
    python render.py <preset> <csv> <out.png> [--dpi D] [--width W --height H]

One figure per experiment preset; all semantics come from the CSV and its
JSON sidecar (written next to the CSV by the simulator) - nothing is
recomputed. Rendering is deterministic: the same CSV renders to the same
bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib import cm  # noqa: E402


class SchemaError(ValueError):
    """CSV columns do not match the preset's documented header."""


EXPECTED_COLUMNS = {
    "peb-vs-x": ("x_m", "scheme", "avg_peb_m", "avg_snr_db", "trials",
                 "censored"),
    "tradeoff-alpha": ("alpha", "scheme", "avg_snr_db", "avg_peb_m", "marked",
                       "trials", "censored"),
    "switching": ("rx_db2", "scheme", "switching_rate", "rate_se",
                  "avg_snr_db", "avg_peb_m", "trajectories"),
    "family-vs-blockage": ("xi_blk", "family", "prob", "lo", "hi", "n", "mode"),
    "decision-map": ("x_m", "xi_blk", "mode", "alpha"),
    "psucc-surface": ("n_elements", "bits", "p_succ", "lo", "hi", "trials",
                      "censored"),
    "spatial-maps": ("x_m", "y_m", "avg_snr_db", "avg_peb_m", "trials",
                     "censored"),
}

STYLE = {
    "font.size": 8,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linestyle": "--",
    "lines.linewidth": 1.2,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}

SCHEME_STYLES = {
    "comm_only": dict(color="#d62728", marker="s", label="Comm-only RIS"),
    "pos_only": dict(color="#1f77b4", marker="o", label="Positioning-oriented RIS"),
    "joint_nonrobust": dict(color="#ff7f0e", marker="^", label="Joint RIS (non-robust)"),
    "joint_robust": dict(color="#2ca02c", marker="d", label="Joint RIS (robust)"),
}

FAMILY_STYLES = {
    "comm": dict(color="#d62728", label="Communication-oriented"),
    "balanced": dict(color="#ff7f0e", label="Balanced"),
    "pos": dict(color="#1f77b4", label="Positioning-oriented"),
}


def read_table(csv_path: Path, preset: str) -> list[dict]:
    """Load one preset CSV, validating the header against the schema."""
    expected = EXPECTED_COLUMNS[preset]
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != expected:
            raise SchemaError(
                f"{csv_path}: columns {reader.fieldnames} != expected {expected}")
        rows = list(reader)
    out = []
    for raw in rows:
        row = {}
        for key, value in raw.items():
            try:
                row[key] = float(value)
            except ValueError:
                row[key] = value
        out.append(row)
    return out


def read_sidecar(csv_path: Path) -> dict:
    """Sidecar JSON written by the simulator next to its CSV tables."""
    for candidate in sorted(csv_path.parent.glob("*.json")):
        payload = json.loads(candidate.read_text(encoding="utf-8"))
        if isinstance(payload, dict) and "preset" in payload:
            stem = payload["preset"].replace("-", "_")
            if csv_path.stem.startswith(stem.split("_")[0]) or \
                    candidate.stem == stem:
                return payload
    return {}


def tradeoff_targets(sidecar: dict) -> tuple[float, float]:
    """(eta_th_m, gamma_th_db) corner of the joint requirement region."""
    eta = float(sidecar.get("eta_th_m", 18.0))
    gamma = float(sidecar.get("gamma_th_db", 6.0))
    return eta, gamma


def _empty_axes_figure(title: str, note: str) -> plt.Figure:
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.set_title(title)
    ax.annotate(f"no data: {note}", xy=(0.5, 0.5), xycoords="axes fraction",
                ha="center", va="center", color="0.4")
    return fig


def figure_peb_vs_x(rows: list[dict], sidecar: dict) -> plt.Figure:
    """PEB across the street per scheme, plus the robust-vs-non-robust gain."""
    if not rows:
        return _empty_axes_figure("Average PEB vs user x-position", "empty CSV")
    fig, (ax, ax2) = plt.subplots(
        2, 1, figsize=(4.4, 4.6), sharex=True,
        gridspec_kw={"height_ratios": [2.2, 1.0]})
    by_scheme: dict = {}
    for r in rows:
        by_scheme.setdefault(r["scheme"], []).append((r["x_m"], r["avg_peb_m"]))
    for scheme, style in SCHEME_STYLES.items():
        pts = sorted(by_scheme.get(scheme, []))
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, markersize=3.5, **style)
    ax.set_ylabel("Average PEB [m]")
    ax.legend(loc="best")

    robust = dict(sorted(by_scheme.get("joint_robust", [])))
    nominal = dict(sorted(by_scheme.get("joint_nonrobust", [])))
    common = sorted(set(robust) & set(nominal))
    if common:
        reduction = [100.0 * (nominal[x] - robust[x]) / nominal[x]
                     for x in common]
        ax2.bar(common, reduction, width=(common[-1] - common[0] + 1e-9) / (len(common) * 1.6),
                color="#2ca02c", alpha=0.8)
        peak = int(np.argmax(reduction))
        ax2.annotate(f"max {reduction[peak]:.2f}% @ x={common[peak]:.1f} m",
                     xy=(common[peak], reduction[peak]),
                     xytext=(0, 4), textcoords="offset points",
                     ha="center", fontsize=7)
    ax2.axhline(0.0, color="0.3", linewidth=0.8)
    ax2.set_xlabel("User x-position [m]")
    ax2.set_ylabel("PEB reduction [%]")
    fig.align_ylabels()
    return fig


def figure_tradeoff(rows: list[dict], sidecar: dict) -> plt.Figure:
    """SNR-PEB tradeoff: joint curve, ideal curve, benchmarks, target region."""
    if not rows:
        return _empty_axes_figure("Communication-positioning tradeoff",
                                  "empty CSV")
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    eta_th, gamma_th = tradeoff_targets(sidecar)

    joint = sorted((r for r in rows if r["scheme"] == "joint"),
                   key=lambda r: r["alpha"])
    cont = sorted((r for r in rows if r["scheme"] == "continuous"),
                  key=lambda r: r["alpha"])
    if joint:
        ax.plot([r["avg_peb_m"] for r in joint],
                [r["avg_snr_db"] for r in joint],
                color="#2ca02c", marker=".", markersize=4,
                label="Joint RIS (codebook)")
        for r in joint:
            if r["marked"]:
                ax.plot(r["avg_peb_m"], r["avg_snr_db"], marker="o",
                        markersize=7, markerfacecolor="none",
                        markeredgecolor="#2ca02c")
                ax.annotate(f"$\\alpha$={r['alpha']:.2f}",
                            xy=(r["avg_peb_m"], r["avg_snr_db"]),
                            xytext=(4, -8), textcoords="offset points",
                            fontsize=7)
    if cont:
        ax.plot([r["avg_peb_m"] for r in cont],
                [r["avg_snr_db"] for r in cont],
                color="#9467bd", linestyle="--", marker=".",
                markersize=3, label="Ideal continuous-phase RIS")
    for scheme, marker, color, label in (
            ("comm_only", "s", "#d62728", "Comm-only RIS"),
            ("pos_only", "o", "#1f77b4", "Positioning-oriented RIS")):
        pts = [r for r in rows if r["scheme"] == scheme]
        for r in pts:
            ax.plot(r["avg_peb_m"], r["avg_snr_db"], marker=marker,
                    color=color, markersize=6, linestyle="none", label=label)

    # joint requirement region: SNR above gamma_th AND PEB below eta_th
    ax.axvline(eta_th, color="0.4", linestyle=":", linewidth=1.0)
    ax.axhline(gamma_th, color="0.4", linestyle=":", linewidth=1.0)
    xlim = ax.get_xlim()
    ylim = ax.get_ylim()
    xlim = (min(xlim[0], eta_th * 0.5), xlim[1])
    ylim = (ylim[0], max(ylim[1], gamma_th + 1.0))
    ax.fill_betweenx([gamma_th, ylim[1]], xlim[0], eta_th, color="#2ca02c",
                     alpha=0.12, linewidth=0)
    ax.plot(eta_th, gamma_th, marker="*", color="k", markersize=9,
            label=f"corner ({eta_th:g} m, {gamma_th:g} dB)")
    ax.set_xlim(xlim)
    ax.set_ylim(ylim)
    ax.set_xlabel("Average PEB [m]")
    ax.set_ylabel("Average SNR [dB]")
    handles, labels = ax.get_legend_handles_labels()
    seen: dict = {}
    for h, l in zip(handles, labels):
        seen.setdefault(l, h)
    ax.legend(seen.values(), seen.keys(), loc="best")
    return fig


def figure_switching(rows: list[dict], sidecar: dict) -> plt.Figure:
    """Codeword switching rate vs shadowing-estimation noise."""
    if not rows:
        return _empty_axes_figure("Switching stability", "empty CSV")
    fig, ax = plt.subplots(figsize=(4.4, 3.2))
    for scheme, color, label in (
            ("joint_nonrobust", "#ff7f0e", "Non-robust joint RIS"),
            ("joint_robust", "#2ca02c", "Robust joint RIS")):
        pts = sorted((r for r in rows if r["scheme"] == scheme),
                     key=lambda r: r["rx_db2"])
        if pts:
            xs = [r["rx_db2"] for r in pts]
            ys = [r["switching_rate"] for r in pts]
            err = [1.96 * r["rate_se"] for r in pts]
            ax.errorbar(xs, ys, yerr=err, color=color, marker="o",
                        markersize=3.5, capsize=2, label=label)
    ax.set_xscale("log")
    ax.set_xlabel(r"Shadowing-estimation noise $r_X$ [dB$^2$]")
    ax.set_ylabel("Codeword switching rate")
    ax.set_ylim(bottom=0.0)
    ax.legend(loc="best")
    return fig


def figure_family(rows: list[dict], sidecar: dict) -> plt.Figure:
    """Stacked selection probability of the three codeword families."""
    if not rows:
        return _empty_axes_figure("Family selection probability", "empty CSV")
    fig, ax = plt.subplots(figsize=(4.4, 3.2))
    xis = sorted({r["xi_blk"] for r in rows})
    prob = {fam: [] for fam in FAMILY_STYLES}
    for xi in xis:
        for fam in FAMILY_STYLES:
            match = [r for r in rows if r["xi_blk"] == xi and r["family"] == fam]
            prob[fam].append(match[0]["prob"] if match else 0.0)
    bottom = np.zeros(len(xis))
    for fam, style in FAMILY_STYLES.items():
        vals = np.array(prob[fam])
        ax.bar(range(len(xis)), vals, bottom=bottom, color=style["color"],
               alpha=0.85, label=style["label"], width=0.72)
        bottom += vals
    config = sidecar.get("config", {})
    policy = config.get("policy", {})
    for key, ls in (("xi_l", ":"), ("xi_h", "--")):
        if key in policy:
            threshold = policy[key]
            # map the threshold onto the categorical axis
            pos = np.interp(threshold, xis, range(len(xis)))
            ax.axvline(pos, color="0.25", linestyle=ls, linewidth=1.0)
            ax.annotate(f"$\\xi$={threshold:g}", xy=(pos, 1.02),
                        xycoords=("data", "axes fraction"), ha="center",
                        fontsize=7)
    ax.set_xticks(range(len(xis)))
    ax.set_xticklabels([f"{xi:g}" for xi in xis], rotation=45)
    ax.set_xlabel(r"Direct-link blockage factor $\xi_\mathrm{blk}$")
    ax.set_ylabel("Selection probability")
    ax.set_ylim(0, 1.12)
    ax.legend(loc="center right", fontsize=6.5)
    return fig


def figure_decision_map(rows: list[dict], sidecar: dict) -> plt.Figure:
    """3-D view of the operating-mode regions over (x, blockage)."""
    if not rows:
        return _empty_axes_figure("Decision map", "empty CSV")
    fig = plt.figure(figsize=(4.8, 3.8))
    ax = fig.add_subplot(projection="3d")
    xs = sorted({r["x_m"] for r in rows})
    xis = sorted({r["xi_blk"] for r in rows})
    alpha_grid = np.zeros((len(xis), len(xs)))
    lookup = {(r["x_m"], r["xi_blk"]): r["alpha"] for r in rows}
    for i, xi in enumerate(xis):
        for j, x in enumerate(xs):
            alpha_grid[i, j] = lookup[(x, xi)]
    xx, yy = np.meshgrid(xs, xis)
    surf = ax.plot_surface(xx, yy, alpha_grid, cmap=cm.viridis,
                           linewidth=0, antialiased=False)
    ax.set_xlabel("User x-position [m]", labelpad=4)
    ax.set_ylabel(r"$\xi_\mathrm{blk}$", labelpad=4)
    ax.set_zlabel(r"Priority weight $\alpha$", labelpad=2)
    fig.colorbar(surf, shrink=0.55, pad=0.1,
                 label=r"$\alpha$ (P=0.15, B=0.55, C=0.92)")
    return fig


def figure_psucc_surface(rows: list[dict], sidecar: dict) -> plt.Figure:
    """3-D surface of joint success probability over RIS size and bits."""
    if not rows:
        return _empty_axes_figure("Success probability surface", "empty CSV")
    fig = plt.figure(figsize=(4.8, 3.8))
    ax = fig.add_subplot(projection="3d")
    ns = sorted({int(r["n_elements"]) for r in rows})
    bs = sorted({int(r["bits"]) for r in rows})
    grid = np.zeros((len(bs), len(ns)))
    lookup = {(int(r["n_elements"]), int(r["bits"])): r["p_succ"] for r in rows}
    for i, b in enumerate(bs):
        for j, n in enumerate(ns):
            grid[i, j] = lookup[(n, b)]
    xx, yy = np.meshgrid(np.log2(ns), bs)
    surf = ax.plot_surface(xx, yy, grid, cmap=cm.plasma, linewidth=0,
                           antialiased=False)
    ax.set_xticks(np.log2(ns))
    ax.set_xticklabels([str(n) for n in ns])
    ax.set_xlabel("RIS size $N$", labelpad=4)
    ax.set_ylabel("Phase bits $b$", labelpad=4)
    ax.set_zlabel(r"$P_\mathrm{succ}$", labelpad=2)
    fig.colorbar(surf, shrink=0.55, pad=0.1)
    return fig


def figure_spatial_maps(rows: list[dict], sidecar: dict) -> plt.Figure:
    """Heatmaps of average SNR and average PEB over the service region."""
    if not rows:
        return _empty_axes_figure("Spatial maps", "empty CSV")
    xs = sorted({r["x_m"] for r in rows})
    ys = sorted({r["y_m"] for r in rows})
    snr = np.full((len(ys), len(xs)), np.nan)
    pebm = np.full((len(ys), len(xs)), np.nan)
    for r in rows:
        i = ys.index(r["y_m"])
        j = xs.index(r["x_m"])
        snr[i, j] = r["avg_snr_db"]
        pebm[i, j] = r["avg_peb_m"]
    fig, axes = plt.subplots(1, 2, figsize=(7.2, 3.0))
    extent = (min(xs), max(xs), min(ys), max(ys))
    for ax, data, label, cmap in ((axes[0], snr, "Average SNR [dB]", "viridis"),
                                  (axes[1], pebm, "Average PEB [m]", "magma_r")):
        im = ax.imshow(data, origin="lower", extent=extent, aspect="auto",
                       cmap=cmap)
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        fig.colorbar(im, ax=ax, shrink=0.85, label=label)
    ris = sidecar.get("config", {}).get("geometry", {}).get("ris")
    if ris:
        for ax in axes:
            ax.annotate("RIS", xy=(1.0, 1.02), xycoords="axes fraction",
                        ha="right", fontsize=7,
                        color="0.35")
    fig.tight_layout()
    return fig


FIGURES = {
    "peb-vs-x": figure_peb_vs_x,
    "tradeoff-alpha": figure_tradeoff,
    "switching": figure_switching,
    "family-vs-blockage": figure_family,
    "decision-map": figure_decision_map,
    "psucc-surface": figure_psucc_surface,
    "spatial-maps": figure_spatial_maps,
}


def build_figure(preset: str, csv_path: Path) -> plt.Figure:
    """Figure for one preset from its CSV + sidecar (no physics recomputed)."""
    if preset not in FIGURES:
        raise SchemaError(f"unknown preset: {preset}; known: {sorted(FIGURES)}")
    plt.rcParams.update(STYLE)
    rows = read_table(csv_path, preset)
    sidecar = read_sidecar(csv_path)
    return FIGURES[preset](rows, sidecar)


def render(preset: str, csv_path: Path, out_path: Path, dpi: int = 200,
           size: tuple[float, float] | None = None) -> Path:
    fig = build_figure(preset, csv_path)
    if size is not None:
        fig.set_size_inches(*size)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=dpi)
    plt.close(fig)
    return out_path


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("preset", choices=sorted(FIGURES))
    parser.add_argument("csv", type=Path)
    parser.add_argument("out", type=Path)
    parser.add_argument("--dpi", type=int, default=200)
    parser.add_argument("--width", type=float, default=None)
    parser.add_argument("--height", type=float, default=None)
    args = parser.parse_args(argv)
    size = None
    if args.width and args.height:
        size = (args.width, args.height)
    try:
        path = render(args.preset, args.csv, args.out, dpi=args.dpi, size=size)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
