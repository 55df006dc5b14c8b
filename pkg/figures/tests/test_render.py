from __future__ import annotations

import json

import pytest

import render

CSV_FOR_PRESET = {
    "peb-vs-x": "peb_vs_x.csv",
    "tradeoff-alpha": "tradeoff_alpha.csv",
    "switching": "switching.csv",
    "family-vs-blockage": "family_vs_blockage.csv",
    "decision-map": "decision_map.csv",
    "psucc-surface": "psucc_surface.csv",
    "spatial-maps": "spatial_maps.csv",
}


@pytest.mark.parametrize("preset", sorted(CSV_FOR_PRESET))
def test_renders_every_preset(preset, artifact_dir, tmp_path):
    csv_path = artifact_dir / CSV_FOR_PRESET[preset]
    out = render.render(preset, csv_path, tmp_path / f"{preset}.png")
    assert out.exists() and out.stat().st_size > 0


@pytest.mark.parametrize("preset", ["tradeoff-alpha", "spatial-maps"])
def test_byte_identical_rerender(preset, artifact_dir, tmp_path):
    csv_path = artifact_dir / CSV_FOR_PRESET[preset]
    a = render.render(preset, csv_path, tmp_path / "a.png")
    b = render.render(preset, csv_path, tmp_path / "b.png")
    assert a.read_bytes() == b.read_bytes()


def test_tradeoff_corner_from_sidecar(artifact_dir):
    sidecar = json.loads((artifact_dir / "tradeoff_alpha.json").read_text())
    assert render.tradeoff_targets(sidecar) == (18.0, 6.0)
    fig = render.build_figure("tradeoff-alpha",
                              artifact_dir / "tradeoff_alpha.csv")
    ax = fig.axes[0]
    corners = [line for line in ax.get_lines()
               if line.get_marker() == "*" and
               list(line.get_xdata()) == [18.0] and
               list(line.get_ydata()) == [6.0]]
    assert corners, "corner point (18 m, 6 dB) not drawn"
    labels = [line.get_label() for line in ax.get_lines()]
    assert any("corner (18 m, 6 dB)" == l for l in labels)


def test_schema_error_on_column_mismatch(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("foo,bar\n1,2\n")
    with pytest.raises(render.SchemaError):
        render.build_figure("switching", bad)


def test_wrong_preset_name_rejected(tmp_path):
    any_csv = tmp_path / "x.csv"
    any_csv.write_text("x_m\n")
    with pytest.raises(render.SchemaError):
        render.build_figure("not-a-preset", any_csv)


def test_header_only_csv_renders_warning_figure(tmp_path):
    empty = tmp_path / "family_vs_blockage.csv"
    empty.write_text("xi_blk,family,prob,lo,hi,n,mode\n")
    fig = render.build_figure("family-vs-blockage", empty)
    texts = [t.get_text() for ax in fig.axes for t in ax.texts]
    assert any("no data" in t for t in texts)
    out = tmp_path / "empty.png"
    render.render("family-vs-blockage", empty, out)
    assert out.exists()


def test_cli_main(artifact_dir, tmp_path, capsys):
    code = render.main(["switching", str(artifact_dir / "switching.csv"),
                        str(tmp_path / "sw.png")])
    assert code == 0
    assert (tmp_path / "sw.png").exists()


def test_cli_schema_failure_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n")
    code = render.main(["switching", str(bad), str(tmp_path / "x.png")])
    assert code == 1
