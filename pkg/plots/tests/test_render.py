"""Rendering tests over CSVs produced by the mlcavity CLI presets."""

import math

import pytest

from mlcavity import cli as mlcavity_cli
import importlib

from plots import PlotDataError, read_table, render

# the package re-exports render() under the submodule's name, so fetch the
# actual module for monkeypatching
render_mod = importlib.import_module("plots.render")


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    """Preset CSV bundles for all four figures (shortened horizons)."""
    base = tmp_path_factory.mktemp("artifacts")
    dirs = {name: base / name for name in ("fig2", "fig3", "fig4", "fig5")}
    assert mlcavity_cli.main(
        ["spectrum", "--preset", "fig2", "--out", str(dirs["fig2"])]
    ) == 0
    assert mlcavity_cli.main(
        [
            "dynamics", "--preset", "fig3", "--out", str(dirs["fig3"]),
            "--set", "dynamics.t_end_ms=2.0", "--set", "dynamics.n_out=101",
        ]
    ) == 0
    assert mlcavity_cli.main(
        [
            "dynamics", "--preset", "fig4", "--out", str(dirs["fig4"]),
            "--set", "dynamics.t_end_ms=2.0", "--set", "dynamics.n_out=101",
        ]
    ) == 0
    assert mlcavity_cli.main(
        [
            "rates", "--preset", "fig5", "--out", str(dirs["fig5"]),
            "--set", "rates.grid_points=101", "--set", "rates.n_out=101",
        ]
    ) == 0
    return dirs


@pytest.mark.parametrize("figure", ["fig2", "fig3", "fig4", "fig5"])
def test_renders_all_figure_ids(figure, artifacts, tmp_path):
    out = tmp_path / f"{figure}.png"
    render(figure, str(artifacts[figure]), str(out))
    assert out.exists() and out.stat().st_size > 1000
    print(f"criterion 11 ({figure}): PASS - rendered from preset CSVs")


def test_fig3_has_three_panels(artifacts, tmp_path, monkeypatch):
    captured = {}

    def capture(fig, out):
        captured["n_axes"] = len(fig.axes)

    monkeypatch.setattr(render_mod, "_save", capture)
    render("fig3", str(artifacts["fig3"]), str(tmp_path / "fig3.png"))
    assert captured["n_axes"] == 3


def test_rerender_is_pixel_identical(artifacts, tmp_path):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render("fig4", str(artifacts["fig4"]), str(a))
    render("fig4", str(artifacts["fig4"]), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_unknown_figure_id(tmp_path):
    with pytest.raises(PlotDataError, match="unknown figure"):
        render("fig9", str(tmp_path), str(tmp_path / "x.png"))


def test_missing_input_directory_named_error(tmp_path):
    with pytest.raises(PlotDataError, match="dynamics_dp"):
        render("fig4", str(tmp_path), str(tmp_path / "x.png"))


def test_empty_csv_named_error(tmp_path):
    (tmp_path / "coupling_table.csv").write_text("", encoding="utf-8")
    with pytest.raises(PlotDataError, match="empty CSV"):
        render("fig2", str(tmp_path), str(tmp_path / "x.png"))
    (tmp_path / "coupling_table.csv").write_text(
        "label,g_eff_sq_over_g0_sq\n", encoding="utf-8"
    )
    with pytest.raises(PlotDataError, match="empty CSV"):
        render("fig2", str(tmp_path), str(tmp_path / "x.png"))


def test_missing_column_named_error(tmp_path):
    (tmp_path / "coupling_table.csv").write_text(
        "label,value\nequal,0.4666\n", encoding="utf-8"
    )
    with pytest.raises(PlotDataError, match="g_eff_sq_over_g0_sq"):
        render("fig2", str(tmp_path), str(tmp_path / "x.png"))


def test_cli_exit_codes(artifacts, tmp_path, capsys):
    from plots.cli import main

    out = tmp_path / "fig2.png"
    assert main(
        ["render", "--figure", "fig2", "--in", str(artifacts["fig2"]), "--out", str(out)]
    ) == 0
    assert out.exists()
    rc = main(
        ["render", "--figure", "fig4", "--in", str(tmp_path), "--out", str(out)]
    )
    assert rc == 2
    assert "plot data error" in capsys.readouterr().err


def test_read_table_roundtrip(artifacts):
    table = read_table(str(artifacts["fig2"] / "coupling_table.csv"))
    assert table.header == ["label", "g_eff_sq_over_g0_sq"]
    assert "tool" in table.meta
    assert table.col("g_eff_sq_over_g0_sq")[0] == pytest.approx(7 / 15, abs=1e-12)
    assert math.isclose(float(table.columns["g_eff_sq_over_g0_sq"].max()), 0.6, rel_tol=1e-9)
