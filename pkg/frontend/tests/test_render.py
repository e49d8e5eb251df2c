"""Rendering against real scenario outputs produced through the kdv5 CLI."""

import subprocess
import sys

import pytest

from kdv5_plot.cli import main
from kdv5_plot.render import PlotJob, SchemaError, read_series, render, TIME_SCHEMA

FAST_CFG = (
    "n = 256\nT = 0.1\ndt = 0.000390625\nstore_points = 16\n"
)


def _run_kdv5(scenario, outdir, extra=""):
    cfg = outdir / "cfg.cfg"
    cfg.write_text(f"scenario = {scenario}\n{FAST_CFG}{extra}")
    proc = subprocess.run(
        [sys.executable, "-m", "kdv5.cli", "run", scenario,
         "--config", str(cfg), "--out", str(outdir)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return outdir / "series.csv"


@pytest.fixture(scope="module")
def conservation_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("conservation")
    return _run_kdv5("conservation", out)


@pytest.fixture(scope="module")
def decay_csvs(tmp_path_factory):
    out = tmp_path_factory.mktemp("decay")
    base = _run_kdv5("decay_regularity", out, extra="k = 2\namplitude = 0.5\nwidth = 5.0\n")
    return base, out / "series_refined.csv"


@pytest.fixture(scope="module")
def smoothing_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("smoothing")
    return _run_kdv5("smoothing_probe", out, extra="draws = 10\n")


def _png_dims(path):
    import struct

    blob = path.read_bytes()
    assert blob[:8] == b"\x89PNG\r\n\x1a\n"
    width, height = struct.unpack(">II", blob[16:24])
    return width, height


def test_timeseries_render(conservation_csv, tmp_path):
    out = render(PlotJob("timeseries", [conservation_csv], tmp_path / "fig.png"))
    assert out.exists() and out.stat().st_size > 1000


def test_timeseries_column_subset(conservation_csv, tmp_path):
    out = render(
        PlotJob("timeseries", [conservation_csv], tmp_path / "fig.png", columns=["I1", "H2"])
    )
    assert out.exists()


def test_drift_render_with_tolerance_lines(conservation_csv, tmp_path):
    out = render(PlotJob("drift", [conservation_csv], tmp_path / "drift.png"))
    assert out.exists() and out.stat().st_size > 1000


def test_refinement_ratio_two_files(decay_csvs, tmp_path):
    base, refined = decay_csvs
    out = render(PlotJob("refinement-ratio", [base, refined], tmp_path / "ratio.png"))
    assert out.exists()


def test_ratio_histogram(smoothing_csv, tmp_path):
    out = render(PlotJob("ratio-histogram", [smoothing_csv], tmp_path / "hist.png"))
    assert out.exists()


def test_deterministic_dimensions_and_untouched_inputs(conservation_csv, tmp_path):
    before = conservation_csv.read_bytes()
    a = render(PlotJob("drift", [conservation_csv], tmp_path / "a.png"))
    b = render(PlotJob("drift", [conservation_csv], tmp_path / "b.png"))
    assert _png_dims(a) == _png_dims(b)
    assert conservation_csv.read_bytes() == before


def test_schema_drift_names_columns(tmp_path):
    bad = tmp_path / "series.csv"
    bad.write_text("t,I1,I2\n0.0,1.0,1.0\n")
    with pytest.raises(SchemaError) as err:
        read_series(bad, TIME_SCHEMA)
    assert "H2" in str(err.value)


def test_cli_renders(conservation_csv, tmp_path):
    code = main(["drift", "--in", str(conservation_csv), "--out", str(tmp_path / "f.png")])
    assert code == 0
    assert (tmp_path / "f.png").exists()


def test_cli_schema_mismatch_exit_code(tmp_path, capsys):
    bad = tmp_path / "series.csv"
    bad.write_text("t,I1\n0.0,1.0\n")
    code = main(["drift", "--in", str(bad), "--out", str(tmp_path / "f.png")])
    assert code == 2
    err = capsys.readouterr().err
    assert "missing" in err and "H2" in err


def test_cli_wrong_input_count(tmp_path, capsys):
    code = main(["refinement-ratio", "--in", "one.csv", "--out", str(tmp_path / "f.png")])
    assert code == 4
    assert "2 input" in capsys.readouterr().err


def test_smoothing_csv_rejected_by_time_kinds(smoothing_csv, tmp_path):
    with pytest.raises(SchemaError):
        render(PlotJob("drift", [smoothing_csv], tmp_path / "f.png"))
