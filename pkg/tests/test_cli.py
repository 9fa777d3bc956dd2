"""
Test the atomlens command line
"""
import json

import numpy as np
import pytest
from click.testing import CliRunner

from src import __version__
from src.cli import cli
from src.spectra import synthetic_spectrum, write_spectrum_csv


@pytest.fixture
def runner():
    return CliRunner()


def data_lines(path):
    """CSV body without the provenance comment"""
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# ")
    return [line.split(",") for line in lines[1:]]


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_table1(runner, tmp_path):
    out = tmp_path / "table1.csv"
    result = runner.invoke(cli, ["table1", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert "Wrote 4 rows" in result.output
    assert "⚠️" not in result.output
    header, *rows = data_lines(out)
    assert header[0] == "w_l_mm" and "epsilon_theory_percent" in header
    theory = [float(row[header.index("epsilon_theory_percent")]) for row in rows]
    assert theory == pytest.approx([3.58, 15.41, 20.40, 22.99], abs=0.05)


def test_table1_to_stdout(runner):
    result = runner.invoke(cli, ["table1"])
    assert result.exit_code == 0
    assert "w_l_mm,u,w_f_um" in result.output


def test_rsc_scan(runner, tmp_path):
    out = tmp_path / "scan.csv"
    result = runner.invoke(cli, ["rsc-scan", "--u", "0:0.001:0.001", "-o", str(out)])
    assert result.exit_code == 0, result.output
    header, *rows = data_lines(out)
    assert header[:2] == ["u", "r_sc"]
    assert len(rows) == 2
    assert float(rows[0][1]) == 0.0
    assert float(rows[1][1]) == pytest.approx(3e-6, rel=1e-2)


def test_optimum_as_json(runner, tmp_path):
    out = tmp_path / "optimum.json"
    result = runner.invoke(cli, ["optimum", "--format", "json", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert "u* =" in result.output
    payload = json.loads(out.read_text(encoding="utf-8"))
    u_star, r_star, _, at_boundary = payload["rows"][0]
    assert u_star == pytest.approx(2.239, abs=2e-3)
    assert r_star == pytest.approx(1.456, abs=1e-3)
    assert at_boundary is False
    assert payload["config"]["config"]["command"] == "optimum"


def test_optimum_on_the_boundary(runner):
    result = runner.invoke(cli, ["optimum", "--u-min", "0.5", "--u-max", "1.0"])
    assert result.exit_code == 0
    assert "boundary" in result.output


def test_fit_spectrum(runner, tmp_path):
    spectrum = tmp_path / "spectrum.csv"
    write_spectrum_csv(synthetic_spectrum(0.0, 7.7, 0.896, np.linspace(-30, 30, 121)), spectrum)
    out = tmp_path / "fit.json"
    result = runner.invoke(cli, ["fit-spectrum", str(spectrum), "--format", "json",
                                 "-o", str(out)])
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text(encoding="utf-8"))
    assert payload["fit"]["fwhm_mhz"] == pytest.approx(7.7, rel=1e-5)
    assert payload["linewidth"]["consistent"] is True


def test_fit_spectrum_missing_file(runner, tmp_path):
    result = runner.invoke(cli, ["fit-spectrum", str(tmp_path / "absent.csv")])
    assert result.exit_code == 2


def test_motion(runner, tmp_path):
    out = tmp_path / "motion.csv"
    result = runner.invoke(cli, ["motion", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert "sigma_rho = 222.4 nm" in result.output
    header, *rows = data_lines(out)
    reduction = [float(row[header.index("reduction_percent")]) for row in rows]
    assert reduction == pytest.approx([4.07, 35.2], abs=0.15)
    single_axis = [float(row[header.index("reduction_single_axis_percent")]) for row in rows]
    assert single_axis == pytest.approx([2.13, 23.3], abs=0.15)
    assert "radial model" in result.output


def test_motion_single_axis_model(runner, tmp_path):
    out = tmp_path / "motion.csv"
    result = runner.invoke(cli, ["motion", "--model", "single-axis", "-o", str(out)])
    assert result.exit_code == 0, result.output
    header, *rows = data_lines(out)
    reduction = [float(row[header.index("reduction_percent")]) for row in rows]
    radial = [float(row[header.index("reduction_radial_percent")]) for row in rows]
    assert reduction == pytest.approx([2.13, 23.3], abs=0.15)
    assert radial == pytest.approx([4.07, 35.2], abs=0.15)


def test_motion_help_names_the_default_model(runner):
    result = runner.invoke(cli, ["motion", "--help"])
    assert result.exit_code == 0
    text = " ".join(result.output.split())
    assert "default: radial" in text
    assert "keeps one power" in text


def test_monte_carlo_needs_seed(runner):
    result = runner.invoke(cli, ["motion", "--monte-carlo", "100"])
    assert result.exit_code == 2
    assert "--seed" in result.output


def test_monte_carlo_with_seed(runner, tmp_path):
    out = tmp_path / "motion.csv"
    texts = []
    for _ in range(2):
        result = runner.invoke(cli, ["motion", "--monte-carlo", "200", "--seed", "7",
                                     "-o", str(out)])
        assert result.exit_code == 0, result.output
        texts.append(out.read_text(encoding="utf-8"))
    assert texts[0] == texts[1]
    header, *_ = data_lines(out)
    assert "r_sc_monte_carlo" in header


def test_negative_temperature_is_a_numeric_failure(runner):
    result = runner.invoke(cli, ["motion", "--temperature=-1uK"])
    assert result.exit_code == 3
    assert "❌" in result.output


def test_bad_quantity(runner):
    result = runner.invoke(cli, ["table1", "--f", "4.5 parsecs"])
    assert result.exit_code == 2


def test_both_apertures_rejected(runner):
    result = runner.invoke(cli, ["rsc-scan", "--u", "0.5:1:0.5", "--rho0", "2mm",
                                 "--na", "0.5"])
    assert result.exit_code == 2


def test_field_axial_needs_waist(runner):
    result = runner.invoke(cli, ["field-axial"])
    assert result.exit_code == 2


def test_field_axial_has_paraxial_column(runner, tmp_path):
    out = tmp_path / "axial.csv"
    result = runner.invoke(cli, ["field-axial", "--w-l", "0.5mm", "--f", "1mm",
                                 "--grid-size", "128", "--z-min=-4um", "--z-max", "4um",
                                 "--samples", "41", "-o", str(out)])
    assert result.exit_code == 0, result.output
    header, *rows = data_lines(out)
    assert header == ["z", "intensity", "paraxial"]
    paraxial = [float(row[2]) for row in rows]
    assert max(paraxial) == paraxial[20]


def test_field_focal_plane(runner, tmp_path):
    out = tmp_path / "plane.csv"
    result = runner.invoke(cli, ["field-focal-plane", "--w-l", "0.5mm", "--f", "1mm",
                                 "--grid-size", "128", "--rho-max", "1um", "--samples", "6",
                                 "-o", str(out)])
    assert result.exit_code == 0, result.output
    header, *rows = data_lines(out)
    assert header == ["rho", "plus", "z_component", "minus"]
    assert len(rows) == 6
    assert float(rows[0][1]) == max(float(row[1]) for row in rows)
