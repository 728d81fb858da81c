import csv
import io
import json
import re
from pathlib import Path
from unittest.mock import patch

import pytest
from click.testing import CliRunner

from grapcas.cli import main, parse_scan
from grapcas.errors import ConfigurationError, QuadratureError
from grapcas.pressure import PressureBreakdown
from grapcas.utils.units import UnitConverter


@pytest.fixture
def runner(tmp_path):
    runner = CliRunner()
    with runner.isolated_filesystem(temp_dir=tmp_path):
        yield runner


def _table(output: str):
    """Rows of a CSV body, skipping the manifest header."""
    lines = [line for line in output.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def _fake_quantity(quantity, s, settings=None):
    return -1e-3 * s.separation * 1e6


def test_main_help(runner):
    result = runner.invoke(main, ["--help"])
    assert result.exit_code == 0
    assert "Usage:" in result.output
    for command in ("tensor-eval", "permittivity", "reflect", "pressure", "figures"):
        assert command in result.output


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "grapcas" in result.output


def test_models_lists_builtin_substrates(runner):
    result = runner.invoke(main, ["models"])
    assert result.exit_code == 0
    assert "silica" in result.output


def test_parse_scan():
    assert len(parse_scan("a=0.2:2:0.1um")) == 19
    assert parse_scan("a=200:400:100nm") == (0.2, 0.3, 0.4)
    assert parse_scan("a=0.5:1:0.5") == (0.5, 1.0)
    with pytest.raises(ConfigurationError, match="Invalid scan"):
        parse_scan("d=0.2:2:0.1um")


class TestPressure:
    def test_scan_gives_one_row_per_separation(self, runner):
        with patch("grapcas.figures.evaluate_quantity", side_effect=_fake_quantity):
            result = runner.invoke(
                main, ["pressure", "--quantity", "p_neq", "--scan", "a=0.2:2:0.1um"]
            )
        assert result.exit_code == 0, result.output
        rows = _table(result.output)
        assert len(rows) == 19
        assert list(rows[0]) == ["separation_um", "p_neq", "note"]
        assert float(rows[0]["separation_um"]) == 0.2
        assert float(rows[-1]["p_neq"]) == pytest.approx(-2e-3)

    def test_header_records_provenance(self, runner):
        with patch("grapcas.figures.evaluate_quantity", side_effect=_fake_quantity):
            result = runner.invoke(
                main, ["pressure", "--scan", "a=0.5:0.6:0.1um", "--tol", "1e-4"]
            )
        header = [line for line in result.output.splitlines() if line[:1] == "#"]
        assert header[0] == "# tool: grapcas"
        config_lines = [line for line in header if line.startswith("# config: ")]
        assert len(config_lines) == 1 and "silica" in config_lines[0]
        assert any('"rel_tol": 0.0001' in line for line in header)
        assert header[-1].startswith("# timestamp: ")

    def test_header_lists_per_point_diagnostics(self, runner):
        with patch("grapcas.figures.evaluate_quantity", side_effect=_fake_quantity):
            result = runner.invoke(main, ["pressure", "--scan", "a=0.5:0.6:0.1um"])
        assert result.exit_code == 0, result.output
        header = [line for line in result.output.splitlines() if line[:1] == "#"]
        assert header[-2].startswith("# diagnostics: ")
        points = json.loads(header[-2][len("# diagnostics: ") :])
        assert [point["separation_um"] for point in points] == [0.5, 0.6]
        assert all("failure" not in point for point in points)

    def test_output_is_reproducible(self, runner):
        outputs = []
        for _ in range(2):
            with patch(
                "grapcas.figures.evaluate_quantity", side_effect=_fake_quantity
            ):
                result = runner.invoke(main, ["pressure", "--scan", "a=0.2:0.4:0.1um"])
            outputs.append(
                [line for line in result.output.splitlines() if "timestamp" not in line]
            )
        assert outputs[0] == outputs[1]

    def test_single_point_breakdown(self, runner):
        breakdown = PressureBreakdown(
            p_qeq=-2.0,
            delta_p_neq=0.5,
            p_neq=-1.5,
            matsubara_terms_used=12,
            quadrature_error_estimate=1e-9,
        )
        with patch("grapcas.cli.p_neq", return_value=breakdown) as mock_p_neq:
            result = runner.invoke(main, ["pressure", "--out", "json"])
        assert result.exit_code == 0, result.output
        mock_p_neq.assert_called_once()
        body = json.loads(result.output)
        row = body["rows"][0]
        assert row["p_neq"] == -1.5
        assert row["separation_um"] == pytest.approx(0.5)
        assert body["manifest"]["tool"] == "grapcas"

    def test_single_point_ratio(self, runner):
        with patch("grapcas.cli.evaluate_quantity", return_value=1.25):
            result = runner.invoke(main, ["pressure", "--quantity", "P_neq/P_eq"])
        assert result.exit_code == 0, result.output
        assert _table(result.output)[0]["P_neq_over_P_eq"] == "1.25"

    def test_scenario_file_overrides_config(self, runner):
        Path("run.txt").write_text("separation_um = 1.5\ncoated = no\n")
        with patch("grapcas.cli.evaluate_quantity", return_value=-1.0) as mock_eval:
            result = runner.invoke(
                main, ["pressure", "--quantity", "p_eq", "--scenario", "run.txt"]
            )
        assert result.exit_code == 0, result.output
        scenario = mock_eval.call_args[0][1]
        assert scenario.separation == pytest.approx(1.5e-6)
        assert scenario.plate1.is_bare and scenario.plate2.is_bare

    def test_numerical_failure_reports_json_and_exit_code(self, runner):
        error = QuadratureError("budget exhausted", 1.0, 0.5)
        with patch("grapcas.cli.p_neq", side_effect=error):
            result = runner.invoke(main, ["pressure"])
        assert result.exit_code == 3
        match = re.search(r"\{.*\"error\": \"QuadratureError\".*\}", result.output)
        assert match is not None
        assert json.loads(match.group(0))["error_estimate"] == 0.5

    def test_missing_config_is_a_configuration_error(self, runner):
        result = runner.invoke(main, ["pressure", "--config", "nowhere.json"])
        assert result.exit_code == 2
        assert "Configuration file not found" in result.output

    def test_bad_scan_is_a_configuration_error(self, runner):
        result = runner.invoke(main, ["pressure", "--scan", "a=2:0.2:0.1um"])
        assert result.exit_code == 2
        assert "ConfigurationError" in result.output

    def test_writes_to_file(self, runner):
        with patch("grapcas.figures.evaluate_quantity", side_effect=_fake_quantity):
            result = runner.invoke(
                main, ["pressure", "--scan", "a=0.5:0.6:0.1um", "--output", "scan.csv"]
            )
        assert result.exit_code == 0, result.output
        assert len(_table(Path("scan.csv").read_text())) == 2


class TestFigures:
    def test_one_file_per_curve(self, runner):
        with patch("grapcas.figures.evaluate_quantity", side_effect=_fake_quantity):
            result = runner.invoke(
                main,
                ["figures", "3a", "--points-per-decade", "2", "--out-dir", "out"],
            )
        assert result.exit_code == 0, result.output
        csv_files = sorted(Path("out").glob("*.csv"))
        assert len(csv_files) == 3
        assert len(list(Path("out").glob("*.plt"))) == 3
        rows = _table(csv_files[0].read_text())
        assert len(rows) == 3
        assert list(rows[0]) == ["separation_um", "dP_loc_eq", "note"]
        separations = [float(row["separation_um"]) for row in rows]
        assert separations == sorted(separations)

    def test_inset(self, runner):
        with patch("grapcas.figures.evaluate_quantity", side_effect=_fake_quantity):
            result = runner.invoke(
                main,
                ["figures", "1a", "--inset", "--points-per-decade", "4"]
                + ["--out-dir", "o"],
            )
        assert result.exit_code == 0, result.output
        files = list(Path("o").glob("fig1a_inset_*.csv"))
        assert len(files) == 3

    def test_unknown_figure_is_a_usage_error(self, runner):
        result = runner.invoke(main, ["figures", "7a"])
        assert result.exit_code == 2
        assert "Usage:" in result.output

    def test_missing_substrate_fails_before_computation(self, runner):
        Path("run.txt").write_text("substrate = missing_optical_data.txt\n")
        with patch("grapcas.figures.evaluate_quantity") as mock_eval:
            result = runner.invoke(main, ["figures", "3a", "--scenario", "run.txt"])
        assert result.exit_code == 2
        assert "Unknown substrate" in result.output
        mock_eval.assert_not_called()


def test_permittivity_xi_scan(runner):
    result = runner.invoke(
        main, ["permittivity", "--xi-scan", "--points-per-decade", "1"]
    )
    assert result.exit_code == 0, result.output
    rows = _table(result.output)
    assert len(rows) == 7
    assert float(rows[0]["xi_rad_s"]) == 0.0
    assert float(rows[0]["eps"]) == pytest.approx(3.81, abs=0.1)
    eps = [float(row["eps"]) for row in rows]
    assert eps == sorted(eps, reverse=True)


def test_permittivity_real_axis(runner):
    result = runner.invoke(main, ["permittivity", "--points-per-decade", "1"])
    assert result.exit_code == 0, result.output
    rows = _table(result.output)
    assert list(rows[0]) == ["omega_rad_s", "re_eps", "im_eps"]
    assert all(float(row["im_eps"]) >= 0.0 for row in rows)


def test_tensor_eval_reports_region(runner):
    result = runner.invoke(
        main, ["tensor-eval", "--omega-ev", "0.5", "--k-invm", "1e7"]
    )
    assert result.exit_code == 0, result.output
    rows = _table(result.output)
    assert len(rows) == 1
    assert rows[0]["region"] == "above_threshold"
    assert float(rows[0]["im_pi00"]) >= 0.0


def test_tensor_eval_frequency_units_agree(runner):
    omega = UnitConverter.convert_frequency(0.5, "eV", "rad/s")
    results = [
        runner.invoke(
            main,
            ["tensor-eval", "--omega", value, "--omega-unit", unit]
            + ["--k-invm", "1e7"],
        )
        for value, unit in (("0.5", "eV"), (repr(omega), "rad/s"))
    ]
    rows = [_table(result.output)[0] for result in results]
    assert float(rows[0]["omega_rad_s"]) == pytest.approx(omega, rel=1e-14)
    assert float(rows[1]["omega_rad_s"]) == pytest.approx(omega, rel=1e-14)
    assert float(rows[0]["re_pi00"]) == pytest.approx(
        float(rows[1]["re_pi00"]), rel=1e-12
    )


def test_permittivity_range_in_kelvin(runner):
    result = runner.invoke(
        main,
        ["permittivity", "--range", "100", "1e5", "--range-unit", "K"]
        + ["--points-per-decade", "1"],
    )
    assert result.exit_code == 0, result.output
    rows = _table(result.output)
    assert len(rows) == 4
    assert float(rows[0]["omega_rad_s"]) == pytest.approx(
        UnitConverter.convert_frequency(100.0, "K", "rad/s"), rel=1e-12
    )


def test_reflect_is_bounded(runner):
    result = runner.invoke(
        main, ["reflect", "--omega-ev", "0.1", "--k-invm", "1e5", "--k-invm", "3e5"]
    )
    assert result.exit_code == 0, result.output
    rows = _table(result.output)
    assert len(rows) == 2
    for row in rows:
        r_tm = complex(float(row["re_r_tm"]), float(row["im_r_tm"]))
        assert abs(r_tm) <= 1.0 + 1e-12
