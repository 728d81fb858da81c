"""
Tests for the figure catalogue and separation scans.
"""

import math

import pytest

from grapcas.errors import ConfigurationError, ConvergenceError
from grapcas.figures import (
    FIGURE_IDS,
    SCAN_COLUMNS,
    CurveSpec,
    Quantity,
    ScanSpec,
    figure_scan,
    figure_spec,
    linear_grid,
    log_grid,
    point_diagnostics,
)
from grapcas.materials import OscillatorModel
from grapcas.utils.config import load_config


@pytest.fixture(scope="module")
def silica():
    return OscillatorModel.silica()


@pytest.fixture
def section():
    return dict(load_config()["scenario"])


class TestGrids:
    def test_log_grid_spans_the_range(self):
        grid = log_grid(0.2, 2.0, 40)
        assert len(grid) == 41
        assert grid[0] == pytest.approx(0.2, rel=1e-14)
        assert grid[-1] == pytest.approx(2.0, rel=1e-14)
        assert all(a < b for a, b in zip(grid, grid[1:]))

    def test_log_grid_rejects_bad_ranges(self):
        with pytest.raises(ConfigurationError, match="Invalid separation range"):
            log_grid(2.0, 0.2)
        with pytest.raises(ConfigurationError, match="points_per_decade"):
            log_grid(0.2, 2.0, 0)

    def test_linear_grid_is_inclusive(self):
        grid = linear_grid(0.2, 2.0, 0.1)
        assert len(grid) == 19
        assert grid[0] == 0.2
        assert grid[-1] == 2.0

    def test_linear_grid_rejects_bad_step(self):
        with pytest.raises(ConfigurationError):
            linear_grid(0.2, 2.0, 0.0)


class TestCatalogue:
    def test_every_panel_is_available(self):
        expected = {f"{n}{p}" for n in range(1, 7) for p in "ab"}
        assert set(FIGURE_IDS) == expected

    def test_figure_1a_range_and_curves(self):
        spec = figure_spec("1a")
        assert spec.separations_um[0] == pytest.approx(0.2)
        assert spec.separations_um[-1] == pytest.approx(0.7)
        assert len(spec.curves) == 3
        assert all(curve.coated == (False, False) for curve in spec.curves)
        quantities = [curve.quantity for curve in spec.curves]
        assert quantities.count(Quantity.P_EQ_OVER_CL) == 1
        assert {curve.t2 for curve in spec.curves} == {77.0, 300.0, 500.0}

    def test_figure_1a_inset(self):
        spec = figure_spec("1a", inset=True)
        assert spec.separations_um[-1] == pytest.approx(0.35)
        with pytest.raises(ConfigurationError, match="inset"):
            figure_spec("2a", inset=True)

    def test_figure_1b_range(self):
        spec = figure_spec("1b")
        assert spec.separations_um[0] == pytest.approx(0.7)
        assert spec.separations_um[-1] == pytest.approx(2.0)

    def test_figure_3a_has_three_gaps(self):
        spec = figure_spec("3a")
        assert spec.quantity is Quantity.LOCAL_ERROR_EQ
        assert [curve.delta_ev for curve in spec.curves] == [0.1, 0.2, 0.3]
        assert all(curve.mu_ev == 0.0 for curve in spec.curves)
        assert figure_spec("3b").curves[0].mu_ev == 0.25

    def test_local_error_panels_fix_the_second_temperature(self):
        assert {c.t2 for c in figure_spec("4a").curves} == {77.0}
        assert {c.t2 for c in figure_spec("5b").curves} == {500.0}
        assert figure_spec("5b").quantity is Quantity.LOCAL_ERROR_NEQ

    def test_figure_2b_and_6_curve_counts(self):
        assert len(figure_spec("2a").curves) == 4
        assert len(figure_spec("2b").curves) == 8
        assert len(figure_spec("6a").curves) == 4
        assert len(figure_spec("6b").curves) == 4

    def test_curve_labels_are_unique(self):
        for figure_id in FIGURE_IDS:
            labels = [curve.label for curve in figure_spec(figure_id).curves]
            assert len(labels) == len(set(labels)), figure_id

    def test_environment_temperature(self):
        for figure_id in FIGURE_IDS:
            for curve in figure_spec(figure_id).curves:
                assert curve.t1 == curve.t_env == 300.0

    def test_unknown_figure(self):
        with pytest.raises(ConfigurationError, match="Unknown figure"):
            figure_spec("7a")


class TestQuantity:
    def test_parse_by_value_and_name(self):
        assert Quantity.parse("P_neq/P_eq") is Quantity.P_NEQ_OVER_EQ
        assert Quantity.parse("p_neq") is Quantity.P_NEQ
        assert Quantity.parse("local_error_eq") is Quantity.LOCAL_ERROR_EQ

    def test_parse_rejects_unknown(self):
        with pytest.raises(ConfigurationError, match="Unknown quantity"):
            Quantity.parse("force")

    def test_column_name(self):
        assert Quantity.P_NEQ_OVER_CL.column == "P_neq_over_P_cl"


def test_curve_from_section(section):
    section["coated"] = [True, False]
    curve = CurveSpec.from_section(section)
    assert curve.t2 == 500.0
    assert curve.coated == (True, False)
    assert curve.overrides()["coated"] == [True, False]


class TestFigureScan:
    def test_rows_follow_scan_order(self, monkeypatch, section, silica):
        seen = []

        def fake(quantity, s, settings=None):
            seen.append(s.separation)
            return s.t2 + s.separation * 1e6

        monkeypatch.setattr("grapcas.figures.evaluate_quantity", fake)
        spec = ScanSpec(
            "test",
            Quantity.P_NEQ,
            (CurveSpec("hot", 500.0), CurveSpec("cold", 77.0)),
            (0.3, 0.6),
        )
        table = figure_scan(spec, section, substrate=silica)

        assert list(table.columns) == list(SCAN_COLUMNS)
        assert table["curve"].tolist() == ["hot", "hot", "cold", "cold"]
        assert table["separation_um"].tolist() == [0.3, 0.6, 0.3, 0.6]
        assert table["value"].tolist() == pytest.approx([500.3, 500.6, 77.3, 77.6])
        assert len(seen) == 4

    def test_failed_points_become_nan_rows(self, monkeypatch, section, silica):
        def fake(quantity, s, settings=None):
            if s.separation > 1e-6:
                raise ConvergenceError("no decay", 1.0, 20000)
            return -1.0

        monkeypatch.setattr("grapcas.figures.evaluate_quantity", fake)
        spec = ScanSpec("test", Quantity.P_EQ, (CurveSpec("eq", 300.0),), (0.5, 1.5))
        table = figure_scan(spec, section, substrate=silica)

        assert table["value"][0] == -1.0
        assert math.isnan(table["value"][1])
        assert "ConvergenceError" in table["note"][1]
        assert table["note"][0] == ""
        diagnostics = point_diagnostics(table)
        assert "failure" not in diagnostics[0]
        assert diagnostics[1]["failure"].startswith("ConvergenceError")
        assert diagnostics[1]["separation_um"] == 1.5

    def test_rows_carry_matsubara_terms_and_error(self, section, silica):
        spec = ScanSpec(
            "test",
            Quantity.P_EQ,
            (CurveSpec("bare", 300.0, coated=(False, False)),),
            (1.0,),
        )
        table = figure_scan(spec, section, substrate=silica)

        assert table["value"][0] < 0
        assert table["matsubara_terms"][0] >= 2
        assert table["error_estimate"][0] > 0
        (record,) = point_diagnostics(table)
        assert record == {
            "curve": "bare",
            "separation_um": 1.0,
            "matsubara_terms": int(table["matsubara_terms"][0]),
            "error_estimate": float(table["error_estimate"][0]),
        }

    def test_empty_separation_list_gives_empty_table(self, section, silica):
        spec = ScanSpec("test", Quantity.P_EQ, (CurveSpec("eq", 300.0),), ())
        table = figure_scan(spec, section, substrate=silica)
        assert table.empty
        assert list(table.columns) == list(SCAN_COLUMNS)
        assert point_diagnostics(table) == []

    def test_unknown_substrate_fails_before_computation(self, monkeypatch, section):
        def fail(*args, **kwargs):
            raise AssertionError("evaluated")

        monkeypatch.setattr("grapcas.figures.evaluate_quantity", fail)
        section["substrate"] = "unobtainium"
        with pytest.raises(ConfigurationError, match="Unknown substrate"):
            figure_scan(figure_spec("3a"), section)
