"""
Tests for the permittivity models and the Kramers–Kronig transform.
"""

import logging
import pickle

import numpy as np
import pytest

from grapcas.errors import ConfigurationError, DomainError, OpticalDataError
from grapcas.materials import (
    Oscillator,
    OscillatorModel,
    OpticalTable,
    TabulatedModel,
    get_model_table,
    get_model_types,
    kramers_kronig,
    load_optical_table,
    resolve_substrate,
)
from grapcas.materials.utils import DATA_DIR_ENV


@pytest.fixture
def lorentz():
    """Single oscillator with ε(0) = 3 and ε(∞) = 1."""
    return OscillatorModel(1.0, [Oscillator.from_weight(2.0, 1e15, 1e14)])


@pytest.fixture
def sampled_table(lorentz):
    omega = np.logspace(12, 18, 2000)
    eps = np.array([lorentz.eps_real_axis(w) for w in omega])
    return OpticalTable(omega, eps.real, eps.imag)


def write_table(path, rows, header="#format=rad_eps"):
    lines = [header] + [" ".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestOscillatorModel:
    """Closed-form Lorentz oscillators."""

    def test_static_limit(self, lorentz):
        assert lorentz.eps_real_axis(1e-3) == pytest.approx(3.0, rel=1e-12)
        assert lorentz.eps_static == pytest.approx(3.0, rel=1e-14)

    def test_passive(self, lorentz):
        omega = np.logspace(12, 18, 50)
        assert np.all(lorentz.absorption(omega) >= 0)
        assert lorentz.eps_real_axis(1e15).imag > 0

    def test_absorption_matches_complex_value(self, lorentz):
        for omega in (3e14, 1e15, 4e15):
            expected = lorentz.eps_real_axis(omega).imag
            assert lorentz.absorption(np.array([omega]))[0] == pytest.approx(expected)

    @pytest.mark.parametrize("xi", [1e12, 1e13, 1e14, 1e15, 1e16, 1e17])
    def test_kramers_kronig_matches_closed_form(self, lorentz, xi):
        closed = lorentz.eps_imaginary_axis(xi)
        numeric = kramers_kronig(lorentz, xi)
        assert abs(numeric - closed) < 1e-4 * closed

    def test_kramers_kronig_with_background(self):
        model = OscillatorModel(2.0, [Oscillator.from_weight(1.0, 2e14, 1e13)])
        assert model.kramers_kronig(5e13) == pytest.approx(
            model.eps_imaginary_axis(5e13), rel=1e-4
        )

    def test_imaginary_axis_decreases_to_one(self, lorentz):
        values = [lorentz.eps_imaginary_axis(xi) for xi in np.logspace(12, 19, 30)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] > 1.0
        assert values[-1] - 1.0 < 1e-6

    def test_negative_xi_raises(self, lorentz):
        with pytest.raises(DomainError):
            lorentz.eps_imaginary_axis(-1.0)

    def test_rejects_invalid_oscillator(self):
        with pytest.raises(ConfigurationError, match="omega0"):
            Oscillator(strength=1.0, omega0=0.0)

    def test_rejects_eps_inf_below_one(self):
        with pytest.raises(ConfigurationError, match="eps_inf"):
            OscillatorModel(0.5, [])

    def test_bundled_silica(self):
        silica = OscillatorModel.silica()
        assert len(silica.oscillators) == 6
        assert silica.eps_static == pytest.approx(3.81, rel=1e-12)
        assert kramers_kronig(silica, 0.0) == pytest.approx(3.81, rel=3e-2)

    def test_survives_pickling(self, lorentz):
        lorentz.eps_imaginary_axis(1e14)
        clone = pickle.loads(pickle.dumps(lorentz))
        assert clone.eps_imaginary_axis(1e14) == lorentz.eps_imaginary_axis(1e14)


class TestOpticalTable:
    """Loading and validating optical tables."""

    def test_well_formed_file(self, tmp_path):
        path = write_table(
            tmp_path / "ok.txt", [(1e13, 3.0, 0.1), (1e14, 2.5, 0.5), (1e15, 2.0, 0.0)]
        )
        table = load_optical_table(path)
        assert len(table) == 3
        assert table.frequency_range == (1e13, 1e15)

    def test_descending_rows_name_the_row(self, tmp_path):
        path = write_table(
            tmp_path / "bad.txt", [(1e13, 3.0, 0.1), (1e12, 2.5, 0.5), (1e15, 2.0, 0.0)]
        )
        with pytest.raises(OpticalDataError, match="row 2") as excinfo:
            load_optical_table(path)
        assert excinfo.value.row == 2

    def test_negative_absorption_is_rejected(self, tmp_path):
        path = write_table(tmp_path / "neg.txt", [(1e13, 3.0, 0.1), (1e14, 2.5, -0.5)])
        with pytest.raises(OpticalDataError, match="passivity"):
            load_optical_table(path)

    def test_unparsable_value(self, tmp_path):
        path = write_table(tmp_path / "text.txt", [(1e13, 3.0, 0.1), (1e14, "x", 0.5)])
        with pytest.raises(OpticalDataError, match="row 2"):
            load_optical_table(path)

    def test_single_row_is_rejected(self, tmp_path):
        path = write_table(tmp_path / "one.txt", [(1e13, 3.0, 0.1)])
        with pytest.raises(OpticalDataError, match="at least 2 rows"):
            load_optical_table(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_optical_table(tmp_path / "absent.txt")

    def test_ev_nk_format(self, tmp_path):
        path = write_table(
            tmp_path / "nk.txt",
            [(0.1, 2.0, 0.0), (1.0, 2.0, 0.5)],
            header="#format=ev_nk",
        )
        table = load_optical_table(path)
        assert table.eps_re[0] == pytest.approx(4.0)
        assert table.eps_im[1] == pytest.approx(2.0)
        assert table.omega[1] == pytest.approx(1.519267e15, rel=1e-6)

    def test_unknown_format(self, tmp_path):
        path = write_table(
            tmp_path / "fmt.txt",
            [(0.1, 2.0, 0.0), (1.0, 2.0, 0.5)],
            header="#format=nm",
        )
        with pytest.raises(OpticalDataError, match="unknown format"):
            load_optical_table(path)


class TestTabulatedModel:
    """Interpolation, extrapolation and Kramers–Kronig on tables."""

    def test_exact_at_nodes(self, sampled_table):
        model = TabulatedModel(sampled_table)
        for i in (0, 700, 1999):
            value = model.eps_real_axis(sampled_table.omega[i])
            assert value.real == pytest.approx(sampled_table.eps_re[i], rel=1e-12)
            assert value.imag == pytest.approx(sampled_table.eps_im[i], rel=1e-12)

    def test_kramers_kronig_against_oscillator(self, lorentz, sampled_table):
        model = TabulatedModel(sampled_table)
        for xi in (0.0, 1e13, 1e15, 1e17):
            assert model.eps_imaginary_axis(xi) == pytest.approx(
                lorentz.eps_imaginary_axis(xi), rel=1e-3
            )

    def test_kramers_kronig_is_monotone(self, sampled_table):
        model = TabulatedModel(sampled_table)
        values = [model.eps_imaginary_axis(xi) for xi in np.logspace(11, 18, 15)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert values[-1] > 1.0

    def test_extrapolation_warns_once(self, sampled_table, caplog):
        model = TabulatedModel(sampled_table)
        with caplog.at_level(logging.WARNING):
            low = model.eps_real_axis(1e10)
            model.eps_real_axis(1e20)
        assert caplog.text.count("Extrapolating") == 1
        # Im ε falls linearly below the table
        assert low.imag == pytest.approx(sampled_table.eps_im[0] * 1e-2, rel=1e-12)


class TestRegistry:
    """Model discovery and substrate resolution."""

    def test_model_types(self):
        names = [t.name for t in get_model_types()]
        assert names == ["oscillator", "tabulated"]

    def test_model_table(self):
        table = get_model_table()
        assert "oscillator" in table
        assert "silica" in table

    def test_builtin_silica(self):
        model = resolve_substrate("silica")
        assert isinstance(model, OscillatorModel)
        assert model.eps_static == pytest.approx(3.81)

    def test_model_instance_passes_through(self, lorentz):
        assert resolve_substrate(lorentz) is lorentz

    def test_data_dir_lookup(self, tmp_path, monkeypatch):
        write_table(tmp_path / "glass.txt", [(1e13, 3.0, 0.1), (1e14, 2.5, 0.5)])
        monkeypatch.setenv(DATA_DIR_ENV, str(tmp_path))
        monkeypatch.chdir(tmp_path.parent)
        model = resolve_substrate("glass.txt")
        assert isinstance(model, TabulatedModel)

    def test_unknown_substrate(self, tmp_path, monkeypatch):
        monkeypatch.delenv(DATA_DIR_ENV, raising=False)
        monkeypatch.chdir(tmp_path)
        with pytest.raises(ConfigurationError, match="Unknown substrate"):
            resolve_substrate("unobtainium")
