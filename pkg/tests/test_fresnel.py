"""
Tests for the reflection coefficients of bare and graphene-coated plates.
"""

import cmath
import math

import numpy as np
import pytest

from grapcas.constants import CONSTANTS, GrapheneSheet, from_dimensionless
from grapcas.errors import DomainError
from grapcas.fresnel import (
    CoatedPlate,
    ReflectionPair,
    d_factor,
    reflect_matsubara,
    reflect_real_axis,
)
from grapcas.materials import Oscillator, OscillatorModel, PermittivityModel

SEPARATION = 0.5e-6


class ConstantPermittivity(PermittivityModel):
    """Frequency-independent ε, used as an algebraic test double."""

    name = "constant"

    def __init__(self, eps: complex):
        super().__init__()
        self.eps = complex(eps)

    def eps_real_axis(self, omega):
        return self.eps

    def absorption(self, omega):
        return np.full_like(np.asarray(omega, dtype=float), self.eps.imag)

    def _eps_imaginary_axis(self, xi):
        return self.eps.real


def textbook(eps: complex, t: float):
    """Fresnel coefficients written directly in ω, k with k_z = √(εω²/c² − k²)."""
    kz = cmath.sqrt(1.0 - t * t)
    kz_tilde = cmath.sqrt(eps - t * t)
    if kz_tilde.imag < 0:
        kz_tilde = -kz_tilde
    r_tm = (eps * kz - kz_tilde) / (eps * kz + kz_tilde)
    r_te = (kz - kz_tilde) / (kz + kz_tilde)
    return r_tm, r_te


@pytest.fixture
def silica():
    return OscillatorModel.silica()


@pytest.fixture
def sheet():
    return GrapheneSheet.from_lab_units(delta_ev=0.1, mu_ev=0.0, temperature=300.0)


class TestCoatedPlate:
    """Plate record."""

    def test_coating_follows_plate_temperature(self, silica, sheet):
        plate = CoatedPlate(silica, sheet, temperature=500.0)
        assert plate.coating.temperature == 500.0
        assert plate.at_temperature(77.0).coating.temperature == 77.0

    def test_hashable(self, silica, sheet):
        plate = CoatedPlate(silica, sheet, temperature=300.0)
        assert hash(plate) == hash(CoatedPlate(silica, sheet, temperature=300.0))

    def test_bare_and_local_variants(self, silica, sheet):
        plate = CoatedPlate(silica, sheet)
        assert plate.bare().is_bare
        assert plate.as_local().local


class TestRealAxis:
    """Coefficients at real frequencies."""

    def test_no_interface(self):
        plate = CoatedPlate(ConstantPermittivity(1.0))
        pair = reflect_real_axis(plate, 1.0, 0.5, SEPARATION)
        assert abs(pair.r_tm) < 1e-15
        assert abs(pair.r_te) < 1e-15

    def test_perfect_conductor_limit(self):
        plate = CoatedPlate(ConstantPermittivity(1e12))
        pair = reflect_real_axis(plate, 1.0, 0.5, SEPARATION)
        assert abs(pair.r_tm - 1.0) < 1e-5
        assert abs(pair.r_te + 1.0) < 1e-5

    def test_normal_incidence(self):
        eps = 3.81
        plate = CoatedPlate(ConstantPermittivity(eps))
        pair = reflect_real_axis(plate, 2.0, 0.0, SEPARATION)
        expected = (math.sqrt(eps) - 1.0) / (math.sqrt(eps) + 1.0)
        assert pair.r_tm == pytest.approx(expected, rel=1e-13)
        assert pair.r_te == pytest.approx(-expected, rel=1e-13)

    def test_bare_plate_matches_textbook(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            eps = complex(rng.uniform(1.1, 12.0), rng.uniform(0.0, 5.0))
            t = rng.uniform(0.0, 3.0)
            u = rng.uniform(0.1, 10.0)
            pair = reflect_real_axis(
                CoatedPlate(ConstantPermittivity(eps)), u, t, SEPARATION
            )
            r_tm, r_te = textbook(eps, t)
            assert abs(pair.r_tm - r_tm) <= 1e-12 * max(1.0, abs(r_tm))
            assert abs(pair.r_te - r_te) <= 1e-12 * max(1.0, abs(r_te))

    def test_continuous_across_t_equal_one(self, silica):
        plate = CoatedPlate(silica)
        below = reflect_real_axis(plate, 3.0, 1.0 - 1e-9, SEPARATION)
        above = reflect_real_axis(plate, 3.0, 1.0 + 1e-9, SEPARATION)
        assert abs(below.r_tm - above.r_tm) < 1e-3
        assert abs(below.r_te - above.r_te) < 1e-3

    def test_passive_bare_plate(self, silica):
        plate = CoatedPlate(silica)
        for u in (0.1, 1.0, 5.0, 20.0):
            for t in np.linspace(0.0, 1.0 - 1e-6, 7):
                pair = reflect_real_axis(plate, u, float(t), SEPARATION)
                assert abs(pair.r_tm) <= 1.0 + 1e-12
                assert abs(pair.r_te) <= 1.0 + 1e-12

    def test_passive_coated_plate(self, silica, sheet):
        plate = CoatedPlate(silica, sheet)
        for u in (0.5, 3.0):
            for t in (0.0, 0.3, 0.9):
                pair = reflect_real_axis(plate, u, t, SEPARATION)
                assert abs(pair.r_tm) <= 1.0 + 1e-9
                assert abs(pair.r_te) <= 1.0 + 1e-9

    def test_invalid_arguments(self, silica):
        with pytest.raises(DomainError):
            reflect_real_axis(CoatedPlate(silica), 0.0, 0.5, SEPARATION)

    def test_dimensionless_form_matches_dimensional(self):
        eps = 4.0 + 0.5j
        plate = CoatedPlate(ConstantPermittivity(eps))
        u, t = 2.0, 1.5
        point = from_dimensionless(u, t, SEPARATION)
        c = CONSTANTS.c
        q = math.sqrt(point.k**2 - point.omega**2 / c**2)
        q_tilde = cmath.sqrt(point.k**2 - eps * point.omega**2 / c**2)
        expected_te = (q - q_tilde) / (q + q_tilde)
        pair = reflect_real_axis(plate, u, t, SEPARATION)
        assert abs(pair.r_te - expected_te) < 1e-12


class TestMatsubara:
    """Coefficients at imaginary frequencies."""

    def test_vacuum_gives_zero(self):
        pair = reflect_matsubara(CoatedPlate(ConstantPermittivity(1.0)), 1e14, 1e6)
        assert pair == ReflectionPair(0j, 0j)

    def test_static_bare_silica(self, silica):
        pair = reflect_matsubara(CoatedPlate(silica), 0.0, 1e6)
        assert pair.r_tm.real == pytest.approx(2.81 / 4.81, rel=1e-12)
        assert pair.r_tm.real == pytest.approx(0.58420, abs=1e-5)
        assert pair.r_te == 0

    def test_real_and_bounded(self, silica, sheet):
        plate = CoatedPlate(silica, sheet)
        for xi in (0.0, 1e13, 1e14, 1e15):
            for k in (1e5, 1e6, 1e7):
                pair = reflect_matsubara(plate, xi, k)
                assert abs(pair.r_tm.imag) < 1e-12
                assert abs(pair.r_te.imag) < 1e-12
                assert abs(pair.r_tm) <= 1.0
                assert abs(pair.r_te) <= 1.0

    def test_coating_strengthens_static_tm(self, silica, sheet):
        coated = CoatedPlate(silica, sheet)
        bare = CoatedPlate(silica)
        for k in (1e5, 1e6, 1e7):
            assert reflect_matsubara(coated, 0.0, k).r_tm.real > (
                reflect_matsubara(bare, 0.0, k).r_tm.real
            )

    def test_pristine_static_tm_tends_to_one(self, silica):
        pristine = GrapheneSheet.from_lab_units(temperature=300.0)
        plate = CoatedPlate(silica, pristine)
        assert reflect_matsubara(plate, 0.0, 1e4).r_tm.real > 0.999

    def test_local_static_tm_is_one_with_carriers(self, silica, sheet):
        plate = CoatedPlate(silica, sheet, local=True)
        assert reflect_matsubara(plate, 0.0, 1e6).r_tm == 1.0

    def test_invalid_arguments(self, silica):
        with pytest.raises(DomainError):
            reflect_matsubara(CoatedPlate(silica), 1e14, 0.0)


class TestDFactor:
    """Multiple-reflection denominator."""

    def test_no_reflection(self):
        zero = ReflectionPair(0j, 0j)
        assert d_factor(zero, zero, 3.0, 0.5) == (1.0, 1.0)

    def test_zero_phase_at_t_one(self):
        r1 = ReflectionPair(0.5 + 0.1j, -0.3j)
        r2 = ReflectionPair(0.2, 0.4)
        d_tm, d_te = d_factor(r1, r2, 7.0, 1.0)
        assert d_tm == 1.0 - r1.r_tm * r2.r_tm
        assert d_te == 1.0 - r1.r_te * r2.r_te

    def test_evanescent_factor_decays(self):
        one = ReflectionPair(1.0, 1.0)
        d_tm, _ = d_factor(one, one, 2.0, math.sqrt(2.0))
        assert d_tm == pytest.approx(1.0 - math.exp(-2.0), rel=1e-12)

    def test_resonance_minimum(self):
        one = ReflectionPair(1.0, 1.0)
        # u√(1 − t²) = 2π puts the round trip in phase
        d_tm, _ = d_factor(one, one, 2.0 * math.pi, 0.0)
        assert abs(d_tm) < 1e-12

    def test_passive_plates_never_vanish(self):
        r = ReflectionPair(0.9 * cmath.exp(0.3j), 0.8)
        for u in np.linspace(0.1, 20.0, 50):
            d_tm, d_te = d_factor(r, r, float(u), 0.2)
            assert abs(d_tm) > 0.1
            assert abs(d_te) > 0.1
