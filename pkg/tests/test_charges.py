"""Charges, external fields and point balayage."""

import math

import numpy as np
import pytest

from equilib.engine.charges import (
    Charge,
    ChargeSet,
    ComplexPoint,
    PairConfig,
    balayage_interval_mass,
    balayage_point_density,
    field_derivative,
    field_eval,
)
from equilib.errors import DomainError, PoleError


def test_single_charge_unit_distance():
    charges = ChargeSet.from_triples([(0.0, 1.0, 1.0)])
    assert field_eval(charges, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert field_derivative(charges, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_pair_field_and_derivative_at_origin():
    charges = PairConfig(beta1=1.0, beta2=0.3, gamma=0.5).charge_set()
    assert field_eval(charges, 0.0) == pytest.approx(
        math.log(math.sqrt(2.0)) - 0.5 * math.log(math.sqrt(1.09)), rel=1e-12
    )
    assert field_derivative(charges, 0.0) == pytest.approx(0.5 + 0.5 / 1.09, rel=1e-12)


def test_derivative_matches_finite_difference(four_charges):
    x, h = np.array([-3.0, 0.2, 5.5]), 1e-6
    numeric = (field_eval(four_charges, x + h) - field_eval(four_charges, x - h)) / (2 * h)
    assert np.allclose(field_derivative(four_charges, x), numeric, rtol=1e-6, atol=1e-8)


def test_field_grows_like_total_mass(four_charges):
    x = 1e6
    assert four_charges.total_mass == pytest.approx(0.5)
    assert field_eval(four_charges, x) - 0.5 * math.log(x) == pytest.approx(0.0, abs=1e-5)


def test_field_rejects_non_finite_points(four_charges):
    with pytest.raises(DomainError):
        field_eval(four_charges, math.inf)


def test_real_repellent_field_and_pole():
    charges = ChargeSet.from_triples([(0.0, 1.0, 1.0), (1.0, 0.0, -0.5)])
    assert field_eval(charges, 1.0) == math.inf
    with pytest.raises(PoleError) as info:
        field_derivative(charges, 1.0)
    assert info.value.location == 1.0


def test_balayage_point_density_values():
    assert balayage_point_density(ComplexPoint(re=0.0, im=1.0), 0.0) == pytest.approx(1 / math.pi)
    assert balayage_point_density(ComplexPoint(re=-2.0, im=1.0), -2.0) == pytest.approx(1 / math.pi)


def test_balayage_of_real_point_is_rejected():
    with pytest.raises(DomainError):
        balayage_point_density(ComplexPoint(re=1.0, im=0.0), 0.0)


def test_balayage_interval_mass_is_a_probability():
    z = ComplexPoint(re=0.5, im=2.0)
    assert balayage_interval_mass(z, -math.inf, math.inf) == pytest.approx(1.0)
    assert balayage_interval_mass(z, 0.5, math.inf) == pytest.approx(0.5)


def test_from_charges_merges_coincident_locations():
    charges = ChargeSet.from_triples([(0.0, 1.0, 1.0), (0.0, 1.0, 0.5), (2.0, 1.0, -0.5)])
    assert len(charges.charges) == 2
    assert charges.total_mass == pytest.approx(1.0)


def test_from_charges_drops_cancelled_charges():
    charges = ChargeSet.from_triples([(0.0, 1.0, 1.0), (3.0, 1.0, 0.5), (3.0, 1.0, -0.5)])
    assert len(charges.charges) == 1


@pytest.mark.parametrize(
    "triples",
    [
        [(0.0, 1.0, 1.0), (1.0, 1.0, -1.0)],  # zero total mass
        [(0.0, 0.0, 1.0)],  # attractor on the real axis
        [(0.0, 1.0, math.nan)],
    ],
)
def test_invalid_charge_sets(triples):
    with pytest.raises(DomainError):
        ChargeSet.from_triples(triples)


def test_charge_rejects_zero_strength():
    with pytest.raises(ValueError):
        Charge(location=ComplexPoint(re=0.0, im=1.0), strength=0.0)


def test_scaled_charge_set():
    charges = ChargeSet.from_triples([(0.0, 1.0, 2.0), (1.0, 1.0, -1.0)]).scaled(0.5)
    assert charges.total_mass == pytest.approx(0.5)
    with pytest.raises(DomainError):
        charges.scaled(-1.0)


def test_pair_locations_and_charge_set():
    pair = PairConfig(beta1=3.0, beta2=4.0, gamma=0.25)
    assert pair.z1 == complex(-1, 3)
    assert pair.z2 == complex(1, 4)
    assert pair.charge_set().total_mass == pytest.approx(0.75)

    symmetric = PairConfig(beta1=1.0, beta2=3.0, gamma=0.5, symmetric=True)
    assert symmetric.z1 == 1j and symmetric.z2 == 3j


def test_pair_without_repellent_has_one_charge():
    assert len(PairConfig(beta1=1.0, beta2=2.0, gamma=0.0).charge_set().charges) == 1


@pytest.mark.parametrize(
    "beta1, beta2, gamma, symmetric",
    [(0.0, 1.0, 0.5, False), (1.0, -1.0, 0.5, False), (1.0, 1.0, 1.5, False), (1.0, 0.0, 0.5, True)],
)
def test_invalid_pairs(beta1, beta2, gamma, symmetric):
    with pytest.raises(DomainError):
        PairConfig.create(beta1, beta2, gamma, symmetric)


def test_pair_at_gamma_one_has_no_charge_set():
    with pytest.raises(DomainError):
        PairConfig(beta1=1.0, beta2=1.0, gamma=1.0).charge_set()
