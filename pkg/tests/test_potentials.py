import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fisherqm.errors import DataError, NotConfining, PerturbationWarning, SignError
from fisherqm.potentials import (
    DeltaPotential,
    OscillatorParams,
    PolynomialPotential,
    SquareWellPotential,
    energy_from_epsilon,
    epsilon_from_energy,
    lambda2_from_omega,
    multipliers_from_oscillator,
    omega_from_lambda2,
    oscillator_from_multipliers,
    potential_from_json,
    potential_to_json,
)

finite = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=1, max_size=5), finite, st.floats(0.01, 10))
def test_polynomial_matches_direct_sum(head, x, top):
    lambdas = head + [0.0] * (1 - len(head) % 2) + [-top]  # even order, negative leading
    p = PolynomialPotential(tuple(lambdas))
    direct = -sum(c * x**k for k, c in enumerate(lambdas, start=1)) / 8
    assert float(p(x)) == pytest.approx(direct, rel=1e-12, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(-4, 4))
def test_even_polynomial_is_symmetric(l2, l4, x):
    p = PolynomialPotential((0.0, -l2, 0.0, -l4))
    assert p.is_even()
    assert float(p(x)) == float(p(-x))


@pytest.mark.parametrize("lambdas", [(0.0, 1.0), (0.0, -1.0, -2.0), (0.0, 0.0), (0.0, -1.0, 0.0, 3.0)])
def test_non_confining_rejected(lambdas):
    with pytest.raises(NotConfining):
        PolynomialPotential(lambdas)


def test_nonfinite_multiplier_is_data_error():
    with pytest.raises(DataError):
        PolynomialPotential((0.0, float("nan")))


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3))
def test_omega_lambda2_roundtrip(w):
    assert omega_from_lambda2(lambda2_from_omega(w)) == pytest.approx(w, rel=1e-14)


def test_omega_sign_errors():
    with pytest.raises(SignError):
        omega_from_lambda2(0.5)
    with pytest.raises(SignError):
        lambda2_from_omega(-1.0)
    with pytest.raises(SignError):
        OscillatorParams(0.0)


def test_oscillator_multiplier_roundtrip_and_equivalence():
    p = OscillatorParams(1.7, 0.05, 0.08)
    pp = multipliers_from_oscillator(p)
    q = oscillator_from_multipliers(pp)
    for name in ("omega", "eps1", "eps2"):
        assert getattr(q, name) == pytest.approx(getattr(p, name), rel=1e-14)
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(pp(x), p.potential(x), rtol=1e-13, atol=1e-14)


def test_negative_quartic_has_no_multiplier_form():
    with pytest.raises(SignError):
        multipliers_from_oscillator(OscillatorParams(1.0, 0.0, -0.01))
    with pytest.raises(SignError):
        multipliers_from_oscillator(OscillatorParams(1.0, 0.01, 0.0))


def test_large_perturbation_warns():
    with pytest.warns(PerturbationWarning):
        OscillatorParams(1.0, 0.2, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        OscillatorParams(1.0, 0.05, 0.05)


def test_energy_epsilon_inverse():
    assert energy_from_epsilon(4.0) == 0.5
    assert epsilon_from_energy(energy_from_epsilon(-3.3)) == pytest.approx(-3.3)


def test_square_well_values():
    w = SquareWellPotential(0.5, 3.0)
    np.testing.assert_array_equal(w(np.array([-1.0, -0.5, 0.0, 0.5, 0.7])), [0, -1.5, -3, -1.5, 0])
    assert w.fineness == pytest.approx(0.75)
    assert w.strength == pytest.approx(3.0)
    with pytest.raises(SignError):
        SquareWellPotential(-1, 1)
    with pytest.raises(SignError):
        DeltaPotential(0.0)


@pytest.mark.parametrize(
    "pot",
    [
        PolynomialPotential((0.0, -4.0)),
        OscillatorParams(2.0, 0.01, 0.02),
        SquareWellPotential(1.0, 2.0),
        DeltaPotential(1.5),
    ],
)
def test_json_roundtrip(pot):
    assert potential_from_json(potential_to_json(pot)) == pot


@pytest.mark.parametrize("spec", [{}, {"type": "nope"}, {"type": "square_well", "depth": 1}, [1, 2]])
def test_bad_json_is_data_error(spec):
    with pytest.raises(DataError):
        potential_from_json(spec)


def test_harmonic_potential_shape():
    p = OscillatorParams(3.0)
    assert float(p.potential(2.0)) == pytest.approx(0.5 * 9 * 4)
    assert math.isclose(float(p.potential(0.0)), 0.0)
