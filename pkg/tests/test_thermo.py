import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from inflow_waves.thermo import (
    SUBSONIC,
    SUPERSONIC,
    TRANSONIC,
    GasModel,
    State,
    characteristic_speeds,
    classify_regime,
    entropy,
    internal_energy,
    mach,
    pressure,
    pressure_from_entropy,
    sound_speed,
    state_with_mach,
)


@pytest.mark.parametrize(
    "v, theta, R, expected",
    [(1.0, 1.0, 1.0, 1.0), (2.0, 1.0, 1.0, 0.5), (1.0, 2.0, 8.314, 16.628)],
)
def test_pressure_values(v, theta, R, expected):
    assert pressure(State(v, 0.0, theta), GasModel(R=R)) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("kwargs", [{"R": 0.0}, {"gamma": 1.0}, {"gamma": 0.9}, {"mu": -1.0}, {"kappa": 0.0}, {"A": -2.0}])
def test_gas_model_rejects_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        GasModel(**kwargs)


@pytest.mark.parametrize("v, theta", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
def test_state_requires_positive_volume_and_temperature(v, theta):
    with pytest.raises(ValueError):
        State(v, 0.0, theta)


def test_entropy_zero_at_reference():
    g = GasModel(R=2.0, gamma=1.4)
    # R theta v^(gamma-1) = A with A = R
    v = 3.0
    s = State(v, 0.0, 1.0 / v ** (g.gamma - 1.0))
    assert entropy(s, g) == pytest.approx(0.0, abs=1e-14)


def test_entropy_constant_on_isentrope():
    g = GasModel(gamma=1.4)
    plus = State(1.0, 0.0, 1.3)
    s0 = entropy(plus, g)
    for v in np.linspace(0.5, 3.0, 5):
        th = plus.theta * (plus.v / v) ** (g.gamma - 1.0)
        assert entropy(State(v, 0.0, th), g) == pytest.approx(s0, abs=1e-12)


@given(
    v=st.floats(0.1, 10.0), theta=st.floats(0.1, 10.0), gamma=st.floats(1.05, 3.0), R=st.floats(0.1, 10.0)
)
def test_pressure_round_trip_through_entropy(v, theta, gamma, R):
    g = GasModel(R=R, gamma=gamma)
    s = State(v, 0.0, theta)
    assert pressure_from_entropy(v, entropy(s, g), g) == pytest.approx(pressure(s, g), rel=1e-12)


def test_internal_energy():
    g = GasModel(R=1.0, gamma=1.4)
    assert internal_energy(State(1.0, 0.0, 2.0), g) == pytest.approx(5.0)


def test_characteristic_speeds():
    g = GasModel(R=1.0, gamma=5.0 / 3.0)
    l1, l2, l3 = characteristic_speeds(State(1.0, 0.3, 1.0), g)
    assert l3 == pytest.approx(math.sqrt(5.0 / 3.0), rel=1e-12)
    assert l1 == -l3
    assert l2 == 0.0


def test_lambda3_decreasing_along_isentrope():
    g = GasModel(gamma=1.4)
    vs = np.linspace(0.5, 5.0, 10)
    lam = [characteristic_speeds(State(v, 0.0, (1.0 / v) ** (g.gamma - 1.0)), g)[2] for v in vs]
    assert np.all(np.diff(lam) < 0)


def test_mach_values():
    g = GasModel(R=1.0, gamma=5.0 / 3.0)
    assert mach(State(1.0, 0.0, 1.0), g) == 0.0
    assert mach(State(1.0, 1.0, 1.0), g) == pytest.approx(0.7745966692, rel=1e-9)
    c = sound_speed(State(1.0, 0.0, 2.0), g)
    assert mach(State(1.0, c, 2.0), g) == 1.0


@pytest.mark.parametrize("M, tag", [(0.5, SUBSONIC), (1.0, TRANSONIC), (2.0, SUPERSONIC)])
def test_classify_regime(M, tag):
    g = GasModel(gamma=1.4)
    assert classify_regime(state_with_mach(1.0, 1.0, M, g), g).tag == tag
