import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inflow_waves.composition import (
    BL,
    CD,
    R3,
    ConfigurationError,
    boundary_value,
    build_superposition,
    curve_membership,
    design_configuration,
    evaluate_superposition,
    interaction_integral,
    mass_defect_fd,
    solve_intermediates,
    superposition_defects,
    superposition_error_terms,
    superposition_fields,
    upper_volume,
    upper_volume_displayed,
)
from inflow_waves.diagnostics import decay_fit
from inflow_waves.rarefaction import rarefaction_on_curve
from inflow_waves.thermo import GasModel, State, entropy, pressure

G = GasModel(gamma=1.4)
PLUS = State(1.0, 0.5, 1.0)


@pytest.fixture(scope="module")
def full_wave():
    minus, _, _ = design_configuration(PLUS, G, 0.475, 0.0103, 1e-2, 1)
    return build_superposition(minus, PLUS, G, eps=0.25)


def _check_invariants(inter, tol=1e-10):
    d = inter.invariant_defects(PLUS, G)
    for key in ("velocity", "pressure", "mass", "entropy", "curve"):
        assert d[key] < tol, key
    assert d["v_upper_minus_v_plus"] >= 0


@settings(max_examples=10, deadline=None)
@given(
    u_star=st.floats(0.40, 0.49), cd=st.floats(-0.02, 0.02), dB=st.floats(1e-3, 1e-2), branch=st.sampled_from([-1, 1])
)
def test_round_trip_recovers_design(u_star, cd, dB, branch):
    minus, designed, _ = design_configuration(PLUS, G, u_star, cd, dB, branch)
    rep = solve_intermediates(minus, PLUS, G)
    assert rep.sign_changes == 1
    assert rep.states.star.u == pytest.approx(u_star, abs=1e-10)
    assert rep.states.star.v == pytest.approx(designed.star.v, rel=1e-9)
    _check_invariants(rep.states)


def test_no_rarefaction_degenerate():
    assert upper_volume(PLUS.u, PLUS, G) == PLUS.v
    minus, _, _ = design_configuration(PLUS, G, PLUS.u, 0.02, 1e-2, 1)
    rep = solve_intermediates(minus, PLUS, G)
    up = rep.states.star_upper
    assert up.u == PLUS.u and up.v == PLUS.v and up.theta == PLUS.theta


def test_no_contact_degenerate():
    minus, _, _ = design_configuration(PLUS, G, 0.45, 0.0, 5e-3, 1)
    rep = solve_intermediates(minus, PLUS, G)
    s = rep.states
    assert s.star.v == pytest.approx(s.star_upper.v, abs=1e-12)
    assert s.star.u == pytest.approx(s.u_tilde, abs=1e-12)


def test_upper_volume_forms():
    # the two closed forms coincide when the entropy constant is 1
    for u in (0.3, 0.4, 0.49):
        assert upper_volume_displayed(u, PLUS, G) == pytest.approx(upper_volume(u, PLUS, G), rel=1e-13)
    g2 = GasModel(gamma=1.4, A=2.5)
    v = upper_volume(0.4, PLUS, g2)
    on_curve = rarefaction_on_curve(PLUS, v, g2)
    assert on_curve.u == pytest.approx(0.4, abs=1e-13)
    assert abs(upper_volume_displayed(0.4, PLUS, g2) - v) > 1e-3


def test_not_a_pattern():
    with pytest.raises(ConfigurationError):
        solve_intermediates(State(1.0, 0.9, 1.0), PLUS, G)


def test_curve_membership():
    ok, _ = curve_membership(PLUS, PLUS, CD, G)
    assert not ok
    v2 = 2 * PLUS.v
    cand = rarefaction_on_curve(PLUS, v2, G)
    ok, d = curve_membership(cand, PLUS, R3, G)
    assert ok and d < 1e-12
    rng = np.random.default_rng(1)
    on_cd = State(1.3 * PLUS.v, PLUS.u, 1.3 * PLUS.theta)
    assert curve_membership(on_cd, PLUS, CD, G)[0]
    off = State(on_cd.v, on_cd.u + 1e-2 * rng.uniform(0.5, 1), on_cd.theta)
    assert not curve_membership(off, PLUS, CD, G, tol=1e-4)[0]


def test_bl_membership(full_wave):
    ok, _ = curve_membership(full_wave.minus, full_wave.inter.star, BL, G, tol=1e-6)
    assert ok


def test_all_amplitudes_zero():
    w = build_superposition(PLUS, PLUS, G)
    assert all(a == 0 for a in w.amplitudes.values())
    xi = np.linspace(0, 100, 51)
    for t in (0.0, 10.0):
        V, U, Th = evaluate_superposition(w, t, xi)
        assert np.all(V == PLUS.v) and np.all(U == PLUS.u) and np.all(Th == PLUS.theta)
        e = superposition_error_terms(w, t, xi)
        assert np.all(e["Q1"] == 0) and np.all(e["Q2"] == 0)


def test_far_field_and_boundary(full_wave):
    w = full_wave
    V, U, Th = evaluate_superposition(w, 20.0, np.array([1e4]))
    assert (V[0], U[0], Th[0]) == pytest.approx(PLUS.as_tuple(), abs=1e-12)
    for t in (0.0, 5.0):
        V, U, Th = evaluate_superposition(w, t, np.array([0.0]))
        assert (V[0], U[0], Th[0]) == pytest.approx(boundary_value(w, t), abs=1e-14)


def test_defects_match_error_terms(full_wave):
    xi = np.linspace(0, 400, 4001)
    for t in (0.0, 3.0, 30.0):
        e = superposition_error_terms(full_wave, t, xi)
        d = superposition_defects(full_wave, t, xi)
        assert np.max(np.abs(d["momentum"] - e["Q1"])) < 1e-8
        assert np.max(np.abs(d["energy"] - e["Q2"])) < 1e-8
        assert np.max(np.abs(d["mass"])) < 1e-12
        parts = e["contact1"] + e["rarefaction1"] + e["interaction1"]
        assert np.max(np.abs(parts - e["Q1"])) < 1e-15


def test_mass_defect_finite_difference(full_wave):
    xi = np.linspace(1, 200, 400)
    assert np.max(np.abs(mass_defect_fd(full_wave, 5.0, xi))) < 1e-6


def test_interaction_integral_small(full_wave):
    xi = np.linspace(0, 400, 4001)
    for t in (20.0, 60.0):
        assert interaction_integral(full_wave, t, xi) < 1e-8


def test_rarefaction_only_error_bound():
    minus, _, _ = design_configuration(PLUS, G, 0.45, 0.0, 0.0, 1)
    w = build_superposition(minus, PLUS, G, eps=0.25)
    assert w.amplitudes["delta_B"] == 0.0
    xi = np.linspace(0, 600, 6001)
    ratios = []
    for t in (1.0, 10.0, 100.0):
        R = superposition_fields(w, t, xi)["R"]
        Q1 = superposition_error_terms(w, t, xi)["Q1"]
        scale = np.abs(R["U_xx"]) + R["U_x"] ** 2 + R["V_x"] ** 2
        live = scale > 1e-14
        assert np.all(np.abs(Q1[~live]) < 1e-12)
        ratios.append(np.max(np.abs(Q1[live]) / scale[live]))
    assert max(ratios) < 10.0


def test_bl_and_contact_interaction_decays_exponentially():
    minus, _, _ = design_configuration(PLUS, G, PLUS.u, 0.02, 1e-2, 1)
    w = build_superposition(minus, PLUS, G)
    assert w.amplitudes["delta_R"] == 0.0
    xi = np.linspace(0, 200, 4001)
    times = np.linspace(6.0, 60.0, 10)
    sup = [np.max(np.abs(superposition_error_terms(w, t, xi)["interaction1"])) for t in times]
    fit = decay_fit(times, sup, "exponential")
    assert fit.rate > 0.1
