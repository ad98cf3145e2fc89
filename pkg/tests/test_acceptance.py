"""Acceptance criteria, one test each.

Every test prints a single PASS/FAIL line with the measured quantities and
then asserts the pinned thresholds.
"""

import pytest

from inflow_waves import verification as v


def report(capsys, result):
    with capsys.disabled():
        print("\n" + result.line())


@pytest.fixture(scope="module")
def stability():
    return v.stability_run()


def test_01_existence_trichotomy(capsys):
    r = v.check_trichotomy()
    report(capsys, r)
    assert r.measured["tags"] == [
        "subsonic_saddle", "subsonic_saddle", "transonic_saddle_node",
        "none_supersonic", "none_supersonic", "none_u_nonpositive",
    ]
    assert r.measured["runtime_s"] < 1.0
    assert r.passed


def test_02_determinant_identity(capsys):
    r = v.check_detj(n=100)
    report(capsys, r)
    assert r.measured["worst_rel_err"] < 1e-10
    assert r.passed


def test_03_subsonic_exponential_decay(capsys):
    r = v.check_subsonic_decay(delta=1e-3)
    report(capsys, r)
    m = r.measured
    assert abs(m["fitted_rate"] - m["abs_lambda2"]) <= 0.10 * m["abs_lambda2"]
    assert m["residual_sup"] < 1e-8
    assert m["runtime_s"] < 1.0
    assert r.passed


def test_04_transonic_algebraic_decay(capsys):
    r = v.check_transonic_decay()
    report(capsys, r)
    assert all(abs(s + 1.0) <= 0.1 for s in r.measured["slopes"])
    assert r.passed


def test_05_contact_defect_scaling(capsys):
    r = v.check_contact_scaling()
    report(capsys, r)
    m = r.measured
    assert abs(m["Q1_slope"] + 1.5) <= 0.15
    assert abs(m["Q2_slope"] + 2.0) <= 0.15
    assert m["mass_energy_defect"] < 1e-8
    assert m["runtime_s"] < 10.0
    assert r.passed


def test_06_burgers_and_rarefaction(capsys):
    r = v.check_rarefaction()
    report(capsys, r)
    m = r.measured
    assert m["char_residual"] < 1e-12
    assert m["min_w_x"] >= 0
    assert m["const_region_gap"] == 0.0
    assert m["riemann_invariant_spread"] < 1e-10
    assert max(m["scaled_Ux_sup"]) <= m["analytic_bound"]
    assert m["last_decade_growth"] <= 2.0
    assert r.passed


def test_07_intermediate_states(capsys):
    r = v.check_intermediates(n=20)
    report(capsys, r)
    m = r.measured
    assert m["worst_invariant_defect"] < 1e-10
    assert m["no_cd_volume_gap"] < 1e-10
    assert m["no_r3_volume_gap"] == 0.0
    assert m["no_r3_exact"]
    assert r.passed


def test_08_superposition_defect(capsys):
    r = v.check_superposition()
    report(capsys, r)
    m = r.measured
    assert m["Q_gap"] < 1e-8
    assert m["mass_defect"] < 1e-8
    assert max(m["interaction_t20_50_100"]) < 1e-8
    assert r.passed


def test_09_solver_validation(capsys):
    r = v.check_solver()
    report(capsys, r)
    m = r.measured
    assert min(m["bl_drift_orders"]) >= 1.8
    assert min(m["mms_orders"]) >= 1.8
    assert m["constant_step_change"] <= 1e-14
    assert r.passed


def test_10_stability(capsys, stability):
    r = v.check_stability(stability)
    report(capsys, r)
    m = r.measured
    assert m["sup_ratio"] < 0.25
    assert m["N_nonincreasing_after_20"]
    assert m["I1_end"] < m["I1_start"]
    assert m["boundary_rate"] > 0
    assert m["runtime_s"] < 600.0
    assert r.passed


def test_11_determinism(capsys):
    r = v.check_determinism()
    report(capsys, r)
    assert r.measured["byte_identical"]
    assert r.passed
