import numpy as np
import pytest
from scipy.special import erfc

from inflow_waves.contact_wave import (
    ContactWave,
    contact_defect,
    contact_fields,
    diffusivity,
    evaluate_contact,
    make_contact_wave,
    solve_selfsimilar,
    verify_gaussian_tail,
)
from inflow_waves.diagnostics import decay_fit
from inflow_waves.thermo import GasModel, State

G = GasModel(gamma=1.4)
P = 1.2


@pytest.fixture(scope="module")
def wave():
    left = State(G.R * 1.2 / P, 0.5, 1.2)
    right = State(G.R * 1.0 / P, 0.5, 1.0)
    return make_contact_wave(left, right, G)


def test_profile_monotone_and_pinned(wave):
    prof = wave.profile
    S = prof.Theta_sim
    assert np.all(np.diff(S) <= 0)
    live = (S < 1.2 - 1e-6) & (S > 1.0 + 1e-6)
    assert np.all(np.diff(S[live]) < 0)
    assert np.all((S >= 1.0) & (S <= 1.2))
    assert abs(S[0] - 1.2) < 1e-8 * 0.2 and abs(S[-1] - 1.0) < 1e-8 * 0.2
    assert prof.residual < 1e-10


def test_equal_temperatures_give_constant():
    prof = solve_selfsimilar(1.0, 1.0, P, G)
    assert np.all(prof.Theta_sim == 1.0)
    cw = ContactWave(prof, P, 0.3, G)
    V, U, Th = evaluate_contact(cw, 5.0, np.linspace(0, 50, 11), -0.4)
    assert np.all(V == G.R / P) and np.all(U == 0.3) and np.all(Th == 1.0)
    d = contact_defect(cw, 5.0, np.linspace(0, 50, 11), -0.4)
    assert np.all(d["Q1"] == 0) and np.all(d["Q2"] == 0)
    rep = verify_gaussian_tail(prof)
    assert rep["passed"]


def test_small_amplitude_matches_erfc():
    # for small jumps (ln S)'' ~ S''/theta, whose solution is an erfc profile
    th_p, th_m = 1.0, 1.0 + 1e-4
    prof = solve_selfsimilar(th_m, th_p, P, G)
    a = diffusivity(P, G) / th_p
    eta = prof.eta_grid
    ref = th_p + (th_m - th_p) * 0.5 * erfc(eta / (2 * np.sqrt(a)))
    assert np.max(np.abs(prof.Theta_sim - ref)) < 1e-3 * (th_m - th_p)


def test_domain_truncation_independence():
    a = solve_selfsimilar(1.2, 1.0, P, G, L_eta=8.0, n=3201)
    b = solve_selfsimilar(1.2, 1.0, P, G, L_eta=12.0, n=4801)
    eta = np.linspace(-6, 6, 601)
    assert np.max(np.abs(a(eta)[0] - b(eta)[0])) < 1e-7 * 0.2


def test_tail_coefficient_grid_stable(wave):
    a = solve_selfsimilar(1.2, 1.0, P, G, n=2001)
    b = solve_selfsimilar(1.2, 1.0, P, G, n=4001)
    assert b.fitted_c0 == pytest.approx(a.fitted_c0, rel=0.1)
    # Gaussian tails approach exp(-theta eta^2 / 4a) on each side
    rep = verify_gaussian_tail(wave.profile)
    a_ = diffusivity(P, G)
    assert rep["c0_right"] == pytest.approx(1.0 / (4 * a_), rel=0.1)
    assert rep["c0_left"] == pytest.approx(1.2 / (4 * a_), rel=0.1)


def test_pressure_constant(wave):
    rng = np.random.default_rng(3)
    t = rng.uniform(0, 100, 100)
    xi = rng.uniform(0, 100, 100)
    d = contact_defect(wave, t, xi, -0.3)
    assert np.max(np.abs(d["pressure"] - P)) < 1e-12


def test_far_field_limit(wave):
    V, U, Th = evaluate_contact(wave, 10.0, np.array([1e3, 1e4]), -0.3)
    assert np.all(np.abs(U - 0.5) < 1e-14)
    assert np.all(np.abs(Th - 1.0) < 1e-14)


def test_mass_and_energy_exact(wave):
    xi = np.linspace(0, 80, 2001)
    for t in (0.0, 1.0, 10.0, 100.0):
        d = contact_defect(wave, t, xi, -0.3)
        assert np.max(np.abs(d["mass_defect"])) < 1e-8
        assert np.max(np.abs(d["energy_defect"])) < 1e-8
        assert np.max(np.abs(d["momentum_defect"] - d["Q1"])) < 1e-12


def test_derivatives_against_finite_differences(wave):
    xi = np.linspace(1, 20, 50)
    t, h = 3.0, 1e-5
    f = contact_fields(wave, t, xi, -0.3)
    for k in ("V", "U", "Theta"):
        fd_x = (contact_fields(wave, t, xi + h, -0.3)[k] - contact_fields(wave, t, xi - h, -0.3)[k]) / (2 * h)
        fd_t = (contact_fields(wave, t + h, xi, -0.3)[k] - contact_fields(wave, t - h, xi, -0.3)[k]) / (2 * h)
        assert np.max(np.abs(f[k + "_x"] - fd_x)) < 1e-7
        assert np.max(np.abs(f[k + "_t"] - fd_t)) < 1e-7


def test_defect_decay_exponents(wave):
    times = np.geomspace(10, 1000, 10)
    s1, s2 = [], []
    for t in times:
        xi = np.linspace(-10, 10, 2001) * np.sqrt(1 + t) + 0.3 * t
        d = contact_defect(wave, t, xi, -0.3)
        s1.append(np.max(np.abs(d["Q1"])))
        s2.append(np.max(np.abs(d["Q2"])))
    assert decay_fit(1 + times, s1, "algebraic").parameter == pytest.approx(-1.5, abs=0.15)
    assert decay_fit(1 + times, s2, "algebraic").parameter == pytest.approx(-2.0, abs=0.15)


def test_weighted_gradient_bounded(wave):
    vals = []
    for t in np.concatenate([[0.0], np.geomspace(1, 1000, 12)]):
        xi = np.linspace(0, 10 * np.sqrt(1 + t) + 0.3 * t, 4001)
        f = contact_fields(wave, t, xi, -0.3)
        vals.append(np.max(np.abs(f["Theta_x"])) * np.sqrt(1 + t) / wave.delta_CD)
    # self-similarity: the weighted gradient never exceeds max|S'| / delta
    bound = np.max(np.abs(wave.profile.dTheta_sim)) / wave.delta_CD
    assert max(vals) <= bound * (1 + 1e-4)
    assert min(vals) > 0.5 * bound


def test_unequal_pressures_rejected():
    with pytest.raises(ValueError):
        make_contact_wave(State(1.0, 0.5, 1.2), State(1.0, 0.5, 1.0), G)
