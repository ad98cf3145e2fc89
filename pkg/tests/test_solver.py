import math

import numpy as np
import pytest

from inflow_waves.composition import build_superposition, design_configuration
from inflow_waves.solver import (
    DIRICHLET,
    ConstantWave,
    Field,
    Grid1D,
    Problem,
    SolverConfig,
    SolverError,
    bump,
    compute_perturbation,
    corner_cutoff,
    h1_norms,
    mass_rate_defect,
    perturbed_initial,
    run,
    step,
)
from inflow_waves.thermo import GasModel, State
from inflow_waves.verification import (
    constant_step_change,
    default_superposition,
    manufactured_errors,
    observed_orders,
    steady_bl_drift,
)

G = GasModel(gamma=1.4)
S = State(1.0, 0.5, 1.0)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid1D(10.0, 8)
    with pytest.raises(ValueError):
        Grid1D(0.0, 100)
    grid = Grid1D(10.0, 101)
    assert grid.h == pytest.approx(0.1)
    assert grid.xi[0] == 0.0 and grid.xi[-1] == 10.0


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(cfl=1.5)
    with pytest.raises(ValueError):
        SolverConfig(far_field="periodic")


def test_constant_state_is_steady():
    assert constant_step_change() <= 1e-14


def test_manufactured_solution_order():
    hs, errs = manufactured_errors()
    assert min(observed_orders(hs, errs)) >= 1.8


def test_steady_layer_drift_second_order():
    hs, drift = steady_bl_drift()
    assert min(observed_orders(hs, drift)) >= 1.8
    # drift <= C h^2 with one constant for all three grids
    C = [d / h**2 for d, h in zip(drift, hs)]
    assert max(C) / min(C) < 1.5


def test_pure_layer_wave_drift_scales_with_h2():
    minus, _, _ = design_configuration(S, G, S.u, 0.0, 1e-2, 1)
    w = build_superposition(minus, S, G)
    sups = []
    for n in (151, 301):
        grid = Grid1D(30.0, n)
        f0 = perturbed_initial(w, grid, minus, 0.0, 20.0, 3.0)
        tr = run(f0, Problem.inflow(grid, G, minus), SolverConfig(end_time=5.0), wave=w, sample_times=[0, 5])
        assert tr.norms.sup[0] < 1e-12
        sups.append(tr.norms.sup[-1])
    assert sups[0] / sups[1] > 3.0


def test_run_hits_sample_times():
    grid = Grid1D(20.0, 101)
    f = Field(0.0, *(np.full(grid.n, c) for c in S.as_tuple()))
    tr = run(f, Problem.inflow(grid, G, S), SolverConfig(end_time=1.0), wave=ConstantWave(S),
             sample_times=[0.0, 0.25, 0.5, 1.0])
    assert [s.t for s in tr.snapshots] == [0.0, 0.25, 0.5, 1.0]
    assert tr.norms.t == [0.0, 0.25, 0.5, 1.0]
    assert max(tr.norms.sup) < 1e-14


def test_corner_condition_enforced():
    grid = Grid1D(20.0, 101)
    f = Field(0.0, *(np.full(grid.n, c) for c in (1.0, 0.6, 1.0)))
    with pytest.raises(ValueError):
        run(f, Problem.inflow(grid, G, S), SolverConfig(end_time=0.1))


def test_inflow_requires_positive_velocity():
    with pytest.raises(ValueError):
        Problem.inflow(Grid1D(10.0, 101), G, State(1.0, -0.1, 1.0))


def test_positivity_failure_reported():
    grid = Grid1D(20.0, 101)
    v = np.full(grid.n, 1.0)
    v[50] = -1e-3
    f = Field(0.0, v, np.full(grid.n, 0.5), np.full(grid.n, 1.0))
    with pytest.raises(SolverError) as info:
        step(f, Problem.inflow(grid, G, S), SolverConfig(), dt=1e-3)
    assert info.value.field is not None


def test_perturbation_of_exact_samples():
    grid = Grid1D(10.0, 101)
    f = Field(0.0, *(np.full(grid.n, c) for c in S.as_tuple()))
    p = compute_perturbation(f, ConstantWave(S), grid.xi)
    assert p.L2 == p.H1 == p.sup == 0.0
    f.theta = f.theta + 1e-3
    p = compute_perturbation(f, ConstantWave(S), grid.xi)
    assert p.sup == pytest.approx(1e-3, rel=1e-12)
    assert np.all(p.phi == 0) and np.all(p.psi == 0)


def test_h1_norm_of_sine():
    L = 2 * math.pi
    xi = np.linspace(0, L, 4001)
    L2, H1, sup = h1_norms(xi, (np.sin(xi),))
    # int_0^{2pi} sin^2 = pi and int cos^2 = pi
    assert L2**2 == pytest.approx(math.pi, rel=1e-6)
    assert H1**2 == pytest.approx(2 * math.pi, rel=1e-6)
    assert sup == pytest.approx(1.0, rel=1e-6)


def test_mass_rate_defect_second_order():
    vals = []
    for n in (101, 201, 401):
        grid = Grid1D(10.0, n)
        xi = grid.xi
        f = Field(0.0, 1.0 + 0.1 * np.sin(xi), 0.5 + 0.1 * np.cos(xi), np.full(n, 1.0))
        vals.append(abs(mass_rate_defect(f, Problem.inflow(grid, G, State(1.0, 0.6, 1.0)))))
    assert vals[0] / vals[1] > 3.5 and vals[1] / vals[2] > 3.5


def test_bump_and_cutoff():
    xi = np.linspace(0, 40, 4001)
    b = bump(xi, 20.0, 3.0, 1e-2)
    assert b.max() == pytest.approx(1e-2)
    assert np.all(b[np.abs(xi - 20) >= 3] == 0)
    chi = corner_cutoff(xi, 5.0)
    assert chi[0] == 1.0 and np.all(chi[xi >= 5] == 0)
    with pytest.raises(ValueError):
        perturbed_initial(ConstantWave(S), Grid1D(40.0, 401), S, 1e-2, 2.0, 3.0)


def test_perturbation_on_constant_state_decays():
    grid = Grid1D(150.0, 751)
    f0 = perturbed_initial(ConstantWave(S), grid, S, 1e-2, 30.0, 5.0)
    tr = run(f0, Problem.inflow(grid, G, S), SolverConfig(end_time=60.0), wave=ConstantWave(S),
             sample_times=np.arange(0.0, 61.0, 5.0))
    sup = np.array(tr.norms.sup)
    t = np.array(tr.norms.t)
    assert np.all(np.diff(sup[t >= 5]) <= 0)
    assert sup[-1] < 0.6 * sup[0]
    N = np.array(tr.norms.N)
    assert np.all(np.diff(N) >= 0)


def test_dirichlet_far_field():
    grid = Grid1D(20.0, 101)
    f = Field(0.0, *(np.full(grid.n, c) for c in S.as_tuple()))
    far = State(1.0, 0.5, 1.1)
    prob = Problem.inflow(grid, G, S, far=far)
    out = step(f, prob, SolverConfig(far_field=DIRICHLET))
    assert out.theta[-1] == 1.1 and out.theta[0] == 1.0


def test_running_sup_norm_grid_refinement():
    # the change from halving h must stay below 4x the h^2 estimate (a quarter of the previous change)
    g, _, minus, w = default_superposition()
    Ns = []
    for n in (751, 1501, 3001):
        grid = Grid1D(300.0, n)
        f0 = perturbed_initial(w, grid, minus, 1e-2, 20.0, 3.0)
        tr = run(f0, Problem.inflow(grid, g, minus), SolverConfig(end_time=2.0), wave=w,
                 sample_times=[0.0, 1.0, 2.0], keep_snapshots=False)
        Ns.append(tr.norms.N[-1])
    coarse, fine = abs(Ns[1] - Ns[0]), abs(Ns[2] - Ns[1])
    assert fine < 4.0 * (coarse / 4.0)
