"""Acceptance measurements.

Each ``check_*`` function runs one desk-scale experiment and returns a
``CheckResult`` with the measured quantities, the pinned thresholds and a
verdict.  The tolerances live here as module constants so that tests and the
``verify-all`` scenario share them.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boundary_layer import (
    NONE_SUPERSONIC,
    NONE_U_NONPOSITIVE,
    SUBSONIC_SADDLE,
    TRANSONIC_SADDLE_NODE,
    bl_matrix,
    bl_residual,
    build_linearization,
    classify_bl_existence,
    fit_algebraic_exponent,
    solve_subsonic_bl,
    solve_transonic_bl,
)
from .composition import (
    build_superposition,
    design_configuration,
    interaction_integral,
    mass_defect_fd,
    solve_intermediates,
    superposition_defects,
    superposition_error_terms,
    upper_volume,
)
from .contact_wave import ContactWave, contact_defect, make_contact_wave
from .diagnostics import decay_fit, energy_functional, EXPONENTIAL
from .rarefaction import (
    burgers_fields,
    characteristic_residual,
    make_rarefaction,
    rarefaction_fields,
    rarefaction_on_curve,
    riemann_invariant,
    sample_grid,
)
from .solver import (
    DIRICHLET,
    ConstantWave,
    Field,
    Grid1D,
    Problem,
    SolverConfig,
    SteadyWave,
    perturbed_initial,
    run,
    step,
)
from .thermo import GasModel, State, state_with_mach

# pinned thresholds
TRICHOTOMY_RUNTIME = 1.0
DETJ_RTOL = 1e-10
SUBSONIC_RATE_RTOL = 0.10
SUBSONIC_RESIDUAL = 1e-8
SUBSONIC_RUNTIME = 1.0
TRANSONIC_SLOPE = -1.0
TRANSONIC_SLOPE_TOL = 0.1
CONTACT_Q1_SLOPE = -1.5
CONTACT_Q2_SLOPE = -2.0
CONTACT_SLOPE_TOL = 0.15
CONTACT_EXACT = 1e-8
CONTACT_RUNTIME = 10.0
CHARACTERISTIC_RESIDUAL = 1e-12
RIEMANN_INVARIANT_TOL = 1e-10
LINF_GROWTH_FACTOR = 2.0
INTERMEDIATE_TOL = 1e-10
SUPERPOSITION_Q_TOL = 1e-8
INTERACTION_TOL = 1e-8
SOLVER_ORDER = 1.8
CONSTANT_STEP_TOL = 1e-14
STABILITY_SUP_FRACTION = 0.25
STABILITY_RUNTIME = 600.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        items = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{tag}] {self.name}: {items}" + (f" ({self.note})" if self.note else "")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


# -- 1, 2: existence classification -------------------------------------------


def check_trichotomy(g: GasModel | None = None) -> CheckResult:
    g = g or GasModel(gamma=1.4)
    t0 = time.perf_counter()
    machs = (0.3, 0.7, 1.0, 1.5, 3.0)
    tags = [classify_bl_existence(state_with_mach(1.0, 1.0, m, g), g) for m in machs]
    tags.append(classify_bl_existence(state_with_mach(1.0, 1.0, 0.5, g, sign=-1.0), g))
    elapsed = time.perf_counter() - t0
    expected = [SUBSONIC_SADDLE, SUBSONIC_SADDLE, TRANSONIC_SADDLE_NODE, NONE_SUPERSONIC, NONE_SUPERSONIC,
                NONE_U_NONPOSITIVE]
    return CheckResult(
        "existence trichotomy",
        tags == expected and elapsed < TRICHOTOMY_RUNTIME,
        {"tags": tags, "runtime_s": elapsed},
    )


def detj_formula(right: State, g: GasModel) -> float:
    M2 = right.u**2 / (g.R * g.gamma * right.theta)
    return g.R**2 * g.gamma * right.theta * (M2 - 1.0) / (g.kappa * g.mu * (g.gamma - 1.0))


def check_detj(n: int = 100, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        g = GasModel(
            R=rng.uniform(0.2, 3.0), gamma=rng.uniform(1.05, 3.0),
            mu=rng.uniform(0.1, 5.0), kappa=rng.uniform(0.1, 5.0),
        )
        s = State(rng.uniform(0.2, 5.0), rng.uniform(0.05, 5.0), rng.uniform(0.2, 5.0))
        ref = detj_formula(s, g)
        got = float(np.linalg.det(bl_matrix(s, g)))
        worst = max(worst, abs(got - ref) / abs(ref))
    return CheckResult("det J identity", worst < DETJ_RTOL, {"worst_rel_err": worst, "samples": n})


# -- 3, 4: BL decay --------------------------------------------------------------


def check_subsonic_decay(delta: float = 1e-3) -> CheckResult:
    g = GasModel(gamma=1.4)
    right = state_with_mach(1.0, 1.0, 0.5, g)
    t0 = time.perf_counter()
    prof = solve_subsonic_bl(right, g, delta)
    res = bl_residual(prof, order=4)
    elapsed = time.perf_counter() - t0
    target = abs(prof.linearization.lam2)
    rel = abs(prof.fitted_rate - target) / target
    return CheckResult(
        "subsonic BL exponential decay",
        rel < SUBSONIC_RATE_RTOL and res["sup"] < SUBSONIC_RESIDUAL and elapsed < SUBSONIC_RUNTIME,
        {"fitted_rate": prof.fitted_rate, "abs_lambda2": target, "residual_sup": res["sup"], "runtime_s": elapsed},
    )


def check_transonic_decay(delta: float = 1e-2, gammas=(1.4, 5.0 / 3.0, 2.0)) -> CheckResult:
    slopes = []
    for gam in gammas:
        g = GasModel(gamma=gam)
        right = state_with_mach(1.0, 0.5, 1.0, g)
        prof = solve_transonic_bl(right, g, delta, xi_max=100.0 / delta)
        slopes.append(fit_algebraic_exponent(prof, 10.0 / delta, 100.0 / delta))
    ok = all(abs(s - TRANSONIC_SLOPE) <= TRANSONIC_SLOPE_TOL for s in slopes)
    return CheckResult("transonic BL algebraic decay", ok, {"gammas": list(gammas), "slopes": slopes})


# -- 5: contact wave ----------------------------------------------------------------


def contact_sup_series(cw: ContactWave, sigma: float, times, n_eta: int = 4001) -> dict:
    eta = np.linspace(-cw.profile.eta_grid[-1], cw.profile.eta_grid[-1], n_eta)
    q1, q2, mass, energy = [], [], [], []
    for t in times:
        xi = eta * math.sqrt(1.0 + t) - sigma * t
        d = contact_defect(cw, t, xi, sigma)
        q1.append(float(np.max(np.abs(d["Q1"]))))
        q2.append(float(np.max(np.abs(d["Q2"]))))
        mass.append(float(np.max(np.abs(d["mass_defect"]))))
        energy.append(float(np.max(np.abs(d["energy_defect"]))))
    return {"Q1": np.array(q1), "Q2": np.array(q2), "mass": np.array(mass), "energy": np.array(energy)}


def check_contact_scaling() -> CheckResult:
    g = GasModel(gamma=1.4)
    t0 = time.perf_counter()
    left = State(1.0, 0.5, 1.2)
    p = g.R * left.theta / left.v
    cw = make_contact_wave(left, State(g.R * 1.0 / p, 0.5, 1.0), g)
    prof = cw.profile
    sigma = -0.3
    times = np.geomspace(10.0, 1e3, 12)
    s = contact_sup_series(cw, sigma, times)
    k1 = decay_fit(1.0 + times, s["Q1"], "algebraic").parameter
    k2 = decay_fit(1.0 + times, s["Q2"], "algebraic").parameter
    exact = max(float(np.max(s["mass"])), float(np.max(s["energy"])))
    elapsed = time.perf_counter() - t0
    ok = (
        abs(k1 - CONTACT_Q1_SLOPE) <= CONTACT_SLOPE_TOL
        and abs(k2 - CONTACT_Q2_SLOPE) <= CONTACT_SLOPE_TOL
        and exact < CONTACT_EXACT
        and elapsed < CONTACT_RUNTIME
    )
    return CheckResult(
        "contact wave defect scaling", ok,
        {"Q1_slope": k1, "Q2_slope": k2, "mass_energy_defect": exact, "fitted_c0": prof.fitted_c0, "runtime_s": elapsed},
    )


# -- 6: rarefaction ---------------------------------------------------------------


def check_rarefaction(eps: float = 0.1) -> CheckResult:
    g = GasModel(gamma=1.4)
    right = State(1.0, 0.2, 1.0)
    rr = make_rarefaction(rarefaction_on_curve(right, 1.1, g), right, g, eps=eps)
    sigma = -0.5
    times = np.array([1.0, 10.0, 100.0, 1e3, 1e4])
    resid = 0.0
    min_wx = math.inf
    const_gap = 0.0
    ri_spread = 0.0
    scaled = []
    for t in times:
        xi = sample_grid(rr, t, sigma, 4001)
        x = xi + sigma * t
        resid = max(resid, characteristic_residual(rr.burgers, 1.0 + t, x))
        b = burgers_fields(rr.burgers, 1.0 + t, x)
        min_wx = min(min_wx, float(np.min(b["w_x"])))
        f = rarefaction_fields(rr, t, xi, sigma)
        left = x <= rr.burgers.w_minus * (1.0 + t)
        if np.any(left):
            ls = rr.left_star
            const_gap = max(const_gap, float(np.max(np.abs(f["V"][left] - ls.v))),
                            float(np.max(np.abs(f["U"][left] - ls.u))),
                            float(np.max(np.abs(f["Theta"][left] - ls.theta))))
        ri = riemann_invariant(rr, f["V"], f["U"])
        ri_spread = max(ri_spread, float(np.ptp(ri)))
        scaled.append((1.0 + t) * float(np.max(np.abs(f["U_x"]))))
    # (1+t) |w_x| < 1 and |dU/dw| = 2V/(gamma+1) bound the scaled norm
    bound = 2.0 * rr.left_star.v / (g.gamma + 1.0)
    growth = scaled[-1] / scaled[-2]
    ok = (
        resid < CHARACTERISTIC_RESIDUAL
        and min_wx >= 0
        and const_gap == 0.0
        and ri_spread < RIEMANN_INVARIANT_TOL
        and max(scaled) <= bound
        and growth <= LINF_GROWTH_FACTOR
    )
    return CheckResult(
        "Burgers and rarefaction oracles", ok,
        {"char_residual": resid, "min_w_x": min_wx, "const_region_gap": const_gap,
         "riemann_invariant_spread": ri_spread, "scaled_Ux_sup": scaled, "analytic_bound": bound,
         "last_decade_growth": growth},
    )


# -- 7: intermediate states --------------------------------------------------


def _max_defect(inter, plus, g):
    d = inter.invariant_defects(plus, g)
    return max(d["velocity"], d["pressure"], d["mass"], d["entropy"], d["curve"]), d["v_upper_minus_v_plus"]


def check_intermediates(n: int = 20, seed: int = 11) -> CheckResult:
    g = GasModel(gamma=1.4)
    plus = State(1.0, 0.5, 1.0)
    rng = np.random.default_rng(seed)
    worst = 0.0
    recovered = 0.0
    for _ in range(n):
        u_star = rng.uniform(0.40, 0.49)
        cd = rng.uniform(-0.02, 0.02)
        dB = rng.uniform(1e-3, 1e-2)
        branch = int(rng.choice([-1, 1]))
        minus, designed, _ = design_configuration(plus, g, u_star, cd, dB, branch)
        rep = solve_intermediates(minus, plus, g)
        m, gap = _max_defect(rep.states, plus, g)
        worst = max(worst, m)
        if gap < 0 or rep.sign_changes != 1:
            worst = math.inf
        recovered = max(recovered, abs(rep.states.star.u - u_star))
    # no contact wave: u_* equal to the intersection velocity
    minus0, des0, _ = design_configuration(plus, g, 0.45, 0.0, 5e-3, 1)
    rep0 = solve_intermediates(minus0, plus, g)
    no_cd = abs(rep0.states.star.v - rep0.states.star_upper.v)
    no_cd_ut = abs(rep0.states.star.u - rep0.states.u_tilde)
    # no rarefaction: u_* = u_+ gives the far-field state exactly
    v_up = upper_volume(plus.u, plus, g)
    minus1, _, _ = design_configuration(plus, g, plus.u, 0.02, 5e-3, 1)
    up1 = solve_intermediates(minus1, plus, g).states.star_upper
    no_r3_exact = v_up == plus.v and up1 == plus
    ok = worst < INTERMEDIATE_TOL and no_cd < INTERMEDIATE_TOL and no_cd_ut < INTERMEDIATE_TOL and no_r3_exact
    return CheckResult(
        "intermediate-state consistency", ok,
        {"worst_invariant_defect": worst, "u_star_recovery": recovered, "no_cd_volume_gap": no_cd,
         "no_cd_u_tilde_gap": no_cd_ut, "no_r3_volume_gap": abs(v_up - plus.v), "no_r3_exact": no_r3_exact},
    )


# -- 8: superposition ---------------------------------------------------------------


def default_superposition(eps: float = 0.25):
    g = GasModel(gamma=1.4)
    plus = State(1.0, 0.5, 1.0)
    minus, _, _ = design_configuration(plus, g, u_star=0.475, cd_ratio=0.0103, delta_B=1e-2, branch=1)
    return g, plus, minus, build_superposition(minus, plus, g, eps=eps)


def check_superposition() -> CheckResult:
    g, plus, minus, w = default_superposition()
    xi = np.linspace(0.0, 400.0, 4001)
    q_gap = 0.0
    mass = 0.0
    mass_fd = 0.0
    for t in (0.0, 1.0, 5.0, 20.0, 100.0):
        e = superposition_error_terms(w, t, xi)
        d = superposition_defects(w, t, xi)
        q_gap = max(q_gap, float(np.max(np.abs(d["momentum"] - e["Q1"]))), float(np.max(np.abs(d["energy"] - e["Q2"]))))
        mass = max(mass, float(np.max(np.abs(d["mass"]))))
        if t >= 1.0:
            mass_fd = max(mass_fd, float(np.max(np.abs(mass_defect_fd(w, t, xi[1:])))))
    inter = [interaction_integral(w, t, xi) for t in (20.0, 50.0, 100.0)]
    ok = q_gap < SUPERPOSITION_Q_TOL and mass < SUPERPOSITION_Q_TOL and mass_fd < 1e-6 and max(inter) < INTERACTION_TOL
    return CheckResult(
        "superposition defect", ok,
        {"Q_gap": q_gap, "mass_defect": mass, "mass_defect_fd": mass_fd, "interaction_t20_50_100": inter},
    )


# -- 9: solver ------------------------------------------------------------------------


def steady_bl_drift(ns=(101, 201, 401), xi_max: float = 20.0, end_time: float = 10.0):
    g = GasModel(gamma=1.4)
    right = state_with_mach(1.0, 1.0, 0.5, g)
    prof = solve_subsonic_bl(right, g, 1e-2)
    drifts = []
    for n in ns:
        grid = Grid1D(xi_max, n)
        prob = Problem.inflow(grid, g, prof.left, far=right)
        f = Field(0.0, *prof.evaluate(grid.xi))
        tr = run(f, prob, SolverConfig(end_time=end_time, far_field=DIRICHLET), wave=SteadyWave(prof),
                 sample_times=[end_time], keep_snapshots=False)
        drifts.append(tr.norms.sup[-1])
    return [xi_max / (n - 1) for n in ns], drifts


class Manufactured:
    """Smooth forced solution c + a e^{-t} sin(k xi) for each unknown."""

    def __init__(self, g: GasModel, sigma: float = -0.5, L: float = 10.0):
        self.g = g
        self.sigma = sigma
        self.L = L
        self.k = math.pi / L
        self.coeffs = [(1.0, 0.1), (0.5, 0.1), (1.0, 0.1)]

    def values(self, t, xi):
        s = math.exp(-t)
        return [c + a * s * np.sin(self.k * xi) for c, a in self.coeffs]

    def _parts(self, t, xi):
        s = math.exp(-t)
        sn, cs = np.sin(self.k * xi), np.cos(self.k * xi)
        k = self.k
        return [(c + a * s * sn, a * s * k * cs, -a * s * k * k * sn, -a * s * sn) for c, a in self.coeffs]

    def source(self, t, xi):
        g = self.g
        (v, vx, vxx, vt), (u, ux, uxx, ut), (T, Tx, Txx, Tt) = self._parts(t, xi)
        s = self.sigma
        p = g.R * T / v
        px = g.R * (Tx / v - T * vx / v**2)
        rv = s * vx + ux
        ru = s * ux - px + g.mu * (uxx / v - ux * vx / v**2)
        rT = s * Tx + (g.gamma - 1.0) / g.R * (
            -p * ux + g.kappa * (Txx / v - Tx * vx / v**2) + g.mu * ux**2 / v
        )
        return vt - rv, ut - ru, Tt - rT

    def problem(self, n: int) -> Problem:
        grid = Grid1D(self.L, n)
        left = lambda t: [a[0] for a in self.values(t, np.array([0.0]))]
        right = lambda t: [a[0] for a in self.values(t, np.array([self.L]))]
        return Problem(grid, self.g, self.sigma, left, far=right, source=self.source)


def manufactured_errors(ns=(41, 81, 161), end_time: float = 1.0):
    m = Manufactured(GasModel(gamma=1.4))
    errs = []
    for n in ns:
        prob = m.problem(n)
        xi = prob.grid.xi
        f = Field(0.0, *m.values(0.0, xi))
        tr = run(f, prob, SolverConfig(end_time=end_time, far_field=DIRICHLET), sample_times=[end_time])
        last = tr.snapshots[-1]
        ex = m.values(end_time, xi)
        errs.append(max(float(np.max(np.abs(a - b))) for a, b in zip((last.v, last.u, last.theta), ex)))
    return [m.L / (n - 1) for n in ns], errs


def constant_step_change() -> float:
    g = GasModel(gamma=1.4)
    s = State(1.0, 0.5, 1.0)
    grid = Grid1D(20.0, 201)
    prob = Problem.inflow(grid, g, s)
    f = Field(0.0, *(np.full(grid.n, c) for c in s.as_tuple()))
    worst = 0.0
    cfg = SolverConfig(end_time=1.0)
    for _ in range(10):
        f2 = step(f, prob, cfg)
        worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in zip((f2.v, f2.u, f2.theta), (f.v, f.u, f.theta))))
        f = f2
    return worst


def observed_orders(hs, errs):
    return [math.log(errs[i] / errs[i + 1]) / math.log(hs[i] / hs[i + 1]) for i in range(len(hs) - 1)]


def check_solver() -> CheckResult:
    hs, drifts = steady_bl_drift()
    bl_orders = observed_orders(hs, drifts)
    hm, errs = manufactured_errors()
    mms_orders = observed_orders(hm, errs)
    const = constant_step_change()
    ok = min(bl_orders) >= SOLVER_ORDER and min(mms_orders) >= SOLVER_ORDER and const <= CONSTANT_STEP_TOL
    return CheckResult(
        "solver validation", ok,
        {"bl_drift": drifts, "bl_drift_orders": bl_orders, "mms_errors": errs, "mms_orders": mms_orders,
         "constant_step_change": const},
    )


# -- 10: stability ---------------------------------------------------------------------


STABILITY_TIMES = (0, 1, 2, 3, 4, 5, 6, 8, 10, 12, 15, 20, 25, 30, 40, 50, 60, 70, 80, 90, 100)


@dataclass
class StabilityRun:
    wave: object
    trajectory: object
    energy0: float
    energy_end: float
    boundary_fit: object
    head_position: float
    runtime: float


def stability_run(
    xi_max: float = 300.0,
    n: int = 3000,
    amplitude: float = 1e-2,
    center: float = 20.0,
    width: float = 3.0,
    end_time: float = 100.0,
    times=STABILITY_TIMES,
) -> StabilityRun:
    t0 = time.perf_counter()
    g, plus, minus, w = default_superposition()
    grid = Grid1D(xi_max, n)
    xi = grid.xi
    prob = Problem.inflow(grid, g, minus)
    f0 = perturbed_initial(w, grid, minus, amplitude, center, width)
    times = [t for t in times if t <= end_time]
    tr = run(f0, prob, SolverConfig(end_time=end_time), wave=w, sample_times=times, keep_snapshots=True)
    e0 = energy_functional(tr.snapshots[0], w, g, xi).I1_integral
    e1 = energy_functional(tr.snapshots[-1], w, g, xi).I1_integral
    a = tr.norms.as_arrays()
    sel = a["t"] >= 1.0
    bfit = decay_fit(a["t"][sel], a["boundary"][sel], EXPONENTIAL)
    V, U, Th = w.evaluate(end_time, xi)
    moving = np.nonzero(np.abs(U - plus.u) > 1e-3 * w.rr.delta_R)[0]
    head = float(xi[moving[-1]]) if moving.size else 0.0
    return StabilityRun(w, tr, e0, e1, bfit, head, time.perf_counter() - t0)


def check_stability(run_result: StabilityRun | None = None) -> CheckResult:
    r = run_result or stability_run()
    a = r.trajectory.norms.as_arrays()
    t = a["t"]
    late = t >= 20.0
    N_late = a["N"][late]
    N_flat = bool(np.all(np.diff(N_late) <= 0.0))
    h1sq = a["H1"][late] ** 2
    inst_monotone = bool(np.all(np.diff(h1sq) <= 0.0))
    sup_ratio = float(a["sup"][-1] / a["sup"][0])
    ok = (
        sup_ratio < STABILITY_SUP_FRACTION
        and N_flat
        and r.energy_end < r.energy0
        and r.boundary_fit.rate > 0
        and r.runtime < STABILITY_RUNTIME
    )
    return CheckResult(
        "desk-scale stability", ok,
        {"sup_ratio": sup_ratio, "N_nonincreasing_after_20": N_flat, "H1sq_monotone_after_20": inst_monotone,
         "I1_start": r.energy0, "I1_end": r.energy_end, "boundary_rate": r.boundary_fit.rate,
         "rarefaction_head": r.head_position, "runtime_s": r.runtime, **r.wave.amplitudes},
        note="N is the running supremum of the squared H1 norm",
    )


# -- 11: determinism -----------------------------------------------------------------

DETERMINISM_CONFIGS = {
    "simulate.ini": """[scenario]
name = simulate

[grid]
xi_max = 60
n = 301

[solver]
end_time = 2
sample_times = 0, 0.5, 1, 2

[perturbation]
center = 20
width = 3
""",
    "superpose.ini": """[scenario]
name = superpose

[grid]
xi_max = 60
n = 301

[output]
profile_times = 0, 5
""",
}


def _tree_bytes(root: Path) -> dict:
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def check_determinism(repeats: int = 2) -> CheckResult:
    from .cli import execute
    from .config import parse_config

    identical = True
    n_files = 0
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for name, text in DETERMINISM_CONFIGS.items():
            cfg = tmp / name
            cfg.write_text(text, encoding="utf-8")
            trees = []
            for k in range(repeats):
                out = tmp / f"{name}.{k}"
                if execute(parse_config(cfg), out, threads=1 + k) != 0:
                    return CheckResult("determinism", False, {"failed_config": name})
                trees.append(_tree_bytes(out))
            n_files += len(trees[0])
            identical = identical and all(t == trees[0] for t in trees[1:])
    return CheckResult("determinism", identical, {"files_compared": n_files, "byte_identical": identical})


ALL_CHECKS = (
    check_trichotomy,
    check_detj,
    check_subsonic_decay,
    check_transonic_decay,
    check_contact_scaling,
    check_rarefaction,
    check_intermediates,
    check_superposition,
    check_solver,
    check_stability,
    check_determinism,
)
