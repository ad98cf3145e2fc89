"""Command-line scenario runner.

    inflow-waves run <config> [--out DIR] [--threads N]
    inflow-waves check <config>

Exit codes: 0 success, 1 numerical failure, 2 parse error, 3 validation
error, 4 missing config file.
"""

from __future__ import annotations

import argparse
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import scipy

from . import __version__, csvio
from .boundary_layer import (
    NONE_SUPERSONIC,
    NONE_U_NONPOSITIVE,
    SUBSONIC_SADDLE,
    TRANSONIC_SADDLE_NODE,
    BLNonexistence,
    bl_matrix,
    bl_residual,
    classify_bl_existence,
    solve_subsonic_bl,
    solve_transonic_bl,
)
from .composition import (
    ConfigurationError,
    build_superposition,
    design_configuration,
    solve_intermediates,
    superposition_error_terms,
    superposition_defects,
    interaction_integral,
    write_superposition_csv,
)
from .config import ConfigError, ConfigValidationError, Scenario, format_config_value, parse_config
from .contact_wave import ContactSolveError, make_contact_wave, verify_gaussian_tail
from .diagnostics import ALGEBRAIC, EXPONENTIAL, decay_fit, energy_functional, write_energy_csv
from .rarefaction import make_rarefaction, rarefaction_on_curve, verify_rarefaction_bounds, write_profile_csv
from .solver import (
    DIRICHLET,
    Grid1D,
    Problem,
    SolverConfig,
    SolverError,
    perturbed_initial,
    run as run_solver,
    write_snapshot_csv,
)
from .thermo import State, state_with_mach
from .verification import ALL_CHECKS, check_stability, contact_sup_series

EXIT_OK = 0
EXIT_NUMERICAL = 1

MANIFEST = "run_manifest.txt"


class Outputs:
    """Collects written files and fitted constants for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[str] = []
        self.results: dict = {}

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name


def _tag(t: float) -> str:
    return format_config_value(float(t)).replace(".", "p").replace("-", "m")


# -- scenarios --------------------------------------------------------------------


def _classify_row(sc: Scenario, mach: float, sign: float):
    g = sc.gas
    sw = sc.section("sweep")
    s = state_with_mach(sw["v"], sw["theta"], mach, g, sign=sign)
    tag = classify_bl_existence(s, g)
    J = bl_matrix(s, g)
    lam = np.linalg.eigvals(J)
    lam = lam[np.argsort(lam.real)]
    return [mach, s.u, tag, float(np.linalg.det(J)), float(lam[0].real), float(lam[1].real),
            float(np.max(np.abs(lam.imag)))]


def scenario_bl_classify(sc: Scenario, out: Outputs, threads: int) -> None:
    cases = [(m, 1.0) for m in sc.section("sweep")["mach"]]
    if sc.section("sweep")["negative_velocity"]:
        cases.append((0.5, -1.0))
    with ThreadPoolExecutor(max_workers=threads) as ex:
        rows = list(ex.map(lambda c: _classify_row(sc, *c), cases))
    csvio.write_rows(out.path("bl_classify.csv"), ["mach", "u", "case", "detJ", "lambda1", "lambda2", "lambda_imag"], rows)
    out.results["cases"] = " ".join(r[2] for r in rows)


def scenario_bl_solve(sc: Scenario, out: Outputs, threads: int) -> None:
    g = sc.gas
    right = sc.state("plus")
    b = sc.section("bl")
    tag = classify_bl_existence(right, g)
    if tag == SUBSONIC_SADDLE:
        prof = solve_subsonic_bl(right, g, b["delta_B"], branch=b["branch"], h=b["h"], xi_max=b["xi_max"])
    else:
        prof = solve_transonic_bl(right, g, b["delta_B"], xi_max=b["xi_max"], h=b["h"])
    prof.to_csv(out.path("bl_profile.csv"))
    left = prof.left
    out.results.update({
        "case": tag,
        "decay": prof.decay,
        "fitted_rate": prof.fitted_rate,
        "ode_residual_sup": bl_residual(prof)["sup"],
        "boundary_v": left.v, "boundary_u": left.u, "boundary_theta": left.theta,
    })


def scenario_contact(sc: Scenario, out: Outputs, threads: int) -> None:
    g = sc.gas
    c = sc.section("contact")
    left = State(g.R * c["theta_minus"] / c["p"], c["u"], c["theta_minus"])
    right = State(g.R * c["theta_plus"] / c["p"], c["u"], c["theta_plus"])
    cw = make_contact_wave(left, right, g, L_eta=c["L_eta"], n=c["n"])
    cw.profile.to_csv(out.path("contact_profile.csv"))
    times = np.asarray(c["times"])
    s = contact_sup_series(cw, c["sigma"], times)
    csvio.write_csv(out.path("contact_defects.csv"), ["t", "sup_Q1", "sup_Q2", "mass_defect", "energy_defect"],
                    [times, s["Q1"], s["Q2"], s["mass"], s["energy"]])
    tail = verify_gaussian_tail(cw.profile)
    out.results.update({"newton_residual": cw.profile.residual, "fitted_c0": tail["fitted_c0"],
                        "c0_left": tail["c0_left"], "c0_right": tail["c0_right"]})
    try:
        out.results["Q1_exponent"] = decay_fit(1.0 + times, s["Q1"], ALGEBRAIC).parameter
        out.results["Q2_exponent"] = decay_fit(1.0 + times, s["Q2"], ALGEBRAIC).parameter
    except ValueError as e:
        out.results["Q_exponent"] = f"not fitted: {e}"


def scenario_rarefaction(sc: Scenario, out: Outputs, threads: int) -> None:
    g = sc.gas
    r = sc.section("rarefaction")
    plus = sc.state("plus")
    rr = make_rarefaction(rarefaction_on_curve(plus, r["v_star"], g), plus, g, eps=r["eps"], q=r["q"])
    sigma = r["sigma"] if r["sigma"] is not None else 0.0
    names = [out.path(f"rarefaction_t{_tag(t)}.csv") for t in r["times"]]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        list(ex.map(lambda a: write_profile_csv(rr, a[0], sigma, a[1], n=r["n"]), zip(r["times"], names)))
    rep = verify_rarefaction_bounds(rr, r["times"], sigma)
    cols, header = [rep.times], ["t"]
    for kind, d in (("first", rep.first), ("second", rep.second)):
        for p, vals in d.items():
            header.append(f"{kind}_L{'inf' if np.isinf(p) else int(p)}")
            cols.append(vals)
    csvio.write_csv(out.path("rarefaction_bounds.csv"), header, cols)
    out.results.update({"delta_R": rr.delta_R, "min_U_x": rep.min_U_x, "crossover_time": rep.crossover_time,
                        "bounds_passed": rep.passed})


def _wave(sc: Scenario, out: Outputs):
    g = sc.gas
    plus = sc.state("plus")
    minus = sc.state("minus")
    if minus is None:
        d = sc.section("design")
        minus, _, _ = design_configuration(plus, g, d["u_star"], d["cd_ratio"], d["delta_B"], d["branch"])
    r = sc.section("rarefaction")
    rep = solve_intermediates(minus, plus, g)
    w = build_superposition(minus, plus, g, eps=r["eps"], q=r["q"], report=rep)
    st, up = rep.states.star, rep.states.star_upper
    out.results.update({
        "boundary_v": minus.v, "boundary_u": minus.u, "boundary_theta": minus.theta,
        "v_star_lower": st.v, "u_star": st.u, "theta_star_lower": st.theta,
        "v_star_upper": up.v, "theta_star_upper": up.theta,
        "sigma_minus": rep.states.sigma_minus, "sign_changes": rep.sign_changes,
        **w.amplitudes,
        "fitted_c0": w.cd.profile.fitted_c0,
    })
    return minus, w


def scenario_superpose(sc: Scenario, out: Outputs, threads: int) -> None:
    _, w = _wave(sc, out)
    gr = sc.section("grid")
    xi = Grid1D(gr["xi_max"], gr["n"]).xi
    rows = []
    for t in sc.section("output")["profile_times"]:
        write_superposition_csv(w, t, xi, out.path(f"superposition_t{_tag(t)}.csv"))
        e = superposition_error_terms(w, t, xi)
        d = superposition_defects(w, t, xi)
        rows.append([t, float(np.max(np.abs(e["Q1"]))), float(np.max(np.abs(e["Q2"]))),
                     float(np.max(np.abs(e["interaction1"]))), float(np.max(np.abs(e["interaction2"]))),
                     float(np.max(np.abs(d["mass"]))), interaction_integral(w, t, xi)])
    csvio.write_rows(out.path("superposition_defects.csv"),
                     ["t", "sup_Q1", "sup_Q2", "sup_interaction1", "sup_interaction2", "mass_defect", "bl_r_integral"], rows)


def scenario_simulate(sc: Scenario, out: Outputs, threads: int) -> None:
    g = sc.gas
    minus, w = _wave(sc, out)
    gr, so, pe = sc.section("grid"), sc.section("solver"), sc.section("perturbation")
    grid = Grid1D(gr["xi_max"], gr["n"])
    xi = grid.xi
    prob = Problem.inflow(grid, g, minus, far=sc.state("plus"))
    f0 = perturbed_initial(w, grid, minus, pe["amplitude"], pe["center"], pe["width"], pe["corner_width"])
    cfg = SolverConfig(end_time=so["end_time"], cfl=so["cfl"], far_field=so["far_field"])
    tr = run_solver(f0, prob, cfg, wave=w, sample_times=so["sample_times"])
    tr.norms.to_csv(out.path("norms.csv"))
    reports = [energy_functional(f, w, g, xi) for f in tr.snapshots]
    write_energy_csv(out.path("energy.csv"), reports)
    write_snapshot_csv(out.path("final_state.csv"), xi, tr.snapshots[-1], tr.perturbations[-1])
    a = tr.norms.as_arrays()
    out.results.update({"steps": tr.steps, "sup_start": a["sup"][0], "sup_end": a["sup"][-1],
                        "I1_start": reports[0].I1_integral, "I1_end": reports[-1].I1_integral})
    sel = a["t"] >= 1.0
    try:
        out.results["boundary_rate"] = decay_fit(a["t"][sel], a["boundary"][sel], EXPONENTIAL).rate
    except ValueError as e:
        out.results["boundary_rate"] = f"not fitted: {e}"


def scenario_verify_all(sc: Scenario, out: Outputs, threads: int) -> None:
    checks = [c for c in ALL_CHECKS if sc.section("verify")["stability"] or c is not check_stability]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        results = list(ex.map(lambda c: c(), checks))
    rows = []
    for i, r in enumerate(results, start=1):
        for k, v in r.measured.items():
            if k == "runtime_s":
                continue
            vals = v if isinstance(v, (list, tuple)) else [v]
            for j, x in enumerate(vals):
                rows.append([i, r.name, r.passed, k if len(vals) == 1 else f"{k}[{j}]", x])
    csvio.write_rows(out.path("verify_summary.csv"), ["criterion", "check", "passed", "quantity", "value"], rows)
    table = [r.line() for r in results]
    out.results["passed"] = sum(r.passed for r in results)
    out.results["total"] = len(results)
    for line in table:
        print(line)


SCENARIO_RUNNERS = {
    "bl-classify": scenario_bl_classify,
    "bl-solve": scenario_bl_solve,
    "contact": scenario_contact,
    "rarefaction": scenario_rarefaction,
    "superpose": scenario_superpose,
    "simulate": scenario_simulate,
    "verify-all": scenario_verify_all,
}


def preflight(sc: Scenario) -> None:
    """Cheap semantic checks that need the physics modules."""
    if sc.name == "bl-solve":
        tag = classify_bl_existence(sc.state("plus"), sc.gas)
        if tag in (NONE_SUPERSONIC, NONE_U_NONPOSITIVE):
            raise ConfigValidationError(f"no BL-solution exists for this far-field state ({tag})", sc.source,
                                        sc.lines.get(("plus", None)))


def write_manifest(sc: Scenario, out: Outputs) -> None:
    lines = ["# inflow-waves run manifest", f"scenario = {sc.name}", "", "[config]"]
    lines += sc.echo()
    lines += ["", "[versions]", f"inflow_waves = {__version__}", f"numpy = {np.__version__}",
              f"scipy = {scipy.__version__}", f"python = {platform.python_version()}", "", "[results]"]
    lines += [f"{k} = {csvio.format_value(v)}" for k, v in out.results.items()]
    lines += ["", "[files]"] + out.files
    with open(out.root / MANIFEST, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def execute(sc: Scenario, out_dir, threads: int = 1) -> int:
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    out = Outputs(root)
    try:
        SCENARIO_RUNNERS[sc.name](sc, out, max(1, threads))
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return ConfigValidationError.exit_code
    except (SolverError, ContactSolveError, BLNonexistence, FloatingPointError, ValueError, RuntimeError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_manifest(sc, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="inflow-waves", description="Wave patterns for the compressible inflow problem.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the scenario described by a config file")
    r.add_argument("config")
    r.add_argument("--out", default="out", help="output directory (default: out)")
    r.add_argument("--threads", type=int, default=1, help="worker threads for sweeps (default: 1)")
    c = sub.add_parser("check", help="validate a config file without running it")
    c.add_argument("config")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = parse_config(args.config)
        preflight(sc)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return e.exit_code
    if args.command == "check":
        print(f"{args.config}: ok ({sc.name}, {len(sc.filled)} defaults filled)")
        return EXIT_OK
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return 2
    return execute(sc, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
