"""Wave curves, intermediate states and the BL-CD-R3 superposition wave.

Given a boundary state (v_-, u_-, theta_-) and a far-field state
(v_+, u_+, theta_+), the pattern consists of a subsonic boundary layer from
the boundary state to a middle state (v_*, u_*, theta_*), a contact wave from
there to (v^*, u^*, theta^*), and a 3-rarefaction on to the far field.  The
superposition adds the three profiles and subtracts the doubly counted
middle constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import csvio
from .boundary_layer import (
    BLNonexistence,
    BLProfile,
    DEFAULT_SMALLNESS,
    build_linearization,
    classify_bl_existence,
    manifold_membership,
    manifold_theta,
    solve_subsonic_bl,
    SUBSONIC_SADDLE,
)
from .contact_wave import ContactWave, contact_defect, contact_fields, make_contact_wave
from .rarefaction import (
    DEFAULT_EPS,
    DEFAULT_Q,
    RarefactionWave,
    make_rarefaction,
    rarefaction_fields,
    rarefaction_on_curve,
)
from .thermo import GasModel, State, entropy, lambda3_isentrope_constant, mach, pressure

CD, BL, R3 = "CD", "BL", "R3"


ROOT_TOL = 1e-12


class ConfigurationError(ValueError):
    """The data do not form a BL-CD-R3 configuration."""


@dataclass(frozen=True)
class IntermediateStates:
    star: State
    star_upper: State
    u_tilde: float
    sigma_minus: float

    def invariant_defects(self, plus: State, g: GasModel) -> dict:
        s, su = self.star, self.star_upper
        e = (1.0 - g.gamma) / 2.0
        K = lambda3_isentrope_constant(entropy(plus, g), g)
        return {
            "velocity": abs(s.u - su.u),
            "pressure": abs(pressure(s, g) - pressure(su, g)),
            "mass": abs(s.u + self.sigma_minus * s.v),
            "entropy": abs(entropy(su, g) - entropy(plus, g)),
            "curve": abs(su.u - plus.u - 2.0 * K / (g.gamma - 1.0) * (su.v**e - plus.v**e)),
            "v_upper_minus_v_plus": su.v - plus.v,
        }


def upper_volume(u_star: float, plus: State, g: GasModel) -> float:
    """v^* on the 3-rarefaction curve through ``plus`` at velocity u_star."""
    base = 1.0 + (g.gamma - 1.0) * (u_star - plus.u) / (2.0 * math.sqrt(g.R * g.gamma * plus.theta))
    if base <= 0:
        raise ConfigurationError(f"velocity {u_star} lies beyond the vacuum point of the rarefaction curve")
    return plus.v * base ** (2.0 / (1.0 - g.gamma))


def upper_volume_displayed(u_star: float, plus: State, g: GasModel) -> float:
    """Same closed form with the extra factor 1/A inside the bracket.

    Kept only for the comparison report; it agrees with ``upper_volume``
    exactly when A = 1.
    """
    base = 1.0 + (g.gamma - 1.0) * (u_star - plus.u) / (2.0 * g.A * math.sqrt(g.R * g.gamma * plus.theta))
    return plus.v * base ** (2.0 / (1.0 - g.gamma))


def intermediate_states(u_star: float, sigma_minus: float, plus: State, g: GasModel) -> tuple[State, State]:
    """(v_*, u_*, theta_*) and (v^*, u^*, theta^*) for a given middle velocity."""
    if not u_star > 0:
        raise ConfigurationError("middle velocity must be positive")
    if not sigma_minus < 0:
        raise ConfigurationError("boundary speed sigma_- must be negative")
    v_up = upper_volume(u_star, plus, g)
    upper = rarefaction_on_curve(plus, v_up, g)
    # the curve formula and the closed-form inverse agree to rounding
    upper = State(v_up, u_star, upper.theta)
    v_low = u_star / (-sigma_minus)
    star = State(v_low, u_star, upper.theta * v_low / v_up)
    return star, upper


def intersection_velocity(plus: State, sigma_minus: float, g: GasModel) -> float:
    """Velocity where the line u = -sigma_- v meets the 3-rarefaction curve (v > v_+)."""
    if -sigma_minus * plus.v >= plus.u:
        raise ConfigurationError("mass line does not cross the 3-rarefaction curve at v > v_+")
    K = lambda3_isentrope_constant(entropy(plus, g), g)
    e = (1.0 - g.gamma) / 2.0

    def gap(v):
        return plus.u + 2.0 * K / (g.gamma - 1.0) * (v**e - plus.v**e) + sigma_minus * v

    hi = 2.0 * plus.v
    while gap(hi) > 0:
        hi *= 2.0
        if hi > 1e12 * plus.v:
            raise ConfigurationError("no intersection of the mass line and the rarefaction curve")
    v = brentq(gap, plus.v, hi, xtol=1e-15, rtol=1e-15)
    return -sigma_minus * v


def _star_is_admissible(star: State, upper: State, plus: State, g: GasModel) -> bool:
    return (
        star.u > 0
        and mach(star, g) < 1.0
        and upper.v >= plus.v * (1 - 1e-14)
    )


@dataclass
class IntermediateReport:
    states: IntermediateStates
    sign_changes: int
    scan: np.ndarray
    residual: float
    displayed_v_upper: float
    v_upper_discrepancy: float


def solve_intermediates(
    minus: State,
    plus: State,
    g: GasModel,
    search_width: float | None = None,
    n_scan: int = 41,
) -> IntermediateReport:
    """Find the middle velocity u_* placing the boundary state on the BL manifold.

    The BL piece forces v_* = u_* / (-sigma_-); the rarefaction and contact
    conditions then fix v^*, theta^*, theta_* in closed form.  The remaining
    scalar condition is that (u_-, theta_-) lies on the stable manifold of
    the middle state.  A scan over the admissible interval counts sign
    changes before the final Brent solve.
    """
    if not minus.u > 0:
        raise ConfigurationError("inflow requires u_- > 0")
    sigma = -minus.u / minus.v
    u_tilde = intersection_velocity(plus, sigma, g) if -sigma * plus.v < plus.u else math.nan
    width = search_width if search_width is not None else 10.0 * DEFAULT_SMALLNESS * max(1.0, minus.u)
    lo = max(minus.u - width, 1e-12)
    hi = min(minus.u + width, plus.u)
    if not lo < hi:
        raise ConfigurationError("no admissible middle velocity: u_- is beyond the far-field velocity")

    def mismatch(u_star):
        try:
            star, upper = intermediate_states(u_star, sigma, plus, g)
        except (ConfigurationError, ValueError):
            return math.nan
        if not _star_is_admissible(star, upper, plus, g):
            return math.nan
        try:
            return manifold_theta(star, g, minus.u) - minus.theta
        except BLNonexistence:
            return math.nan

    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([mismatch(u) for u in grid])
    # roots on a scan node (e.g. u_* = u_+, no rarefaction) count directly
    near_zero = np.abs(vals) <= ROOT_TOL * max(1.0, minus.theta)
    idx = np.flatnonzero(np.isfinite(vals))
    roots = []
    for a, b in zip(idx[:-1], idx[1:]):
        if near_zero[a]:
            roots.append((a, True))
        elif b == a + 1 and not near_zero[b] and vals[a] * vals[b] < 0:
            roots.append((a, False))
    if idx.size and near_zero[idx[-1]]:
        roots.append((idx[-1], True))
    if not roots:
        raise ConfigurationError(
            "boundary state is not of type BL-CD-R3: no middle velocity with a subsonic BL reaches it"
        )
    changes = roots
    a, on_node = roots[0]
    if on_node:
        u_star = float(grid[a])
    else:
        u_star = brentq(mismatch, grid[a], grid[a + 1], xtol=1e-15, rtol=1e-15)
    star, upper = intermediate_states(u_star, sigma, plus, g)
    if classify_bl_existence(star, g) != SUBSONIC_SADDLE:
        raise ConfigurationError("middle state is not subsonic")
    states = IntermediateStates(star, upper, u_tilde, sigma)
    v_disp = upper_volume_displayed(u_star, plus, g)
    return IntermediateReport(
        states, len(changes), np.vstack([grid, vals]), float(abs(mismatch(u_star))),
        v_disp, abs(v_disp - upper.v),
    )


def curve_membership(candidate: State, anchor: State, curve: str, g: GasModel, tol: float = 1e-8) -> tuple[bool, float]:
    """Is ``candidate`` on the named wave curve through ``anchor``?

    Returns the verdict and the largest defect.  For BL the candidate is the
    boundary state and ``anchor`` the end state of the layer.
    """
    if curve == CD:
        d = max(abs(candidate.u - anchor.u), abs(pressure(candidate, g) - pressure(anchor, g)))
        distinct = abs(candidate.v - anchor.v) > tol
        return bool(d <= tol and distinct), float(d)
    if curve == BL:
        d = abs(candidate.u / candidate.v - anchor.u / anchor.v)
        if d > tol:
            return False, float(d)
        try:
            ok, mism = manifold_membership(anchor, g, candidate.u, candidate.theta, rtol=tol)
        except BLNonexistence:
            return False, math.inf
        return bool(ok), float(max(d, abs(mism)))
    if curve == R3:
        K = lambda3_isentrope_constant(entropy(anchor, g), g)
        e = (1.0 - g.gamma) / 2.0
        du = abs(candidate.u - anchor.u - 2.0 * K / (g.gamma - 1.0) * (candidate.v**e - anchor.v**e))
        ds = abs(entropy(candidate, g) - entropy(anchor, g))
        d = max(du, ds)
        return bool(d <= tol and candidate.v > anchor.v), float(d)
    raise ValueError(f"unknown curve {curve!r}")


@dataclass
class SuperpositionWave:
    bl: BLProfile
    cd: ContactWave
    rr: RarefactionWave
    inter: IntermediateStates
    minus: State
    plus: State
    gas: GasModel

    def __post_init__(self):
        s, su = self.inter.star, self.inter.star_upper
        scale = 1e-9 * max(1.0, s.v, s.theta, su.v, su.theta)
        if max(abs(self.bl.right.v - s.v), abs(self.bl.right.u - s.u), abs(self.bl.right.theta - s.theta)) > scale:
            raise ValueError("BL end state differs from the middle state")
        if self.cd.profile.theta_minus != s.theta or self.cd.profile.theta_plus != su.theta:
            raise ValueError("contact wave ends differ from the middle states")
        if self.rr.left_star != su or self.rr.right != self.plus:
            raise ValueError("rarefaction ends differ from the upper middle state and the far field")

    @property
    def sigma_minus(self) -> float:
        return self.inter.sigma_minus

    def evaluate(self, t, xi):
        return evaluate_superposition(self, t, xi)

    @property
    def amplitudes(self) -> dict:
        s, su = self.inter.star, self.inter.star_upper
        return {"delta_B": self.bl.delta_B, "delta_CD": abs(s.theta - su.theta), "delta_R": self.rr.delta_R}


def build_superposition(
    minus: State,
    plus: State,
    g: GasModel,
    eps: float = DEFAULT_EPS,
    q: int = DEFAULT_Q,
    bl_h: float = 0.01,
    cd_n: int = 4001,
    report: IntermediateReport | None = None,
) -> SuperpositionWave:
    """Assemble the superposition for boundary state ``minus`` and far field ``plus``."""
    rep = report or solve_intermediates(minus, plus, g)
    inter = rep.states
    star = inter.star
    du = minus.u - star.u
    dT = minus.theta - star.theta
    delta = math.hypot(du, dT)
    if delta <= ROOT_TOL * max(1.0, star.theta):
        delta = 0.0
    lin = build_linearization(star, g)
    r = lin.stable_direction
    proj = du * r[0] + dT * r[1]
    branch = 1 if proj >= 0 else -1
    bl = solve_subsonic_bl(star, g, delta, branch=branch, h=bl_h, smallness=max(DEFAULT_SMALLNESS, delta))
    left = bl.left
    if abs(left.u - minus.u) > 1e-6 * max(delta, 1e-12) + 1e-13 or abs(left.theta - minus.theta) > 1e-6 * max(delta, 1e-12) + 1e-13:
        raise ValueError("BL profile does not reproduce the boundary state")
    cd = make_contact_wave(star, inter.star_upper, g, n=cd_n)
    rr = make_rarefaction(inter.star_upper, plus, g, eps=eps, q=q)
    return SuperpositionWave(bl, cd, rr, inter, minus, plus, g)


def design_configuration(
    plus: State,
    g: GasModel,
    u_star: float,
    cd_ratio: float,
    delta_B: float,
    branch: int = 1,
) -> tuple[State, IntermediateStates, BLProfile]:
    """Pick a boundary state producing a BL-CD-R3 pattern with chosen strengths.

    ``u_star`` (< u_+) fixes the rarefaction strength, ``cd_ratio`` sets
    v_* = (1 + cd_ratio) v^*, and the BL of amplitude ``delta_B`` on the
    given manifold branch supplies the boundary state.
    """
    if not 0 < u_star <= plus.u:
        raise ConfigurationError("u_star must lie in (0, u_+]")
    v_up = upper_volume(u_star, plus, g)
    upper = State(v_up, u_star, rarefaction_on_curve(plus, v_up, g).theta)
    v_low = (1.0 + cd_ratio) * v_up
    star = State(v_low, u_star, upper.theta * v_low / v_up)
    sigma = -u_star / v_low
    if classify_bl_existence(star, g) != SUBSONIC_SADDLE:
        raise ConfigurationError("designed middle state is not subsonic")
    u_t = intersection_velocity(plus, sigma, g) if -sigma * plus.v < plus.u else math.nan
    bl = solve_subsonic_bl(star, g, delta_B, branch=branch, smallness=max(DEFAULT_SMALLNESS, delta_B))
    return bl.left, IntermediateStates(star, upper, u_t, sigma), bl


def superposition_fields(w: SuperpositionWave, t: float, xi) -> dict:
    """Component fields plus the summed field with derivatives."""
    xi = np.asarray(xi, dtype=float)
    s = w.sigma_minus
    b = w.bl.derivatives(xi)
    for k in ("V", "U", "Theta"):
        b[k + "_t"] = np.zeros_like(xi)
    c = contact_fields(w.cd, t, xi, s)
    r = rarefaction_fields(w.rr, t, xi, s)
    st, su = w.inter.star, w.inter.star_upper
    const = {"V": st.v + su.v, "U": st.u + su.u, "Theta": st.theta + su.theta}
    total = {}
    for k in ("V", "U", "Theta"):
        total[k] = b[k] + c[k] + r[k] - const[k]
        for suf in ("_x", "_xx", "_t"):
            total[k + suf] = b[k + suf] + c[k + suf] + r[k + suf]
    return {"B": b, "CD": c, "R": r, "total": total}


def evaluate_superposition(w: SuperpositionWave, t: float, xi):
    f = superposition_fields(w, t, xi)["total"]
    return f["V"], f["U"], f["Theta"]


def boundary_value(w: SuperpositionWave, t: float) -> tuple[float, float, float]:
    """Superposition at xi = 0 from the boundary identity."""
    c = contact_fields(w.cd, t, np.array([0.0]), w.sigma_minus)
    left = w.bl.left
    st = w.inter.star
    return (
        float(left.v + c["V"][0] - st.v),
        float(left.u + c["U"][0] - st.u),
        float(left.theta + c["Theta"][0] - st.theta),
    )


def _p_x(f, R):
    return R * (f["Theta_x"] / f["V"] - f["Theta"] * f["V_x"] / f["V"] ** 2)


def _flux_x(f, key):
    """(key_x / V)_x."""
    return f[key + "_xx"] / f["V"] - f[key + "_x"] * f["V_x"] / f["V"] ** 2


def superposition_error_terms(w: SuperpositionWave, t: float, xi) -> dict:
    """Error terms Q1, Q2 of the superposition with their decomposition.

    ``Q1``/``Q2`` are assembled from component derivatives.  The parts are
    the contact self-error (``contact``), the viscous terms of the
    rarefaction (``rarefaction``) and the remaining cross terms between
    waves (``interaction``); the three add up to Q.
    """
    g = w.gas
    f = superposition_fields(w, t, xi)
    T, B, C, Rr = f["total"], f["B"], f["CD"], f["R"]
    cd = contact_defect(w.cd, t, xi, w.sigma_minus)
    P = g.R * T["Theta"] / T["V"]
    P_parts = [g.R * X["Theta"] / X["V"] for X in (B, C, Rr)]

    Q1 = (
        _p_x(T, g.R) - _p_x(B, g.R) - _p_x(C, g.R) - _p_x(Rr, g.R)
        - g.mu * (_flux_x(T, "U") - _flux_x(B, "U") - _flux_x(C, "U"))
        + cd["Q1"]
    )
    Q2 = (
        (P * T["U_x"] - P_parts[0] * B["U_x"] - P_parts[1] * C["U_x"] - P_parts[2] * Rr["U_x"])
        - g.kappa * (_flux_x(T, "Theta") - _flux_x(B, "Theta") - _flux_x(C, "Theta"))
        - g.mu * (T["U_x"] ** 2 / T["V"] - B["U_x"] ** 2 / B["V"] - C["U_x"] ** 2 / C["V"])
        + cd["Q2"]
    )
    rare1 = -g.mu * _flux_x(Rr, "U")
    rare2 = -g.kappa * _flux_x(Rr, "Theta") - g.mu * Rr["U_x"] ** 2 / Rr["V"]
    return {
        "Q1": Q1,
        "Q2": Q2,
        "contact1": cd["Q1"],
        "contact2": cd["Q2"],
        "rarefaction1": rare1,
        "rarefaction2": rare2,
        "interaction1": Q1 - cd["Q1"] - rare1,
        "interaction2": Q2 - cd["Q2"] - rare2,
    }


def superposition_defects(w: SuperpositionWave, t: float, xi) -> dict:
    """Residuals of the summed field in the mass, momentum and energy equations."""
    g = w.gas
    s = w.sigma_minus
    T = superposition_fields(w, t, xi)["total"]
    P = g.R * T["Theta"] / T["V"]
    mass = T["V_t"] - s * T["V_x"] - T["U_x"]
    mom = T["U_t"] - s * T["U_x"] + _p_x(T, g.R) - g.mu * _flux_x(T, "U")
    energy = (
        g.R / (g.gamma - 1.0) * (T["Theta_t"] - s * T["Theta_x"])
        + P * T["U_x"]
        - g.kappa * _flux_x(T, "Theta")
        - g.mu * T["U_x"] ** 2 / T["V"]
    )
    return {"mass": mass, "momentum": mom, "energy": energy}


def mass_defect_fd(w: SuperpositionWave, t: float, xi, h: float = 1e-4) -> np.ndarray:
    """Mass residual of the summed field from centred differences of its values."""
    s = w.sigma_minus
    xi = np.asarray(xi, dtype=float)
    Vt = (evaluate_superposition(w, t + h, xi)[0] - evaluate_superposition(w, t - h, xi)[0]) / (2 * h)
    Vp, Up, _ = evaluate_superposition(w, t, xi + h)
    Vm, Um, _ = evaluate_superposition(w, t, xi - h)
    return Vt - s * (Vp - Vm) / (2 * h) - (Up - Um) / (2 * h)


def interaction_integral(w: SuperpositionWave, t: float, xi) -> float:
    """Integral over xi of |U^B_xi| |U^R_xi|."""
    f = superposition_fields(w, t, xi)
    return float(np.trapezoid(np.abs(f["B"]["U_x"]) * np.abs(f["R"]["U_x"]), xi))


def write_superposition_csv(w: SuperpositionWave, t: float, xi, path) -> None:
    xi = np.asarray(xi, dtype=float)
    V, U, Th = evaluate_superposition(w, t, xi)
    q = superposition_error_terms(w, t, xi)
    csvio.write_csv(path, ["xi", "V", "U", "Theta", "Q1", "Q2"], [xi, V, U, Th, q["Q1"], q["Q2"]],
                    meta={"t": t, **w.amplitudes})
