"""Smoothed 3-rarefaction wave driven by an exact Burgers solution.

The Burgers datum rises from w_- to w_+ through a regularized incomplete
gamma function, so characteristics never cross and ``w(t, x)`` is found by a
monotone root solve of ``x0 + w0(x0) t = x``.  The gas state then follows
``w(1 + t, x) = lambda_3(V, s_+)`` along the isentrope of the right state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from . import csvio
from .thermo import GasModel, State, entropy, lambda3_isentrope_constant

DEFAULT_Q = 16
DEFAULT_EPS = 0.1


@dataclass(frozen=True)
class BurgersData:
    w_minus: float
    w_plus: float
    eps: float = DEFAULT_EPS
    q: int = DEFAULT_Q

    def __post_init__(self):
        if not (0 < self.w_minus <= self.w_plus):
            raise ValueError(f"need 0 < w_- <= w_+, got {self.w_minus}, {self.w_plus}")
        if not (0 < self.eps <= 1):
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if int(self.q) != self.q or self.q < 16:
            raise ValueError(f"q must be an integer >= 16, got {self.q}")

    @property
    def delta_r(self) -> float:
        return self.w_plus - self.w_minus

    @property
    def C_q(self) -> float:
        return math.exp(-gammaln(self.q + 1))

    @property
    def support_end(self) -> float:
        """x beyond which w0 equals w_+ to double precision."""
        k = self.q + 1
        return (k + 14 * math.sqrt(k) + 40) / self.eps


def burgers_w0(d: BurgersData, x):
    x = np.asarray(x, dtype=float)
    y = d.eps * np.maximum(x, 0.0)
    return d.w_minus + d.delta_r * gammainc(d.q + 1, y)


def _w0_derivatives(d: BurgersData, x):
    """First and second x-derivatives of w0."""
    x = np.asarray(x, dtype=float)
    y = d.eps * np.maximum(x, 0.0)
    with np.errstate(divide="ignore"):
        logdens = np.where(y > 0, d.q * np.log(np.where(y > 0, y, 1.0)) - y - gammaln(d.q + 1), -np.inf)
    dens = np.exp(logdens)
    d1 = d.delta_r * d.eps * dens
    with np.errstate(divide="ignore", invalid="ignore"):
        d2 = np.where(y > 0, d.delta_r * d.eps**2 * dens * (d.q - y) / np.where(y > 0, y, 1.0), 0.0)
    return d1, d2


def _foot(d: BurgersData, t: float, x):
    """Foot x0 of the characteristic through (t, x)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if t == 0 or d.delta_r == 0:
        return x - d.w_minus * t
    lo = x - d.w_plus * t
    hi = x - d.w_minus * t
    # bisection on x0 -> x0 + w0(x0) t - x, which is strictly increasing
    for _ in range(200):
        if np.all(hi - lo <= 1e-13 * np.maximum(1.0, np.abs(x))):
            break
        mid = 0.5 * (lo + hi)
        f = mid + burgers_w0(d, mid) * t - x
        lo = np.where(f < 0, mid, lo)
        hi = np.where(f < 0, hi, mid)
    x0 = 0.5 * (lo + hi)
    for _ in range(2):
        f = x0 + burgers_w0(d, x0) * t - x
        d1, _ = _w0_derivatives(d, x0)
        step = f / (1.0 + t * d1)
        x0 = np.clip(x0 - step, x - d.w_plus * t, x - d.w_minus * t)
    return x0


def solve_burgers(d: BurgersData, t: float, x):
    """Smooth solution w(t, x) of the Burgers problem with datum w0."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    scalar = np.ndim(x) == 0
    w = burgers_w0(d, _foot(d, t, x))
    return float(w[0]) if scalar else w


def burgers_fields(d: BurgersData, t: float, x) -> dict:
    """w with x-derivatives and its time derivative at fixed x."""
    x0 = _foot(d, t, x)
    w = burgers_w0(d, x0)
    d1, d2 = _w0_derivatives(d, x0)
    jac = 1.0 + t * d1
    w_x = d1 / jac
    w_xx = d2 / jac**3
    return {"x0": x0, "w": w, "w_x": w_x, "w_xx": w_xx, "w_t": -w * w_x}


def characteristic_residual(d: BurgersData, t: float, x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = np.atleast_1d(solve_burgers(d, t, x))
    return float(np.max(np.abs(w - burgers_w0(d, x - w * t))))


@dataclass
class RarefactionWave:
    burgers: BurgersData
    right: State
    left_star: State
    gas: GasModel

    @property
    def s_plus(self) -> float:
        return entropy(self.right, self.gas)

    @property
    def K(self) -> float:
        return lambda3_isentrope_constant(self.s_plus, self.gas)

    @property
    def delta_R(self) -> float:
        a, b = self.left_star, self.right
        return math.sqrt((a.v - b.v) ** 2 + (a.u - b.u) ** 2 + (a.theta - b.theta) ** 2)

    def lambda3(self, v):
        return self.K * np.power(v, -(self.gas.gamma + 1.0) / 2.0)

    def volume_from_speed(self, w):
        return np.power(np.asarray(w, dtype=float) / self.K, -2.0 / (self.gas.gamma + 1.0))

    def velocity_on_curve(self, V):
        """u_+ minus the integral of lambda_3 from v_+ to V, in closed form."""
        g = self.gas
        e = (1.0 - g.gamma) / 2.0
        return self.right.u + 2.0 * self.K / (g.gamma - 1.0) * (np.power(V, e) - self.right.v**e)

    def temperature_on_curve(self, V):
        return self.right.theta * np.power(self.right.v / V, self.gas.gamma - 1.0)


def rarefaction_on_curve(right: State, v_star: float, g: GasModel) -> State:
    """State with volume ``v_star`` on the 3-rarefaction curve through ``right``."""
    if v_star <= 0:
        raise ValueError("v_star must be positive")
    K = lambda3_isentrope_constant(entropy(right, g), g)
    e = (1.0 - g.gamma) / 2.0
    u = right.u + 2.0 * K / (g.gamma - 1.0) * (v_star**e - right.v**e)
    th = right.theta * (right.v / v_star) ** (g.gamma - 1.0)
    return State(v_star, u, th)


def make_rarefaction(left_star: State, right: State, g: GasModel, eps=DEFAULT_EPS, q=DEFAULT_Q) -> RarefactionWave:
    """Smoothed 3-rarefaction from ``left_star`` to ``right``.

    ``left_star`` must lie on the 3-rarefaction curve through ``right`` with
    v_star >= v_+ (so lambda_3 increases across the wave).
    """
    K = lambda3_isentrope_constant(entropy(right, g), g)
    expected = rarefaction_on_curve(right, left_star.v, g)
    scale = max(1.0, abs(right.u), right.theta)
    if abs(expected.u - left_star.u) > 1e-8 * scale or abs(expected.theta - left_star.theta) > 1e-8 * scale:
        raise ValueError("left state is not on the 3-rarefaction curve of the right state")
    if left_star.v < right.v * (1 - 1e-14):
        raise ValueError("3-rarefaction needs v_star >= v_+ (otherwise it is a shock)")
    ex = -(g.gamma + 1.0) / 2.0
    w_minus = K * left_star.v**ex
    w_plus = K * right.v**ex
    return RarefactionWave(BurgersData(w_minus, max(w_plus, w_minus), eps, q), right, left_star, g)


def rarefaction_fields(r: RarefactionWave, t, xi, sigma_minus: float) -> dict:
    """(V, U, Theta) with xi-derivatives and fixed-xi time derivatives."""
    g = r.gas
    t = float(t)
    xi = np.asarray(xi, dtype=float)
    x = xi + sigma_minus * t
    b = burgers_fields(r.burgers, 1.0 + t, x.ravel())
    w = b["w"].reshape(x.shape)
    w_x = b["w_x"].reshape(x.shape)
    w_xx = b["w_xx"].reshape(x.shape)
    w_t = (sigma_minus - w) * w_x

    V = r.volume_from_speed(w)
    U = r.velocity_on_curve(V)
    Th = r.temperature_on_curve(V)
    # outside the fan the end states are returned bit for bit
    for end, mask in ((r.left_star, w == r.burgers.w_minus), (r.right, w == r.burgers.w_plus)):
        V = np.where(mask, end.v, V)
        U = np.where(mask, end.u, U)
        Th = np.where(mask, end.theta, Th)
    gp1 = g.gamma + 1.0
    V_w = -2.0 * V / (gp1 * w)
    V_ww = 2.0 * V * (g.gamma + 3.0) / (gp1**2 * w * w)
    V_x = V_w * w_x
    V_xx = V_ww * w_x**2 + V_w * w_xx
    V_t = V_w * w_t
    # along the curve du = -lambda_3 dv with lambda_3 = w
    U_x = -w * V_x
    U_xx = -w_x * V_x - w * V_xx
    U_t = -w * V_t
    Th_V = -(g.gamma - 1.0) * Th / V
    Th_VV = g.gamma * (g.gamma - 1.0) * Th / V**2
    Th_x = Th_V * V_x
    Th_xx = Th_VV * V_x**2 + Th_V * V_xx
    Th_t = Th_V * V_t
    return {
        "w": w,
        "V": V, "U": U, "Theta": Th,
        "V_x": V_x, "U_x": U_x, "Theta_x": Th_x,
        "V_xx": V_xx, "U_xx": U_xx, "Theta_xx": Th_xx,
        "V_t": V_t, "U_t": U_t, "Theta_t": Th_t,
    }


def rarefaction_state(r: RarefactionWave, t, xi, sigma_minus: float):
    f = rarefaction_fields(r, t, xi, sigma_minus)
    return f["V"], f["U"], f["Theta"]


def centered_fan(r: RarefactionWave, t, xi, sigma_minus: float):
    """Exact centred 3-rarefaction at self-similar speed x / (1 + t)."""
    x = np.asarray(xi, dtype=float) + sigma_minus * t
    w = np.clip(x / (1.0 + t), r.burgers.w_minus, r.burgers.w_plus)
    V = r.volume_from_speed(w)
    return V, r.velocity_on_curve(V), r.temperature_on_curve(V)


def riemann_invariant(r: RarefactionWave, V, U):
    """u plus the integral of lambda_3 from v_+ to v; constant across the wave."""
    g = r.gas
    e = (1.0 - g.gamma) / 2.0
    return U - 2.0 * r.K / (g.gamma - 1.0) * (np.power(V, e) - r.right.v**e)


def sample_grid(r: RarefactionWave, t: float, sigma_minus: float, n: int = 20001):
    """Uniform xi grid covering the whole transition at time t."""
    T = 1.0 + t
    lo = r.burgers.w_minus * T - 10.0
    hi = r.burgers.w_plus * T + r.burgers.support_end
    return np.linspace(lo, hi, n) - sigma_minus * t


def _lp(f, x, p):
    if p == np.inf:
        return float(np.max(np.abs(f)))
    return float(np.trapezoid(np.abs(f) ** p, x) ** (1.0 / p))


@dataclass
class BoundReport:
    times: np.ndarray
    first: dict
    second: dict
    first_ratio: dict
    second_ratio: dict
    drift_flags: dict
    min_U_x: float
    crossover_time: float

    @property
    def passed(self) -> bool:
        return self.min_U_x >= 0 and not any(self.drift_flags.values())


def _max_upward_drift(ratios):
    worst = 1.0
    lowest = math.inf
    for r in ratios:
        if lowest < math.inf and lowest > 0:
            worst = max(worst, r / lowest)
        lowest = min(lowest, r)
    return worst


def verify_rarefaction_bounds(r: RarefactionWave, times, sigma_minus: float = 0.0, n: int = 20001) -> BoundReport:
    """Measured L^p norms of first and second derivatives against their decay envelopes.

    For p in {1, 2, inf} the ratio measured/envelope is recorded per time;
    a flag is raised if that ratio grows by more than 2x between two sample
    times past the crossover ``(q + 1) / (eps * delta_r)``.  Before it the
    fan is narrower than the offset of the smoothed datum and the ratio is
    still climbing towards its constant.
    """
    times = np.asarray(times, dtype=float)
    dR = r.delta_R
    eps = r.burgers.eps
    q = r.burgers.q
    ps = (1.0, 2.0, np.inf)
    first = {p: [] for p in ps}
    second = {p: [] for p in ps}
    fr = {p: [] for p in ps}
    sr = {p: [] for p in ps}
    min_ux = math.inf
    for t in times:
        xi = sample_grid(r, t, sigma_minus, n)
        f = rarefaction_fields(r, t, xi, sigma_minus)
        min_ux = min(min_ux, float(np.min(f["U_x"])))
        d1 = np.sqrt(f["V_x"] ** 2 + f["U_x"] ** 2 + f["Theta_x"] ** 2)
        d2 = np.sqrt(f["V_xx"] ** 2 + f["U_xx"] ** 2 + f["Theta_xx"] ** 2)
        for p in ps:
            ip = 0.0 if p == np.inf else 1.0 / p
            env1 = min(dR * eps ** (1 - ip), dR**ip * (1 + t) ** (-1 + ip))
            env2 = min(dR * eps ** (2 - ip), (dR**ip + dR ** (1.0 / q)) * (1 + t) ** (-1 + 1.0 / q))
            m1 = _lp(d1, xi, p)
            m2 = _lp(d2, xi, p)
            first[p].append(m1)
            second[p].append(m2)
            fr[p].append(m1 / env1 if env1 > 0 else 0.0)
            sr[p].append(m2 / env2 if env2 > 0 else 0.0)
    dr = r.burgers.delta_r
    t_c = (q + 1) / (eps * dr) if dr > 0 else 0.0
    late = times >= t_c
    flags = {}
    for p in ps:
        flags[("first", p)] = _max_upward_drift(np.asarray(fr[p])[late]) > 2.0
        flags[("second", p)] = _max_upward_drift(np.asarray(sr[p])[late]) > 2.0
    arr = lambda dct: {p: np.asarray(v) for p, v in dct.items()}
    return BoundReport(times, arr(first), arr(second), arr(fr), arr(sr), flags, min_ux, t_c)


def write_profile_csv(r: RarefactionWave, t: float, sigma_minus: float, path, n: int = 2001) -> None:
    xi = sample_grid(r, t, sigma_minus, n)
    V, U, Th = rarefaction_state(r, t, xi, sigma_minus)
    csvio.write_csv(path, ["xi", "V", "U", "Theta"], [xi, V, U, Th],
                    meta={"t": t, "w_minus": r.burgers.w_minus, "w_plus": r.burgers.w_plus,
                          "eps": r.burgers.eps, "q": r.burgers.q})
