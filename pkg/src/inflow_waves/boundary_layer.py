"""Boundary-layer (BL) solutions of the inflow problem.

A BL-solution is a stationary profile of the half-space problem that
connects the boundary datum (u_-, theta_-) at xi = 0 to the far-field state
(u_+, theta_+).  In the deviation variables Y = (U - u_+, Theta - theta_+)
the profile solves the planar autonomous system ``Y' = J Y + F(Y)``; the
existence of a decaying trajectory depends on the Mach number M_+ of the
right state:

* u_+ <= 0 or M_+ > 1: no solution;
* M_+ = 1: saddle-node, a unique centre trajectory with algebraic decay;
* M_+ < 1: saddle, a one-dimensional stable manifold with exponential decay.

Profiles are built by integrating backward in xi from a point offset from
the equilibrium along the stable (or centre) eigendirection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from . import csvio
from .thermo import (
    DEFAULT_SONIC_TOL,
    SUBSONIC,
    SUPERSONIC,
    TRANSONIC,
    GasModel,
    State,
    classify_regime,
    mach,
)

NONE_U_NONPOSITIVE = "none_u_nonpositive"
NONE_SUPERSONIC = "none_supersonic"
TRANSONIC_SADDLE_NODE = "transonic_saddle_node"
SUBSONIC_SADDLE = "subsonic_saddle"

DEFAULT_SMALLNESS = 1e-2
OFFSET_FRACTION = 1e-6
RTOL = 1e-10


class BLNonexistence(Exception):
    """Raised when no BL-solution exists for the requested data."""


@dataclass(frozen=True)
class EndStates:
    left: State
    right: State

    def __post_init__(self):
        if not self.left.u > 0:
            raise ValueError("inflow problem requires u_- > 0")

    @property
    def sigma_minus(self) -> float:
        return -self.left.u / self.left.v

    def mass_compatible(self, rtol: float = 1e-12) -> bool:
        a = self.left.u / self.left.v
        b = self.right.u / self.right.v
        return abs(a - b) <= rtol * abs(a)


@dataclass(frozen=True)
class BLLinearization:
    """Linearisation of the BL system at the right state.

    ``P`` has the unstable (or nonzero) eigenvector in its first column and
    the stable (or null) eigenvector in its second, so ``W = P^{-1} Y``
    puts the decaying coordinate in ``W[1]``.
    """

    right: State
    gas: GasModel
    case: str
    J: np.ndarray
    detJ: float
    lam1: complex | float
    lam2: complex | float
    c1: float = math.nan
    c2: float = math.nan
    a1: float = math.nan
    a2: float = math.nan
    P: np.ndarray | None = None
    center_coefficient: float = math.nan

    @property
    def mach(self) -> float:
        return mach(self.right, self.gas)

    @property
    def stable_direction(self) -> np.ndarray:
        r = self.P[:, 1]
        return r / np.linalg.norm(r)

    def to_w(self, Y: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.P, Y)

    def tangent_line(self) -> tuple[float, float]:
        """Coefficients (alpha, beta) of the tangent line alpha*Ubar - beta*Thetabar = 0."""
        if self.case == SUBSONIC_SADDLE:
            return (1.0 + self.a2 * self.c2 * self.right.u, self.a2)
        r = self.P[:, 1]
        return (r[1], r[0])


def bl_matrix(right: State, g: GasModel) -> np.ndarray:
    u, th = right.u, right.theta
    R, mu, ka, gm = g.R, g.mu, g.kappa, g.gamma
    return np.array(
        [
            [(u * u - R * th) / (mu * u), R / mu],
            [R * th / ka, R * u / (ka * (gm - 1.0))],
        ]
    )


def bl_nonlinearity(right: State, g: GasModel, Ub, Tb):
    """Quadratic and cubic remainder F(Y) of the BL system."""
    u, th = right.u, right.theta
    R, mu, ka, gm = g.R, g.mu, g.kappa, g.gamma
    F1 = Ub * Ub / mu
    F2 = (R * th / (ka * u) - u / (2 * ka)) * Ub * Ub + R / (ka * (gm - 1.0)) * Ub * Tb - Ub**3 / (2 * ka)
    return F1, F2


def bl_rhs(right: State, g: GasModel, U, Theta):
    """Right-hand side (U', Theta') of the integrated stationary system.

    Written in the primitive form with V recovered from the mass relation,
    independently of the J/F splitting.
    """
    sigma = -right.u / right.v
    V = right.v + (U - right.u) / (-sigma)
    p_plus = g.R * right.theta / right.v
    dU = -sigma / g.mu * V * (U - right.u) + g.R / g.mu * (Theta - right.theta / right.v * V)
    dT = (
        -g.R * sigma * V / (g.kappa * (g.gamma - 1.0)) * (Theta - right.theta)
        + p_plus / g.kappa * V * (U - right.u)
        + sigma * V / (2 * g.kappa) * (U - right.u) ** 2
    )
    return dU, dT


def _rhs_jacobian(right: State, g: GasModel, Ub, Tb):
    J = bl_matrix(right, g)
    u, th = right.u, right.theta
    R, mu, ka, gm = g.R, g.mu, g.kappa, g.gamma
    d11 = J[0, 0] + 2 * Ub / mu
    d12 = J[0, 1] + 0 * Ub
    d21 = J[1, 0] + 2 * (R * th / (ka * u) - u / (2 * ka)) * Ub + R / (ka * (gm - 1.0)) * Tb - 1.5 * Ub**2 / ka
    d22 = J[1, 1] + R / (ka * (gm - 1.0)) * Ub
    return d11, d12, d21, d22


def _solve_c(right: State, g: GasModel) -> tuple[float, float]:
    M2 = mach(right, g) ** 2
    R, mu, ka, gm = g.R, g.mu, g.kappa, g.gamma
    b = (M2 * gm - 1.0) / (M2 * R * gm) - mu / (ka * (gm - 1.0))
    c = -mu / (M2 * R * gm * ka)
    disc = math.sqrt(b * b - 4 * c)
    # numerically stable pair of roots
    q = -0.5 * (b + math.copysign(disc, b)) if b != 0 else 0.5 * disc
    r1, r2 = q, c / q
    return min(r1, r2), max(r1, r2)


def classify_bl_existence(right: State, g: GasModel, tol: float = DEFAULT_SONIC_TOL) -> str:
    if right.u <= 0:
        return NONE_U_NONPOSITIVE
    tag = classify_regime(right, g, tol).tag
    if tag == SUPERSONIC:
        return NONE_SUPERSONIC
    if tag == TRANSONIC:
        return TRANSONIC_SADDLE_NODE
    return SUBSONIC_SADDLE


def build_linearization(right: State, g: GasModel, tol: float = DEFAULT_SONIC_TOL) -> BLLinearization:
    if right.u <= 0:
        raise BLNonexistence("u_+ <= 0: no BL-solution exists")
    J = bl_matrix(right, g)
    detJ = float(np.linalg.det(J))
    case = classify_bl_existence(right, g, tol)
    R, mu = g.R, g.mu
    u = right.u

    if case == SUBSONIC_SADDLE:
        c1, c2 = _solve_c(right, g)
        a1 = c2 * u
        lam1 = J[0, 0] + R / mu * a1
        lam2 = J[1, 1] - R / mu * a1
        a2 = -R / (mu * (lam1 - lam2))
        P = np.array([[1.0, a2], [a1, 1.0 + a1 * a2]])
        return BLLinearization(right, g, case, J, detJ, lam1, lam2, c1, c2, a1, a2, P)

    if case == TRANSONIC_SADDLE_NODE:
        lam = float(np.trace(J))
        r_nonzero = np.array([1.0, (lam - J[0, 0]) * mu / R])
        r_null = np.array([1.0, -J[0, 0] * mu / R])
        P = np.column_stack([r_nonzero, r_null])
        F1, F2 = bl_nonlinearity(right, g, r_null[0], r_null[1])
        # quadratic part only: drop the cubic term of F2
        F2 += r_null[0] ** 3 / (2 * g.kappa)
        b = float(np.linalg.solve(P, np.array([F1, F2]))[1])
        return BLLinearization(right, g, case, J, detJ, lam, 0.0, P=P, center_coefficient=b)

    eig = np.linalg.eigvals(J)
    eig = sorted(eig, key=lambda z: -z.real)
    lam1, lam2 = eig
    if abs(np.imag(lam1)) == 0:
        lam1, lam2 = float(np.real(lam1)), float(np.real(lam2))
    return BLLinearization(right, g, case, J, detJ, lam1, lam2)


@dataclass
class BLProfile:
    """Tabulated BL-solution on a xi grid starting at 0.

    Off-grid evaluation uses cubic Hermite interpolation of (U, Theta) with
    nodal slopes from the ODE itself; derivatives at any point are recomputed
    from the ODE so that the stationary equations hold to rounding.
    """

    right: State
    gas: GasModel
    xi_grid: np.ndarray
    U: np.ndarray
    Theta: np.ndarray
    delta_B: float
    decay: str
    fitted_rate: float
    linearization: BLLinearization | None = None
    integrated_length: float = 0.0
    tail_rate: float = 0.0
    _splines: tuple | None = field(default=None, repr=False)

    @property
    def sigma_minus(self) -> float:
        return -self.right.u / self.right.v

    @property
    def V(self) -> np.ndarray:
        return self.right.v + (self.U - self.right.u) / (-self.sigma_minus)

    @property
    def left(self) -> State:
        return State(float(self.V[0]), float(self.U[0]), float(self.Theta[0]))

    @property
    def W(self) -> np.ndarray:
        """Eigen-coordinates of (U - u_+, Theta - theta_+), shape (2, n)."""
        Y = np.vstack([self.U - self.right.u, self.Theta - self.right.theta])
        return np.linalg.solve(self.linearization.P, Y)

    def _build_splines(self):
        dU, dT = bl_rhs(self.right, self.gas, self.U, self.Theta)
        self._splines = (
            CubicHermiteSpline(self.xi_grid, self.U - self.right.u, dU),
            CubicHermiteSpline(self.xi_grid, self.Theta - self.right.theta, dT),
        )

    def _deviation(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.delta_B == 0.0:
            z = np.zeros_like(xi)
            return z, z.copy()
        if self._splines is None:
            self._build_splines()
        xmax = self.xi_grid[-1]
        inside = xi <= xmax
        xc = np.clip(xi, 0.0, xmax)
        Ub = self._splines[0](xc)
        Tb = self._splines[1](xc)
        if not np.all(inside):
            far = ~inside
            Yend = np.array([self.U[-1] - self.right.u, self.Theta[-1] - self.right.theta])
            if self.decay == "exponential":
                factor = np.exp(-self.tail_rate * (xi[far] - xmax))
            else:
                factor = 1.0 / (1.0 + self.tail_rate * (xi[far] - xmax))
            Ub[far] = Yend[0] * factor
            Tb[far] = Yend[1] * factor
        return Ub, Tb

    def evaluate(self, xi):
        """(V, U, Theta) at arbitrary xi >= 0."""
        Ub, Tb = self._deviation(xi)
        U = self.right.u + Ub
        return self.right.v + Ub / (-self.sigma_minus), U, self.right.theta + Tb

    def derivatives(self, xi) -> dict:
        """Values and first/second xi-derivatives recomputed from the ODE."""
        Ub, Tb = self._deviation(xi)
        U = self.right.u + Ub
        Th = self.right.theta + Tb
        Ux, Tx = bl_rhs(self.right, self.gas, U, Th)
        d11, d12, d21, d22 = _rhs_jacobian(self.right, self.gas, Ub, Tb)
        Uxx = d11 * Ux + d12 * Tx
        Txx = d21 * Ux + d22 * Tx
        s = -self.sigma_minus
        return {
            "V": self.right.v + Ub / s,
            "U": U,
            "Theta": Th,
            "V_x": Ux / s,
            "U_x": Ux,
            "Theta_x": Tx,
            "V_xx": Uxx / s,
            "U_xx": Uxx,
            "Theta_xx": Txx,
        }

    def to_csv(self, path) -> None:
        meta = {
            "amplitude": self.delta_B,
            "case": self.linearization.case if self.linearization else SUBSONIC_SADDLE,
            "decay": self.decay,
            "fitted_rate": self.fitted_rate,
        }
        csvio.write_csv(path, ["xi", "V", "U", "Theta"], [self.xi_grid, self.V, self.U, self.Theta], meta=meta)


def _constant_profile(right: State, g: GasModel, xi_grid, decay, lin) -> BLProfile:
    n = len(xi_grid)
    return BLProfile(
        right, g, np.asarray(xi_grid, float), np.full(n, right.u), np.full(n, right.theta),
        0.0, decay, math.nan, lin,
    )


def _backward_rhs(right: State, g: GasModel):
    def f(s, Y):
        dU, dT = bl_rhs(right, g, right.u + Y[0], right.theta + Y[1])
        return [-dU, -dT]

    return f


def _backward_jac(right: State, g: GasModel):
    def jac(s, Y):
        d11, d12, d21, d22 = _rhs_jacobian(right, g, Y[0], Y[1])
        return -np.array([[d11, d12], [d21, d22]])

    return jac


def _shoot_backward(right, g, Y0, delta_target, s_max, method, atol):
    """Integrate Y' = -f(Y) from Y0 until |Y| = delta_target."""

    def reach(s, Y):
        return math.hypot(Y[0], Y[1]) - delta_target

    reach.terminal = True
    reach.direction = 1

    def escape(s, Y):
        V = right.v + Y[0] * right.v / right.u
        return min(V, right.theta + Y[1]) - 1e-8

    escape.terminal = True

    kwargs = {}
    if method in ("Radau", "BDF", "LSODA"):
        kwargs["jac"] = _backward_jac(right, g)
    sol = solve_ivp(
        _backward_rhs(right, g), (0.0, s_max), Y0, method=method, rtol=RTOL, atol=atol,
        events=[reach, escape], dense_output=True, **kwargs,
    )
    if sol.status == -1:
        raise BLNonexistence(f"BL integration failed: {sol.message}")
    if len(sol.t_events[0]) == 0:
        raise BLNonexistence(
            "trajectory left the neighbourhood of validity before reaching the requested amplitude"
        )
    return sol, float(sol.t_events[0][0])


def _uniform_grid(xi_max: float, h: float) -> np.ndarray:
    n = max(int(math.ceil(xi_max / h)), 16) + 1
    return np.linspace(0.0, xi_max, n)


def _fit_log_linear(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(np.abs(y)), rcond=None)
    return float(coef[0])


def solve_subsonic_bl(
    right: State,
    g: GasModel,
    delta_target: float,
    branch: int = 1,
    h: float = 0.01,
    xi_max: float | None = None,
    offset_fraction: float = OFFSET_FRACTION,
    smallness: float = DEFAULT_SMALLNESS,
    tol: float = DEFAULT_SONIC_TOL,
) -> BLProfile:
    """Construct the subsonic BL-solution of amplitude ``delta_target``.

    The trajectory leaves the equilibrium along ``branch * r`` where ``r`` is
    the stable eigenvector; both branches of the stable manifold are
    reachable through the sign of ``branch``.  The left boundary datum is the
    profile value at xi = 0, available as ``profile.left``.
    """
    case = classify_bl_existence(right, g, tol)
    if case != SUBSONIC_SADDLE:
        raise BLNonexistence(f"right state is not subsonic with u_+ > 0 (case {case})")
    if delta_target < 0 or delta_target > smallness:
        raise ValueError(f"delta_target must lie in [0, {smallness}], got {delta_target}")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    lin = build_linearization(right, g, tol)
    rate = -lin.lam2
    if delta_target == 0:
        grid = _uniform_grid(xi_max or 10.0 / rate, h)
        prof = _constant_profile(right, g, grid, "exponential", lin)
        prof.tail_rate = rate
        return prof

    eps = offset_fraction * delta_target
    Y0 = branch * eps * lin.stable_direction
    s_max = 50.0 * math.log(delta_target / eps) / rate + 50.0
    sol, L = _shoot_backward(right, g, Y0, delta_target, s_max, "DOP853", 1e-6 * eps)

    if xi_max is None:
        xi_max = L + math.log(eps / (1e-8 * delta_target)) / rate
    grid = _uniform_grid(xi_max, h)
    Y = np.empty((2, grid.size))
    inner = grid <= L
    Y[:, inner] = sol.sol(L - grid[inner])
    # beyond the shooting start the linear flow is exact to O(eps^2)
    Y[:, ~inner] = np.outer(Y0, np.exp(-rate * (grid[~inner] - L)))
    tail = (grid >= 0.5 * min(L, grid[-1])) & inner
    fitted = -_fit_log_linear(grid[tail], Y[0, tail]) if tail.sum() >= 4 else math.nan
    return BLProfile(
        right, g, grid, right.u + Y[0], right.theta + Y[1], math.hypot(*Y[:, 0]), "exponential",
        fitted, lin, L, rate,
    )


def _transonic_grid(xi_max: float, h: float, xi_fine: float, ratio: float) -> np.ndarray:
    fine = np.arange(0.0, min(xi_fine, xi_max) + 0.5 * h, h)
    pts = [fine]
    x, step = fine[-1], h
    out = []
    while x < xi_max:
        step = min(step * ratio, max(h, 0.01 * x))
        x = x + step
        out.append(x)
    if out:
        pts.append(np.array(out))
    return np.concatenate(pts)


def solve_transonic_bl(
    right: State,
    g: GasModel,
    delta_target: float,
    xi_max: float | None = None,
    h: float = 0.01,
    xi_fine: float | None = None,
    offset_fraction: float = OFFSET_FRACTION,
    smallness: float = DEFAULT_SMALLNESS,
    tol: float = DEFAULT_SONIC_TOL,
) -> BLProfile:
    """Construct the transonic BL-solution along the centre direction.

    The centre trajectory is unique; it approaches the equilibrium from the
    side on which the quadratic centre flow W2' ~ b W2^2 is attracting.  The
    backward integration is stiff (fast unstable direction, algebraically slow
    centre direction), hence the implicit integrator.
    """
    case = classify_bl_existence(right, g, tol)
    if case != TRANSONIC_SADDLE_NODE:
        raise BLNonexistence(f"right state is not transonic (case {case})")
    if delta_target < 0 or delta_target > smallness:
        raise ValueError(f"delta_target must lie in [0, {smallness}], got {delta_target}")
    lin = build_linearization(right, g, tol)
    b = lin.center_coefficient
    if xi_max is None:
        xi_max = 10.0 / delta_target if delta_target > 0 else 1e3
    if xi_fine is None:
        xi_fine = min(xi_max, 40.0 / lin.lam1)
    grid = _transonic_grid(xi_max, h, xi_fine, 1.02)
    if delta_target == 0:
        return _constant_profile(right, g, grid, "algebraic", lin)

    r0 = lin.P[:, 1]
    eps = offset_fraction * delta_target
    w2 = -math.copysign(eps / np.linalg.norm(r0), b)
    # second-order centre-manifold correction of the fast coordinate
    F1, F2 = bl_nonlinearity(right, g, r0[0] * w2, r0[1] * w2)
    h2 = -np.linalg.solve(lin.P, np.array([F1, F2]))[0] / lin.lam1
    Y0 = lin.P @ np.array([h2, w2])
    s_max = 10.0 / (abs(b) * eps)
    sol, L = _shoot_backward(right, g, Y0, delta_target, s_max, "LSODA", 1e-4 * eps)

    Y = np.empty((2, grid.size))
    inner = grid <= L
    Y[:, inner] = sol.sol(L - grid[inner])
    if not np.all(inner):
        far = grid[~inner] - L
        w2_far = w2 / (1.0 - b * w2 * far)
        Y[:, ~inner] = np.outer(r0, w2_far)
    W = np.linalg.solve(lin.P, Y)
    fitted = math.nan
    window = (grid * delta_target >= 10) & (grid * delta_target <= 100) & inner
    if window.sum() >= 4:
        A = np.vstack([np.log(grid[window]), np.ones(window.sum())]).T
        fitted = float(np.linalg.lstsq(A, np.log(np.abs(W[1, window])), rcond=None)[0][0])
    Yend = Y[:, -1]
    wend = np.linalg.solve(lin.P, Yend)[1]
    return BLProfile(
        right, g, grid, right.u + Y[0], right.theta + Y[1], math.hypot(*Y[:, 0]), "algebraic",
        fitted, lin, L, abs(b * wend),
    )


def fit_algebraic_exponent(profile: BLProfile, lo: float, hi: float) -> float:
    """Log-log slope of |W2| against xi over [lo, hi]."""
    xi = profile.xi_grid
    sel = (xi >= lo) & (xi <= hi)
    W2 = profile.W[1, sel]
    A = np.vstack([np.log(xi[sel]), np.ones(sel.sum())]).T
    return float(np.linalg.lstsq(A, np.log(np.abs(W2)), rcond=None)[0][0])


def fit_exponential_rate(profile: BLProfile, lo: float, hi: float) -> float:
    xi = profile.xi_grid
    sel = (xi >= lo) & (xi <= hi)
    return -_fit_log_linear(xi[sel], profile.U[sel] - profile.right.u)


def bl_residual(profile: BLProfile, g: GasModel | None = None, order: int = 4) -> dict:
    """Sup and L2 norms of the defect of the stationary ODE on the profile grid.

    Derivatives are taken by finite differences of the tabulated values.
    ``order=4`` needs a uniform grid; ``order=2`` accepts any increasing grid.
    """
    g = g or profile.gas
    xi = profile.xi_grid
    width = 5 if order == 4 else 3
    if xi.size < width:
        raise ValueError(f"grid has {xi.size} points, stencil needs at least {width}")
    U, Th = profile.U, profile.Theta
    if order == 4:
        h = np.diff(xi)
        if not np.allclose(h, h[0], rtol=1e-9, atol=0):
            raise ValueError("fourth-order residual needs a uniform grid")
        dU, dT = _d1_fourth(U, h[0]), _d1_fourth(Th, h[0])
    elif order == 2:
        dU = np.gradient(U, xi, edge_order=2)
        dT = np.gradient(Th, xi, edge_order=2)
    else:
        raise ValueError("order must be 2 or 4")
    fU, fT = bl_rhs(profile.right, g, U, Th)
    rU, rT = dU - fU, dT - fT
    r = np.hypot(rU, rT)
    return {
        "sup_U": float(np.max(np.abs(rU))),
        "sup_Theta": float(np.max(np.abs(rT))),
        "sup": float(np.max(r)),
        "l2": float(math.sqrt(np.trapezoid(r * r, xi))),
    }


def _d1_fourth(f: np.ndarray, h: float) -> np.ndarray:
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    # one-sided fourth-order closures
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


def manifold_theta(right: State, g: GasModel, u_target: float, tol: float = DEFAULT_SONIC_TOL) -> float:
    """Temperature at which the subsonic stable manifold crosses U = u_target."""
    lin = build_linearization(right, g, tol)
    if lin.case != SUBSONIC_SADDLE:
        raise BLNonexistence(f"manifold lookup needs a subsonic right state (case {lin.case})")
    r = lin.stable_direction
    du = u_target - right.u
    slope = r[1] / r[0]
    scale = max(abs(du), 1e-300)
    eps = OFFSET_FRACTION * scale
    if abs(du) <= 1e-9 * max(1.0, abs(right.u)):
        return right.theta + slope * du
    branch = math.copysign(1.0, du * r[0])
    Y0 = branch * eps * r
    rate = -lin.lam2

    def hit(s, Y):
        return Y[0] - du

    hit.terminal = True

    def escape(s, Y):
        return math.hypot(Y[0], Y[1]) - 1e3 * abs(du) - 1.0

    escape.terminal = True
    sol = solve_ivp(
        _backward_rhs(right, g), (0.0, 60.0 * math.log(1.0 / OFFSET_FRACTION) / rate + 60.0), Y0,
        method="DOP853", rtol=RTOL, atol=1e-6 * eps, events=[hit, escape],
    )
    if len(sol.t_events[0]) == 0:
        raise BLNonexistence("stable manifold does not reach the requested boundary velocity")
    return float(right.theta + sol.y_events[0][0][1])


def manifold_membership(
    right: State, g: GasModel, u_minus: float, theta_minus: float, rtol: float = 1e-6
) -> tuple[bool, float]:
    """Is (u_-, theta_-) on the stable manifold of ``right``?

    Returns the verdict and the temperature mismatch; the tolerance is
    relative to the BL amplitude.
    """
    delta = math.hypot(u_minus - right.u, theta_minus - right.theta)
    if delta == 0:
        return True, 0.0
    case = classify_bl_existence(right, g)
    if case == SUBSONIC_SADDLE:
        mismatch = theta_minus - manifold_theta(right, g, u_minus)
        return abs(mismatch) <= rtol * delta, float(mismatch)
    if case == TRANSONIC_SADDLE_NODE:
        lin = build_linearization(right, g)
        w = lin.to_w(np.array([u_minus - right.u, theta_minus - right.theta]))
        if w[1] * lin.center_coefficient > 0:
            raise BLNonexistence("datum lies on the repelling side of the saddle-node")
        prof = solve_transonic_bl(right, g, delta, xi_max=1.0)
        mismatch = theta_minus - prof.Theta[0]
        return abs(mismatch) <= rtol * delta, float(mismatch)
    raise BLNonexistence(f"no BL-solution for case {case}")
