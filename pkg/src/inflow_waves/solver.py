"""Explicit finite-difference solver for the half-line inflow problem.

Unknowns (v, u, theta) live on a uniform grid xi_j = j h.  The equations are
advanced in the moving-boundary frame,

    v_t = sigma v_xi + u_xi
    u_t = sigma u_xi - p_xi + mu (u_xi / v)_xi
    theta_t = sigma theta_xi + (gamma - 1)/R [-p u_xi + kappa (theta_xi / v)_xi + mu u_xi^2 / v]

with sigma = -u_- / v_- < 0.  Drift terms use second-order upwind
differences (information travels towards larger xi), everything else is
centred, and time stepping is the three-stage SSP Runge-Kutta method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import csvio
from .thermo import GasModel, State

EXTRAPOLATION = "extrapolation"
DIRICHLET = "dirichlet_plus_state"


class SolverError(RuntimeError):
    """Numerical failure; ``field`` holds the offending state."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class Grid1D:
    xi_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError(f"grid needs at least 16 nodes, got {self.n}")
        if not self.xi_max > 0:
            raise ValueError("xi_max must be positive")

    @property
    def h(self) -> float:
        return self.xi_max / (self.n - 1)

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(0.0, self.xi_max, self.n)


@dataclass
class Field:
    t: float
    v: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def copy(self) -> "Field":
        return Field(self.t, self.v.copy(), self.u.copy(), self.theta.copy())

    def is_positive(self) -> bool:
        return bool(np.all(self.v > 0) and np.all(self.theta > 0))


@dataclass
class SolverConfig:
    end_time: float = 1.0
    cfl: float = 0.4
    dt_max: float = math.inf
    far_field: str = EXTRAPOLATION
    min_dt: float = 1e-12

    def __post_init__(self):
        if not (0 < self.cfl <= 1):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.far_field not in (EXTRAPOLATION, DIRICHLET):
            raise ValueError(f"unknown far_field {self.far_field!r}")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if self.end_time < 0:
            raise ValueError("end_time must be nonnegative")


BoundaryData = State | Callable[[float], tuple]
Source = Callable[[float, np.ndarray], tuple]


def _values(data, t):
    if data is None:
        return None
    if isinstance(data, State):
        return data.as_tuple()
    return tuple(data(t))


@dataclass
class Problem:
    """Everything the right-hand side needs apart from the field."""

    grid: Grid1D
    gas: GasModel
    sigma: float
    boundary: BoundaryData
    far: BoundaryData | None = None
    source: Source | None = None

    @classmethod
    def inflow(cls, grid, gas, minus: State, far=None, source=None):
        if not minus.u > 0:
            raise ValueError("inflow boundary needs u_- > 0")
        return cls(grid, gas, -minus.u / minus.v, minus, far, source)


def _upwind(f, h):
    """Backward second-order difference, centred at node 1; zero at node 0."""
    d = np.empty_like(f)
    d[0] = 0.0
    d[1] = (f[2] - f[0]) / (2 * h)
    d[2:] = (3 * f[2:] - 4 * f[1:-1] + f[:-2]) / (2 * h)
    return d


def _centred(f, h):
    d = np.zeros_like(f)
    d[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    return d


def _diffusion(f, v, h):
    """(f_xi / v)_xi with face-averaged v."""
    d = np.zeros_like(f)
    vf = 0.5 * (v[1:] + v[:-1])
    flux = (f[1:] - f[:-1]) / (h * vf)
    d[1:-1] = (flux[1:] - flux[:-1]) / h
    return d


def rhs(prob: Problem, t: float, v, u, th):
    g = prob.gas
    h = prob.grid.h
    s = prob.sigma
    p = g.R * th / v
    ux = _centred(u, h)
    dv = s * _upwind(v, h) + ux
    du = s * _upwind(u, h) - _centred(p, h) + g.mu * _diffusion(u, v, h)
    dth = s * _upwind(th, h) + (g.gamma - 1.0) / g.R * (
        -p * ux + g.kappa * _diffusion(th, v, h) + g.mu * ux**2 / v
    )
    if prob.source is not None:
        sv, su, sth = prob.source(t, prob.grid.xi)
        dv = dv + sv
        du = du + su
        dth = dth + sth
    return dv, du, dth


def _apply_boundaries(prob: Problem, cfg: SolverConfig, t, v, u, th):
    v[0], u[0], th[0] = _values(prob.boundary, t)
    if cfg.far_field == DIRICHLET:
        far = _values(prob.far, t)
        if far is None:
            raise ValueError("Dirichlet far field needs a far state")
        v[-1], u[-1], th[-1] = far
    else:
        v[-1], u[-1], th[-1] = v[-2], u[-2], th[-2]


def stable_dt(prob: Problem, f: Field, cfl: float) -> float:
    g = prob.gas
    h = prob.grid.h
    vmin = float(np.min(f.v))
    lam3 = float(np.max(np.sqrt(g.gamma * g.R * f.theta) / f.v))
    adv = h / (abs(prob.sigma) + lam3)
    diff = h * h * vmin / (2.0 * max(g.mu, g.kappa * (g.gamma - 1.0) / g.R))
    return cfl * min(adv, diff)


def step(f: Field, prob: Problem, cfg: SolverConfig, dt: float | None = None) -> Field:
    """Advance one SSP-RK3 step; boundary values are reset after every stage."""
    if dt is None:
        dt = min(cfg.dt_max, stable_dt(prob, f, cfg.cfl))
    if not dt >= cfg.min_dt:
        raise SolverError(f"time step underflow at t={f.t}: dt={dt}", f)
    t = f.t
    y0 = (f.v, f.u, f.theta)

    k0 = rhs(prob, t, *y0)
    y1 = [y + dt * k for y, k in zip(y0, k0)]
    _apply_boundaries(prob, cfg, t + dt, *y1)
    k1 = rhs(prob, t + dt, *y1)
    y2 = [0.75 * y + 0.25 * (z + dt * k) for y, z, k in zip(y0, y1, k1)]
    _apply_boundaries(prob, cfg, t + 0.5 * dt, *y2)
    k2 = rhs(prob, t + 0.5 * dt, *y2)
    y3 = [y / 3.0 + 2.0 / 3.0 * (z + dt * k) for y, z, k in zip(y0, y2, k2)]
    _apply_boundaries(prob, cfg, t + dt, *y3)
    out = Field(t + dt, *y3)
    if not out.is_positive() or not all(np.all(np.isfinite(a)) for a in y3):
        raise SolverError(f"positivity lost at t={out.t:.6g} (min v={np.min(out.v):.3e}, min theta={np.min(out.theta):.3e})", out)
    return out


# -- perturbation bookkeeping -------------------------------------------------


class ConstantWave:
    def __init__(self, state: State):
        self.state = state

    def evaluate(self, t, xi):
        xi = np.asarray(xi, dtype=float)
        return tuple(np.full_like(xi, c) for c in self.state.as_tuple())


class SteadyWave:
    """Time-independent profile such as a BL-solution."""

    def __init__(self, profile):
        self.profile = profile

    def evaluate(self, t, xi):
        return self.profile.evaluate(xi)


def wave_values(wave, t, xi):
    return wave.evaluate(t, xi)


@dataclass
class Perturbation:
    t: float
    phi: np.ndarray
    psi: np.ndarray
    zeta: np.ndarray
    L2: float
    H1: float
    sup: float

    @property
    def boundary(self) -> float:
        return float(math.sqrt(self.phi[0] ** 2 + self.psi[0] ** 2 + self.zeta[0] ** 2))


def h1_norms(xi, comps) -> tuple[float, float, float]:
    """(L2, H1, sup) of a vector of sampled components; H1^2 = L2^2 + |d/dxi|_L2^2."""
    l2sq = 0.0
    d2sq = 0.0
    sup = 0.0
    for c in comps:
        l2sq += float(np.trapezoid(c * c, xi))
        dc = np.gradient(c, xi, edge_order=2)
        d2sq += float(np.trapezoid(dc * dc, xi))
        sup = max(sup, float(np.max(np.abs(c))))
    return math.sqrt(l2sq), math.sqrt(l2sq + d2sq), sup


def compute_perturbation(f: Field, wave, xi) -> Perturbation:
    V, U, Th = wave_values(wave, f.t, xi)
    phi, psi, zeta = f.v - V, f.u - U, f.theta - Th
    L2, H1, sup = h1_norms(xi, (phi, psi, zeta))
    return Perturbation(f.t, phi, psi, zeta, L2, H1, sup)


@dataclass
class NormSeries:
    t: list = field(default_factory=list)
    L2: list = field(default_factory=list)
    H1: list = field(default_factory=list)
    sup: list = field(default_factory=list)
    N: list = field(default_factory=list)
    boundary: list = field(default_factory=list)

    def append(self, p: Perturbation) -> None:
        self.t.append(p.t)
        self.L2.append(p.L2)
        self.H1.append(p.H1)
        self.sup.append(p.sup)
        prev = self.N[-1] if self.N else 0.0
        self.N.append(max(prev, p.H1**2))
        self.boundary.append(p.boundary)

    def as_arrays(self) -> dict:
        return {k: np.asarray(getattr(self, k)) for k in ("t", "L2", "H1", "sup", "N", "boundary")}

    def to_csv(self, path) -> None:
        a = self.as_arrays()
        csvio.write_csv(path, ["t", "L2", "H1", "sup", "N"], [a["t"], a["L2"], a["H1"], a["sup"], a["N"]])


@dataclass
class Trajectory:
    snapshots: list
    norms: NormSeries
    perturbations: list
    steps: int


def run(
    initial: Field,
    prob: Problem,
    cfg: SolverConfig,
    wave=None,
    sample_times=(),
    keep_snapshots: bool = True,
) -> Trajectory:
    """Integrate to ``cfg.end_time`` landing exactly on every sample time.

    The initial field must already satisfy the boundary condition at xi = 0.
    """
    xi = prob.grid.xi
    b0 = _values(prob.boundary, initial.t)
    corner = max(abs(initial.v[0] - b0[0]), abs(initial.u[0] - b0[1]), abs(initial.theta[0] - b0[2]))
    if corner > 1e-12 * max(1.0, *map(abs, b0)):
        raise ValueError(f"initial data violate the boundary condition at xi=0 (gap {corner:.3e})")
    if not initial.is_positive():
        raise SolverError("initial data are not positive", initial)
    times = sorted(set(float(s) for s in sample_times if initial.t <= s <= cfg.end_time))
    f = initial.copy()
    _apply_boundaries(prob, cfg, f.t, f.v, f.u, f.theta)
    norms = NormSeries()
    snaps, perts = [], []

    def record(fld):
        if keep_snapshots:
            snaps.append(fld.copy())
        if wave is not None:
            p = compute_perturbation(fld, wave, xi)
            norms.append(p)
            perts.append(p)

    if times and times[0] == f.t:
        record(f)
        times.pop(0)
    nsteps = 0
    targets = times + ([cfg.end_time] if not times or times[-1] < cfg.end_time else [])
    for target in targets:
        while f.t < target - 1e-12 * max(1.0, target):
            dt = min(cfg.dt_max, stable_dt(prob, f, cfg.cfl), target - f.t)
            f = step(f, prob, cfg, dt)
            nsteps += 1
        f.t = target
        if times and target == times[0]:
            record(f)
            times.pop(0)
    return Trajectory(snaps, norms, perts, nsteps)


def mass_rate_defect(f: Field, prob: Problem) -> float:
    """d/dt of the integral of v from the semi-discrete scheme minus the boundary fluxes."""
    xi = prob.grid.xi
    dv, _, _ = rhs(prob, f.t, f.v, f.u, f.theta)
    inner = float(np.trapezoid(dv[1:-1], xi[1:-1]))
    flux = prob.sigma * (f.v[-2] - f.v[1]) + (f.u[-2] - f.u[1])
    return inner - flux


def bump(xi, center: float, width: float, amplitude: float) -> np.ndarray:
    """Smooth compactly supported bump exp(1 - 1/(1 - r^2)) on |xi - center| < width."""
    r = (np.asarray(xi, dtype=float) - center) / width
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def corner_cutoff(xi, width: float) -> np.ndarray:
    """Smooth function equal to 1 at xi = 0 and 0 for xi >= width."""
    r = np.asarray(xi, dtype=float) / width
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def perturbed_initial(
    wave,
    grid: Grid1D,
    minus: State,
    amplitude: float,
    center: float,
    width: float,
    corner_width: float = 5.0,
    components=(1.0, 1.0, 1.0),
) -> Field:
    """Wave at t = 0 plus a bump, corrected near xi = 0 to match the boundary state."""
    xi = grid.xi
    V, U, Th = wave_values(wave, 0.0, xi)
    b = bump(xi, center, width, amplitude)
    if center - width < 0:
        raise ValueError("bump must vanish at xi = 0")
    chi = corner_cutoff(xi, corner_width)
    fields = []
    for base, weight, target in zip((V, U, Th), components, minus.as_tuple()):
        fields.append(base + weight * b + (target - base[0]) * chi)
    return Field(0.0, *fields)


def write_snapshot_csv(path, xi, f: Field, p: Perturbation | None = None) -> None:
    cols = [xi, f.v, f.u, f.theta]
    header = ["xi", "v", "u", "theta"]
    if p is not None:
        cols += [p.phi, p.psi, p.zeta]
        header += ["phi", "psi", "zeta"]
    csvio.write_csv(path, header, cols, meta={"t": f.t})
