"""Perfect-gas thermodynamics in Lagrangian variables (v, u, theta)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SUBSONIC = "subsonic"
TRANSONIC = "transonic"
SUPERSONIC = "supersonic"

DEFAULT_SONIC_TOL = 1e-10


@dataclass(frozen=True)
class GasModel:
    """Constant physical parameters of a viscous, heat-conducting perfect gas.

    ``A`` defaults to ``R`` so that the entropy vanishes at v = theta = 1.
    """

    R: float = 1.0
    gamma: float = 1.4
    mu: float = 1.0
    kappa: float = 1.0
    A: float | None = None

    def __post_init__(self):
        if self.A is None:
            object.__setattr__(self, "A", self.R)
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        if not self.gamma > 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.A > 0:
            raise ValueError(f"A must be positive, got {self.A}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    @property
    def cv(self) -> float:
        """Specific heat at constant volume, R/(gamma-1)."""
        return self.R / (self.gamma - 1.0)


@dataclass(frozen=True)
class State:
    v: float
    u: float
    theta: float

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"specific volume must be positive, got {self.v}")
        if not self.theta > 0:
            raise ValueError(f"temperature must be positive, got {self.theta}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.v, self.u, self.theta)


@dataclass(frozen=True)
class Regime:
    tag: str
    u_sign: str


def pressure(s: State, g: GasModel) -> float:
    return g.R * s.theta / s.v


def entropy(s: State, g: GasModel) -> float:
    """Entropy s with R*theta/v = A v^-gamma exp((gamma-1) s / R)."""
    return g.R / (g.gamma - 1.0) * math.log(g.R * s.theta * s.v ** (g.gamma - 1.0) / g.A)


def pressure_from_entropy(v, s, g: GasModel):
    return g.A * np.power(v, -g.gamma) * np.exp((g.gamma - 1.0) * s / g.R)


def temperature_on_isentrope(v, s, g: GasModel):
    """theta such that (v, theta) has entropy ``s``."""
    return pressure_from_entropy(v, s, g) * v / g.R


def internal_energy(s: State, g: GasModel) -> float:
    return g.cv * s.theta


def sound_speed(s: State, g: GasModel) -> float:
    return math.sqrt(g.R * g.gamma * s.theta)


def characteristic_speeds(s: State, g: GasModel) -> tuple[float, float, float]:
    lam3 = math.sqrt(g.gamma * pressure(s, g) / s.v)
    return (-lam3, 0.0, lam3)


def mach(s: State, g: GasModel) -> float:
    return abs(s.u) / sound_speed(s, g)


def classify_regime(s: State, g: GasModel, tol: float = DEFAULT_SONIC_TOL) -> Regime:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    m = mach(s, g)
    if abs(m - 1.0) <= tol:
        tag = TRANSONIC
    elif m < 1.0:
        tag = SUBSONIC
    else:
        tag = SUPERSONIC
    if s.u > 0:
        u_sign = "positive"
    elif s.u < 0:
        u_sign = "negative"
    else:
        u_sign = "zero"
    return Regime(tag, u_sign)


def state_with_mach(v: float, theta: float, mach_number: float, g: GasModel, sign: float = 1.0) -> State:
    """State at (v, theta) whose velocity gives the requested Mach number."""
    return State(v, math.copysign(mach_number * math.sqrt(g.R * g.gamma * theta), sign), theta)


def lambda3_isentrope_constant(s_value: float, g: GasModel) -> float:
    """K in lambda_3(v, s) = K v^{-(gamma+1)/2}."""
    return math.sqrt(g.gamma * g.A * math.exp((g.gamma - 1.0) * s_value / g.R))
