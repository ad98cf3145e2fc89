"""Energy and decay diagnostics measured on computed perturbations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import csvio
from .thermo import GasModel

EXPONENTIAL = "exponential"
ALGEBRAIC = "algebraic"
GAUSSIAN_TAIL = "gaussian_tail"
FIT_FLOOR = 1e-13
MIN_SAMPLES = 8


def Phi(z):
    """z - 1 - ln z, the convex entropy-type weight vanishing only at z = 1."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("Phi needs positive arguments")
    # log1p keeps accuracy near z = 1
    return (z - 1.0) - np.log1p(z - 1.0)


@dataclass
class EnergyReport:
    t: float
    I1_integral: float
    I1: np.ndarray
    phi_v: np.ndarray
    phi_theta: np.ndarray
    equivalence_ratios: dict


def _ratio_range(Phi_vals, rel):
    mask = np.abs(rel) > 1e-7
    if not np.any(mask):
        return (math.nan, math.nan)
    r = Phi_vals[mask] / rel[mask] ** 2
    return (float(np.min(r)), float(np.max(r)))


def energy_functional(f, wave, g: GasModel, xi) -> EnergyReport:
    """Integral of R Theta Phi(v/V) + psi^2/2 + R Theta/(gamma-1) Phi(theta/Theta).

    Equivalence ratios are min/max of Phi(z)/(z-1)^2 over nodes where the
    relative deviation is above 1e-7.
    """
    V, U, Th = wave.evaluate(f.t, xi)
    zv = f.v / V
    zt = f.theta / Th
    if np.any(zv <= 0) or np.any(zt <= 0):
        raise ValueError("field has nonpositive ratio to the wave")
    pv = Phi(zv)
    pt = Phi(zt)
    psi = f.u - U
    I1 = g.R * Th * pv + 0.5 * psi**2 + g.R * Th / (g.gamma - 1.0) * pt
    ratios = {"v": _ratio_range(pv, zv - 1.0), "theta": _ratio_range(pt, zt - 1.0)}
    return EnergyReport(f.t, float(np.trapezoid(I1, xi)), I1, pv, pt, ratios)


def contact_weighted_integral(perturbations, xi, sigma_minus: float, c0: float) -> float:
    """Space-time integral of (1+t)^-1 exp(-c0 (xi + sigma t)^2 / (1+t)) |(phi, zeta)|^2."""
    if len(perturbations) < 2:
        return 0.0
    ts, vals = [], []
    for p in perturbations:
        w = np.exp(-c0 * (xi + sigma_minus * p.t) ** 2 / (1.0 + p.t)) / (1.0 + p.t)
        vals.append(float(np.trapezoid(w * (p.phi**2 + p.zeta**2), xi)))
        ts.append(p.t)
    return float(np.trapezoid(vals, ts))


@dataclass
class DecayFit:
    model: str
    parameter: float
    intercept: float
    residual: float

    @property
    def rate(self) -> float:
        return self.parameter


def decay_fit(x, y, model: str = EXPONENTIAL) -> DecayFit:
    """Least-squares decay fit in log coordinates.

    exponential: y = C e^{-r x}, returns r.
    algebraic: y = C x^k, returns k (pass 1 + t for time series).
    gaussian_tail: y = C e^{-c x^2}, returns c.
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if x.size != y.size:
        raise ValueError("x and y must have equal length")
    if x.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {x.size}")
    if np.any(y < FIT_FLOOR):
        raise ValueError(f"series drops below the {FIT_FLOOR:g} floor; refusing to fit")
    lo, hi = np.min(np.abs(x)), np.max(np.abs(x))
    if lo > 0 and hi / lo < 10.0:
        raise ValueError("samples must span at least one decade")
    if model == EXPONENTIAL:
        X, sign = x, -1.0
    elif model == ALGEBRAIC:
        if np.any(x <= 0):
            raise ValueError("algebraic fit needs positive abscissae")
        X, sign = np.log(x), 1.0
    elif model == GAUSSIAN_TAIL:
        X, sign = x**2, -1.0
    else:
        raise ValueError(f"unknown model {model!r}")
    A = np.vstack([X, np.ones_like(X)]).T
    ly = np.log(y)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - ly) ** 2)))
    return DecayFit(model, float(sign * coef[0]), float(coef[1]), res)


def write_energy_csv(path, reports, fits: dict | None = None) -> None:
    t = [r.t for r in reports]
    I1 = [r.I1_integral for r in reports]
    lo_v = [r.equivalence_ratios["v"][0] for r in reports]
    hi_v = [r.equivalence_ratios["v"][1] for r in reports]
    lo_t = [r.equivalence_ratios["theta"][0] for r in reports]
    hi_t = [r.equivalence_ratios["theta"][1] for r in reports]
    csvio.write_csv(
        path, ["t", "I1", "ratio_v_min", "ratio_v_max", "ratio_theta_min", "ratio_theta_max"],
        [t, I1, lo_v, hi_v, lo_t, hi_t], meta=fits,
    )
