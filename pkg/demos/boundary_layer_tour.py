"""Classify far-field states and build one subsonic and one transonic BL profile."""

from inflow_waves.boundary_layer import (
    build_linearization,
    classify_bl_existence,
    solve_subsonic_bl,
    fit_algebraic_exponent,
    solve_transonic_bl,
)
from inflow_waves.thermo import GasModel, mach, state_with_mach


def main():
    g = GasModel(gamma=1.4)
    for m in (0.5, 1.0, 1.5):
        right = state_with_mach(1.0, 1.0, m, g)
        print(f"M={m:.1f}: {classify_bl_existence(right, g)}")

    right = state_with_mach(1.0, 1.0, 0.5, g)
    lin = build_linearization(right, g)
    print(f"eigenvalues {lin.lam1:.4f}, {lin.lam2:.4f}")
    prof = solve_subsonic_bl(right, g, 1e-3)
    print(f"subsonic: left state {prof.left}, fitted rate {prof.fitted_rate:.4f}")

    sonic = state_with_mach(1.0, 1.0, 1.0, g)
    prof = solve_transonic_bl(sonic, g, 1e-2, xi_max=1e4)
    slope = fit_algebraic_exponent(prof, 1e3, 1e4)
    print(f"transonic: M={mach(sonic, g):.3f}, algebraic exponent {slope:.3f}")


if __name__ == "__main__":
    main()
