"""Design a BL-CD-R3 pattern and report how well the composite wave fits the equations."""

import numpy as np

from inflow_waves.composition import (
    build_superposition,
    design_configuration,
    interaction_integral,
    superposition_defects,
)
from inflow_waves.thermo import GasModel, State


def main():
    g = GasModel(gamma=1.4)
    plus = State(1.0, 0.5, 1.0)
    minus, inter, _ = design_configuration(plus, g, u_star=0.475, cd_ratio=0.0103, delta_B=1e-2)
    print("boundary state", minus)
    print("middle state  ", inter.star)
    print("upper state   ", inter.star_upper)
    w = build_superposition(minus, plus, g, eps=0.25)
    xi = np.linspace(0.0, 200.0, 4001)
    for t in (1.0, 10.0, 100.0):
        d = superposition_defects(w, t, xi)
        sup = max(float(np.max(np.abs(v))) for v in d.values())
        print(f"t={t:6.1f}  sup defect {sup:.3e}  interaction {interaction_integral(w, t, xi):.3e}")


if __name__ == "__main__":
    main()
