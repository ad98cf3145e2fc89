"""Perturb the composite wave and watch the perturbation norm decay (about a minute)."""

from inflow_waves.verification import stability_run


def main():
    res = stability_run(end_time=40.0)
    a = res.trajectory.norms.as_arrays()
    for t, n in zip(a["t"], a["H1"]):
        print(f"t={t:7.2f}  H1 perturbation {n:.3e}")
    print(f"energy {res.energy0:.3e} -> {res.energy_end:.3e}")
    print(f"boundary trace decay rate {res.boundary_fit.rate:.3f}")


if __name__ == "__main__":
    main()
