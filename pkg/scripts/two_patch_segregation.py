"""Forest/urban habitat: each species keeps its own patch.

Builds the glued stationary sub/super profiles, runs the full model from
the block initial data and compares the final state with the patch
equilibria.
"""

import argparse
from pathlib import Path

import numpy as np

from aedes_competition import config as cfg
from aedes_competition import io
from aedes_competition.model import single_species_equilibrium
from aedes_competition.profiles import assemble_heterogeneous, default_shifts
from aedes_competition.simulator import simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", type=Path, default=Path("out/two_patch"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    sc = cfg.two_patch_scenario()
    h = sc.habitat
    prof = assemble_heterogeneous(sc.species1, sc.species2, sc.shared, h)
    shift, _ = default_shifts(prof)
    print(f"bridges: alpha_U = {prof.alpha_U:.3f} km, alpha_F = {prof.alpha_F:.3f} km; ordering shift {shift:g} km")
    for name in ("F1_F", "F1_U", "F2_U", "F2_F"):
        io.write_profile(args.out / f"{name}.csv", prof.x, getattr(prof, name))

    res = simulate(sc.sim, cfg.initial_state(sc), sc.species1, sc.species2, sc.shared, h, "full")
    traj = res.trajectory
    io.write_snapshots(args.out / "snapshots.csv", traj)
    io.write_diagnostics(args.out / "diagnostics.csv", res.diagnostics)
    for k in ("F1", "F2"):
        io.write_pgm(args.out / f"{k}.pgm", traj[k])

    x = traj.x
    F1F = single_species_equilibrium(sc.species1, sc.shared.rho, h.K1F)[1]
    F2U = single_species_equilibrium(sc.species2, sc.shared.rho, h.K2U)[1]
    left, right = x <= -10, x >= 10
    print(f"forest bulk: max |F1 / {F1F:g} - 1| = {np.max(np.abs(traj['F1'][-1][left] / F1F - 1)):.2e}")
    print(f"urban bulk:  max |F2 / {F2U:g} - 1| = {np.max(np.abs(traj['F2'][-1][right] / F2U - 1)):.2e}")


if __name__ == "__main__":
    main()
