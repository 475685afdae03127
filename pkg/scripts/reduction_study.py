"""Distance between the full and reduced models as competition grows."""

import argparse
from dataclasses import replace
from pathlib import Path

import numpy as np

from aedes_competition import config as cfg
from aedes_competition.simulator import reduction_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--c", type=float, nargs="+", default=[40.0, 160.0, 640.0])
    ap.add_argument("--t-end", type=float, default=2000.0)
    ap.add_argument("--out", type=Path, default=Path("out/reduction"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    sc = cfg.default_scenario()
    sim = replace(sc.sim, t_end=args.t_end)
    rows = reduction_experiment(sim, cfg.initial_state(sc), sc.species1, sc.species2, sc.shared,
                                sc.habitat, args.c)
    print(f"{'c':>8} {'L1 distance':>14} {'max overlap':>14}")
    for r in rows:
        print(f"{r.c:8g} {r.distance:14.6g} {r.max_segregation:14.6g}")
    table = np.array([[r.c, r.distance, r.max_segregation] for r in rows])
    np.savetxt(args.out / "table.csv", table, delimiter=",", header="c,distance,max_segregation",
               comments="", fmt="%.17g")
    # both columns should fall off roughly like 1/c
    slope = np.polyfit(np.log(table[:, 0]), np.log(table[:, 1]), 1)[0]
    print(f"log-log slope of the distance: {slope:.2f}")


if __name__ == "__main__":
    main()
