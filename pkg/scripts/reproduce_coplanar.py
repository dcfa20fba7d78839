#!/usr/bin/env python3
"""Reproduce the coplanar study: duration sweep, the two family trajectories,
and the iteration-history overlay, all written under results/coplanar/.

Run from the repository root:

    python scripts/reproduce_coplanar.py [--quick]

--quick shrinks the sweep grid and skips mesh refinement so the whole thing
finishes in a couple of minutes.
"""

import argparse
import dataclasses
from pathlib import Path

from corvx.cli import (
    export_sweep_csv,
    export_trajectory,
    load_scenario,
    run_sweep,
)
from corvx.scvx import run_scvx
from corvx.transcription import build_mesh


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true")
    parser.add_argument("--out", default="results/coplanar")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    config = load_scenario("coplanar_nominal")
    if args.quick:
        config = dataclasses.replace(
            config, mesh=dataclasses.replace(config.mesh, max_rounds=0), workers=2
        )
        tf_list = [10.5, 10.9, 11.1, 11.3, 11.5, 12.0]
    else:
        config = dataclasses.replace(config, workers=2)
        tf_list = [round(10.5 + 0.1 * k, 10) for k in range(16)]

    rows = run_sweep(config, tf_list)
    export_sweep_csv(rows, out / "sweep.csv")
    print(f"sweep -> {out / 'sweep.csv'}")

    for tf, tag in ((10.5, "family_a"), (11.5, "family_b")):
        scen = config.scenario.with_tf(tf)
        rep = run_scvx(scen, build_mesh(tf, config.mesh.nodes), config.scvx, keep_iterates=(tf == 10.5))
        export_trajectory(rep.final, out / f"trajectory_{tag}.csv")
        print(f"tf={tf} ({tag}) converged={rep.converged} -> trajectory_{tag}.csv")
        if rep.iterates:
            itdir = out / "iterations"
            itdir.mkdir(exist_ok=True)
            for k, traj in enumerate(rep.iterates, 1):
                export_trajectory(traj, itdir / f"iter_{k:02d}.csv")
            print(f"  {len(rep.iterates)} per-iteration trajectories -> {itdir}/")


if __name__ == "__main__":
    main()
