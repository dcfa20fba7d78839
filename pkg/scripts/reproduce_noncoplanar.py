#!/usr/bin/env python3
"""Reproduce the non-coplanar (10 deg) study: duration sweep with final
inclinations, and the two family trajectories, under results/noncoplanar/.

    python scripts/reproduce_noncoplanar.py [--quick]
"""

import argparse
import dataclasses
from pathlib import Path

from corvx.cli import export_sweep_csv, export_trajectory, load_scenario, run_sweep
from corvx.scvx import run_scvx
from corvx.transcription import build_mesh


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true")
    parser.add_argument("--out", default="results/noncoplanar")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    config = load_scenario("noncoplanar_10deg")
    if args.quick:
        config = dataclasses.replace(
            config, mesh=dataclasses.replace(config.mesh, max_rounds=0), workers=2
        )
        tf_list = [10.4, 10.8, 11.0, 11.2, 11.6]
    else:
        config = dataclasses.replace(config, workers=2)
        tf_list = [round(10.4 + 0.1 * k, 10) for k in range(13)]

    rows = run_sweep(config, tf_list)
    export_sweep_csv(rows, out / "sweep.csv")
    print(f"sweep -> {out / 'sweep.csv'}")

    for tf, tag in ((10.5, "family_a"), (11.5, "family_b")):
        scen = config.scenario.with_tf(tf)
        rep = run_scvx(scen, build_mesh(tf, config.mesh.nodes), config.scvx)
        export_trajectory(rep.final, out / f"trajectory_{tag}.csv")
        print(f"tf={tf} ({tag}) converged={rep.converged} usable={rep.usable}")


if __name__ == "__main__":
    main()
