"""Configuration, batch execution and result persistence.

Verbs: solve (one scenario to convergence with mesh refinement and full
verification), sweep (duration sweep to CSV), verify (re-verify a stored
trajectory), export (re-emit stored records), dump-socp (write the first
subproblem in the plain-text conic format).  Exit codes: 0 success, 1 solver
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from corvx import mesh as meshmod
from corvx.dynamics import MZ, SAT_I, SAT_II, Scenario
from corvx.scvx import ScvxConfig, ScvxIterationError, ScvxReport, run_scvx
from corvx.socp import SolverSettings
from corvx.socp import textio as socp_textio
from corvx.transcription import (
    DiscreteProblemLayout,
    Mesh,
    TrajectoryPair,
    assemble_socp,
    build_mesh,
)
from corvx import scvx as scvxmod
from corvx import verify as verifymod

log = logging.getLogger("corvx.cli")


class ConfigError(ValueError):
    pass


@dataclass
class MeshSettings:
    nodes: int = 101
    refine_tol: float = 1e-6
    growth_cap: float = 0.5
    max_rounds: int = 10


@dataclass
class AppConfig:
    scenario: Scenario
    scvx: ScvxConfig
    solver: SolverSettings
    mesh: MeshSettings
    workers: int = 1
    transfer_tf: float = 6.0  # duration of the rendezvous-free transfer run

    def config_hash(self) -> str:
        blob = json.dumps(_config_to_dict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_SCENARIO_KEYS = {
    "mu": float,
    "r0": float,
    "rf": float,
    "tf": float,
    "t_max": float,
    "c": float,
    "m0": float,
    "theta0_I": float,
    "theta0_II": float,
    "inc_I_deg": float,
    "inc_II_deg": float,
    "k_rev": int,
}
_SCENARIO_REQUIRED = ("rf", "tf")
_SCVX_KEYS = {
    "eps_tol": float,
    "max_iters": int,
    "filter_enabled": bool,
    "filter_weights": list,
    "objective": str,
}
_SOLVER_KEYS = {"gap_tol": float, "feas_tol": float, "max_iters": int}
_MESH_KEYS = {"nodes": int, "refine_tol": float, "growth_cap": float, "max_rounds": int}
_TOP_KEYS = {"scenario", "scvx", "solver", "mesh", "workers", "transfer_tf"}


def _check_section(name: str, data: dict, allowed: dict) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {sorted(unknown)}")
    out = {}
    for key, value in data.items():
        want = allowed[key]
        if want is bool:
            if not isinstance(value, bool):
                raise ConfigError(f"{name}.{key} must be a boolean")
            out[key] = value
        elif want is list:
            out[key] = list(value)
        else:
            try:
                out[key] = want(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{name}.{key} has invalid value {value!r}") from None
    return out


def parse_config(data: dict) -> AppConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a mapping")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
    raw_scen = data.get("scenario", {})
    scen_kw = _check_section("scenario", raw_scen, _SCENARIO_KEYS)
    for req in _SCENARIO_REQUIRED:
        if req not in scen_kw:
            raise ConfigError(f"scenario.{req} is required")
    inc_i = math.radians(scen_kw.pop("inc_I_deg", 0.0))
    inc_ii = math.radians(scen_kw.pop("inc_II_deg", 0.0))
    scen_kw.setdefault("theta0_I", math.pi)
    scen_kw.setdefault("theta0_II", 0.0)
    scenario = Scenario(inc_I=inc_i, inc_II=inc_ii, **scen_kw)

    scvx_kw = _check_section("scvx", data.get("scvx", {}), _SCVX_KEYS)
    if "filter_weights" in scvx_kw:
        scvx_kw["filter_weights"] = tuple(float(w) for w in scvx_kw["filter_weights"])
    scvx_cfg = ScvxConfig(**scvx_kw)

    solver = SolverSettings(**_check_section("solver", data.get("solver", {}), _SOLVER_KEYS))
    mesh_cfg = MeshSettings(**_check_section("mesh", data.get("mesh", {}), _MESH_KEYS))
    workers = int(data.get("workers", 1))
    transfer_tf = float(data.get("transfer_tf", 6.0))
    return AppConfig(scenario, scvx_cfg, solver, mesh_cfg, workers, transfer_tf)


def load_scenario(path_or_preset: str | Path) -> AppConfig:
    """Load a config file; bare names resolve against the bundled presets."""
    path = Path(path_or_preset)
    if not path.exists() and not path.suffix:
        res = resources.files("corvx").joinpath(f"presets/{path_or_preset}.yaml")
        if res.is_file():
            text = res.read_text()
        else:
            raise ConfigError(f"no such config file or preset: {path_or_preset!r}")
    elif path.exists():
        text = path.read_text()
    else:
        raise ConfigError(f"no such config file: {path_or_preset!r}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return parse_config(data or {})


def _config_to_dict(config: AppConfig) -> dict:
    return {
        "scenario": dataclasses.asdict(config.scenario),
        "scvx": {
            k: (list(v) if isinstance(v, tuple) else v)
            for k, v in dataclasses.asdict(config.scvx).items()
            if k in _SCVX_KEYS
        },
        "solver": dataclasses.asdict(config.solver),
        "mesh": dataclasses.asdict(config.mesh),
        "workers": config.workers,
        "transfer_tf": config.transfer_tf,
    }


# ---------------------------------------------------------------------------
# Run records
# ---------------------------------------------------------------------------


@dataclass
class RunRecord:
    scenario: dict
    config_hash: str
    converged: bool
    usable: bool
    iterations: int
    refinement_rounds: int
    max_eta: float
    objective_history: list[float]
    state_delta_history: list[float]
    verification: dict
    phasing: dict
    final_inclination_deg: float
    wall_times_s: dict
    trajectory: TrajectoryPair | None = None

    def to_json_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("trajectory")
        return d


@dataclass
class SweepRow:
    tf: float
    dm_total: float
    dm_sat_I: float
    dm_sat_II: float
    dm_transfer: float
    dm_phasing_total: float
    family: str
    final_inclination_deg: float
    iterations: int
    converged: bool
    max_eta: float
    wall_time_s: float

    COLUMNS = (
        "tf",
        "dm_total",
        "dm_sat_I",
        "dm_sat_II",
        "dm_transfer",
        "dm_phasing_total",
        "family",
        "final_inclination_deg",
        "iterations",
        "converged",
        "max_eta",
        "wall_time_s",
    )


def transfer_cost(config: AppConfig) -> float:
    """Per-craft propellant of the rendezvous-free run (transfer cost)."""
    scen = config.scenario.with_tf(config.transfer_tf)
    cfg = dataclasses.replace(config.scvx, theta_rendezvous=False)
    mesh = build_mesh(scen.tf, config.mesh.nodes)
    report = run_scvx(scen, mesh, cfg, config.solver)
    dm = (report.final.propellant(SAT_I) + report.final.propellant(SAT_II)) / 2.0
    return float(dm)


def _refinement_loop(
    scen: Scenario, config: AppConfig, report: ScvxReport
) -> tuple[ScvxReport, float, int]:
    """Refine the mesh until the error tolerance or the round cap is hit."""
    rounds = 0
    current = report
    cont = meshmod.spline_reconstruct(current.final, scen)
    err = meshmod.estimate_errors(cont, current.final.mesh, scen, config.mesh.refine_tol)
    while err.max_eta > config.mesh.refine_tol and rounds < config.mesh.max_rounds:
        new_mesh = meshmod.refine(
            current.final.mesh, err, config.mesh.refine_tol, config.mesh.growth_cap
        )
        if new_mesh.m == current.final.mesh.m:
            break
        warm = meshmod.interpolate_onto(current.final, new_mesh, scen)
        current = run_scvx(scen, new_mesh, config.scvx, config.solver, initial_ref=warm)
        rounds += 1
        cont = meshmod.spline_reconstruct(current.final, scen)
        err = meshmod.estimate_errors(cont, new_mesh, scen, config.mesh.refine_tol)
    return current, err.max_eta, rounds


def run_single(
    config: AppConfig,
    transfer_dm: float | None = None,
    initial_ref: TrajectoryPair | None = None,
) -> RunRecord:
    """Solve one scenario end to end: SCvx, mesh refinement, verification."""
    scen = config.scenario
    times: dict[str, float] = {}

    t0 = time.perf_counter()
    mesh = build_mesh(scen.tf, config.mesh.nodes)
    report = run_scvx(scen, mesh, config.scvx, config.solver, initial_ref=initial_ref)
    times["scvx_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    report, max_eta, rounds = _refinement_loop(scen, config, report)
    times["refinement_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    verification = verifymod.constraint_residuals(report.final, scen)
    if transfer_dm is None:
        transfer_dm = transfer_cost(config)
    phasing = verifymod.phasing_split(
        verification.propellant,
        transfer_dm,
        theta_span_ii=report.final.theta_span(SAT_II),
    )
    times["verify_s"] = time.perf_counter() - t0

    return RunRecord(
        scenario=dataclasses.asdict(scen),
        config_hash=config.config_hash(),
        converged=report.converged,
        usable=report.usable,
        iterations=report.iterations,
        refinement_rounds=rounds,
        max_eta=max_eta,
        objective_history=report.objective_history,
        state_delta_history=report.state_delta_history,
        verification=dataclasses.asdict(verification),
        phasing=dataclasses.asdict(phasing),
        final_inclination_deg=verifymod.final_inclination_deg(report.final),
        wall_times_s=times,
        trajectory=report.final,
    )


def record_to_row(record: RunRecord) -> SweepRow:
    dm_i, dm_ii = record.verification["propellant"]
    wall = sum(record.wall_times_s.values())
    return SweepRow(
        tf=record.scenario["tf"],
        dm_total=dm_i + dm_ii,
        dm_sat_I=dm_i,
        dm_sat_II=dm_ii,
        dm_transfer=record.phasing["dm_transfer"],
        dm_phasing_total=record.phasing["dm_phasing_total"],
        family=record.phasing["family_label"],
        final_inclination_deg=record.final_inclination_deg,
        iterations=record.iterations,
        converged=record.converged,
        max_eta=record.max_eta,
        wall_time_s=wall,
    )


def _sweep_worker(args: tuple[dict, float, float, bool]) -> dict:
    config_dict, tf, transfer_dm, keep_traj = args
    config = parse_config(config_dict)
    config = dataclasses.replace(
        config, scenario=config.scenario.with_tf(tf)
    )
    try:
        record = run_single(config, transfer_dm=transfer_dm)
        out = {"tf": tf, "row": dataclasses.asdict(record_to_row(record)), "error": None}
        if keep_traj and record.trajectory is not None:
            out["traj"] = (
                record.trajectory.states,
                record.trajectory.controls,
                record.trajectory.mesh.node_times,
            )
        return out
    except (ScvxIterationError, RuntimeError) as exc:  # pragma: no cover - defensive
        return {"tf": tf, "row": None, "error": str(exc)}


def _failed_row(tf: float, transfer_dm: float) -> SweepRow:
    return SweepRow(
        tf=tf, dm_total=float("nan"), dm_sat_I=float("nan"),
        dm_sat_II=float("nan"), dm_transfer=transfer_dm,
        dm_phasing_total=float("nan"), family="none",
        final_inclination_deg=float("nan"), iterations=0,
        converged=False, max_eta=float("nan"), wall_time_s=0.0,
    )


def _better_row(a: SweepRow, b: SweepRow) -> bool:
    """True when candidate a beats incumbent b (convergence, then cost)."""
    if a.converged != b.converged:
        return a.converged
    if math.isnan(a.dm_total):
        return False
    if math.isnan(b.dm_total):
        return True
    return a.dm_total < b.dm_total - 1e-12


def run_sweep(
    config: AppConfig, tf_list: list[float], continuation: bool = False
) -> list[SweepRow]:
    """One run per duration, deterministic row order by tf.

    The transfer cost is duration-independent and computed once.  Failed
    rows are recorded (converged=false) and the sweep continues.

    With continuation=True a second, sequential pass walks the durations
    downward, warm-starting each from the neighboring longer duration's
    solution and keeping the cheaper converged result per row.  Near a
    family tie the cold start can settle into the costlier locally-optimal
    family; continuation tracks the better family down to its crossover.
    """
    if not tf_list:
        raise ValueError("tf_list must not be empty")
    transfer_dm = transfer_cost(config)
    config_dict = _config_to_dict(config)
    # re-parse needs degrees for inclinations
    config_dict["scenario"]["inc_I_deg"] = math.degrees(
        config_dict["scenario"].pop("inc_I")
    )
    config_dict["scenario"]["inc_II_deg"] = math.degrees(
        config_dict["scenario"].pop("inc_II")
    )
    tf_sorted = sorted(float(tf) for tf in tf_list)
    jobs = [(config_dict, tf, transfer_dm, continuation) for tf in tf_sorted]

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outputs = list(pool.map(_sweep_worker, jobs))
    else:
        outputs = [_sweep_worker(job) for job in jobs]

    rows: list[SweepRow] = []
    trajs: list[TrajectoryPair | None] = []
    for out in outputs:
        if out["row"] is not None:
            rows.append(SweepRow(**out["row"]))
            if "traj" in out:
                states, controls, times = out["traj"]
                trajs.append(TrajectoryPair(states, controls, Mesh(times)))
            else:
                trajs.append(None)
        else:
            log.error("sweep row tf=%s failed: %s", out["tf"], out["error"])
            rows.append(_failed_row(out["tf"], transfer_dm))
            trajs.append(None)

    if continuation:
        from corvx.scvx import time_scaled_reference

        for k in range(len(tf_sorted) - 2, -1, -1):
            donor = trajs[k + 1]
            if donor is None:
                continue
            tf = tf_sorted[k]
            cfg_k = dataclasses.replace(
                config, scenario=config.scenario.with_tf(tf)
            )
            warm = time_scaled_reference(
                donor, cfg_k.scenario, build_mesh(tf, config.mesh.nodes)
            )
            try:
                record = run_single(cfg_k, transfer_dm=transfer_dm, initial_ref=warm)
            except (ScvxIterationError, RuntimeError) as exc:
                log.warning("continuation run tf=%s failed: %s", tf, exc)
                continue
            candidate = record_to_row(record)
            if _better_row(candidate, rows[k]):
                rows[k] = candidate
                trajs[k] = record.trajectory
    return rows


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

_TRAJ_COLUMNS = (
    "sat", "t", "r", "theta", "phi", "v_r", "v_t", "v_n", "m",
    "T_r", "T_t", "T_n", "T_mag",
)


def export_sweep_csv(rows: list[SweepRow], path: str | Path) -> None:
    if not rows:
        raise ValueError("no rows to export")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SweepRow.COLUMNS)
        for row in rows:
            writer.writerow(
                [_fmt(getattr(row, col)) for col in SweepRow.COLUMNS]
            )


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                SweepRow(
                    tf=float(rec["tf"]),
                    dm_total=float(rec["dm_total"]),
                    dm_sat_I=float(rec["dm_sat_I"]),
                    dm_sat_II=float(rec["dm_sat_II"]),
                    dm_transfer=float(rec["dm_transfer"]),
                    dm_phasing_total=float(rec["dm_phasing_total"]),
                    family=rec["family"],
                    final_inclination_deg=float(rec["final_inclination_deg"]),
                    iterations=int(rec["iterations"]),
                    converged=rec["converged"] == "True",
                    max_eta=float(rec["max_eta"]),
                    wall_time_s=float(rec["wall_time_s"]),
                )
            )
    return rows


def export_records_json(records: list[RunRecord], path: str | Path) -> None:
    if not records:
        raise ValueError("no records to export")
    payload = [r.to_json_dict() for r in records]
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def export(records, fmt: str, path: str | Path) -> None:
    """Persist run records (json) or sweep rows (csv) with fixed field order."""
    if fmt == "csv":
        export_sweep_csv(records, path)
    elif fmt == "json":
        export_records_json(records, path)
    else:
        raise ValueError(f"unknown export format {fmt!r}")


def export_trajectory(traj: TrajectoryPair, path: str | Path) -> None:
    """Per-node trajectory export with physical thrust columns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TRAJ_COLUMNS)
        for s, name in ((SAT_I, "I"), (SAT_II, "II")):
            mass = np.exp(traj.states[s, :, MZ])
            thrust = traj.controls[s, :, :3] * mass[:, None]
            tmag = np.linalg.norm(thrust, axis=1)
            for j, t in enumerate(traj.mesh.node_times):
                row = [name, repr(float(t))]
                row += [repr(float(v)) for v in traj.states[s, j, :6]]
                row += [repr(float(mass[j]))]
                row += [repr(float(v)) for v in thrust[j]]
                row += [repr(float(tmag[j]))]
                writer.writerow(row)


# ---------------------------------------------------------------------------
# Command-line interface
# ---------------------------------------------------------------------------


def _parse_tf_list(args) -> list[float]:
    if args.tf_list:
        return [float(v) for v in args.tf_list.split(",")]
    if args.tf_start is None or args.tf_end is None or args.tf_step is None:
        raise ConfigError("provide either --tf-list or --tf-start/--tf-end/--tf-step")
    n = int(round((args.tf_end - args.tf_start) / args.tf_step)) + 1
    return [args.tf_start + k * args.tf_step for k in range(n)]


def _cmd_solve(args) -> int:
    config = load_scenario(args.config)
    if args.tf is not None:
        config = dataclasses.replace(config, scenario=config.scenario.with_tf(args.tf))
    record = run_single(config)
    out = Path(args.out or "run_record.json")
    export_records_json([record], out)
    if args.traj_out and record.trajectory is not None:
        export_trajectory(record.trajectory, args.traj_out)
    print(
        f"converged={record.converged} iterations={record.iterations} "
        f"dm_total={sum(record.verification['propellant']):.6f} -> {out}"
    )
    return 0


def _cmd_sweep(args) -> int:
    config = load_scenario(args.config)
    rows = run_sweep(config, _parse_tf_list(args), continuation=args.continuation)
    export_sweep_csv(rows, args.out)
    print(f"{len(rows)} rows -> {args.out}")
    return 0


def _cmd_verify(args) -> int:
    config = load_scenario(args.config)
    traj = _read_trajectory_csv(args.trajectory, config)
    rep = verifymod.constraint_residuals(traj, config.scenario)
    print(json.dumps(dataclasses.asdict(rep), indent=2, sort_keys=True))
    ok = rep.max_terminal_residual <= args.tol
    return 0 if ok else 1


def _read_trajectory_csv(path: str | Path, config: AppConfig) -> TrajectoryPair:
    per_sat: dict[str, list[list[float]]] = {"I": [], "II": []}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            per_sat[rec["sat"]].append([float(rec[c]) for c in _TRAJ_COLUMNS[1:]])
    rows_i = np.array(per_sat["I"])
    rows_ii = np.array(per_sat["II"])
    mesh = Mesh(rows_i[:, 0])
    states = np.empty((2, mesh.m, 7))
    controls = np.empty((2, mesh.m, 4))
    for s, rows in ((SAT_I, rows_i), (SAT_II, rows_ii)):
        states[s, :, :6] = rows[:, 1:7]
        states[s, :, MZ] = np.log(rows[:, 7])
        thrust = rows[:, 8:11]
        mass = rows[:, 7]
        controls[s, :, :3] = thrust / mass[:, None]
        controls[s, :, 3] = rows[:, 11] / mass
    return TrajectoryPair(states, controls, mesh)


def _cmd_export(args) -> int:
    if args.format == "csv":
        rows = read_sweep_csv(args.records)
        export_sweep_csv(rows, args.out)
    else:
        payload = json.loads(Path(args.records).read_text())
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True))
    print(f"exported -> {args.out}")
    return 0


def _cmd_dump_socp(args) -> int:
    config = load_scenario(args.config)
    mesh = build_mesh(config.scenario.tf, config.mesh.nodes)
    ref = scvxmod.initial_reference(config.scenario, mesh)
    layout = DiscreteProblemLayout(mesh)
    prob = assemble_socp(
        config.scenario,
        ref,
        layout,
        theta_rendezvous=config.scvx.theta_rendezvous,
        objective=config.scvx.objective,
    )
    socp_textio.dump(prob, args.out)
    print(f"{prob.n_vars} variables, {prob.n_eq} equalities -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corvx",
        description="Cooperative rendezvous trajectory optimization",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one scenario end to end")
    p.add_argument("--config", required=True)
    p.add_argument("--tf", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--traj-out", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="duration sweep to CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--tf-list", default=None)
    p.add_argument("--tf-start", type=float, default=None)
    p.add_argument("--tf-end", type=float, default=None)
    p.add_argument("--tf-step", type=float, default=None)
    p.add_argument(
        "--continuation", action="store_true",
        help="warm-start each duration from its longer neighbor and keep "
        "the cheaper converged family per row",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="re-verify an exported trajectory")
    p.add_argument("--config", required=True)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("export", help="re-emit stored records")
    p.add_argument("--records", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("dump-socp", help="dump the first subproblem as text")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_dump_socp)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ScvxIterationError as exc:
        dump_path = Path(f"failed_iteration_{exc.iteration}.socp.txt")
        socp_textio.dump(exc.problem, dump_path)
        print(f"solver failure: {exc} (problem dumped to {dump_path})", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - final guard
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
