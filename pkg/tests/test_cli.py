import dataclasses
import json
import math

import numpy as np
import pytest

from corvx.cli import (
    ConfigError,
    SweepRow,
    export,
    export_sweep_csv,
    export_trajectory,
    load_scenario,
    main,
    parse_config,
    read_sweep_csv,
    record_to_row,
    run_single,
    run_sweep,
    _read_trajectory_csv,
)
from corvx.dynamics import SAT_I, SAT_II, Scenario
from corvx.scvx import initial_reference
from corvx.transcription import build_mesh


class TestConfig:
    def test_coplanar_preset(self):
        config = load_scenario("coplanar_nominal")
        scen = config.scenario
        assert (scen.r0, scen.rf, scen.t_max, scen.c) == (1.0, 1.2, 0.1, 1.0)
        assert scen.theta0_I == pytest.approx(math.pi)
        assert scen.theta0_II == 0.0
        assert scen.inc_I == scen.inc_II == 0.0
        assert config.mesh.nodes == 101

    def test_noncoplanar_preset(self):
        scen = load_scenario("noncoplanar_10deg").scenario
        assert scen.inc_I == 0.0
        assert scen.inc_II == pytest.approx(math.radians(10.0))

    def test_missing_rf_names_field(self):
        with pytest.raises(ConfigError, match="scenario.rf"):
            parse_config({"scenario": {"tf": 10.5}})

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="warp_drive"):
            parse_config({"scenario": {"rf": 1.2, "tf": 1.0, "warp_drive": True}})

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="extras"):
            parse_config({"scenario": {"rf": 1.2, "tf": 1.0}, "extras": {}})

    def test_parse_error_reports_location(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("scenario:\n  rf: [unclosed\n")
        with pytest.raises(ConfigError, match="line"):
            load_scenario(bad)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_scenario("no_such_preset")

    def test_config_hash_stable(self):
        a = load_scenario("coplanar_nominal")
        b = load_scenario("coplanar_nominal")
        assert a.config_hash() == b.config_hash()


def fast_config(tf=2 * math.pi, nodes=21):
    """Degenerate rendezvous-in-place: quick but runs the whole pipeline."""
    config = load_scenario("coplanar_nominal")
    scen = dataclasses.replace(
        config.scenario, rf=1.0, tf=tf, theta0_I=0.0, theta0_II=0.0
    )
    mesh = dataclasses.replace(config.mesh, nodes=nodes, max_rounds=1)
    return dataclasses.replace(config, scenario=scen, mesh=mesh, transfer_tf=tf)


class TestRunSingle:
    def test_degenerate_record(self):
        rec = run_single(fast_config(), transfer_dm=0.0)
        assert rec.converged
        assert sum(rec.verification["propellant"]) <= 1e-6
        assert rec.phasing["family_label"] == "none"
        assert rec.final_inclination_deg == pytest.approx(0.0, abs=1e-9)
        assert set(rec.wall_times_s) == {"scvx_s", "refinement_s", "verify_s"}

    def test_sweep_single_tf_matches_single_run(self):
        config = fast_config()
        rows = run_sweep(config, [config.scenario.tf])
        rec = run_single(config, transfer_dm=rows[0].dm_transfer)
        row = record_to_row(rec)
        assert rows[0].tf == row.tf
        assert rows[0].dm_total == pytest.approx(row.dm_total, abs=1e-9)
        assert rows[0].converged == row.converged
        assert rows[0].family == row.family

    def test_residuals_within_mesh_tolerance(self):
        config = fast_config()
        rec = run_single(config, transfer_dm=0.0)
        assert rec.converged
        assert rec.verification["max_terminal_residual"] <= 10 * config.mesh.refine_tol

    def test_sweep_csv_byte_deterministic(self, tmp_path):
        """Identical configs give byte-identical CSVs on every numerical
        column; wall_time_s is a measurement and is excluded."""
        config = fast_config()
        tfs = [config.scenario.tf, config.scenario.tf * 1.5]
        p1, p2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        export_sweep_csv(run_sweep(config, tfs), p1)
        export_sweep_csv(run_sweep(config, tfs), p2)

        def strip_wall(path):
            lines = path.read_text().splitlines()
            return ["\t".join(ln.split(",")[:-1]) for ln in lines]

        assert strip_wall(p1) == strip_wall(p2)

    def test_sweep_continuation_keeps_or_improves(self):
        config = fast_config()
        tfs = [config.scenario.tf, config.scenario.tf * 1.5]
        plain = run_sweep(config, tfs)
        cont = run_sweep(config, tfs, continuation=True)
        for a, b in zip(plain, cont):
            assert b.dm_total <= a.dm_total + 1e-9
            assert b.converged >= a.converged


class TestExport:
    def _rows(self):
        return [
            SweepRow(10.5, 0.27, 0.19, 0.08, 0.083, 0.104, "A", 0.0, 12, True, 1e-6, 9.7),
            SweepRow(11.5, 0.24, 0.08, 0.16, 0.083, 0.081, "B", 0.0, 14, True, 2e-6, 10.1),
        ]

    def test_round_trip(self, tmp_path):
        path = tmp_path / "sweep.csv"
        export_sweep_csv(self._rows(), path)
        back = read_sweep_csv(path)
        for a, b in zip(self._rows(), back):
            assert a == b

    def test_byte_identical_reexport(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export_sweep_csv(self._rows(), p1)
        export_sweep_csv(read_sweep_csv(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            export([], "csv", tmp_path / "x.csv")
        with pytest.raises(ValueError):
            export([], "json", tmp_path / "x.json")

    def test_column_order_fixed(self, tmp_path):
        path = tmp_path / "sweep.csv"
        export_sweep_csv(self._rows(), path)
        header = path.read_text().splitlines()[0]
        assert header == ",".join(SweepRow.COLUMNS)

    def test_trajectory_round_trip_and_coast_thrust(self, tmp_path):
        scen = Scenario(tf=3.0)
        traj = initial_reference(scen, build_mesh(scen.tf, 7))
        path = tmp_path / "traj.csv"
        export_trajectory(traj, path)
        import csv as _csv

        with open(path) as fh:
            rows = list(_csv.DictReader(fh))
        assert all(float(r["T_mag"]) == 0.0 for r in rows)
        config = fast_config()
        back = _read_trajectory_csv(path, config)
        np.testing.assert_allclose(back.states, traj.states, atol=1e-12)
        np.testing.assert_allclose(back.controls, traj.controls, atol=1e-12)


class TestCliEntry:
    def test_dump_socp_and_exit_codes(self, tmp_path, capsys):
        out = tmp_path / "prob.txt"
        code = main(["dump-socp", "--config", "coplanar_nominal", "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.startswith("SOCPTXT 1")
        from corvx.socp import loads

        prob = loads(text)
        assert prob.n_vars == 2 * 101 * 11

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("scenario: {tf: 1.0}\n")  # rf missing
        code = main(["solve", "--config", str(bad)])
        assert code == 2

    def test_solve_and_verify_round_trip(self, tmp_path):
        cfg_path = tmp_path / "cfg.yaml"
        cfg_path.write_text(
            "scenario: {rf: 1.0, tf: 6.283185307179586, theta0_I: 0.0, theta0_II: 0.0}\n"
            "mesh: {nodes: 21, max_rounds: 1}\n"
            "transfer_tf: 6.283185307179586\n"
        )
        rec_path = tmp_path / "rec.json"
        traj_path = tmp_path / "traj.csv"
        code = main(
            ["solve", "--config", str(cfg_path), "--out", str(rec_path),
             "--traj-out", str(traj_path)]
        )
        assert code == 0
        payload = json.loads(rec_path.read_text())
        assert payload[0]["converged"] is True
        code = main(
            ["verify", "--config", str(cfg_path), "--trajectory", str(traj_path)]
        )
        assert code == 0
