import csv
import math
from pathlib import Path

import numpy as np
import pytest

from corvx_figures import PlotSpec, SchemaError, render, render_to_array
from corvx_figures.render import SWEEP_COLUMNS, TRAJECTORY_COLUMNS


def write_sweep_csv(path: Path, rows: list[dict]) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return path


def sweep_row(tf: float, total: float, transfer: float = 0.083) -> dict:
    return {
        "tf": tf, "dm_total": total, "dm_sat_I": total * 0.6,
        "dm_sat_II": total * 0.4, "dm_transfer": transfer,
        "dm_phasing_total": total - 2 * transfer, "family": "A",
        "final_inclination_deg": 4.2, "iterations": 11, "converged": True,
        "max_eta": 1e-6, "wall_time_s": 9.5,
    }


def write_coast_trajectory(path: Path, n: int = 60, incline: bool = False) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=TRAJECTORY_COLUMNS)
        writer.writeheader()
        for sat, theta0 in (("I", math.pi), ("II", 0.0)):
            for k in range(n):
                t = 2 * math.pi * k / (n - 1)
                phi = 0.1 * math.sin(t) if (incline and sat == "II") else 0.0
                writer.writerow(
                    {
                        "sat": sat, "t": t, "r": 1.0, "theta": theta0 + t,
                        "phi": phi, "v_r": 0.0, "v_t": 1.0, "v_n": 0.0,
                        "m": 1.0, "T_r": 0.0, "T_t": 0.0, "T_n": 0.0, "T_mag": 0.0,
                    }
                )
    return path


@pytest.fixture()
def sweep_csv(tmp_path):
    rows = [sweep_row(10.5 + 0.1 * k, 0.28 - 0.01 * k) for k in range(8)]
    return write_sweep_csv(tmp_path / "sweep.csv", rows)


SHIPPED = Path(__file__).resolve().parent.parent / "examples"


class TestDeterminism:
    def test_sweep_pixels_and_bytes_stable(self, sweep_csv, tmp_path):
        spec1 = PlotSpec([str(sweep_csv)], "sweep", str(tmp_path / "a.png"))
        spec2 = PlotSpec([str(sweep_csv)], "sweep", str(tmp_path / "b.png"))
        render(spec1)
        render(spec2)
        assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()
        px1 = render_to_array(spec1)
        px2 = render_to_array(spec2)
        assert np.array_equal(px1, px2)

    def test_inclination_pixels_stable(self, sweep_csv, tmp_path):
        spec = PlotSpec([str(sweep_csv)], "inclination", str(tmp_path / "i.png"))
        assert np.array_equal(render_to_array(spec), render_to_array(spec))

    @pytest.mark.parametrize(
        "csv_name,kind",
        [
            ("coplanar_sweep.csv", "sweep"),
            ("noncoplanar_sweep.csv", "inclination"),
        ],
    )
    def test_shipped_csvs_render_deterministically(self, csv_name, kind, tmp_path):
        """The bundled real result CSVs give byte-identical figures on two
        renders, and the sweep's dashed line sits at the CSV's transfer cost."""
        src = SHIPPED / csv_name
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        render(PlotSpec([str(src)], kind, str(a)))
        render(PlotSpec([str(src)], kind, str(b)))
        assert a.read_bytes() == b.read_bytes()
        if kind == "sweep":
            import csv as _csv

            from corvx_figures.render import _render_sweep

            with open(src) as fh:
                transfer = float(next(_csv.DictReader(fh))["dm_transfer"])
            fig = _render_sweep(PlotSpec([str(src)], "sweep", str(a)))
            dashed = [
                ln for ln in fig.axes[0].get_lines()
                if ln.get_linestyle() == "--" and len(set(ln.get_ydata())) == 1
            ]
            assert any(set(ln.get_ydata()) == {transfer} for ln in dashed)


class TestSweepFigure:
    def test_dashed_line_sits_at_transfer_cost(self, sweep_csv, tmp_path):
        from corvx_figures.render import _render_sweep

        spec = PlotSpec([str(sweep_csv)], "sweep", str(tmp_path / "s.png"))
        fig = _render_sweep(spec)
        ax = fig.axes[0]
        dashed = [
            ln for ln in ax.get_lines()
            if ln.get_linestyle() == "--" and len(set(ln.get_ydata())) == 1
        ]
        assert any(set(ln.get_ydata()) == {0.083} for ln in dashed)

    def test_single_row_plot(self, tmp_path):
        path = write_sweep_csv(tmp_path / "one.csv", [sweep_row(10.5, 0.27, 0.083)])
        out = render(PlotSpec([str(path)], "sweep", str(tmp_path / "one.png")))
        assert Path(out).stat().st_size > 0


class TestTrajectoryFigure:
    def test_coast_is_a_unit_circle(self, tmp_path):
        path = write_coast_trajectory(tmp_path / "coast.csv")
        from corvx_figures.render import _render_trajectory

        spec = PlotSpec([str(path)], "trajectory", str(tmp_path / "t.png"))
        fig = _render_trajectory(spec)
        ax = fig.axes[0]
        line = ax.get_lines()[0]
        radii = np.hypot(line.get_xdata(), line.get_ydata())
        np.testing.assert_allclose(radii, 1.0, atol=1e-12)

    def test_z_rescale_annotated(self, tmp_path):
        path = write_coast_trajectory(tmp_path / "coast3d.csv", incline=True)
        from corvx_figures.render import _render_trajectory

        spec = PlotSpec([str(path)], "trajectory", str(tmp_path / "t3.png"), z_rescale=3.0)
        fig = _render_trajectory(spec)
        ax = fig.axes[0]
        assert "x3" in ax.get_zlabel()


class TestIterationsFigure:
    def test_overlay_accepts_multiple_csvs(self, tmp_path):
        paths = [
            str(write_coast_trajectory(tmp_path / f"it{k}.csv")) for k in range(3)
        ]
        out = render(PlotSpec(paths, "iterations", str(tmp_path / "iters.png")))
        assert Path(out).stat().st_size > 0


class TestErrors:
    def test_schema_mismatch_names_columns(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("tf,dm_total\n10.5,0.27\n")
        spec = PlotSpec([str(bad)], "sweep", str(tmp_path / "x.png"))
        with pytest.raises(SchemaError, match="dm_transfer"):
            render(spec)

    def test_unknown_kind(self, sweep_csv, tmp_path):
        with pytest.raises(ValueError, match="kind"):
            PlotSpec([str(sweep_csv)], "pie-chart", str(tmp_path / "x.png"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            PlotSpec([str(tmp_path / "nope.csv")], "sweep", str(tmp_path / "x.png"))

    def test_cli_exit_codes(self, sweep_csv, tmp_path):
        from corvx_figures.cli import main

        out = tmp_path / "cli.png"
        assert main(["--csv", str(sweep_csv), "--kind", "sweep", "--out", str(out)]) == 0
        assert out.exists()
        assert (
            main(["--csv", str(tmp_path / "no.csv"), "--kind", "sweep", "--out", "x.png"])
            == 2
        )
