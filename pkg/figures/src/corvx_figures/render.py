"""Regenerate the study's figure types from exported result CSVs.

Four kinds: "sweep" (propellant vs duration with per-craft split and the
dashed transfer-cost line), "trajectory" (polar or 3-D path with burn arcs
highlighted), "iterations" (overlay of per-iteration trajectories), and
"inclination" (final orbit inclination vs duration).

Rendering is a pure function of the CSV contents and the spec: fixed style,
fixed backend, pinned PNG metadata, so two renders of the same inputs are
byte-identical.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("sweep", "trajectory", "iterations", "inclination")

# column contracts of the producing tool's exports
SWEEP_COLUMNS = (
    "tf", "dm_total", "dm_sat_I", "dm_sat_II", "dm_transfer",
    "dm_phasing_total", "family", "final_inclination_deg", "iterations",
    "converged", "max_eta", "wall_time_s",
)
TRAJECTORY_COLUMNS = (
    "sat", "t", "r", "theta", "phi", "v_r", "v_t", "v_n", "m",
    "T_r", "T_t", "T_n", "T_mag",
)

BURN_THRESHOLD_FRAC = 1e-4
_METADATA = {"Software": "corvx-figures"}
_DPI = 150


class SchemaError(ValueError):
    pass


@dataclass
class PlotSpec:
    csv_paths: list[str]
    kind: str
    out_path: str
    z_rescale: float = 3.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; use one of {KINDS}")
        missing = [p for p in self.csv_paths if not Path(p).is_file()]
        if missing:
            raise FileNotFoundError(f"input CSV(s) not found: {missing}")


def _read_csv(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column(s) {missing}")
        rows = list(reader)
    out: dict[str, np.ndarray] = {}
    for col in header:
        vals = [row[col] for row in rows]
        try:
            out[col] = np.array([float(v) for v in vals])
        except ValueError:
            out[col] = np.array(vals)
    return out


def _split_sats(data: dict[str, np.ndarray]):
    for name in ("I", "II"):
        mask = data["sat"] == name
        yield name, {k: v[mask] for k, v in data.items() if k != "sat"}


def _new_axes(three_d: bool = False):
    fig = plt.figure(figsize=(7.0, 5.0), dpi=_DPI)
    ax = fig.add_subplot(111, projection="3d" if three_d else None)
    return fig, ax


def _render_sweep(spec: PlotSpec):
    data = _read_csv(spec.csv_paths[0], SWEEP_COLUMNS)
    fig, ax = _new_axes()
    ax.plot(data["tf"], data["dm_total"], "o-", color="tab:green", label="total")
    ax.plot(data["tf"], data["dm_sat_I"], "s--", color="tab:blue", label="sat I")
    ax.plot(data["tf"], data["dm_sat_II"], "^--", color="tab:orange", label="sat II")
    transfer = float(data["dm_transfer"][0])
    ax.axhline(transfer, linestyle="--", color="black", linewidth=1.0,
               label="transfer cost")
    ax.set_xlabel("mission duration")
    ax.set_ylabel("propellant mass")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def _render_inclination(spec: PlotSpec):
    data = _read_csv(spec.csv_paths[0], SWEEP_COLUMNS)
    fig, ax = _new_axes()
    ax.plot(data["tf"], data["final_inclination_deg"], "o-", color="tab:purple")
    ax.set_xlabel("mission duration")
    ax.set_ylabel("final orbit inclination [deg]")
    ax.grid(True, alpha=0.3)
    return fig


def _burn_mask(tmag: np.ndarray) -> np.ndarray:
    peak = float(tmag.max()) if tmag.size else 0.0
    return tmag > BURN_THRESHOLD_FRAC * peak if peak > 0 else np.zeros_like(tmag, bool)


def _render_trajectory(spec: PlotSpec):
    data = _read_csv(spec.csv_paths[0], TRAJECTORY_COLUMNS)
    three_d = bool(np.max(np.abs(data["phi"])) > 1e-9)
    fig, ax = _new_axes(three_d)
    colors = {"I": "tab:blue", "II": "tab:orange"}
    for name, sat in _split_sats(data):
        x = sat["r"] * np.cos(sat["theta"]) * np.cos(sat["phi"])
        y = sat["r"] * np.sin(sat["theta"]) * np.cos(sat["phi"])
        z = sat["r"] * np.sin(sat["phi"]) * spec.z_rescale
        burn = _burn_mask(sat["T_mag"])
        if three_d:
            ax.plot(x, y, z, color=colors[name], linewidth=0.9, label=f"sat {name}")
            ax.scatter(x[burn], y[burn], z[burn], color=colors[name], s=6.0)
        else:
            ax.plot(x, y, color=colors[name], linewidth=0.9, label=f"sat {name}")
            ax.scatter(x[burn], y[burn], color=colors[name], s=6.0)
    if three_d:
        ax.set_zlabel(f"z (rescaled x{spec.z_rescale:g})")
    else:
        ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend()
    return fig


def _render_iterations(spec: PlotSpec):
    fig, ax = _new_axes()
    n = len(spec.csv_paths)
    for k, path in enumerate(spec.csv_paths):
        data = _read_csv(path, TRAJECTORY_COLUMNS)
        alpha = 0.25 + 0.75 * (k + 1) / n
        for name, sat in _split_sats(data):
            x = sat["r"] * np.cos(sat["theta"])
            y = sat["r"] * np.sin(sat["theta"])
            color = "tab:blue" if name == "I" else "tab:orange"
            label = f"sat {name} (iter {k + 1})" if k == n - 1 else None
            ax.plot(x, y, color=color, alpha=alpha, linewidth=0.8, label=label)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend()
    return fig


_RENDERERS = {
    "sweep": _render_sweep,
    "trajectory": _render_trajectory,
    "iterations": _render_iterations,
    "inclination": _render_inclination,
}


def render(spec: PlotSpec) -> str:
    """Render the figure described by spec; returns the output path."""
    fig = _RENDERERS[spec.kind](spec)
    try:
        fig.savefig(spec.out_path, dpi=_DPI, metadata=_METADATA)
    finally:
        plt.close(fig)
    return spec.out_path


def render_to_array(spec: PlotSpec) -> np.ndarray:
    """Render to an RGBA pixel array (used by the determinism checks)."""
    fig = _RENDERERS[spec.kind](spec)
    try:
        fig.canvas.draw()
        return np.asarray(fig.canvas.buffer_rgba()).copy()
    finally:
        plt.close(fig)
