"""Figure regeneration from flapsim CSV outputs.

Each figure kind binds one or more documented CSV schemas to a fixed layout:

    torque-family   theta_A(t) curves from a torque-sweep's trajectory CSVs
    hinge-compare   theta_A(t) with and without the flexible hinges
    force-triplet   slider forces F1, F2 and their resultant F3
    lift-pair       lift with and without abdominal undulation
    moment-triplet  abdominal, drag, and total pitch moments
    mocap-3d        flight trajectory in 3-D with its ground projection

Inputs are never mutated; images are written atomically (temp file then
rename) as 150 dpi PNGs.  Axis labels are the CSV column names, so the units
ride along from the header.  A check pass validates inputs and columns
without rendering.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np  # noqa: E402


class PlotError(Exception):
    """Bad plot specification: missing file, column, or data."""


# kind -> (number of input CSVs or None for 1+, required columns per input)
KINDS: dict[str, tuple] = {
    "torque-family": (None, ("t_s", "theta_A_rad")),
    "hinge-compare": (2, ("t_s", "theta_A_rad")),
    "force-triplet": (1, ("t_s", "F1_N", "F2_N", "F3_N")),
    "lift-pair": (1, ("t_s", "F_lift_N", "F_lift_prime_N")),
    "moment-triplet": (1, ("t_s", "M_abdomen_Nm", "M_drag_Nm", "M_total_Nm")),
    "mocap-3d": (1, ("t_s", "px_m", "py_m", "pz_m")),
}

DPI = 150


@dataclass(frozen=True)
class PlotSpec:
    """One figure request: input CSVs, figure kind, output image path."""

    kind: str
    inputs: tuple
    output: Path

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}; expected one of {sorted(KINDS)}")
        count, _ = KINDS[self.kind]
        if count is not None and len(self.inputs) != count:
            raise PlotError(f"kind {self.kind!r} takes exactly {count} input CSVs, "
                            f"got {len(self.inputs)}")
        if count is None and not self.inputs:
            raise PlotError(f"kind {self.kind!r} needs at least one input CSV")


def read_csv(path: Path) -> dict:
    """Parse a flapsim CSV (leading # comments, header, numeric rows)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PlotError(f"cannot read {path}: {exc}") from exc
    lines = [l for l in text.splitlines() if l.strip() and not l.startswith("#")]
    if not lines:
        raise PlotError(f"{path}: empty file, no header line")
    header = [h.strip() for h in lines[0].split(",")]
    if len(lines) == 1:
        raise PlotError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    except ValueError as exc:
        raise PlotError(f"{path}: unparsable numeric data ({exc})") from exc
    if data.shape[1] != len(header):
        raise PlotError(f"{path}: row width does not match the header")
    return {name: data[:, i] for i, name in enumerate(header)}


def check(spec: PlotSpec) -> list:
    """Validate inputs and required columns; returns the parsed tables."""
    _, required = KINDS[spec.kind]
    tables = []
    for path in spec.inputs:
        table = read_csv(Path(path))
        for column in required:
            if column not in table:
                raise PlotError(
                    f"column {column!r} missing from {path} (kind {spec.kind!r})"
                )
        tables.append(table)
    return tables


def _series_label(path: Path) -> str:
    """Legend label from a sweep member filename, e.g. trajectory_tau_0.02.csv."""
    m = re.match(r"trajectory_([A-Za-z0-9]+)_(.+)$", Path(path).stem)
    if m:
        return f"{m.group(1)} = {m.group(2)}"
    return Path(path).stem


def _save(fig, output: Path) -> None:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    tmp = output.with_name(output.name + ".tmp")
    fig.savefig(tmp, dpi=DPI, format="png")
    plt.close(fig)
    os.replace(tmp, output)


def render(spec: PlotSpec) -> Path:
    """Render the figure and write it atomically; returns the output path."""
    tables = check(spec)
    if spec.kind in ("torque-family", "hinge-compare"):
        fig, ax = plt.subplots(figsize=(7, 4))
        for path, table in zip(spec.inputs, tables):
            ax.plot(table["t_s"], table["theta_A_rad"], label=_series_label(Path(path)))
        ax.set_xlabel("t_s")
        ax.set_ylabel("theta_A_rad")
        ax.legend()
        ax.grid(True, alpha=0.3)
    elif spec.kind in ("force-triplet", "lift-pair", "moment-triplet"):
        table = tables[0]
        columns = KINDS[spec.kind][1][1:]
        fig, ax = plt.subplots(figsize=(7, 4))
        for column in columns:
            ax.plot(table["t_s"], table[column], label=column, linewidth=0.9)
        ax.set_xlabel("t_s")
        ax.set_ylabel(" / ".join(columns))
        ax.legend()
        ax.grid(True, alpha=0.3)
    else:  # mocap-3d
        table = tables[0]
        fig = plt.figure(figsize=(6, 5))
        ax = fig.add_subplot(projection="3d")
        x, y, z = table["px_m"], table["py_m"], table["pz_m"]
        ax.plot(x, y, z, linewidth=1.2)
        ax.plot(x, y, np.full_like(z, float(z.min())), linewidth=0.7, alpha=0.5)
        ax.set_xlabel("px_m")
        ax.set_ylabel("py_m")
        ax.set_zlabel("pz_m")
    _save(fig, spec.output)
    return Path(spec.output)
