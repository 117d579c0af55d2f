"""CSV histories, legacy-VTK structured grids and config echoes.

Floats are written with fixed formats so repeated runs give identical bytes.
Wall-clock times go to ``timing.csv`` and stay out of the history file unless
asked for, because they never reproduce.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .encoding import DesignState
from .history import HistoryRecord
from .mesh import StructuredMesh
from .stokes import FlowField

HISTORY_HEADER = ["step", "J", "volume_fraction", "inconsistencies", "qubo_energy", "wall_ms"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12e}"


def history_csv(history: list[HistoryRecord], timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HISTORY_HEADER)
    for h in history:
        w.writerow([h.step, _fmt(h.J), _fmt(h.volume_fraction), _fmt(h.inconsistencies), _fmt(h.qubo_energy),
                    f"{h.wall_ms:.3f}" if timing else ""])
    return buf.getvalue()


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_history(path, history: list[HistoryRecord], timing: bool = False) -> Path:
    return _write(Path(path), history_csv(history, timing))


def write_timing(path, history: list[HistoryRecord]) -> Path:
    lines = ["step,wall_ms"] + [f"{h.step},{h.wall_ms:.3f}" for h in history]
    return _write(Path(path), "\n".join(lines) + "\n")


def read_history(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def vtk_text(mesh: StructuredMesh, design: DesignState, flow: FlowField | None, alpha, title: str = "flowqubo design") -> str:
    """Legacy ASCII VTK structured grid on the element vertices."""
    nx, ny = mesh.nx, mesh.ny
    pts = mesh.pressure_coords
    out = [
        "# vtk DataFile Version 3.0",
        title.replace("\n", " ")[:255],
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {nx + 1} {ny + 1} 1",
        f"POINTS {len(pts)} double",
    ]
    out += [f"{x:.10e} {y:.10e} 0" for x, y in pts]
    out += [f"CELL_DATA {mesh.n_elements}", "SCALARS chi int 1", "LOOKUP_TABLE default"]
    out += [str(int(c)) for c in design.chi]
    phi = design.phi if design.phi is not None else 2.0 * design.chi - 1.0
    for name, values in (("phi", phi), ("alpha", np.asarray(alpha, dtype=float))):
        out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"] + [f"{v:.10e}" for v in values]
    if flow is not None:
        # root-mean-square speed over each element
        umag = np.sqrt(flow.kinetic / mesh.element_volumes)
        out += ["SCALARS u_magnitude double 1", "LOOKUP_TABLE default"] + [f"{v:.10e}" for v in umag]
        stride = 2 * nx + 1
        iy, ix = np.meshgrid(np.arange(0, 2 * ny + 1, 2), np.arange(0, 2 * nx + 1, 2), indexing="ij")
        vertex = (iy * stride + ix).ravel()
        out += [f"POINT_DATA {len(pts)}", "VECTORS velocity double"]
        out += [f"{u:.10e} {v:.10e} 0" for u, v in flow.u[vertex]]
        out += ["SCALARS pressure double 1", "LOOKUP_TABLE default"] + [f"{p:.10e}" for p in flow.p]
    return "\n".join(out) + "\n"


def write_vtk(path, mesh: StructuredMesh, design: DesignState, flow: FlowField | None, alpha, title: str = "flowqubo design") -> Path:
    return _write(Path(path), vtk_text(mesh, design, flow, alpha, title))


def echo_config(outdir, config, source_text: str | None = None) -> None:
    """Copy the config verbatim (when read from a file) plus the resolved settings."""
    outdir = Path(outdir)
    if source_text is not None:
        _write(outdir / "config.txt", source_text)
    _write(outdir / "config.resolved.txt", config.to_text())


def export_run(outdir, prefix: str, mesh, history, design, flow, alpha_max: float, timing: bool = False, designs=None) -> None:
    """History and final-design files for one optimization run.

    Wall-clock data is machine dependent, so it is only written (to the history
    and a separate timing file) when ``timing`` is set.
    """
    outdir = Path(outdir)
    write_history(outdir / f"{prefix}_history.csv", history, timing)
    if timing:
        write_timing(outdir / f"{prefix}_timing.csv", history)
    write_vtk(outdir / f"{prefix}_design.vtk", mesh, design, flow, design.alpha(alpha_max), f"{prefix} final design")
    for i, d in enumerate(designs or [], 1):
        write_vtk(outdir / f"{prefix}_step{i:03d}.vtk", mesh, d, None, d.alpha(alpha_max), f"{prefix} step {i}")
