"""Annealing-based two-step optimization, sweeps, and the comparison report."""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .annealer import calibrate_restarts, get_backend
from .classical import ClassicalResult, run_classical
from .config import CaseConfig
from .encoding import (
    DesignState,
    VariableLayout,
    build_condensed,
    build_full,
    count_inconsistencies,
    decode,
)
from .history import HistoryRecord, relative_change
from .mesh import StructuredMesh, segment_elements
from .stokes import FlowField, SolverError, dissipation_energy, solve_flow

log = logging.getLogger(__name__)

SWEEP_PARAMETERS = ("lambda_char", "lambda_reg", "lambda_dis", "lambda_vol")


class OptimizationError(RuntimeError):
    def __init__(self, message: str, step: int, history: list):
        super().__init__(message)
        self.step = step
        self.history = history


@dataclass
class AnnealingResult:
    history: list
    design: DesignState
    flow: FlowField
    final_J: float
    designs: list


def step_seed(master: int, step: int) -> int:
    return int(master) ^ int(step)


def run_annealing_optimization(config: CaseConfig, solver=None, keep_designs: bool = False) -> AnnealingResult:
    """Alternate flow solves and QUBO design updates from an all-fluid start."""
    solver = solver or get_backend(config.backend)
    mesh = config.mesh()
    segments = config.segments(mesh)
    hp = config.hyperparams()
    v = mesh.element_volumes
    full = config.formulation == "full"
    layout = VariableLayout.full(mesh.n_elements, config.n_bits) if full else VariableLayout.condensed(mesh.n_elements)
    design = DesignState.all_fluid(mesh.n_elements, with_phi=True)
    history: list[HistoryRecord] = []
    designs = []
    try:
        flow = solve_flow(mesh, segments, design.alpha(config.alpha_max), config.mu)
    except SolverError as exc:
        raise OptimizationError(f"initial flow solve failed: {exc}", 0, history) from exc
    for step in range(1, config.max_steps + 1):
        t0 = time.perf_counter()
        if full:
            problem = build_full(flow.kinetic, mesh, layout, hp)
        else:
            problem = build_condensed(flow.kinetic, v, layout, hp)
        if config.restarts == 0:
            # map the wall-clock budget to a restart count once, then keep it fixed
            n = calibrate_restarts(problem, config.timeout_ms, config.sweeps, config.seed)
            log.info("timeout %.0f ms calibrated to %d restarts", config.timeout_ms, n)
            config = config.replace(restarts=n)
        try:
            result = solver.solve(problem, config.anneal(step_seed(config.seed, step)))
        except (RuntimeError, ValueError) as exc:
            raise OptimizationError(f"step {step}: QUBO solve failed: {exc}", step, history) from exc
        design = decode(result.assignment, layout)
        alpha = design.alpha(config.alpha_max)
        try:
            flow = solve_flow(mesh, segments, alpha, config.mu)
        except SolverError as exc:
            raise OptimizationError(f"step {step}: {exc}", step, history) from exc
        J = dissipation_energy(flow, alpha, config.mu)
        rec = HistoryRecord(
            step,
            J,
            design.fluid_volume(v) / mesh.area,
            count_inconsistencies(design) if full else None,
            result.energy,
            1000 * (time.perf_counter() - t0),
        )
        history.append(rec)
        if keep_designs:
            designs.append(design)
        log.info("anneal step %d: J=%.6g vf=%.5f (%.0f ms)", step, J, rec.volume_fraction, rec.wall_ms)
        if len(history) > 1 and relative_change(J, history[-2].J) < config.tol:
            break
    return AnnealingResult(history, design, flow, history[-1].J, designs)


def inlets_reach_outlets(mesh: StructuredMesh, chi, segments) -> bool:
    """True when every inlet's fluid elements are edge-connected to an outlet."""
    labels, _ = ndimage.label(np.asarray(chi).reshape(mesh.ny, mesh.nx) == 1)
    labels = labels.ravel()
    outlet_labels = set()
    for seg in segments:
        if seg.kind in ("outlet", "neumann"):
            outlet_labels.update(labels[segment_elements(mesh, seg)].tolist())
    outlet_labels.discard(0)
    for seg in segments:
        if seg.kind == "inlet":
            reached = set(labels[segment_elements(mesh, seg)].tolist()) & outlet_labels
            if not reached:
                return False
    return True


@dataclass
class SweepEntry:
    values: dict
    result: AnnealingResult

    @property
    def inconsistencies(self) -> int | None:
        st = self.result.design
        return count_inconsistencies(st) if st.phi is not None else None


def run_sweep(config: CaseConfig, parameter, values) -> list[SweepEntry]:
    """One optimization per value (or per grid point for two parameters).

    ``parameter`` is a name or a pair of names; for a pair ``values`` is a pair
    of value lists and the Cartesian grid is run row-major. Run ``i`` uses
    seed ``config.seed + i``.
    """
    names = (parameter,) if isinstance(parameter, str) else tuple(parameter)
    for name in names:
        if name not in SWEEP_PARAMETERS:
            raise ValueError(f"unknown sweep parameter {name!r}; choose from {SWEEP_PARAMETERS}")
    grids = [list(values)] if len(names) == 1 else [list(v) for v in values]
    if not all(grids) or len(grids) != len(names):
        raise ValueError("sweep needs a non-empty value list per parameter")
    out = []
    for idx, combo in enumerate(itertools.product(*grids)):
        changes = dict(zip(names, combo))
        cfg = config.replace(seed=config.seed + idx, **changes)
        out.append(SweepEntry(changes, run_annealing_optimization(cfg)))
    return out


@dataclass
class Comparison:
    classical: ClassicalResult
    annealing: AnnealingResult

    @property
    def n_C(self) -> int:
        return len(self.classical.history)

    @property
    def n_A(self) -> int:
        return len(self.annealing.history)

    @property
    def J_C(self) -> float:
        return self.classical.final_J

    @property
    def J_A(self) -> float:
        return self.annealing.final_J

    @property
    def step_change(self) -> float:
        return (self.n_A - self.n_C) / self.n_C

    @property
    def J_change(self) -> float:
        return (self.J_A - self.J_C) / self.J_C

    def table(self) -> str:
        rows = [
            "quantity,classical,annealing,relative_difference",
            f"steps,{self.n_C},{self.n_A},{self.step_change:.6f}",
            f"J,{self.J_C:.10e},{self.J_A:.10e},{self.J_change:.6f}",
            f"volume_fraction,{self.classical.filtered_volume_fraction:.10f},"
            f"{self.annealing.history[-1].volume_fraction:.10f},",
            f"volume_fraction_unfiltered,{self.classical.unfiltered_volume_fraction:.10f},,",
        ]
        return "\n".join(rows) + "\n"


def compare(config: CaseConfig) -> Comparison:
    mesh = config.mesh()
    classical = run_classical(
        mesh, config.segments(mesh), config.v_max, config.alpha_max, config.mu, config.density()
    )
    annealing = run_annealing_optimization(config)
    return Comparison(classical, annealing)
