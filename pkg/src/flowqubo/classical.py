"""Density-method baseline: convex Brinkman interpolation with OC updates."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .encoding import DesignState
from .history import HistoryRecord
from .mesh import BoundarySegment, StructuredMesh
from .stokes import FlowField, SolverError, dissipation_energy, solve_flow


@dataclass(frozen=True)
class DensitySettings:
    q_penalty: float = 0.1
    move_limit: float = 0.2
    eta: float = 0.5
    tol: float = 1e-3
    max_steps: int = 200
    threshold: float = 0.95


def interpolate_alpha(rho, alpha_max: float, q_penalty: float = 0.1) -> np.ndarray:
    """``alpha(rho) = alpha_max * q (1 - rho) / (q + rho)``; solid at 0, fluid at 1."""
    rho = np.asarray(rho, dtype=float)
    return alpha_max * q_penalty * (1.0 - rho) / (q_penalty + rho)


def alpha_derivative(rho, alpha_max: float, q_penalty: float = 0.1) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    return -alpha_max * q_penalty * (1.0 + q_penalty) / (q_penalty + rho) ** 2


def sensitivity(flow: FlowField, rho, alpha_max: float, q_penalty: float = 0.1) -> np.ndarray:
    """dJ/drho_k. The dissipation objective is self-adjoint, so only the
    explicit resistance term contributes: ``alpha'(rho_k) * ∫_k u·u``."""
    return alpha_derivative(rho, alpha_max, q_penalty) * flow.kinetic


def oc_update(rho, sens, volumes, v_max: float, move_limit: float = 0.2, eta: float = 0.5, rtol: float = 1e-8) -> np.ndarray:
    """Optimality-criteria step with the multiplier bisected onto ``sum v rho = v_max``.

    When the move limits make the target unreachable the closest admissible
    box corner is returned.
    """
    rho = np.asarray(rho, dtype=float)
    sens = np.asarray(sens, dtype=float)
    v = np.asarray(volumes, dtype=float)
    if np.any(sens > 0):
        raise ValueError("OC update expects non-positive sensitivities")
    area = v.sum()
    lo_box = np.maximum(0.0, rho - move_limit)
    hi_box = np.minimum(1.0, rho + move_limit)
    if not np.any(sens < 0):
        scaled = np.clip(rho * v_max / max(v @ rho, np.finfo(float).tiny), 0.0, 1.0)
        return scaled

    # a tiny floor keeps zero-sensitivity elements movable once the rest saturate
    mag = np.maximum(-sens, 1e-30 * float(np.max(-sens)))

    def step(lam):
        return np.clip(rho * (mag / lam) ** eta, lo_box, hi_box)

    if v @ lo_box >= v_max:
        return lo_box
    if v @ hi_box <= v_max:
        return hi_box
    a, b = 1.0, 1.0
    for _ in range(1000):
        if v @ step(a) >= v_max:
            break
        a *= 0.5
    for _ in range(1000):
        if v @ step(b) <= v_max:
            break
        b *= 2.0
    for _ in range(500):
        mid = np.sqrt(a * b)
        new = step(mid)
        err = v @ new - v_max
        if abs(err) <= rtol * area:
            return new
        if err > 0:
            a = mid
        else:
            b = mid
        if b - a <= 1e-15 * b:
            break
    return new


def filter_binary(rho, threshold: float = 0.95) -> DesignState:
    """Fluid where ``rho > threshold``, solid elsewhere."""
    rho = np.asarray(rho, dtype=float)
    chi = (rho > threshold).astype(np.int8)
    return DesignState(chi, 2.0 * chi - 1.0)


@dataclass
class ClassicalResult:
    history: list
    rho: np.ndarray
    design: DesignState
    flow: FlowField
    final_J: float
    unfiltered_volume_fraction: float
    filtered_volume_fraction: float


def run_classical(
    mesh: StructuredMesh,
    segments: list[BoundarySegment],
    v_max: float,
    alpha_max: float = 12.5,
    mu: float = 1.0,
    settings: DensitySettings | None = None,
    rho0=None,
) -> ClassicalResult:
    """Density-method loop; every history entry describes the design just produced."""
    s = settings or DensitySettings()
    v = mesh.element_volumes
    rho = np.ones(mesh.n_elements) if rho0 is None else np.asarray(rho0, dtype=float).copy()
    flow = solve_flow(mesh, segments, interpolate_alpha(rho, alpha_max, s.q_penalty), mu)
    history = []
    prev_J = None
    for step in range(1, s.max_steps + 1):
        t0 = time.perf_counter()
        sens = np.minimum(sensitivity(flow, rho, alpha_max, s.q_penalty), 0.0)
        rho = oc_update(rho, sens, v, v_max, s.move_limit, s.eta)
        alpha = interpolate_alpha(rho, alpha_max, s.q_penalty)
        try:
            flow = solve_flow(mesh, segments, alpha, mu)
        except SolverError as exc:
            raise SolverError(f"classical step {step}: {exc}") from exc
        J = dissipation_energy(flow, alpha, mu)
        history.append(HistoryRecord(step, J, float(v @ rho) / mesh.area, None, None, 1000 * (time.perf_counter() - t0)))
        if prev_J is not None and abs(J - prev_J) / prev_J < s.tol:
            break
        prev_J = J
    design = filter_binary(rho, s.threshold)
    alpha_f = design.alpha(alpha_max)
    final_flow = solve_flow(mesh, segments, alpha_f, mu)
    return ClassicalResult(
        history,
        rho,
        design,
        final_flow,
        dissipation_energy(final_flow, alpha_f, mu),
        float(v @ rho) / mesh.area,
        design.fluid_volume(v) / mesh.area,
    )
