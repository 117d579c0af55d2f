"""Taylor-Hood (Q2/Q1) solver for Stokes flow with Brinkman resistance.

All elements of a structured mesh are congruent, so the element matrices are
integrated once (3x3 Gauss) and scattered with per-element resistance weights.
Velocity dofs are blocked: ``[u_x(0..nV-1), u_y(0..nV-1)]`` followed by the
pressure dofs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .mesh import BoundarySegment, StructuredMesh, check_segments


class SolverError(RuntimeError):
    """The discrete flow problem could not be solved."""


_GAUSS_T = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
_GAUSS_W = 0.5 * np.array([5.0, 8.0, 5.0]) / 9.0


def _q2_1d(t):
    t = np.asarray(t, dtype=float)
    val = np.stack([2 * (t - 0.5) * (t - 1), -4 * t * (t - 1), 2 * t * (t - 0.5)])
    der = np.stack([4 * t - 3, -8 * t + 4, 4 * t - 1])
    return val, der


def _q1_1d(t):
    t = np.asarray(t, dtype=float)
    return np.stack([1 - t, t])


@dataclass(frozen=True)
class ElementMatrices:
    """Reference matrices for one ``hx`` by ``hy`` element.

    ``mass`` is the 9x9 scalar Q2 mass matrix, ``stiffness`` the 18x18
    viscous block for ``mu = 1``, ``div`` the 4x18 block ``-(psi_i, div N_j)``.
    """

    mass: np.ndarray
    stiffness: np.ndarray
    div: np.ndarray


@lru_cache(maxsize=16)
def element_matrices(hx: float, hy: float) -> ElementMatrices:
    vt, dt = _q2_1d(_GAUSS_T)
    pt = _q1_1d(_GAUSS_T)
    # basis at quad points, indices [node, qy, qx]; local node = 3 * b + a
    N = np.einsum("bj,ai->baji", vt, vt).reshape(9, 3, 3)
    Nx = np.einsum("bj,ai->baji", vt, dt).reshape(9, 3, 3) / hx
    Ny = np.einsum("bj,ai->baji", dt, vt).reshape(9, 3, 3) / hy
    P = np.einsum("bj,ai->baji", pt, pt).reshape(4, 3, 3)
    W = np.outer(_GAUSS_W, _GAUSS_W) * hx * hy

    def integ(f, g):
        return np.einsum("iqr,jqr,qr->ij", f, g, W)

    M = integ(N, N)
    Dxx, Dyy, Dxy = integ(Nx, Nx), integ(Ny, Ny), integ(Nx, Ny)
    K = np.block([[2 * Dxx + Dyy, Dxy.T], [Dxy, 2 * Dyy + Dxx]])
    B = -np.hstack([integ(P, Nx), integ(P, Ny)])
    return ElementMatrices(M, K, B)


@dataclass(frozen=True)
class SaddlePointSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    n_velocity_dofs: int


@dataclass(frozen=True)
class FlowField:
    """Velocity ``u`` (nV x 2), pressure ``p`` and per-element ``∫ u·u``."""

    mesh: StructuredMesh
    u: np.ndarray
    p: np.ndarray
    kinetic: np.ndarray

    @property
    def velocity_vector(self) -> np.ndarray:
        return np.concatenate([self.u[:, 0], self.u[:, 1]])


def _velocity_dofs(mesh: StructuredMesh) -> np.ndarray:
    conn = mesh.velocity_connectivity
    return np.hstack([conn, conn + mesh.n_velocity_nodes])


def _check_alpha(mesh: StructuredMesh, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim == 0:
        alpha = np.full(mesh.n_elements, float(alpha))
    if alpha.shape != (mesh.n_elements,):
        raise ValueError(f"alpha has shape {alpha.shape}, mesh has {mesh.n_elements} elements")
    if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
        raise ValueError("resistance coefficients must be finite and non-negative")
    return alpha


def _scatter(rows_local, cols_local, blocks, n_rows, n_cols):
    r = np.repeat(rows_local, cols_local.shape[1], axis=1).ravel()
    c = np.tile(cols_local, (1, rows_local.shape[1])).ravel()
    return sp.coo_matrix((blocks.ravel(), (r, c)), shape=(n_rows, n_cols)).tocsr()


def velocity_operators(mesh: StructuredMesh, alpha, mu: float = 1.0):
    """Return ``(K, M_alpha, B)`` as CSR matrices."""
    alpha = _check_alpha(mesh, alpha)
    if not mu > 0:
        raise ValueError("viscosity must be positive")
    em = element_matrices(mesh.hx, mesh.hy)
    vd = _velocity_dofs(mesh)
    nu = 2 * mesh.n_velocity_nodes
    nel = mesh.n_elements
    Me = np.kron(np.eye(2), em.mass)
    K = _scatter(vd, vd, np.broadcast_to(mu * em.stiffness, (nel, 18, 18)), nu, nu)
    Ma = _scatter(vd, vd, alpha[:, None, None] * Me[None], nu, nu)
    B = _scatter(mesh.pressure_connectivity, vd, np.broadcast_to(em.div, (nel, 4, 18)), mesh.n_pressure_nodes, nu)
    return K, Ma, B


def assemble(mesh: StructuredMesh, alpha, mu: float = 1.0) -> SaddlePointSystem:
    """Block system ``[[K + M_alpha, B^T], [B, 0]]`` without boundary conditions."""
    K, Ma, B = velocity_operators(mesh, alpha, mu)
    A = sp.bmat([[K + Ma, B.T], [B, None]], format="csr")
    return SaddlePointSystem(A, np.zeros(A.shape[0]), K.shape[0])


def _side_nodes(mesh: StructuredMesh, side: str):
    """Velocity node ids along a side and their coordinate along it."""
    sx, sy = 2 * mesh.nx + 1, 2 * mesh.ny + 1
    xy = mesh.velocity_coords
    if side == "left":
        ids = np.arange(sy) * sx
    elif side == "right":
        ids = np.arange(sy) * sx + sx - 1
    elif side == "bottom":
        ids = np.arange(sx)
    else:
        ids = (sy - 1) * sx + np.arange(sx)
    s = xy[ids, 1] if side in ("left", "right") else xy[ids, 0]
    return ids, s


# inward normal component index and sign per side
_INWARD = {"left": (0, 1.0), "right": (0, -1.0), "bottom": (1, 1.0), "top": (1, -1.0)}


def _side_flux(values: np.ndarray, s: np.ndarray) -> float:
    """Integral of the piecewise-quadratic trace with nodal ``values``."""
    h = s[2::2] - s[:-2:2]
    return float(np.sum(h / 6.0 * (values[:-2:2] + 4 * values[1::2] + values[2::2])))


def dirichlet_data(mesh: StructuredMesh, segments: list[BoundarySegment], balance: bool = True):
    """Prescribed velocity dofs and values, plus the set of open (Neumann) dofs.

    Outlet profiles are rescaled so the discrete inflow and outflow match when
    every boundary dof is prescribed; interval endpoints that fall between
    nodes otherwise leave a small imbalance that makes the system inconsistent.
    """
    check_segments(segments)
    nv = mesh.n_velocity_nodes
    value = np.zeros(2 * nv)
    fixed = np.zeros(2 * nv, dtype=bool)
    has_neumann = any(s.kind == "neumann" for s in segments)
    inflow, outflow = 0.0, 0.0
    outlet_dofs = []
    for side in ("left", "right", "bottom", "top"):
        ids, s = _side_nodes(mesh, side)
        fixed[ids] = True
        fixed[ids + nv] = True
        comp, sign = _INWARD[side]
        normal = np.zeros(len(ids))
        for seg in (g for g in segments if g.side == side):
            if seg.kind == "neumann":
                inside = (s > seg.start) & (s < seg.stop)
                fixed[ids[inside]] = False
                fixed[ids[inside] + nv] = False
            elif seg.kind in ("inlet", "outlet"):
                prof = seg.profile(s)
                normal += prof if seg.kind == "inlet" else -prof
                if seg.kind == "outlet":
                    outlet_dofs.append(ids[prof != 0] + comp * nv)
        inflow += _side_flux(np.clip(normal, 0, None), s)
        outflow += _side_flux(np.clip(-normal, 0, None), s)
        value[ids + comp * nv] += sign * normal
    if balance and not has_neumann and outlet_dofs and outflow > 0:
        od = np.unique(np.concatenate(outlet_dofs))
        value[od] *= inflow / outflow
    # corners and other overlaps keep the last prescribed value; walls are zero
    value[~fixed] = 0.0
    return fixed, value, has_neumann


def _kinetic(mesh: StructuredMesh, u: np.ndarray) -> np.ndarray:
    M = element_matrices(mesh.hx, mesh.hy).mass
    conn = mesh.velocity_connectivity
    ux, uy = u[conn, 0], u[conn, 1]
    return np.einsum("ki,ij,kj->k", ux, M, ux) + np.einsum("ki,ij,kj->k", uy, M, uy)


def solve_flow(mesh: StructuredMesh, segments: list[BoundarySegment], alpha, mu: float = 1.0) -> FlowField:
    """Solve the Stokes-Brinkman problem for an element-wise resistance field."""
    alpha = _check_alpha(mesh, alpha)
    fixed_u, value_u, has_neumann = dirichlet_data(mesh, segments)
    if not fixed_u.any():
        raise SolverError("no Dirichlet velocity data: the flow problem is singular")
    system = assemble(mesh, alpha, mu)
    nu = system.n_velocity_dofs
    ntot = system.matrix.shape[0]
    fixed = np.zeros(ntot, dtype=bool)
    fixed[:nu] = fixed_u
    if not has_neumann:
        fixed[nu] = True  # pin pressure at the origin corner
    x = np.zeros(ntot)
    x[:nu] = value_u
    free = np.flatnonzero(~fixed)
    A = system.matrix
    rhs = system.rhs[free] - A[free][:, fixed] @ x[fixed]
    Aff = A[free][:, free].tocsc()
    try:
        lu = splu(Aff, permc_spec="COLAMD")
        xf = lu.solve(rhs)
    except RuntimeError as exc:
        raise SolverError(f"sparse factorization failed: {exc}") from exc
    if not np.all(np.isfinite(xf)):
        raise SolverError("flow solution contains non-finite values")
    resid = np.linalg.norm(Aff @ xf - rhs)
    scale = max(np.linalg.norm(rhs), np.linalg.norm(Aff @ xf), 1.0)
    if resid > 1e-8 * scale:
        raise SolverError(f"linear solve residual {resid:.3e} too large (singular system?)")
    x[free] = xf
    nv = mesh.n_velocity_nodes
    u = np.column_stack([x[:nv], x[nv:nu]])
    return FlowField(mesh, u, x[nu:], _kinetic(mesh, u))


def element_kinetic_integrals(flow: FlowField) -> np.ndarray:
    """Per-element ``∫_k u·u dΩ``."""
    return flow.kinetic.copy()


def viscous_dissipation(flow: FlowField, mu: float = 1.0) -> float:
    """``∫ 2 mu ε(u):ε(u) dΩ``."""
    mesh = flow.mesh
    K = element_matrices(mesh.hx, mesh.hy).stiffness
    conn = mesh.velocity_connectivity
    ue = np.hstack([flow.u[conn, 0], flow.u[conn, 1]])
    return float(mu * np.einsum("ki,ij,kj->", ue, K, ue))


def dissipation_energy(flow: FlowField, alpha, mu: float = 1.0) -> float:
    """Objective ``J = ∫ 2 mu ε:ε + alpha u·u dΩ``."""
    alpha = _check_alpha(flow.mesh, alpha)
    return viscous_dissipation(flow, mu) + float(alpha @ flow.kinetic)


def divergence_residual(flow: FlowField) -> float:
    """``|B u|`` over the pressure test space (pinned row included)."""
    _, _, B = velocity_operators(flow.mesh, 0.0)
    return float(np.linalg.norm(B @ flow.velocity_vector))
