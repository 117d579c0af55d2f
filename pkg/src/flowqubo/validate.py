"""Self-checks behind ``flowqubo validate``."""
from __future__ import annotations

import numpy as np

from .annealer import AnnealConfig, solve
from .mesh import build_mesh, channel_boundaries
from .qubo import QuboProblem, brute_force_min
from .stokes import dissipation_energy, divergence_residual, solve_flow


def poiseuille(n: int = 8):
    mesh = build_mesh(n, n, 1.0, 1.0)
    flow = solve_flow(mesh, channel_boundaries(mesh), 0.0)
    y = mesh.velocity_coords[:, 1]
    exact = 4 * y * (1 - y)
    err = np.sqrt(np.sum((flow.u[:, 0] - exact) ** 2) + np.sum(flow.u[:, 1] ** 2)) / np.linalg.norm(exact)
    return flow, err, dissipation_energy(flow, 0.0)


def random_qubo(n: int, rng) -> QuboProblem:
    p = QuboProblem(n)
    p.add_linear(np.arange(n), rng.uniform(-1, 1, n))
    i, j = np.triu_indices(n, 1)
    p.add_quadratic(i, j, rng.uniform(-1, 1, len(i)))
    return p


def run_checks(n_qubos: int = 20, seed: int = 0):
    out = []
    flow, err, J = poiseuille()
    out.append(("poiseuille velocity", err <= 1e-10, f"relative L2 error {err:.2e}"))
    out.append(("poiseuille dissipation", abs(J - 16 / 3) <= 1e-9 * 16 / 3, f"J = {J:.12f} (exact 16/3)"))
    div = divergence_residual(flow)
    out.append(("discrete mass conservation", div <= 1e-8 * np.linalg.norm(flow.u), f"|Bu| = {div:.2e}"))
    rng = np.random.default_rng(seed)
    hits = 0
    for k in range(n_qubos):
        p = random_qubo(int(rng.integers(2, 13)), rng)
        _, e_ref = brute_force_min(p)
        hits += abs(solve(p, AnnealConfig(seed=k)).energy - e_ref) <= 1e-9 * max(1.0, abs(e_ref))
    out.append(("annealer vs brute force", hits == n_qubos, f"{hits}/{n_qubos} optimal"))
    return out
