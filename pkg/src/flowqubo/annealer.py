"""Seeded simulated annealing for QUBO problems.

Single-bit-flip Metropolis with geometric cooling. Each restart draws its own
RNG stream from ``(seed, restart index)`` so results do not depend on how the
restarts are scheduled; the wall-clock budget only ever drops whole restarts.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol

import numba
import numpy as np
import scipy.sparse as sp

from .qubo import QuboProblem, energy


@dataclass(frozen=True)
class AnnealConfig:
    """Annealing budget. ``t_initial``/``t_final`` of ``None`` use the default schedule.

    With ``restarts > 0`` exactly that many restarts run and the result is
    reproducible. ``restarts = 0`` keeps restarting until ``timeout_ms`` runs
    out (always at least one), so the outcome depends on machine speed; see
    ``calibrate_restarts`` for turning a time budget into a fixed count.
    """

    timeout_ms: float = 1000.0
    seed: int = 0
    sweeps_per_restart: int = 1000
    restarts: int = 8
    t_initial: float | None = None
    t_final: float | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.timeout_ms > 0:
            raise ValueError("timeout_ms must be positive")
        if self.sweeps_per_restart < 1 or self.restarts < 0 or self.workers < 1:
            raise ValueError("sweeps_per_restart and workers must be >= 1, restarts >= 0")
        if self.t_initial is not None and self.t_final is not None:
            if not self.t_initial >= self.t_final > 0:
                raise ValueError("need t_initial >= t_final > 0")


@dataclass(frozen=True)
class SolveResult:
    assignment: np.ndarray
    energy: float
    restarts_used: int
    elapsed_ms: float


class QuboSolver(Protocol):
    """Anything that can minimize a QUBO under a budget."""

    name: str

    def solve(self, problem: QuboProblem, config: AnnealConfig) -> SolveResult: ...


def default_temperature_schedule(problem: QuboProblem, probes: int = 32, seed: int = 0) -> tuple[float, float]:
    """Start at the largest single-flip energy change seen on random probes,
    end at 1e-3 of the median nonzero coefficient magnitude."""
    coeffs = problem.coefficients()
    if coeffs.size == 0:
        return 1.0, 1e-3
    t_final = 1e-3 * float(np.median(np.abs(coeffs)))
    W = _symmetric(problem)
    rng = np.random.default_rng(seed)
    Q = rng.integers(0, 2, size=(probes, problem.n)).astype(float)
    Q[0] = 0.0
    Q[-1] = 1.0
    h = problem.linear[None, :] + (W @ Q.T).T
    t_initial = float(np.max(np.abs(h)))
    return max(t_initial, t_final), t_final


def _symmetric(problem: QuboProblem) -> sp.csr_matrix:
    i, j, v = problem.quadratic_coo()
    n = problem.n
    W = sp.coo_matrix((np.r_[v, v], (np.r_[i, j], np.r_[j, i])), shape=(n, n)).tocsr()
    W.sort_indices()
    return W


@numba.njit(cache=True, nogil=True)
def _anneal_once(indptr, indices, data, linear, temps, seed):
    np.random.seed(seed)
    n = linear.shape[0]
    q = np.zeros(n, dtype=np.int8)
    for i in range(n):
        q[i] = 1 if np.random.random() < 0.5 else 0
    h = linear.copy()
    for i in range(n):
        if q[i]:
            for p in range(indptr[i], indptr[i + 1]):
                h[indices[p]] += data[p]
    e = 0.0
    for i in range(n):
        if q[i]:
            e += linear[i] + 0.5 * (h[i] - linear[i])
    best_e = e
    best_q = q.copy()
    for t in range(temps.shape[0]):
        T = temps[t]
        for i in range(n):
            delta = h[i] if q[i] == 0 else -h[i]
            if delta <= 0.0 or np.random.random() < np.exp(-delta / T):
                s = 1.0 if q[i] == 0 else -1.0
                q[i] = 1 - q[i]
                e += delta
                for p in range(indptr[i], indptr[i + 1]):
                    h[indices[p]] += s * data[p]
        if e < best_e:
            best_e = e
            best_q[:] = q
    # greedy descent from the best state seen
    q[:] = best_q
    h[:] = linear
    for i in range(n):
        if q[i]:
            for p in range(indptr[i], indptr[i + 1]):
                h[indices[p]] += data[p]
    improved = True
    while improved:
        improved = False
        for i in range(n):
            delta = h[i] if q[i] == 0 else -h[i]
            if delta < 0.0:
                s = 1.0 if q[i] == 0 else -1.0
                q[i] = 1 - q[i]
                improved = True
                for p in range(indptr[i], indptr[i + 1]):
                    h[indices[p]] += s * data[p]
    return q


def restart_seed(seed: int, restart: int) -> int:
    return int(np.random.SeedSequence([int(seed) & (2**64 - 1), restart]).generate_state(1)[0])


def _key(e: float, q: np.ndarray):
    # lower energy first, then lower integer value with bit 0 least significant
    return (e, tuple(q[::-1].tolist()))


class SimulatedAnnealer:
    """Local simulated-annealing backend."""

    name = "local-sa"

    def solve(self, problem: QuboProblem, config: AnnealConfig | None = None) -> SolveResult:
        config = config or AnnealConfig()
        if problem.n == 0:
            raise ValueError("cannot anneal an empty problem")
        t0 = time.perf_counter()
        deadline = t0 + config.timeout_ms / 1000.0
        ti, tf = config.t_initial, config.t_final
        if ti is None or tf is None:
            d_ti, d_tf = default_temperature_schedule(problem)
            ti = d_ti if ti is None else ti
            tf = d_tf if tf is None else tf
            ti = max(ti, tf)
        temps = np.geomspace(ti, tf, config.sweeps_per_restart) if config.sweeps_per_restart > 1 else np.array([tf])
        W = _symmetric(problem)
        args = (W.indptr.astype(np.int64), W.indices.astype(np.int64), W.data.astype(float), problem.linear.astype(float), temps)

        timed = config.restarts == 0

        def run(r):
            if timed and r > 0 and time.perf_counter() > deadline:
                return None
            q = _anneal_once(*args, restart_seed(config.seed, r))
            return q, energy(problem, q)

        best = None
        used = 0
        limit = config.restarts if config.restarts > 0 else None
        r = 0
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            while limit is None or r < limit:
                batch = range(r, r + config.workers if limit is None else min(r + config.workers, limit))
                results = list(pool.map(run, batch))
                done = [res for res in results if res is not None]
                used += len(done)
                for q, e in done:
                    if best is None or _key(e, q) < _key(*best[::-1]):
                        best = (q, e)
                r = batch.stop
                if len(done) < len(results) or (limit is None and time.perf_counter() > deadline):
                    break
        q, e = best
        return SolveResult(q.astype(np.int8), e, used, 1000.0 * (time.perf_counter() - t0))


def calibrate_restarts(problem: QuboProblem, timeout_ms: float, sweeps_per_restart: int = 1000, seed: int = 0) -> int:
    """Number of restarts that fit in ``timeout_ms``, from one timed restart."""
    probe = AnnealConfig(timeout_ms=max(timeout_ms, 1.0), seed=seed, sweeps_per_restart=sweeps_per_restart, restarts=1)
    SimulatedAnnealer().solve(problem, probe)  # compile and warm caches
    res = SimulatedAnnealer().solve(problem, probe)
    return max(1, int(timeout_ms // max(res.elapsed_ms, 1e-3)))


BACKENDS = {"local-sa": SimulatedAnnealer}


def get_backend(name: str = "local-sa") -> QuboSolver:
    try:
        return BACKENDS[name]()
    except KeyError:
        raise ValueError(f"unknown solver backend {name!r}; available: {sorted(BACKENDS)}") from None


def solve(problem: QuboProblem, config: AnnealConfig | None = None) -> SolveResult:
    return SimulatedAnnealer().solve(problem, config)


__all__ = [
    "AnnealConfig",
    "SolveResult",
    "QuboSolver",
    "SimulatedAnnealer",
    "calibrate_restarts",
    "default_temperature_schedule",
    "get_backend",
    "solve",
]
