"""Quadratic unconstrained binary optimization problems.

A problem is ``c0 + sum_i a_i q_i + sum_{i<j} b_ij q_i q_j``. Terms accumulate;
``q_i * q_i`` folds into the linear part since ``q**2 == q`` for binaries.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np

MAX_BRUTE_FORCE_VARS = 24


class QuboProblem:
    def __init__(self, n: int):
        if n < 0:
            raise ValueError("variable count must be non-negative")
        self.n = int(n)
        self.offset = 0.0
        self.linear = np.zeros(self.n)
        empty = (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), np.zeros(0))
        # every chunk ever added; collapsed into one canonical chunk on demand
        self._pending: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = [empty]
        self._canon: tuple[np.ndarray, np.ndarray, np.ndarray] | None = empty

    def _check(self, idx: np.ndarray) -> None:
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise ValueError(f"variable index out of range for problem with {self.n} variables")

    def add_term(self, variables: Iterable[int], coeff: float) -> None:
        """Add ``coeff`` times the product of up to two binary variables."""
        vs = [int(v) for v in variables]
        if len(vs) > 2:
            raise ValueError("only terms of degree <= 2 are supported")
        self._check(np.asarray(vs, dtype=np.int64))
        if not vs:
            self.offset += coeff
        elif len(vs) == 1 or vs[0] == vs[1]:
            self.linear[vs[0]] += coeff
        else:
            self.add_quadratic([vs[0]], [vs[1]], [coeff])

    def add_linear(self, idx, coeff) -> None:
        idx = np.asarray(idx, dtype=np.int64).ravel()
        coeff = np.broadcast_to(np.asarray(coeff, dtype=float), idx.shape)
        self._check(idx)
        np.add.at(self.linear, idx, coeff)

    def add_quadratic(self, i, j, coeff) -> None:
        i = np.asarray(i, dtype=np.int64).ravel()
        j = np.asarray(j, dtype=np.int64).ravel()
        coeff = np.broadcast_to(np.asarray(coeff, dtype=float), i.shape).copy()
        if i.shape != j.shape:
            raise ValueError("index arrays must have equal length")
        self._check(i)
        self._check(j)
        diag = i == j
        if diag.any():
            np.add.at(self.linear, i[diag], coeff[diag])
        off = ~diag
        lo, hi = np.minimum(i[off], j[off]), np.maximum(i[off], j[off])
        if lo.size:
            self._pending.append((lo, hi, coeff[off]))
            self._canon = None

    def add_problem(self, other: "QuboProblem") -> None:
        if other.n != self.n:
            raise ValueError("cannot merge problems over different variable counts")
        self.offset += other.offset
        self.linear += other.linear
        i, j, v = other.quadratic_coo()
        if i.size:
            self._pending.append((i, j, v))
            self._canon = None

    def __add__(self, other: "QuboProblem") -> "QuboProblem":
        out = self.copy()
        out.add_problem(other)
        return out

    def copy(self) -> "QuboProblem":
        out = QuboProblem(self.n)
        out.offset = self.offset
        out.linear = self.linear.copy()
        i, j, v = self.quadratic_coo()
        out._canon = (i.copy(), j.copy(), v.copy())
        out._pending = [out._canon]
        return out

    def quadratic_coo(self):
        """Canonical ``(i, j, coeff)`` arrays, ``i < j``, sorted, duplicates summed."""
        if self._canon is None:
            parts = self._pending
            i = np.concatenate([p[0] for p in parts])
            j = np.concatenate([p[1] for p in parts])
            v = np.concatenate([p[2] for p in parts])
            order = np.lexsort((j, i))
            i, j, v = i[order], j[order], v[order]
            start = np.flatnonzero(np.r_[True, (i[1:] != i[:-1]) | (j[1:] != j[:-1])])
            self._canon = (i[start], j[start], np.add.reduceat(v, start) if v.size else v)
            self._pending = [self._canon]
        return self._canon

    @property
    def quadratic(self) -> dict[tuple[int, int], float]:
        i, j, v = self.quadratic_coo()
        return {(int(a), int(b)): float(c) for a, b, c in zip(i, j, v)}

    @property
    def n_quadratic(self) -> int:
        return len(self.quadratic_coo()[0])

    def is_empty(self) -> bool:
        return self.n == 0

    def coefficients(self) -> np.ndarray:
        """All nonzero linear and quadratic coefficients."""
        v = np.concatenate([self.linear, self.quadratic_coo()[2]])
        return v[v != 0]

    def energy(self, q) -> float:
        return energy(self, q)

    def to_text(self) -> str:
        lines = [str(self.n)]
        if self.offset != 0:
            lines.append(f"-1 -1 {self.offset!r}")
        for k in np.flatnonzero(self.linear):
            lines.append(f"{k} {k} {float(self.linear[k])!r}")
        for a, b, c in zip(*self.quadratic_coo()):
            lines.append(f"{a} {b} {float(c)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QuboProblem":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        prob = cls(int(rows[0][0]))
        for a, b, c in rows[1:]:
            a, b = int(a), int(b)
            if a == -1 and b == -1:
                prob.offset += float(c)
            else:
                prob.add_term((a, b), float(c))
        return prob

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "QuboProblem":
        return cls.from_text(Path(path).read_text())

    def __repr__(self):
        return f"QuboProblem(n={self.n}, linear_nnz={np.count_nonzero(self.linear)}, quadratic={self.n_quadratic})"


def _as_bits(problem: QuboProblem, q) -> np.ndarray:
    q = np.asarray(q)
    if q.shape != (problem.n,):
        raise ValueError(f"assignment of length {q.size} does not match {problem.n} variables")
    if q.size and not np.all((q == 0) | (q == 1)):
        raise ValueError("assignment entries must be 0 or 1")
    return q.astype(float)


def energy(problem: QuboProblem, q) -> float:
    """Evaluate the stored polynomial at assignment ``q``."""
    x = _as_bits(problem, q)
    i, j, v = problem.quadratic_coo()
    return float(problem.offset + problem.linear @ x + v @ (x[i] * x[j]))


def brute_force_min(problem: QuboProblem, chunk_bits: int = 16) -> tuple[np.ndarray, float]:
    """Exhaustive minimum; ties go to the smallest integer ``sum q_i 2**i``."""
    n = problem.n
    if n > MAX_BRUTE_FORCE_VARS:
        raise ValueError(f"brute force refused: {n} variables exceeds the {MAX_BRUTE_FORCE_VARS}-variable limit")
    if n == 0:
        return np.zeros(0, dtype=np.int8), float(problem.offset)
    i, j, v = problem.quadratic_coo()
    Q = np.zeros((n, n))
    np.add.at(Q, (i, j), v)
    shifts = np.arange(n, dtype=np.int64)
    total = 1 << n
    step = 1 << min(chunk_bits, n)
    best_e, best_x = np.inf, 0
    for start in range(0, total, step):
        ints = np.arange(start, min(start + step, total), dtype=np.int64)
        B = ((ints[:, None] >> shifts) & 1).astype(float)
        e = problem.offset + B @ problem.linear + np.einsum("ri,ri->r", B @ Q, B)
        k = int(np.argmin(e))
        if e[k] < best_e:
            best_e, best_x = float(e[k]), int(ints[k])
    bits = ((best_x >> shifts) & 1).astype(np.int8)
    return bits, energy(problem, bits)
