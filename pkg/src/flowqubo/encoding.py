"""Binary encoding of the element-wise design and the QUBO objective terms.

Full layout: element ``k`` owns ``N`` level-set bits followed by one
characteristic bit, at ``k * (N + 1) + [0..N]``. Condensed layout: only the
characteristic bit, at index ``k``. The level set is the uniform-weighted sum
``phi = 2 * sum(bits) / N - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import StructuredMesh
from .qubo import QuboProblem


@dataclass(frozen=True)
class QuboHyperparams:
    lambda_dis: float = 100.0
    lambda_reg: float = 1.0
    lambda_vol: float = 20.0
    lambda_char: float = 1.0
    n_bits: int = 8
    alpha_max: float = 12.5
    v_max: float = 0.5

    def __post_init__(self):
        for name in ("lambda_dis", "lambda_reg", "lambda_vol", "lambda_char"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_bits < 1:
            raise ValueError("n_bits must be >= 1")
        if not self.v_max > 0:
            raise ValueError("v_max must be positive")
        if self.alpha_max < 0:
            raise ValueError("alpha_max must be non-negative")


@dataclass(frozen=True)
class VariableLayout:
    n_elements: int
    n_bits: int = 0  # 0 means the condensed layout

    @classmethod
    def full(cls, n_elements: int, n_bits: int = 8) -> "VariableLayout":
        if n_bits < 1:
            raise ValueError("full layout needs n_bits >= 1")
        return cls(n_elements, n_bits)

    @classmethod
    def condensed(cls, n_elements: int) -> "VariableLayout":
        return cls(n_elements, 0)

    @property
    def is_condensed(self) -> bool:
        return self.n_bits == 0

    @property
    def n_variables(self) -> int:
        return (self.n_bits + 1) * self.n_elements

    @property
    def chi(self) -> np.ndarray:
        return np.arange(self.n_elements) * (self.n_bits + 1) + self.n_bits

    @property
    def phi(self) -> np.ndarray:
        """(n_elements, N) level-set bit indices."""
        if self.is_condensed:
            raise RuntimeError("condensed layout carries no level-set bits")
        base = np.arange(self.n_elements) * (self.n_bits + 1)
        return base[:, None] + np.arange(self.n_bits)[None, :]

    def require_full(self):
        if self.is_condensed:
            raise RuntimeError("this term needs the full (level-set) layout")

    def require_condensed(self):
        if not self.is_condensed:
            raise RuntimeError("this term needs the condensed layout")


@dataclass(frozen=True)
class DesignState:
    """Element-wise characteristic function (1 = fluid) and optional level set."""

    chi: np.ndarray
    phi: np.ndarray | None = None

    @classmethod
    def all_fluid(cls, n_elements: int, with_phi: bool = False) -> "DesignState":
        return cls(np.ones(n_elements, dtype=np.int8), np.ones(n_elements) if with_phi else None)

    def fluid_volume(self, volumes: np.ndarray) -> float:
        return float(volumes @ self.chi)

    def alpha(self, alpha_max: float) -> np.ndarray:
        return alpha_max * (1.0 - self.chi.astype(float))


def decode_levelset(bits, n_bits: int | None = None) -> np.ndarray | float:
    """``phi = 2 * mean(bits) - 1`` over the last axis."""
    bits = np.asarray(bits, dtype=float)
    n = bits.shape[-1] if n_bits is None else n_bits
    if n < 1:
        raise ValueError("need at least one bit")
    phi = 2.0 * bits.sum(axis=-1) / n - 1.0
    return float(phi) if np.ndim(phi) == 0 else phi


def _check_elems(layout: VariableLayout, arr, what: str) -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if arr.shape != (layout.n_elements,):
        raise ValueError(f"{what} has {arr.size} entries, layout has {layout.n_elements} elements")
    return arr


def _dissipation(d, layout: VariableLayout, weight: float, alpha_max: float) -> QuboProblem:
    d = _check_elems(layout, d, "kinetic integrals")
    prob = QuboProblem(layout.n_variables)
    c = weight * alpha_max * d
    prob.offset = float(c.sum())
    prob.add_linear(layout.chi, -c)
    return prob


def build_H_dis(d, layout: VariableLayout, hp: QuboHyperparams) -> QuboProblem:
    """``lambda_dis * alpha_max * sum_k (1 - chi_k) d_k``."""
    return _dissipation(d, layout, hp.lambda_dis, hp.alpha_max)


def build_H_reg(mesh: StructuredMesh, layout: VariableLayout, hp: QuboHyperparams) -> QuboProblem:
    """``lambda_reg * sum_{adjacent k,l} w_kl (phi_k - phi_l)^2`` expanded in bits."""
    layout.require_full()
    if layout.n_elements != mesh.n_elements:
        raise ValueError("layout and mesh element counts differ")
    N = layout.n_bits
    pairs = mesh.adjacent_pairs
    c = hp.lambda_reg * mesh.pair_weights(pairs) * 4.0 / N**2
    phi = layout.phi
    prob = QuboProblem(layout.n_variables)
    # S_k^2 + S_l^2 diagonal parts: each bit of k and l gets c per pair
    for col in (0, 1):
        prob.add_linear(phi[pairs[:, col]].ravel(), np.repeat(c, N))
    iu, ju = np.triu_indices(N, 1)
    for col in (0, 1):
        bk = phi[pairs[:, col]]
        prob.add_quadratic(bk[:, iu].ravel(), bk[:, ju].ravel(), np.repeat(2 * c, len(iu)))
    # cross term -2 S_k S_l
    a, b = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    bk, bl = phi[pairs[:, 0]], phi[pairs[:, 1]]
    prob.add_quadratic(bk[:, a.ravel()].ravel(), bl[:, b.ravel()].ravel(), np.repeat(-2 * c, N * N))
    return prob


def build_H_vol(volumes, layout: VariableLayout, hp: QuboHyperparams) -> QuboProblem:
    """``lambda_vol * (sum_k v_k chi_k - V_max)^2``."""
    v = _check_elems(layout, volumes, "volumes")
    lam, V = hp.lambda_vol, hp.v_max
    prob = QuboProblem(layout.n_variables)
    prob.offset = lam * V**2
    chi = layout.chi
    prob.add_linear(chi, lam * (v**2 - 2 * v * V))
    i, j = np.triu_indices(layout.n_elements, 1)
    prob.add_quadratic(chi[i], chi[j], 2 * lam * v[i] * v[j])
    return prob


def build_H_char(volumes, layout: VariableLayout, hp: QuboHyperparams) -> QuboProblem:
    """``lambda_char * sum_k v_k (chi_k - (1 + phi_k) / 2)^2`` expanded in bits."""
    layout.require_full()
    v = _check_elems(layout, volumes, "volumes")
    N = layout.n_bits
    c = hp.lambda_char * v
    chi, phi = layout.chi, layout.phi
    prob = QuboProblem(layout.n_variables)
    prob.add_linear(chi, c)
    prob.add_linear(phi.ravel(), np.repeat(c / N**2, N))
    prob.add_quadratic(np.repeat(chi, N), phi.ravel(), np.repeat(-2 * c / N, N))
    iu, ju = np.triu_indices(N, 1)
    prob.add_quadratic(phi[:, iu].ravel(), phi[:, ju].ravel(), np.repeat(2 * c / N**2, len(iu)))
    return prob


def build_full(d, mesh: StructuredMesh, layout: VariableLayout, hp: QuboHyperparams) -> QuboProblem:
    layout.require_full()
    v = mesh.element_volumes
    prob = build_H_dis(d, layout, hp)
    for part in (build_H_reg(mesh, layout, hp), build_H_vol(v, layout, hp), build_H_char(v, layout, hp)):
        prob.add_problem(part)
    return prob


def build_condensed(d, volumes, layout: VariableLayout, hp: QuboHyperparams) -> QuboProblem:
    """``alpha_max * sum_k (1 - chi_k) d_k + lambda_vol * (V_f - V_max)^2``.

    The dissipation weight is fixed to one; ``lambda_vol`` is the only
    relative weight.
    """
    layout.require_condensed()
    prob = _dissipation(d, layout, 1.0, hp.alpha_max)
    prob.add_problem(build_H_vol(volumes, layout, hp))
    return prob


def decode(assignment, layout: VariableLayout) -> DesignState:
    q = np.asarray(assignment)
    if q.shape != (layout.n_variables,):
        raise ValueError(f"assignment length {q.size} does not match layout ({layout.n_variables})")
    chi = q[layout.chi].astype(np.int8)
    if layout.is_condensed:
        return DesignState(chi, 2.0 * chi - 1.0)
    return DesignState(chi, decode_levelset(q[layout.phi], layout.n_bits))


def inconsistent_elements(state: DesignState, strict: bool = False) -> np.ndarray:
    """Mask of elements whose level-set sign contradicts ``chi``.

    ``phi == 0`` agrees with either value unless ``strict`` is set, in which
    case the interface level counts as a mismatch for both.
    """
    if state.phi is None:
        raise ValueError("state has no level-set values")
    chi, phi = state.chi, state.phi
    if strict:
        return ((chi == 1) & (phi <= 0)) | ((chi == 0) & (phi >= 0))
    return ((chi == 1) & (phi < 0)) | ((chi == 0) & (phi > 0))


def count_inconsistencies(state: DesignState, strict: bool = False) -> int:
    return int(inconsistent_elements(state, strict).sum())


def encode(state: DesignState, layout: VariableLayout) -> np.ndarray:
    """Bit assignment reproducing ``state`` (level set rounded to the nearest level)."""
    q = np.zeros(layout.n_variables, dtype=np.int8)
    q[layout.chi] = state.chi
    if not layout.is_condensed:
        N = layout.n_bits
        phi = state.phi if state.phi is not None else 2.0 * state.chi - 1.0
        m = np.clip(np.rint((phi + 1.0) * N / 2.0), 0, N).astype(int)
        q[layout.phi] = (np.arange(N)[None, :] < m[:, None]).astype(np.int8)
    return q
