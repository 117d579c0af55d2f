"""Structured quadrilateral meshes and boundary tagging for channel benchmarks.

Velocity lives on the biquadratic (9-node) lattice, pressure on the bilinear
(4-node) lattice. Elements are numbered row-major, ``k = ey * nx + ex``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

SIDES = ("left", "right", "bottom", "top")
KINDS = ("inlet", "outlet", "wall", "neumann")


@dataclass(frozen=True)
class StructuredMesh:
    nx: int
    ny: int
    width: float
    height: float

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 1 or self.ny < 1:
            raise ValueError(f"element counts must be positive integers, got ({self.nx}, {self.ny})")
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"domain extents must be positive, got ({self.width}, {self.height})")

    @property
    def hx(self) -> float:
        return self.width / self.nx

    @property
    def hy(self) -> float:
        return self.height / self.ny

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def n_velocity_nodes(self) -> int:
        return (2 * self.nx + 1) * (2 * self.ny + 1)

    @property
    def n_pressure_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def area(self) -> float:
        return self.width * self.height

    @cached_property
    def element_volumes(self) -> np.ndarray:
        return np.full(self.n_elements, self.hx * self.hy)

    @cached_property
    def velocity_coords(self) -> np.ndarray:
        x = np.linspace(0.0, self.width, 2 * self.nx + 1)
        y = np.linspace(0.0, self.height, 2 * self.ny + 1)
        X, Y = np.meshgrid(x, y)
        return np.column_stack([X.ravel(), Y.ravel()])

    @cached_property
    def pressure_coords(self) -> np.ndarray:
        x = np.linspace(0.0, self.width, self.nx + 1)
        y = np.linspace(0.0, self.height, self.ny + 1)
        X, Y = np.meshgrid(x, y)
        return np.column_stack([X.ravel(), Y.ravel()])

    @cached_property
    def element_centers(self) -> np.ndarray:
        ex, ey = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        return np.column_stack([(ex.ravel() + 0.5) * self.hx, (ey.ravel() + 0.5) * self.hy])

    @cached_property
    def velocity_connectivity(self) -> np.ndarray:
        """(n_elements, 9) velocity node ids, local order ``3 * b + a``."""
        stride = 2 * self.nx + 1
        ex, ey = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        base = (2 * ey.ravel()) * stride + 2 * ex.ravel()
        offs = np.array([b * stride + a for b in range(3) for a in range(3)])
        return base[:, None] + offs[None, :]

    @cached_property
    def pressure_connectivity(self) -> np.ndarray:
        """(n_elements, 4) pressure node ids, local order ``2 * b + a``."""
        stride = self.nx + 1
        ex, ey = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        base = ey.ravel() * stride + ex.ravel()
        offs = np.array([b * stride + a for b in range(2) for a in range(2)])
        return base[:, None] + offs[None, :]

    @cached_property
    def adjacent_pairs(self) -> np.ndarray:
        """Edge-sharing element pairs ``(k, l)`` with ``k < l``."""
        idx = np.arange(self.n_elements).reshape(self.ny, self.nx)
        horiz = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
        vert = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
        pairs = np.vstack([horiz, vert])
        return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]

    def pair_weights(self, pairs: np.ndarray | None = None) -> np.ndarray:
        """Shared edge length over center distance for each adjacent pair."""
        if pairs is None:
            pairs = self.adjacent_pairs
        horizontal = (pairs[:, 0] // self.nx) == (pairs[:, 1] // self.nx)
        # horizontal neighbours share a vertical edge of length hy
        return np.where(horizontal, self.hy / self.hx, self.hx / self.hy)

    def neighbors(self, k: int) -> list[int]:
        return element_neighbors(self, k)


def build_mesh(nx: int, ny: int, width: float = 1.0, height: float = 1.0) -> StructuredMesh:
    return StructuredMesh(nx, ny, float(width), float(height))


def element_neighbors(mesh: StructuredMesh, k: int) -> list[int]:
    if not 0 <= k < mesh.n_elements:
        raise ValueError(f"element index {k} out of range [0, {mesh.n_elements})")
    ex, ey = k % mesh.nx, k // mesh.nx
    out = []
    if ey > 0:
        out.append(k - mesh.nx)
    if ex > 0:
        out.append(k - 1)
    if ex < mesh.nx - 1:
        out.append(k + 1)
    if ey < mesh.ny - 1:
        out.append(k + mesh.nx)
    return out


@dataclass(frozen=True)
class BoundarySegment:
    """A boundary interval carrying a parabolic normal-velocity profile.

    ``peak`` is the speed at the interval midpoint; inlets flow into the
    domain, outlets out of it. ``neumann`` segments are traction-free.
    """

    side: str
    start: float
    stop: float
    kind: str
    peak: float = 0.0

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"unknown side {self.side!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not self.stop > self.start:
            raise ValueError(f"empty interval [{self.start}, {self.stop}]")

    @property
    def length(self) -> float:
        return self.stop - self.start

    def profile(self, s: np.ndarray) -> np.ndarray:
        """Parabolic speed along the side coordinate ``s``; zero outside."""
        s = np.asarray(s, dtype=float)
        t = (s - self.start) / self.length
        val = 4.0 * self.peak * t * (1.0 - t)
        return np.where((t >= 0.0) & (t <= 1.0), val, 0.0)

    @property
    def flux(self) -> float:
        """Volumetric rate through the segment, positive into the domain."""
        q = 2.0 / 3.0 * self.peak * self.length
        if self.kind == "inlet":
            return q
        if self.kind == "outlet":
            return -q
        return 0.0


def check_segments(segments: list[BoundarySegment]) -> None:
    """Raise ``ValueError`` if intervals on a side overlap."""
    for side in SIDES:
        spans = sorted((s.start, s.stop) for s in segments if s.side == side)
        for (_, b), (c, _) in zip(spans, spans[1:]):
            if c < b:
                raise ValueError(f"overlapping boundary intervals on {side} side")


BENCHMARK_EXTENTS = {"diffuser": (1.0, 1.0), "double_pipe": (1.5, 1.0)}


def tag_benchmark_boundaries(
    mesh: StructuredMesh, case: str, peak: float = 1.0, length_scale: float = 1.0
) -> list[BoundarySegment]:
    """Inlet/outlet segments of the diffuser or double-pipe benchmark.

    Sides not covered by a segment are no-slip walls. ``peak`` scales every
    profile uniformly; ``length_scale`` is the domain height (the benchmark
    geometries are defined for unit height).
    """
    if case not in BENCHMARK_EXTENTS:
        raise ValueError(f"unknown benchmark case {case!r}")
    w, h = (length_scale * e for e in BENCHMARK_EXTENTS[case])
    if not (np.isclose(mesh.width, w) and np.isclose(mesh.height, h)):
        raise ValueError(f"{case} needs a {w} x {h} domain, mesh is {mesh.width} x {mesh.height}")
    L = length_scale
    if case == "diffuser":
        segs = [
            BoundarySegment("left", 0.0, L, "inlet", peak),
            BoundarySegment("right", L / 3.0, 2.0 * L / 3.0, "outlet", 3.0 * peak),
        ]
    else:
        lo, hi = (L / 6.0, L / 3.0), (2.0 * L / 3.0, 5.0 * L / 6.0)
        segs = [
            BoundarySegment("left", *lo, "inlet", peak),
            BoundarySegment("left", *hi, "inlet", peak),
            BoundarySegment("right", *lo, "outlet", peak),
            BoundarySegment("right", *hi, "outlet", peak),
        ]
    check_segments(segs)
    return segs


def channel_boundaries(mesh: StructuredMesh, peak: float = 1.0, outlet: str = "outlet") -> list[BoundarySegment]:
    """Straight channel: full-height inlet on the left, outlet on the right."""
    return [
        BoundarySegment("left", 0.0, mesh.height, "inlet", peak),
        BoundarySegment("right", 0.0, mesh.height, outlet, peak),
    ]


def segment_elements(mesh: StructuredMesh, segment: BoundarySegment) -> np.ndarray:
    """Elements whose boundary edge overlaps the open segment interval."""
    nx, ny = mesh.nx, mesh.ny
    if segment.side in ("left", "right"):
        lo = np.arange(ny) * mesh.hy
        hits = np.flatnonzero((lo < segment.stop) & (lo + mesh.hy > segment.start))
        col = 0 if segment.side == "left" else nx - 1
        return hits * nx + col
    lo = np.arange(nx) * mesh.hx
    hits = np.flatnonzero((lo < segment.stop) & (lo + mesh.hx > segment.start))
    row = 0 if segment.side == "bottom" else ny - 1
    return row * nx + hits
