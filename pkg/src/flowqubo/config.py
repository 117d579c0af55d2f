"""Run configuration and its flat ``key = value`` file format.

One setting per line, ``#`` starts a comment, keys are the ``CaseConfig``
field names. Unknown keys are an error. ``width``/``height`` default to the
benchmark extents of ``case``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from .annealer import AnnealConfig
from .classical import DensitySettings
from .encoding import QuboHyperparams
from .mesh import BENCHMARK_EXTENTS, StructuredMesh, build_mesh, channel_boundaries, tag_benchmark_boundaries

CASES = ("diffuser", "double_pipe", "channel")


@dataclass(frozen=True)
class CaseConfig:
    case: str = "diffuser"
    nx: int = 32
    ny: int = 32
    width: float | None = None
    height: float | None = None
    mu: float = 1.0
    alpha_max: float = 12.5
    volume_fraction: float = 0.5
    inflow_peak: float = 1.0
    length_scale: float = 1.0
    outlet: str = "dirichlet"
    formulation: str = "condensed"
    lambda_dis: float = 100.0
    lambda_reg: float = 1.0
    lambda_vol: float = 0.2
    lambda_char: float = 1.0
    n_bits: int = 8
    backend: str = "local-sa"
    timeout_ms: float = 1000.0
    sweeps: int = 1000
    restarts: int = 8
    workers: int = 1
    tol: float = 1e-3
    max_steps: int = 50
    seed: int = 0
    q_penalty: float = 0.1
    move_limit: float = 0.2
    oc_eta: float = 0.5
    classical_tol: float = 1e-3
    classical_max_steps: int = 200
    filter_threshold: float = 0.95
    record_timing: int = 0

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}, got {self.case!r}")
        if self.formulation not in ("full", "condensed"):
            raise ValueError("formulation must be 'full' or 'condensed'")
        if self.outlet not in ("dirichlet", "neumann"):
            raise ValueError("outlet must be 'dirichlet' or 'neumann'")
        if not self.tol > 0 or not self.classical_tol > 0:
            raise ValueError("termination tolerances must be positive")
        if self.max_steps < 1 or self.classical_max_steps < 1:
            raise ValueError("step caps must be >= 1")
        if not 0 < self.volume_fraction <= 1:
            raise ValueError("volume_fraction must lie in (0, 1]")
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.seed >= 0:
            raise ValueError("seed must be a non-negative integer")
        # construct once so sub-invariants surface at load time
        self.hyperparams()
        self.anneal()

    @property
    def extents(self) -> tuple[float, float]:
        dw, dh = (self.length_scale * e for e in BENCHMARK_EXTENTS.get(self.case, (1.0, 1.0)))
        return (self.width if self.width is not None else dw, self.height if self.height is not None else dh)

    @property
    def v_max(self) -> float:
        w, h = self.extents
        return self.volume_fraction * w * h

    def mesh(self) -> StructuredMesh:
        return build_mesh(self.nx, self.ny, *self.extents)

    def segments(self, mesh: StructuredMesh | None = None):
        mesh = mesh or self.mesh()
        if self.case == "channel":
            segs = channel_boundaries(mesh, self.inflow_peak)
        else:
            segs = tag_benchmark_boundaries(mesh, self.case, self.inflow_peak, self.length_scale)
        if self.outlet == "neumann":
            segs = [dataclasses.replace(s, kind="neumann") if s.kind == "outlet" else s for s in segs]
        return segs

    def hyperparams(self) -> QuboHyperparams:
        return QuboHyperparams(
            self.lambda_dis, self.lambda_reg, self.lambda_vol, self.lambda_char, self.n_bits, self.alpha_max, self.v_max
        )

    def anneal(self, seed: int | None = None) -> AnnealConfig:
        return AnnealConfig(
            timeout_ms=self.timeout_ms,
            seed=self.seed if seed is None else seed,
            sweeps_per_restart=self.sweeps,
            restarts=self.restarts,
            workers=self.workers,
        )

    def density(self) -> DensitySettings:
        return DensitySettings(
            self.q_penalty, self.move_limit, self.oc_eta, self.classical_tol, self.classical_max_steps, self.filter_threshold
        )

    def replace(self, **changes) -> "CaseConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if val is not None:
                lines.append(f"{f.name} = {val!r}" if isinstance(val, float) else f"{f.name} = {val}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **overrides) -> "CaseConfig":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise ValueError(f"config line {lineno}: unknown key {key!r}")
            values[key] = _coerce(types[key], val, key)
        values.update(overrides)
        return cls(**values)

    @classmethod
    def load(cls, path, **overrides) -> "CaseConfig":
        return cls.from_text(Path(path).read_text(), **overrides)


def _coerce(type_name, text: str, key: str):
    t = str(type_name)
    try:
        if t.startswith("int"):
            return int(text)
        if t.startswith("float"):
            return None if text.lower() == "none" else float(text)
        return text
    except ValueError:
        raise ValueError(f"config key {key!r}: cannot parse {text!r} as {t}") from None


def diffuser_config(**kw) -> CaseConfig:
    base = dict(case="diffuser", nx=32, ny=32, length_scale=32.0, volume_fraction=0.5, lambda_vol=0.2, timeout_ms=1000.0)
    base.update(kw)
    return CaseConfig(**base)


def double_pipe_config(**kw) -> CaseConfig:
    base = dict(case="double_pipe", nx=48, ny=32, length_scale=32.0, volume_fraction=1.0 / 3.0, lambda_vol=0.05, timeout_ms=10000.0)
    base.update(kw)
    return CaseConfig(**base)
