from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class HistoryRecord:
    """One optimization step. ``inconsistencies`` and ``qubo_energy`` are
    ``None`` where they do not apply (condensed or density runs)."""

    step: int
    J: float
    volume_fraction: float
    inconsistencies: Optional[int]
    qubo_energy: Optional[float]
    wall_ms: float


def relative_change(new: float, old: float) -> float:
    return abs(new - old) / abs(old) if old != 0 else (0.0 if new == 0 else float("inf"))
