"""Verdicts, search statistics, and wall-clock budgets shared by the engines."""

from __future__ import annotations

import time
from dataclasses import dataclass

from ..matrix import scalar_to_text

PROVED = "proved"
REFUTED = "refuted"
TIMEOUT = "timeout"


@dataclass
class SearchStats:
    nodes_explored: int = 0
    splits: int = 0
    max_depth: int = 0
    elapsed_ms: int = 0

    def to_document(self, deterministic: bool = False) -> dict:
        return {
            "nodes_explored": self.nodes_explored,
            "splits": self.splits,
            "max_depth": self.max_depth,
            "elapsed_ms": 0 if deterministic else self.elapsed_ms,
        }


@dataclass(frozen=True)
class Verdict:
    """Outcome of one verification run.

    A refuted verdict always carries a witness that was re-executed through
    the concrete network and observed to violate the property before the
    verdict was constructed.
    """

    status: str
    stats: SearchStats
    witness: tuple = None

    def __post_init__(self):
        if self.status not in (PROVED, REFUTED, TIMEOUT):
            raise ValueError(f"unknown status: {self.status!r}")
        if self.status == REFUTED and self.witness is None:
            raise ValueError("refuted verdict requires a witness")
        if self.witness is not None:
            object.__setattr__(self, "witness", tuple(self.witness))

    def to_document(self, deterministic: bool = False) -> dict:
        doc = {"status": self.status}
        if self.witness is not None:
            doc["witness"] = [scalar_to_text(v) for v in self.witness]
        doc["stats"] = self.stats.to_document(deterministic)
        return doc


class Budget:
    """Wall-clock budget checked at node boundaries for graceful cancellation."""

    def __init__(self, timeout_ms=None):
        self.timeout_ms = timeout_ms
        self._start = time.monotonic()

    def elapsed_ms(self) -> int:
        return int((time.monotonic() - self._start) * 1000)

    def exhausted(self) -> bool:
        return self.timeout_ms is not None and self.elapsed_ms() >= self.timeout_ms
