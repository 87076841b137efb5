"""Budget ledger, message traces, and download-cost accounting.

The ledger records every privacy charge an estimator makes, and can enforce a
configured cap.  The trace records the simulated messages (who downloaded or
uploaded how many bytes at which stage); folding the trace gives the
worst-user download cost, which must match the closed-form accounting in
:func:`download_cost`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

__all__ = [
    "FLOAT_BYTES",
    "BudgetCharge",
    "BudgetLedger",
    "TraceRecord",
    "RunTrace",
    "CostMeter",
    "measure_cost",
    "download_cost",
]

FLOAT_BYTES = 8


@dataclass(frozen=True)
class BudgetCharge:
    label: str
    eps: float


class BudgetLedger:
    """Append-only record of privacy-budget charges.

    Charges compose by addition.  When a cap is configured, any charge pushing
    the total beyond it raises, so a mis-assembled estimator fails fast
    instead of silently overspending.
    """

    def __init__(self, cap: float | None = None):
        if cap is not None and not cap > 0:
            raise ValueError("budget cap must be positive")
        self._cap = cap
        self._charges: list[BudgetCharge] = []

    def charge(self, label: str, eps: float) -> None:
        eps = float(eps)
        if math.isnan(eps) or eps <= 0.0:
            raise ValueError(f"budget charge must be positive, got {eps}")
        new_total = self.total + eps
        # tiny slack for float summation of configured fractions
        if self._cap is not None and new_total > self._cap * (1.0 + 1e-12) + 1e-12:
            raise ValueError(
                f"budget overspend: {new_total} > cap {self._cap} at charge {label!r}"
            )
        self._charges.append(BudgetCharge(label, eps))

    @property
    def charges(self) -> tuple[BudgetCharge, ...]:
        return tuple(self._charges)

    @property
    def total(self) -> float:
        return float(sum(c.eps for c in self._charges))

    @property
    def cap(self) -> float | None:
        return self._cap

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        parts = ", ".join(f"{c.label}={c.eps:g}" for c in self._charges)
        return f"BudgetLedger({parts}; total={self.total:g})"


@dataclass(frozen=True)
class TraceRecord:
    kind: str  # "download" or "upload"
    stage: str
    user: int
    nbytes: int
    eps: float

    def line(self) -> str:
        return (f"kind={self.kind} stage={self.stage} user={self.user} "
                f"bytes={self.nbytes} eps={self.eps:g}")


@dataclass
class RunTrace:
    """Line-oriented record of the simulated protocol messages.

    When ``record_pairs`` is set, perturbation additionally marks every
    adjacency pair a user uploads, so coverage of the unordered pairs can be
    asserted structurally.  Pair marking is meant for small graphs.
    """

    record_pairs: bool = False
    records: list[TraceRecord] = field(default_factory=list)
    pair_counts: np.ndarray | None = None

    def download(self, stage: str, user: int, nbytes: int, eps: float = 0.0) -> None:
        self.records.append(TraceRecord("download", stage, user, int(nbytes), eps))

    def upload(self, stage: str, user: int, nbytes: int, eps: float = 0.0) -> None:
        self.records.append(TraceRecord("upload", stage, user, int(nbytes), eps))

    def mark_pairs(self, n: int, user: int, columns: np.ndarray) -> None:
        if not self.record_pairs:
            return
        if self.pair_counts is None:
            self.pair_counts = np.zeros((n, n), dtype=np.int32)
        self.pair_counts[user, columns] += 1

    def lines(self) -> Iterator[str]:
        for rec in self.records:
            yield rec.line()

    def write(self, path) -> None:
        Path(path).write_text("\n".join(self.lines()) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class CostMeter:
    """Per-user download totals folded out of a run trace."""

    per_user_download: np.ndarray

    @classmethod
    def empty(cls, n: int) -> "CostMeter":
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def cost_dl(self) -> int:
        if self.per_user_download.size == 0:
            return 0
        return int(self.per_user_download.max())


def measure_cost(trace: RunTrace, n: int) -> CostMeter:
    per_user = np.zeros(n, dtype=np.int64)
    for rec in trace.records:
        if rec.kind == "download":
            per_user[rec.user] += rec.nbytes
    return CostMeter(per_user)


# Closed-form download cost (bytes) for one protocol run on n users: the
# worst-case user's summed downloads across rounds.  Matrix entries travel as
# 64-bit floats.
_COST_FORMULAS = {
    "tri-or": lambda n: 0,
    "tri-tr": lambda n: FLOAT_BYTES * n * n,
    "tri-mtr": lambda n: FLOAT_BYTES * n,
    "qua-tr": lambda n: FLOAT_BYTES * n * n,
    "two-star": lambda n: 0,
    # joint run: the squared matrix is downloaded once and reused
    "joint": lambda n: FLOAT_BYTES * n * n,
    # joint run where triangles need the noisy matrix itself as well
    "joint-adjacency": lambda n: 2 * FLOAT_BYTES * n * n,
}


def download_cost(tag: str, n: int) -> int:
    """Download cost in bytes for an estimator tag on an n-user graph."""
    try:
        formula = _COST_FORMULAS[tag]
    except KeyError:
        raise ValueError(f"unknown estimator tag: {tag!r}") from None
    if n <= 0:
        raise ValueError("n must be positive")
    return int(formula(int(n)))
