"""Per-round experiment records and their CSV form."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .runtime import CommLedger

CSV_COLUMNS = ("round", "epochs", "updates", "vectors", "primal", "dual", "gap", "time")


@dataclass(frozen=True)
class TraceRecord:
    round: int
    epochs: float
    updates: int
    vectors: int
    primal: float
    dual: float  # nan for primal-only methods
    gap: float
    time: float

    def as_row(self):
        return [str(self.round), repr(float(self.epochs)), str(self.updates),
                str(self.vectors), repr(float(self.primal)), repr(float(self.dual)),
                repr(float(self.gap)), repr(float(self.time))]


@dataclass
class Trace:
    method: str
    records: list = field(default_factory=list)
    ledger: CommLedger = field(default_factory=CommLedger)
    w: np.ndarray | None = None
    alpha: np.ndarray | None = None
    diverged: bool = False
    divergence_round: int | None = None
    meta: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def final(self):
        return self.records[-1]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.records:
            writer.writerow(r.as_row())
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def read_trace_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    return [TraceRecord(int(r["round"]), float(r["epochs"]), int(r["updates"]),
                        int(r["vectors"]), float(r["primal"]), float(r["dual"]),
                        float(r["gap"]), float(r["time"])) for r in rows]


def check_records(records, atol=1e-12):
    """Raise ValueError if any row breaks the TraceRecord invariants."""
    prev = None
    for r in records:
        if not math.isnan(r.dual) and abs(r.gap - (r.primal - r.dual)) > atol:
            raise ValueError(f"round {r.round}: gap != primal - dual")
        if prev is not None:
            for name in ("round", "epochs", "updates", "vectors", "time"):
                if getattr(r, name) < getattr(prev, name):
                    raise ValueError(f"round {r.round}: {name} decreased")
        prev = r
    return True


def suboptimality_series(trace, p_star):
    """P(w^(t)) - P* per recorded round."""
    return trace.column("primal") - p_star


def rounds_to_target(trace, p_star, target):
    """First recorded (round, vectors) with P - P* <= target, or None."""
    for r in trace.records:
        if r.primal - p_star <= target:
            return r.round, r.vectors
    return None
