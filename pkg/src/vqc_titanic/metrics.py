"""Confusion-matrix tallies and the rates derived from them.

Class 1 (survived) is the positive class. A rate whose denominator is zero is
``None`` ("undefined"), never 0 or 1, and is written as an empty CSV cell.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

METRIC_NAMES = ("ppv", "tpr", "npv", "tnr", "acc", "bacc", "youden_j")
CSV_COLUMNS = ("tp", "fp", "tn", "fn") + METRIC_NAMES


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricReport:
    counts: ConfusionCounts
    ppv: Optional[float]
    tpr: Optional[float]
    npv: Optional[float]
    tnr: Optional[float]
    acc: float
    bacc: Optional[float]
    youden_j: Optional[float]

    def as_dict(self) -> dict:
        out = asdict(self.counts)
        out.update({k: getattr(self, k) for k in METRIC_NAMES})
        return out

    def csv_cells(self) -> list:
        """Values in :data:`CSV_COLUMNS` order; undefined rates become ``""``."""
        d = self.as_dict()
        return [_cell(d[c]) for c in CSV_COLUMNS]


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _rate(num, den) -> Optional[float]:
    return num / den if den else None


def tally(predictions, truth) -> ConfusionCounts:
    pred = np.asarray(predictions).ravel()
    true = np.asarray(truth).ravel()
    if pred.shape != true.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions, {true.size} labels")
    if pred.size == 0:
        raise ValueError("nothing to tally")
    for name, v in (("predictions", pred), ("truth", true)):
        if not np.all(np.isin(v, (0, 1))):
            raise ValueError(f"{name} must be 0/1 labels")
    return ConfusionCounts(
        tp=int(np.sum((pred == 1) & (true == 1))),
        fp=int(np.sum((pred == 1) & (true == 0))),
        tn=int(np.sum((pred == 0) & (true == 0))),
        fn=int(np.sum((pred == 0) & (true == 1))),
    )


def report(counts: ConfusionCounts) -> MetricReport:
    if counts.total == 0:
        raise ValueError("all-zero confusion counts")
    tpr = _rate(counts.tp, counts.positives)
    tnr = _rate(counts.tn, counts.negatives)
    both = tpr is not None and tnr is not None
    return MetricReport(
        counts=counts,
        ppv=_rate(counts.tp, counts.tp + counts.fp),
        tpr=tpr,
        npv=_rate(counts.tn, counts.tn + counts.fn),
        tnr=tnr,
        acc=(counts.tp + counts.tn) / counts.total,
        bacc=(tpr + tnr) / 2 if both else None,
        youden_j=tpr + tnr - 1 if both else None,
    )


def evaluate(predictions, truth) -> MetricReport:
    return report(tally(predictions, truth))
