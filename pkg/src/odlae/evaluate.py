"""Prequential (test-then-train) evaluation and multiclass metrics.

Each stream example is first predicted by the current model, the prediction
is scored, and only then does the model update on the revealed label. The
running confusion matrix backs accuracy, macro precision/recall/F1, and
hamming loss (identical to 1 - accuracy for single-label problems).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import DataError, InvalidInputError, ShapeError


@dataclass
class StepRecord:
    """Diagnostics for one online step; the prediction predates the update."""

    step: int
    label: int
    predicted: int
    probs: np.ndarray
    loss_re: float
    loss_pre: float
    loss_total: float
    a_re: float
    a_pre: float
    ensemble_weights: Optional[np.ndarray] = None  # hedge fusion only
    layer_losses: Optional[np.ndarray] = None  # hedge fusion only
    attention: Optional[np.ndarray] = None  # attention fusion only


class ConfusionMatrix:
    """counts[true][pred] over everything evaluated so far."""

    def __init__(self, class_count: int, counts: np.ndarray | None = None):
        if class_count < 1:
            raise ShapeError("class_count must be >= 1")
        self.class_count = class_count
        if counts is None:
            self.counts = np.zeros((class_count, class_count), dtype=np.int64)
        else:
            counts = np.asarray(counts, dtype=np.int64)
            if counts.shape != (class_count, class_count) or (counts < 0).any():
                raise ShapeError("counts must be a nonnegative class_count x class_count matrix")
            self.counts = counts

    def record(self, true: int, pred: int) -> None:
        self.counts[true, pred] += 1

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class MetricsReport:
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    hamming_loss: float
    n: int
    window: Optional[int] = None
    window_accuracy: list = field(default_factory=list)  # (window_end_step, accuracy)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "hamming_loss": self.hamming_loss,
            "n": self.n,
            "window": self.window,
            "window_accuracy": [[int(t), float(a)] for t, a in self.window_accuracy],
        }


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Macro-averaged metrics; classes with a zero denominator contribute 0."""
    total = cm.total
    if total < 1:
        raise InvalidInputError("cannot compute metrics from an empty confusion matrix")
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)
    accuracy = float(tp.sum() / total)
    return MetricsReport(
        accuracy=accuracy,
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        hamming_loss=1.0 - accuracy,
        n=total,
    )


@dataclass
class RunState:
    """Everything a resumed run needs to continue the metric series exactly."""

    cm: ConfusionMatrix
    step: int = 0
    window_correct: int = 0
    windows: list = field(default_factory=list)  # (window_end_step, accuracy)


def prequential_run(
    stream: Iterable,
    model,
    *,
    window: int,
    class_count: int,
    state: RunState | None = None,
    max_steps: int | None = None,
    on_step: Callable[[StepRecord], None] | None = None,
) -> tuple[MetricsReport, RunState]:
    """Test-then-train over the stream, resuming from `state` if given.

    When resuming, the stream is replayed from the start and the first
    state.step examples are skipped, so a deterministic stream continues as
    if the run had never been interrupted.
    """
    if window < 1:
        raise InvalidInputError("window must be >= 1")
    if state is None:
        state = RunState(cm=ConfusionMatrix(class_count))
    elif state.cm.class_count != class_count:
        raise ShapeError("resumed state has a different class count")

    done = 0
    for idx, example in enumerate(iter(stream)):
        if idx < state.step:
            continue
        if max_steps is not None and done >= max_steps:
            break
        y = example.y
        if not 0 <= y < class_count:
            raise DataError(f"record {idx}: label {y} out of range [0, {class_count})")
        record = model.step(example.x, y)
        record.step = idx
        state.cm.record(y, record.predicted)
        state.window_correct += int(record.predicted == y)
        state.step += 1
        done += 1
        if state.step % window == 0:
            state.windows.append((state.step, state.window_correct / window))
            state.window_correct = 0
        if on_step is not None:
            on_step(record)

    report = compute_metrics(state.cm)
    report.window = window
    report.window_accuracy = list(state.windows)
    return report, state
