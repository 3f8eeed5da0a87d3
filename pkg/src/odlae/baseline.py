"""Linear softmax-regression baseline trained by plain online gradient descent.

Kept deliberately tiny: it shares the step/record protocol of the fusion
models so the same prequential pipeline can sanity-check streams and
thresholds against a known-simple learner.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .evaluate import StepRecord
from .numerics import as_vector, cross_entropy, one_hot, softmax


class LinearBaseline:
    variant = "linear_ogd_baseline"

    def __init__(self, input_dim: int, class_count: int, *, lr: float = 0.1):
        self.input_dim = input_dim
        self.class_count = class_count
        self.lr = float(lr)
        self.weight = np.zeros((class_count, input_dim))
        self.bias = np.zeros(class_count)
        self.step_count = 0

    def parameters(self) -> dict[str, np.ndarray]:
        return {"lin.W": self.weight, "lin.b": self.bias}

    def predict_proba(self, x) -> np.ndarray:
        x = as_vector(x, self.input_dim)
        return softmax(self.weight @ x + self.bias)

    def step(self, x, y: int) -> StepRecord:
        x = as_vector(x, self.input_dim)
        if not 0 <= y < self.class_count:
            raise InvalidInputError(f"label {y} out of range [0, {self.class_count})")
        probs = softmax(self.weight @ x + self.bias)
        predicted = int(np.argmax(probs))
        loss = cross_entropy(one_hot(y, self.class_count), probs)
        g_logits = probs.copy()
        g_logits[y] -= 1.0
        self.weight -= self.lr * np.outer(g_logits, x)
        self.bias -= self.lr * g_logits
        self.step_count += 1
        return StepRecord(
            step=self.step_count - 1,
            label=y,
            predicted=predicted,
            probs=probs,
            loss_re=0.0,
            loss_pre=loss,
            loss_total=loss,
            a_re=0.0,
            a_pre=1.0,
        )
