"""Input corruption and the denoising training mode.

A denoising model feeds a stochastically corrupted copy of each example to
the encoder while keeping the clean input as the reconstruction target, so
the learned representations must be robust to the corruption process.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .evaluate import StepRecord
from .numerics import Vector

CORRUPTION_KINDS = ("none", "masking", "gaussian")


@dataclass(frozen=True)
class CorruptionPolicy:
    """How to corrupt an input in [0,1]^d: mask coordinates to 0, or add
    clipped gaussian noise. kind == "none" is the exact identity."""

    kind: str = "none"
    rate: float = 0.1  # masking probability per coordinate
    sigma: float = 0.1  # gaussian standard deviation

    def __post_init__(self):
        if self.kind not in CORRUPTION_KINDS:
            raise ConfigError(f"unknown corruption kind {self.kind!r}; choose from {CORRUPTION_KINDS}")
        if self.kind == "masking" and not 0.0 <= self.rate <= 1.0:
            raise ConfigError(f"masking rate must lie in [0, 1], got {self.rate}")
        if self.kind == "gaussian" and self.sigma < 0.0:
            raise ConfigError(f"gaussian sigma must be >= 0, got {self.sigma}")

    @staticmethod
    def parse(text: str) -> "CorruptionPolicy":
        """Parse "none", "masking:<rate>", or "gaussian:<sigma>"."""
        if text == "none":
            return CorruptionPolicy("none")
        kind, _, value = text.partition(":")
        if kind not in CORRUPTION_KINDS or not value:
            raise ConfigError(f"bad corruption policy {text!r}; use none, masking:<rate>, or gaussian:<sigma>")
        try:
            number = float(value)
        except ValueError:
            raise ConfigError(f"bad corruption parameter in {text!r}") from None
        if kind == "masking":
            return CorruptionPolicy("masking", rate=number)
        return CorruptionPolicy("gaussian", sigma=number)


def corrupt(x: Vector, policy: CorruptionPolicy, rng: np.random.Generator) -> Vector:
    """Corrupted copy of x; output always stays inside [0, 1]."""
    if policy.kind == "none":
        return x
    if policy.kind == "masking":
        return np.where(rng.random(x.shape[0]) < policy.rate, 0.0, x)
    return np.clip(x + rng.normal(0.0, policy.sigma, x.shape[0]), 0.0, 1.0)


class DenoisingModel:
    """Wraps a fusion model so every step trains on a corrupted input.

    The per-step corruption RNG is keyed by (noise_seed, step index), making
    a checkpoint-resumed run corrupt identically to an unbroken one. With a
    "none" policy the step delegates untouched, so trajectories are
    bit-identical to the wrapped model's.
    """

    def __init__(self, base, policy: CorruptionPolicy, noise_seed: int = 0):
        self.base = base
        self.policy = policy
        self.noise_seed = int(noise_seed)

    @property
    def variant(self) -> str:
        return {"odlae1": "odldae1", "odlae2": "odldae2"}[self.base.variant]

    @property
    def dims(self):
        return self.base.dims

    @property
    def tradeoff(self):
        return self.base.tradeoff

    @property
    def optimizer(self):
        return self.base.optimizer

    @property
    def step_count(self) -> int:
        return self.base.step_count

    def parameters(self) -> dict:
        return self.base.parameters()

    def _step_rng(self, step: int) -> np.random.Generator:
        key = np.array([self.noise_seed, step], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def predict_proba(self, x):
        return self.base.predict_proba(x)

    def step(self, x, y: int) -> StepRecord:
        if self.policy.kind == "none":
            return self.base.step(x, y)
        corrupted = corrupt(np.asarray(x, dtype=np.float64), self.policy, self._step_rng(self.base.step_count))
        return self.base.step(x, y, x_encode=corrupted)
