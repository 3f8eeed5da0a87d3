"""Online first-order updates applied in place to named parameter tensors.

Both optimizers consume a dict of name -> ndarray parameters and an equally
keyed dict of gradients; shapes are never changed by an update.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, ShapeError


def _check(params: dict, grads: dict) -> None:
    if params.keys() != grads.keys():
        raise ShapeError("parameter and gradient names differ")
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {p.shape} for {name!r}")
        if not np.all(np.isfinite(g)):
            raise InvalidInputError(f"non-finite gradient for {name!r}")


class Sgd:
    """Plain online gradient descent: p <- p - lr * g."""

    kind = "sgd"

    def __init__(self, lr: float):
        self.lr = float(lr)

    def step(self, params: dict, grads: dict) -> None:
        _check(params, grads)
        for name, p in params.items():
            p -= self.lr * grads[name]


class Adam:
    """Bias-corrected Adam with one step counter shared by all tensors."""

    kind = "adam"

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict, grads: dict) -> None:
        _check(params, grads)
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name, p in params.items():
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(p))
            v = self.v.setdefault(name, np.zeros_like(p))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(kind: str, lr: float) -> Sgd | Adam:
    if kind == "sgd":
        return Sgd(lr)
    if kind == "adam":
        return Adam(lr)
    raise InvalidInputError(f"unknown optimizer {kind!r}; choose sgd or adam")
