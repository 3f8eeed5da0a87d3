"""Dense float64 kernels, activations, loss primitives, and seeded RNG.

Vectors are 1-D float64 ndarrays, matrices are 2-D float64 ndarrays in
row-major order. Every public operation either returns finite entries or
raises; nothing here silently produces NaN/Inf from finite inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidInputError, ShapeError

Vector = np.ndarray
Matrix = np.ndarray

# Clamp applied inside log() so a confidently wrong prediction yields a
# large finite loss instead of inf.
LOG_EPS = 1e-12


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator: a fixed seed reproduces the same stream anywhere."""
    return np.random.Generator(np.random.Philox(np.uint64(seed)))


def derive_seed(seed: int, stream_id: int) -> int:
    """Stable sub-seed for the stream_id-th independent RNG of a run.

    32-bit on purpose: derived seeds are stored in checkpoints as float64
    and must survive the round trip exactly.
    """
    return int(np.random.SeedSequence(entropy=(int(seed), int(stream_id))).generate_state(1, np.uint32)[0])


def as_vector(values, dim: int | None = None) -> Vector:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ShapeError(f"expected dim {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("vector has non-finite entries")
    return v


def as_matrix(values, rows: int | None = None, cols: int | None = None) -> Matrix:
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")
    if rows is not None and m.shape[0] != rows:
        raise ShapeError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ShapeError(f"expected {cols} cols, got {m.shape[1]}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix has non-finite entries")
    return m


def one_hot(index: int, dim: int) -> Vector:
    if not 0 <= index < dim:
        raise InvalidInputError(f"class index {index} out of range [0, {dim})")
    v = np.zeros(dim)
    v[index] = 1.0
    return v


def softmax(v: Vector) -> Vector:
    """Probability simplex projection of logits, computed with max-subtraction."""
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("softmax input has non-finite entries")
    e = np.exp(v - v.max())
    return e / e.sum()


def log_sum_exp(v: Vector) -> float:
    """log(sum(exp(v))), stable for large logits; always finite for finite v."""
    v = np.asarray(v, dtype=np.float64)
    m = v.max()
    return float(m + np.log(np.exp(v - m).sum()))


def relu(v: Vector) -> Vector:
    return np.maximum(np.asarray(v, dtype=np.float64), 0.0)


def _relu_deriv(u: Vector) -> Vector:
    # subgradient at exactly 0 is 0, for reproducible gradients
    return (u > 0).astype(np.float64)


def sigmoid(v: Vector) -> Vector:
    v = np.asarray(v, dtype=np.float64)
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def _sigmoid_deriv(u: Vector) -> Vector:
    s = sigmoid(u)
    return s * (1.0 - s)


@dataclass(frozen=True)
class Activation:
    """Pointwise activation with its derivative taken at the pre-activation."""

    name: str
    fn: Callable[[Vector], Vector]
    deriv: Callable[[Vector], Vector]


RELU = Activation("relu", relu, _relu_deriv)
SIGMOID = Activation("sigmoid", sigmoid, _sigmoid_deriv)
IDENTITY = Activation("identity", lambda v: np.asarray(v, dtype=np.float64), lambda u: np.ones_like(u))

ACTIVATIONS = {a.name: a for a in (RELU, SIGMOID, IDENTITY)}


def activation_by_name(name: str) -> Activation:
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise InvalidInputError(f"unknown activation {name!r}; choose from {sorted(ACTIVATIONS)}") from None


def cross_entropy(y: Vector, yhat: Vector) -> float:
    """-sum(y * log(yhat)) with the log clamped at LOG_EPS; y is one-hot."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.asarray(yhat, dtype=np.float64)
    if y.shape != yhat.shape:
        raise ShapeError(f"label shape {y.shape} != prediction shape {yhat.shape}")
    return float(-(y * np.log(np.maximum(yhat, LOG_EPS))).sum())


def mean_squared_error(x: Vector, xhat: Vector) -> float:
    """Squared deviation averaged over dimensions; in [0, 1] for [0, 1] inputs."""
    x = np.asarray(x, dtype=np.float64)
    xhat = np.asarray(xhat, dtype=np.float64)
    if x.shape != xhat.shape:
        raise ShapeError(f"input shape {x.shape} != reconstruction shape {xhat.shape}")
    d = x - xhat
    return float(np.dot(d, d) / x.shape[0])


def matvec(a: Matrix, v: Vector) -> Vector:
    if a.ndim != 2 or v.ndim != 1 or a.shape[1] != v.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {v.shape}")
    return a @ v


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def outer(u: Vector, v: Vector) -> Matrix:
    if u.ndim != 1 or v.ndim != 1:
        raise ShapeError("outer product needs two vectors")
    return np.outer(u, v)


def transpose(a: Matrix) -> Matrix:
    if a.ndim != 2:
        raise ShapeError("transpose needs a matrix")
    return a.T.copy()


def axpy(alpha: float, x: Vector, y: Vector) -> Vector:
    if x.shape != y.shape:
        raise ShapeError(f"axpy shapes differ: {x.shape} vs {y.shape}")
    return alpha * x + y
