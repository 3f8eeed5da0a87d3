"""Encoder/decoder stacks: forward pass with full trace and hand-derived gradients.

The encoder maps x through hidden layers h_0..h_L (all of width hidden_dim);
the decoder mirrors it back down to a reconstruction xhat of width input_dim.
Gradients are reverse-mode accumulated through both stacks for the loss

    recon_weight * mse(x_target, xhat) + sum_l <upstream_grads[l], h_l>

so callers inject their prediction-loss gradients per hidden layer and get
every weight/bias gradient back in one pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .numerics import Activation, Matrix, Vector, mean_squared_error


@dataclass(frozen=True)
class ModelDims:
    """Layer sizes shared by every model variant.

    hidden_layers counts the hidden representations (h_0..h_L, so L =
    hidden_layers - 1); attention_dim only matters for the attention head.
    """

    input_dim: int
    hidden_dim: int
    output_dim: int
    hidden_layers: int
    attention_dim: int = 30

    def __post_init__(self):
        for name in ("input_dim", "hidden_dim", "output_dim", "hidden_layers", "attention_dim"):
            if getattr(self, name) < 1:
                raise ShapeError(f"{name} must be >= 1, got {getattr(self, name)}")

    @property
    def last_hidden(self) -> int:
        return self.hidden_layers - 1


@dataclass
class EncoderParams:
    weights: list  # weights[0]: hidden_dim x input_dim, rest hidden_dim x hidden_dim
    biases: list  # all hidden_dim


@dataclass
class DecoderParams:
    weights: list  # weights[0]: input_dim x hidden_dim, rest hidden_dim x hidden_dim
    biases: list  # biases[0]: input_dim, rest hidden_dim


@dataclass
class ForwardTrace:
    """Everything one forward pass produced, kept for the backward pass."""

    x_input: Vector  # what the encoder consumed (may be a corrupted copy)
    x_target: Vector  # what the reconstruction is scored against
    enc_pre: list  # enc_pre[l] = b_l + W_l h_{l-1}
    hidden: list  # hidden[l] = h_l
    dec_pre: list  # dec_pre[l] = bhat_l + What_l hhat_l  (dec_pre[0] feeds the output activation)
    dec_hidden: list  # dec_hidden[l] = hhat_l, with dec_hidden[L] = h_L
    reconstruction: Vector
    hidden_activation: Activation
    output_activation: Activation


@dataclass
class AutoencoderGrads:
    enc_weights: list
    enc_biases: list
    dec_weights: list
    dec_biases: list

    @staticmethod
    def zeros_like(enc: EncoderParams, dec: DecoderParams) -> "AutoencoderGrads":
        return AutoencoderGrads(
            [np.zeros_like(w) for w in enc.weights],
            [np.zeros_like(b) for b in enc.biases],
            [np.zeros_like(w) for w in dec.weights],
            [np.zeros_like(b) for b in dec.biases],
        )


def glorot_uniform(rng: np.random.Generator, rows: int, cols: int) -> Matrix:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def init_params(dims: ModelDims, rng: np.random.Generator) -> tuple[EncoderParams, DecoderParams]:
    """Glorot-uniform weights, zero biases; encoder weights drawn first, then decoder."""
    enc_w = [glorot_uniform(rng, dims.hidden_dim, dims.input_dim)]
    enc_w += [glorot_uniform(rng, dims.hidden_dim, dims.hidden_dim) for _ in range(dims.last_hidden)]
    enc_b = [np.zeros(dims.hidden_dim) for _ in range(dims.hidden_layers)]
    dec_w = [glorot_uniform(rng, dims.input_dim, dims.hidden_dim)]
    dec_w += [glorot_uniform(rng, dims.hidden_dim, dims.hidden_dim) for _ in range(dims.last_hidden)]
    dec_b = [np.zeros(dims.input_dim)] + [np.zeros(dims.hidden_dim) for _ in range(dims.last_hidden)]
    return EncoderParams(enc_w, enc_b), DecoderParams(dec_w, dec_b)


def encode(x: Vector, enc: EncoderParams, activation: Activation) -> list:
    """Hidden representations h_0..h_L for input x."""
    _, hidden = _encode_with_pre(x, enc, activation)
    return hidden


def _encode_with_pre(x: Vector, enc: EncoderParams, activation: Activation):
    if x.shape[0] != enc.weights[0].shape[1]:
        raise ShapeError(f"input dim {x.shape[0]} != encoder input dim {enc.weights[0].shape[1]}")
    pre, hidden = [], []
    cur = x
    for w, b in zip(enc.weights, enc.biases):
        u = b + w @ cur
        cur = activation.fn(u)
        pre.append(u)
        hidden.append(cur)
    return pre, hidden


def decode(
    h_last: Vector,
    dec: DecoderParams,
    hidden_activation: Activation,
    output_activation: Activation,
) -> tuple[list, Vector]:
    """Mirror pass hhat_L..hhat_0 and the reconstruction xhat."""
    _, dec_hidden, xhat = _decode_with_pre(h_last, dec, hidden_activation, output_activation)
    return dec_hidden, xhat


def _decode_with_pre(h_last, dec, hidden_activation, output_activation):
    layers = len(dec.weights)
    if h_last.shape[0] != dec.weights[0].shape[1]:
        raise ShapeError(f"hidden dim {h_last.shape[0]} != decoder hidden dim {dec.weights[0].shape[1]}")
    dec_pre = [None] * layers
    dec_hidden = [None] * layers
    dec_hidden[layers - 1] = h_last
    for l in range(layers - 1, 0, -1):
        u = dec.biases[l] + dec.weights[l] @ dec_hidden[l]
        dec_pre[l] = u
        dec_hidden[l - 1] = hidden_activation.fn(u)
    u0 = dec.biases[0] + dec.weights[0] @ dec_hidden[0]
    dec_pre[0] = u0
    return dec_pre, dec_hidden, output_activation.fn(u0)


def forward(
    x: Vector,
    enc: EncoderParams,
    dec: DecoderParams,
    hidden_activation: Activation,
    output_activation: Activation,
    x_target: Vector | None = None,
) -> ForwardTrace:
    """Encode then decode, keeping pre-activations for the backward pass."""
    target = x if x_target is None else x_target
    enc_pre, hidden = _encode_with_pre(x, enc, hidden_activation)
    dec_pre, dec_hidden, xhat = _decode_with_pre(hidden[-1], dec, hidden_activation, output_activation)
    return ForwardTrace(x, target, enc_pre, hidden, dec_pre, dec_hidden, xhat, hidden_activation, output_activation)


def reconstruction_loss(x: Vector, xhat: Vector) -> float:
    return mean_squared_error(x, xhat)


def backward(
    trace: ForwardTrace,
    enc: EncoderParams,
    dec: DecoderParams,
    upstream_hidden_grads: list,
    recon_weight: float,
) -> AutoencoderGrads:
    """Exact gradients of recon_weight * L_re + sum_l <upstream_grads[l], h_l>."""
    layers = len(enc.weights)
    if len(upstream_hidden_grads) != layers:
        raise ShapeError(f"expected {layers} upstream gradients, got {len(upstream_hidden_grads)}")
    for g in upstream_hidden_grads:
        if g.shape != trace.hidden[0].shape:
            raise ShapeError(f"upstream gradient shape {g.shape} != hidden shape {trace.hidden[0].shape}")

    grads = AutoencoderGrads.zeros_like(enc, dec)
    dim = trace.x_target.shape[0]

    # decoder: output layer first, then walk back up to hhat_L
    g_xhat = recon_weight * (2.0 / dim) * (trace.reconstruction - trace.x_target)
    g_u = trace.output_activation.deriv(trace.dec_pre[0]) * g_xhat
    grads.dec_weights[0] = np.outer(g_u, trace.dec_hidden[0])
    grads.dec_biases[0] = g_u
    g_dh = dec.weights[0].T @ g_u
    for l in range(1, layers):
        g_u = trace.hidden_activation.deriv(trace.dec_pre[l]) * g_dh
        grads.dec_weights[l] = np.outer(g_u, trace.dec_hidden[l])
        grads.dec_biases[l] = g_u
        g_dh = dec.weights[l].T @ g_u

    # encoder: decoder gradient enters at h_L alongside the upstream terms
    g_hidden = [np.array(g, dtype=np.float64, copy=True) for g in upstream_hidden_grads]
    g_hidden[layers - 1] += g_dh
    for l in range(layers - 1, -1, -1):
        g_u = trace.hidden_activation.deriv(trace.enc_pre[l]) * g_hidden[l]
        below = trace.x_input if l == 0 else trace.hidden[l - 1]
        grads.enc_weights[l] = np.outer(g_u, below)
        grads.enc_biases[l] = g_u
        if l > 0:
            g_hidden[l - 1] += enc.weights[l].T @ g_u
    return grads
