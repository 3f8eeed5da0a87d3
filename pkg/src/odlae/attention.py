"""Feature-level fusion: self-attention over the stacked hidden layers.

The hidden vectors h_0..h_L are stacked into a matrix, scored by a small
tanh alignment network into a softmax weight per layer, and fused into one
context vector that a single softmax head classifies. Unlike the hedge
variant, the layer weights here are learned by gradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autoencoder as ae
from .balance import TradeoffState, total_loss, update_tradeoffs
from .errors import InvalidInputError, ShapeError
from .evaluate import StepRecord
from .numerics import (
    RELU,
    Matrix,
    Vector,
    activation_by_name,
    as_vector,
    cross_entropy,
    make_rng,
    one_hot,
    softmax,
)


@dataclass
class AttentionParams:
    align_weight: Matrix  # attention_dim x hidden_dim
    align_vector: Vector  # attention_dim


@dataclass
class OutputHead:
    weight: Matrix  # hidden_dim x output_dim
    bias: Vector  # output_dim


def stack_hidden(hiddens: list) -> Matrix:
    """Rows are h_0..h_L in layer order."""
    dim = hiddens[0].shape[0]
    for h in hiddens:
        if h.shape != (dim,):
            raise ShapeError("hidden vectors must share one dimension")
    return np.stack(hiddens, axis=0)


def attention_weights(stacked: Matrix, att: AttentionParams) -> Vector:
    """One softmax weight per hidden layer: softmax_l(align_vector . tanh(W h_l))."""
    if att.align_weight.shape[1] != stacked.shape[1] or att.align_weight.shape[0] != att.align_vector.shape[0]:
        raise ShapeError(
            f"alignment shapes {att.align_weight.shape}/{att.align_vector.shape} "
            f"do not fit hidden dim {stacked.shape[1]}"
        )
    scores = np.tanh(stacked @ att.align_weight.T) @ att.align_vector
    return softmax(scores)


def context_fuse(weights: Vector, stacked: Matrix) -> Vector:
    if weights.shape[0] != stacked.shape[0]:
        raise ShapeError(f"{weights.shape[0]} weights for {stacked.shape[0]} stacked rows")
    return weights @ stacked


def head_predict(context: Vector, head: OutputHead) -> Vector:
    if head.weight.shape[0] != context.shape[0] or head.weight.shape[1] != head.bias.shape[0]:
        raise ShapeError(f"head shapes {head.weight.shape}/{head.bias.shape} do not fit context {context.shape}")
    return softmax(context @ head.weight + head.bias)


@dataclass
class _AttentionBundle:
    trace: ae.ForwardTrace
    stacked: Matrix
    tanh_scores: Matrix  # (L+1) x attention_dim
    attention: Vector
    context: Vector
    logits: Vector
    probs: Vector


class AttentionFusionModel:
    """Streaming autoencoder classifier with an attention-fused single head."""

    variant = "odlae2"

    def __init__(
        self,
        dims: ae.ModelDims,
        *,
        optimizer,
        tradeoff: TradeoffState | None = None,
        output_activation: str = "sigmoid",
        seed: int = 0,
    ):
        self.dims = dims
        self.hidden_activation = RELU
        self.output_activation = activation_by_name(output_activation)
        rng = make_rng(seed)
        self.encoder, self.decoder = ae.init_params(dims, rng)
        self.attention = AttentionParams(
            ae.glorot_uniform(rng, dims.attention_dim, dims.hidden_dim),
            ae.glorot_uniform(rng, dims.attention_dim, 1)[:, 0],
        )
        self.head = OutputHead(
            ae.glorot_uniform(rng, dims.hidden_dim, dims.output_dim),
            np.zeros(dims.output_dim),
        )
        self.tradeoff = tradeoff if tradeoff is not None else TradeoffState()
        self.optimizer = optimizer
        self.step_count = 0

    def parameters(self) -> dict[str, np.ndarray]:
        params: dict[str, np.ndarray] = {}
        for l in range(self.dims.hidden_layers):
            params[f"enc.W{l}"] = self.encoder.weights[l]
        for l in range(self.dims.hidden_layers):
            params[f"enc.b{l}"] = self.encoder.biases[l]
        for l in range(self.dims.hidden_layers):
            params[f"dec.W{l}"] = self.decoder.weights[l]
        for l in range(self.dims.hidden_layers):
            params[f"dec.b{l}"] = self.decoder.biases[l]
        params["att.W"] = self.attention.align_weight
        params["att.v"] = self.attention.align_vector
        params["head.W"] = self.head.weight
        params["head.b"] = self.head.bias
        return params

    def _forward(self, x: Vector, x_target: Vector) -> _AttentionBundle:
        trace = ae.forward(x, self.encoder, self.decoder, self.hidden_activation, self.output_activation, x_target)
        stacked = stack_hidden(trace.hidden)
        tanh_scores = np.tanh(stacked @ self.attention.align_weight.T)
        attention = softmax(tanh_scores @ self.attention.align_vector)
        context = context_fuse(attention, stacked)
        logits = context @ self.head.weight + self.head.bias
        return _AttentionBundle(trace, stacked, tanh_scores, attention, context, logits, softmax(logits))

    def predict_proba(self, x) -> Vector:
        x = as_vector(x, self.dims.input_dim)
        return self._forward(x, x).probs

    def _gradients(self, bundle: _AttentionBundle, y: int, recon_weight: float, pred_weight: float) -> dict:
        g_logits = pred_weight * bundle.probs.copy()
        g_logits[y] -= pred_weight

        g_head_w = np.outer(bundle.context, g_logits)
        g_head_b = g_logits
        g_context = self.head.weight @ g_logits

        g_attention = bundle.stacked @ g_context
        g_stacked = np.outer(bundle.attention, g_context)

        a = bundle.attention
        g_scores = a * (g_attention - a @ g_attention)
        g_tanh = np.outer(g_scores, self.attention.align_vector) * (1.0 - bundle.tanh_scores**2)
        g_align_w = g_tanh.T @ bundle.stacked
        g_align_v = bundle.tanh_scores.T @ g_scores
        g_stacked += g_tanh @ self.attention.align_weight

        upstream = [g_stacked[l] for l in range(self.dims.hidden_layers)]
        ae_grads = ae.backward(bundle.trace, self.encoder, self.decoder, upstream, recon_weight)
        grads: dict[str, np.ndarray] = {}
        n = self.dims.hidden_layers
        for l in range(n):
            grads[f"enc.W{l}"] = ae_grads.enc_weights[l]
        for l in range(n):
            grads[f"enc.b{l}"] = ae_grads.enc_biases[l]
        for l in range(n):
            grads[f"dec.W{l}"] = ae_grads.dec_weights[l]
        for l in range(n):
            grads[f"dec.b{l}"] = ae_grads.dec_biases[l]
        grads["att.W"] = g_align_w
        grads["att.v"] = g_align_v
        grads["head.W"] = g_head_w
        grads["head.b"] = g_head_b
        return grads

    def losses(self, x, y: int, *, x_encode=None) -> tuple[float, float]:
        x = as_vector(x, self.dims.input_dim)
        enc_in = x if x_encode is None else as_vector(x_encode, self.dims.input_dim)
        bundle = self._forward(enc_in, x)
        l_re = ae.reconstruction_loss(x, bundle.trace.reconstruction)
        l_pre = cross_entropy(one_hot(y, self.dims.output_dim), bundle.probs)
        return l_re, l_pre

    def gradients(self, x, y: int, *, x_encode=None) -> tuple[float, dict]:
        x = as_vector(x, self.dims.input_dim)
        enc_in = x if x_encode is None else as_vector(x_encode, self.dims.input_dim)
        bundle = self._forward(enc_in, x)
        l_re = ae.reconstruction_loss(x, bundle.trace.reconstruction)
        l_pre = cross_entropy(one_hot(y, self.dims.output_dim), bundle.probs)
        l_total = total_loss(l_re, l_pre, self.tradeoff)
        grads = self._gradients(bundle, y, self.tradeoff.recon_weight, self.tradeoff.pred_weight)
        return l_total, grads

    def step(self, x, y: int, *, x_encode=None) -> StepRecord:
        """One prequential step: predict, rebalance the losses, descend."""
        x = as_vector(x, self.dims.input_dim)
        if not 0 <= y < self.dims.output_dim:
            raise InvalidInputError(f"label {y} out of range [0, {self.dims.output_dim})")
        enc_in = x if x_encode is None else as_vector(x_encode, self.dims.input_dim)

        bundle = self._forward(enc_in, x)
        predicted = int(np.argmax(bundle.probs))
        l_re = ae.reconstruction_loss(x, bundle.trace.reconstruction)
        l_pre = cross_entropy(one_hot(y, self.dims.output_dim), bundle.probs)

        update_tradeoffs(self.tradeoff, l_re, l_pre)
        l_total = total_loss(l_re, l_pre, self.tradeoff)

        grads = self._gradients(bundle, y, self.tradeoff.recon_weight, self.tradeoff.pred_weight)
        self.optimizer.step(self.parameters(), grads)
        self.step_count += 1

        return StepRecord(
            step=self.step_count - 1,
            label=y,
            predicted=predicted,
            probs=bundle.probs,
            loss_re=l_re,
            loss_pre=l_pre,
            loss_total=l_total,
            a_re=self.tradeoff.recon_weight,
            a_pre=self.tradeoff.pred_weight,
            attention=bundle.attention.copy(),
        )
