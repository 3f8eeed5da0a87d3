"""Output-level fusion: one softmax classifier per hidden layer, combined by
multiplicative-weights ("hedge") ensemble weights.

Every hidden layer gets its own linear softmax head. The ensemble prediction
is the weight-vector convex combination of the per-layer predictions; after
each example every layer's weight is multiplied by discount**loss_l and the
vector is renormalized, so layers that currently predict well gain influence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autoencoder as ae
from .balance import TradeoffState, total_loss, update_tradeoffs
from .errors import InvalidInputError, ShapeError
from .evaluate import StepRecord
from .numerics import (
    LOG_EPS,
    RELU,
    Vector,
    activation_by_name,
    as_vector,
    cross_entropy,
    log_sum_exp,
    make_rng,
    one_hot,
    softmax,
)


@dataclass
class LayerClassifiers:
    weights: list  # per layer: output_dim x hidden_dim
    biases: list  # per layer: output_dim


@dataclass
class HedgeState:
    """Ensemble weights on the simplex plus their multiplicative update knobs."""

    weights: np.ndarray
    discount: float = 0.99  # in (0, 1); CLI flag --theta0
    floor: float = 0.01  # total mass reserved for starving layers; 0 disables smoothing

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if not 0.0 < self.discount < 1.0:
            raise InvalidInputError("discount must lie in (0, 1)")
        if not 0.0 <= self.floor < 1.0:
            raise InvalidInputError("floor must lie in [0, 1)")


def init_hedge(layer_count: int, discount: float = 0.99, floor: float = 0.01) -> HedgeState:
    return HedgeState(np.full(layer_count, 1.0 / layer_count), discount, floor)


def layer_classify(h: Vector, weight: np.ndarray, bias: np.ndarray) -> Vector:
    if weight.shape[1] != h.shape[0] or weight.shape[0] != bias.shape[0]:
        raise ShapeError(f"classifier shapes {weight.shape}/{bias.shape} do not fit hidden dim {h.shape[0]}")
    return softmax(weight @ h + bias)


def ensemble_predict(layer_probs: list, hedge: HedgeState) -> Vector:
    if len(layer_probs) != hedge.weights.shape[0]:
        raise ShapeError(f"got {len(layer_probs)} layer predictions for {hedge.weights.shape[0]} weights")
    out = np.zeros_like(layer_probs[0])
    for w, f in zip(hedge.weights, layer_probs):
        out += w * f
    return out


def _floor_simplex(w: np.ndarray, per_layer_min: float) -> np.ndarray:
    """Project onto {v : v_l >= per_layer_min, sum v = 1} by pinning and rescaling."""
    if per_layer_min <= 0.0:
        return w
    n = w.shape[0]
    pinned = np.zeros(n, dtype=bool)
    for _ in range(n):
        free = ~pinned
        mass = 1.0 - per_layer_min * pinned.sum()
        out = np.full(n, per_layer_min)
        out[free] = w[free] * (mass / w[free].sum())
        newly = free & (out < per_layer_min)
        if not newly.any():
            return out
        pinned |= newly
    return out


def hedge_update(hedge: HedgeState, per_layer_losses) -> HedgeState:
    """weights_l <- weights_l * discount**loss_l, renormalized and floored."""
    losses = np.asarray(per_layer_losses, dtype=np.float64)
    if losses.shape != hedge.weights.shape:
        raise ShapeError(f"got {losses.shape[0] if losses.ndim else 0} losses for {hedge.weights.shape[0]} layers")
    if not np.all(np.isfinite(losses)) or (losses < 0).any():
        raise InvalidInputError("per-layer losses must be finite and nonnegative")
    w = hedge.weights * hedge.discount**losses
    s = w.sum()
    if not np.isfinite(s) or s <= 0.0:
        # every weight underflowed; restart from the uniform prior
        w = np.full_like(w, 1.0 / w.shape[0])
    else:
        w = w / s
    hedge.weights = _floor_simplex(w, hedge.floor / w.shape[0])
    return hedge


@dataclass
class _HedgeBundle:
    trace: ae.ForwardTrace
    logits: list
    layer_probs: list
    ensemble_weights: np.ndarray  # the weights the prediction was formed with
    probs: Vector


class HedgeFusionModel:
    """Streaming autoencoder classifier with per-layer heads fused by hedge weights."""

    variant = "odlae1"

    def __init__(
        self,
        dims: ae.ModelDims,
        *,
        optimizer,
        tradeoff: TradeoffState | None = None,
        discount: float = 0.99,
        floor: float = 0.01,
        output_activation: str = "sigmoid",
        seed: int = 0,
    ):
        self.dims = dims
        self.hidden_activation = RELU
        self.output_activation = activation_by_name(output_activation)
        rng = make_rng(seed)
        self.encoder, self.decoder = ae.init_params(dims, rng)
        self.classifiers = LayerClassifiers(
            [ae.glorot_uniform(rng, dims.output_dim, dims.hidden_dim) for _ in range(dims.hidden_layers)],
            [np.zeros(dims.output_dim) for _ in range(dims.hidden_layers)],
        )
        self.hedge = init_hedge(dims.hidden_layers, discount, floor)
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
        for l in range(self.dims.hidden_layers):
            params[f"clf.W{l}"] = self.classifiers.weights[l]
        for l in range(self.dims.hidden_layers):
            params[f"clf.b{l}"] = self.classifiers.biases[l]
        return params

    def _forward(self, x: Vector, x_target: Vector) -> _HedgeBundle:
        trace = ae.forward(x, self.encoder, self.decoder, self.hidden_activation, self.output_activation, x_target)
        logits = [w @ h + b for h, w, b in zip(trace.hidden, self.classifiers.weights, self.classifiers.biases)]
        layer_probs = [softmax(z) for z in logits]
        weights = self.hedge.weights.copy()
        probs = ensemble_predict(layer_probs, self.hedge)
        return _HedgeBundle(trace, logits, layer_probs, weights, probs)

    def predict_proba(self, x) -> Vector:
        x = as_vector(x, self.dims.input_dim)
        return self._forward(x, x).probs

    def _gradients(self, bundle: _HedgeBundle, y: int, recon_weight: float, pred_weight: float) -> dict:
        """Gradient of recon_weight*L_re + pred_weight*L_pre; ensemble weights are constants."""
        yhat_true = max(bundle.probs[y], LOG_EPS)
        upstream = []
        clf_w_grads, clf_b_grads = [], []
        for l, (f, h) in enumerate(zip(bundle.layer_probs, bundle.trace.hidden)):
            scale = pred_weight * bundle.ensemble_weights[l] * f[y] / yhat_true
            g_z = scale * f
            g_z[y] -= scale
            clf_w_grads.append(np.outer(g_z, h))
            clf_b_grads.append(g_z)
            upstream.append(self.classifiers.weights[l].T @ g_z)
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
        for l in range(n):
            grads[f"clf.W{l}"] = clf_w_grads[l]
        for l in range(n):
            grads[f"clf.b{l}"] = clf_b_grads[l]
        return grads

    def losses(self, x, y: int, *, x_encode=None) -> tuple[float, float]:
        """(reconstruction loss, prediction loss) under the current parameters."""
        x = as_vector(x, self.dims.input_dim)
        enc_in = x if x_encode is None else as_vector(x_encode, self.dims.input_dim)
        bundle = self._forward(enc_in, x)
        l_re = ae.reconstruction_loss(x, bundle.trace.reconstruction)
        l_pre = cross_entropy(one_hot(y, self.dims.output_dim), bundle.probs)
        return l_re, l_pre

    def gradients(self, x, y: int, *, x_encode=None) -> tuple[float, dict]:
        """Total loss and its gradients under the current weights, without updating."""
        x = as_vector(x, self.dims.input_dim)
        enc_in = x if x_encode is None else as_vector(x_encode, self.dims.input_dim)
        bundle = self._forward(enc_in, x)
        l_re = ae.reconstruction_loss(x, bundle.trace.reconstruction)
        l_pre = cross_entropy(one_hot(y, self.dims.output_dim), bundle.probs)
        l_total = total_loss(l_re, l_pre, self.tradeoff)
        grads = self._gradients(bundle, y, self.tradeoff.recon_weight, self.tradeoff.pred_weight)
        return l_total, grads

    def step(self, x, y: int, *, x_encode=None) -> StepRecord:
        """One prequential step: predict, reweight the ensemble, rebalance, descend."""
        x = as_vector(x, self.dims.input_dim)
        if not 0 <= y < self.dims.output_dim:
            raise InvalidInputError(f"label {y} out of range [0, {self.dims.output_dim})")
        enc_in = x if x_encode is None else as_vector(x_encode, self.dims.input_dim)

        bundle = self._forward(enc_in, x)
        predicted = int(np.argmax(bundle.probs))
        l_re = ae.reconstruction_loss(x, bundle.trace.reconstruction)
        # per-layer loss = -log softmax(z)[y], in its always-finite logsumexp form
        layer_losses = np.array([log_sum_exp(z) - z[y] for z in bundle.logits])
        l_pre = cross_entropy(one_hot(y, self.dims.output_dim), bundle.probs)

        hedge_update(self.hedge, layer_losses)
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
            ensemble_weights=self.hedge.weights.copy(),
            layer_losses=layer_losses,
        )
