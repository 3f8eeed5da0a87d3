import numpy as np
import pytest

from conftest import fd_worst_rel_error, jitter_params, min_abs_preactivation
from odlae.attention import (
    AttentionFusionModel,
    AttentionParams,
    OutputHead,
    attention_weights,
    context_fuse,
    head_predict,
    stack_hidden,
)
from odlae.autoencoder import ModelDims
from odlae.errors import InvalidInputError, ShapeError
from odlae.numerics import make_rng, softmax
from odlae.optimize import Adam, Sgd

DIMS = ModelDims(6, 4, 3, 3, attention_dim=5)


class TestStackHidden:
    def test_rows_are_the_inputs(self, rng):
        hs = [rng.random(4) for _ in range(3)]
        stacked = stack_hidden(hs)
        assert stacked.shape == (3, 4)
        for l, h in enumerate(hs):
            np.testing.assert_array_equal(stacked[l], h)

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            stack_hidden([np.zeros(4), np.zeros(3)])


class TestAttentionWeights:
    def test_zero_vector_gives_uniform(self, rng):
        att = AttentionParams(rng.normal(size=(5, 4)), np.zeros(5))
        out = attention_weights(rng.random((3, 4)), att)
        np.testing.assert_allclose(out, np.full(3, 1 / 3), atol=1e-15)

    def test_identical_rows_give_uniform(self, rng):
        att = AttentionParams(rng.normal(size=(5, 4)), rng.normal(size=5))
        row = rng.random(4)
        out = attention_weights(np.tile(row, (3, 1)), att)
        np.testing.assert_allclose(out, np.full(3, 1 / 3), atol=1e-12)

    def test_matches_per_row_oracle(self, rng):
        att = AttentionParams(rng.normal(size=(5, 4)), rng.normal(size=5))
        stacked = rng.random((3, 4))
        scores = np.array([float(att.align_vector @ np.tanh(att.align_weight @ h)) for h in stacked])
        np.testing.assert_allclose(attention_weights(stacked, att), softmax(scores), rtol=1e-14)

    def test_simplex(self, rng):
        att = AttentionParams(rng.normal(size=(5, 4)), rng.normal(size=5))
        out = attention_weights(rng.random((3, 4)), att)
        assert abs(out.sum() - 1.0) < 1e-12

    def test_shape_error(self, rng):
        att = AttentionParams(rng.normal(size=(5, 3)), rng.normal(size=5))
        with pytest.raises(ShapeError):
            attention_weights(rng.random((3, 4)), att)


class TestContextFuse:
    def test_selection(self, rng):
        stacked = rng.random((3, 4))
        np.testing.assert_array_equal(context_fuse(np.array([0.0, 1.0, 0.0]), stacked), stacked[1])

    def test_identical_rows_are_a_fixed_point(self, rng):
        row = rng.random(4)
        stacked = np.tile(row, (3, 1))
        np.testing.assert_allclose(context_fuse(np.array([0.2, 0.5, 0.3]), stacked), row, rtol=1e-15)

    def test_matches_weighted_sum(self, rng):
        stacked = rng.random((3, 4))
        raw = rng.random(3)
        weights = raw / raw.sum()
        expected = sum(w * stacked[l] for l, w in enumerate(weights))
        np.testing.assert_allclose(context_fuse(weights, stacked), expected, rtol=1e-14)

    def test_convex_hull_bound(self, rng):
        stacked = rng.random((4, 6))
        raw = rng.random(4)
        weights = raw / raw.sum()
        c = context_fuse(weights, stacked)
        assert (c >= stacked.min(axis=0) - 1e-12).all()
        assert (c <= stacked.max(axis=0) + 1e-12).all()


class TestHeadPredict:
    def test_zero_head_gives_uniform(self):
        head = OutputHead(np.zeros((4, 3)), np.zeros(3))
        np.testing.assert_allclose(head_predict(np.ones(4), head), np.full(3, 1 / 3), atol=1e-15)

    def test_bias_dominance(self):
        head = OutputHead(np.zeros((4, 3)), np.array([0.0, 12.0, 0.0]))
        assert head_predict(np.zeros(4), head)[1] > 0.99

    def test_matches_composed_kernels(self, rng):
        head = OutputHead(rng.normal(size=(4, 3)), rng.normal(size=3))
        c = rng.random(4)
        np.testing.assert_allclose(head_predict(c, head), softmax(c @ head.weight + head.bias), rtol=1e-15)


class TestAttentionFusionModel:
    def test_single_step_is_bitwise_reproducible(self, rng):
        x = rng.random(6)

        def run():
            model = AttentionFusionModel(DIMS, optimizer=Adam(0.01), seed=4)
            rec = model.step(x, 2)
            return rec, {k: v.copy() for k, v in model.parameters().items()}

        rec_a, params_a = run()
        rec_b, params_b = run()
        np.testing.assert_array_equal(rec_a.probs, rec_b.probs)
        for k in params_a:
            np.testing.assert_array_equal(params_a[k], params_b[k])

    def test_zero_alignment_vector_reduces_to_mean_context(self, rng):
        model = AttentionFusionModel(DIMS, optimizer=Sgd(0.0), seed=8)
        model.attention.align_vector[:] = 0.0
        x = rng.random(6)
        bundle = model._forward(x, x)
        np.testing.assert_allclose(bundle.attention, np.full(3, 1 / 3), atol=1e-15)
        mean_h = np.mean(bundle.trace.hidden, axis=0)
        np.testing.assert_allclose(bundle.probs, head_predict(mean_h, model.head), rtol=1e-12)

    def test_attention_is_on_simplex_every_step(self, rng):
        model = AttentionFusionModel(DIMS, optimizer=Adam(0.01), seed=9)
        for _ in range(200):
            rec = model.step(rng.random(6), int(rng.integers(3)))
            assert abs(rec.attention.sum() - 1.0) < 1e-12
            assert (rec.attention >= 0).all()
            assert abs(rec.probs.sum() - 1.0) < 1e-9

    def test_gradients_match_finite_differences(self):
        for seed in (0, 1, 2):
            rng = make_rng(2000 + seed)
            x, y = rng.uniform(0.05, 0.95, 6), int(rng.integers(3))
            model = AttentionFusionModel(DIMS, optimizer=Sgd(0.0), seed=seed)
            jitter_params(model, rng)
            assert min_abs_preactivation(model, x) > 5e-3
            assert fd_worst_rel_error(model, x, y) < 1e-4

    def test_every_layer_receives_gradient(self):
        # no hidden layer is gradient-dead while its attention weight is positive
        rng = make_rng(31)
        model = AttentionFusionModel(DIMS, optimizer=Sgd(0.0), seed=6)
        jitter_params(model, rng)
        x, y = rng.uniform(0.05, 0.95, 6), 1
        bundle = model._forward(x, x)
        assert (bundle.attention > 0).all()
        g_logits = bundle.probs.copy()
        g_logits[y] -= 1.0
        g_context = model.head.weight @ g_logits
        g_stacked = np.outer(bundle.attention, g_context)
        g_att = bundle.stacked @ g_context
        a = bundle.attention
        g_scores = a * (g_att - a @ g_att)
        g_tanh = np.outer(g_scores, model.attention.align_vector) * (1.0 - bundle.tanh_scores**2)
        g_stacked += g_tanh @ model.attention.align_weight
        for l in range(3):
            assert np.linalg.norm(g_stacked[l]) > 0.0

    def test_label_out_of_range(self, rng):
        model = AttentionFusionModel(DIMS, optimizer=Adam(0.01))
        with pytest.raises(InvalidInputError):
            model.step(rng.random(6), -1)
