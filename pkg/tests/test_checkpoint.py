import numpy as np
import pytest

from odlae.attention import AttentionFusionModel
from odlae.autoencoder import ModelDims
from odlae.baseline import LinearBaseline
from odlae.checkpoint import load_model, save_model
from odlae.denoise import CorruptionPolicy, DenoisingModel
from odlae.errors import CheckpointError
from odlae.evaluate import ConfusionMatrix, RunState
from odlae.hedge import HedgeFusionModel
from odlae.numerics import make_rng
from odlae.optimize import Adam, Sgd

DIMS = ModelDims(5, 4, 3, 2, attention_dim=6)


def train_a_little(model, steps=25, seed=123):
    rng = make_rng(seed)
    for _ in range(steps):
        model.step(rng.random(5), int(rng.integers(3)))
    return model


def make_variant(name):
    if name == "odlae1":
        return HedgeFusionModel(DIMS, optimizer=Adam(0.01), seed=1)
    if name == "odlae2":
        return AttentionFusionModel(DIMS, optimizer=Adam(0.01), seed=2)
    if name == "odldae1":
        return DenoisingModel(HedgeFusionModel(DIMS, optimizer=Adam(0.01), seed=3), CorruptionPolicy("masking", rate=0.2), noise_seed=7)
    if name == "odldae2":
        return DenoisingModel(AttentionFusionModel(DIMS, optimizer=Sgd(0.05), seed=4), CorruptionPolicy("gaussian", sigma=0.1), noise_seed=8)
    raise AssertionError(name)


def assert_bitwise_equal_state(a, b):
    pa, pb = a.parameters(), b.parameters()
    assert list(pa) == list(pb)
    for name in pa:
        np.testing.assert_array_equal(pa[name], pb[name])
    base_a = a.base if isinstance(a, DenoisingModel) else a
    base_b = b.base if isinstance(b, DenoisingModel) else b
    assert base_a.step_count == base_b.step_count
    assert base_a.optimizer.kind == base_b.optimizer.kind
    assert base_a.optimizer.lr == base_b.optimizer.lr
    if base_a.optimizer.kind == "adam":
        assert base_a.optimizer.t == base_b.optimizer.t
        for name in pa:
            np.testing.assert_array_equal(base_a.optimizer.m[name], base_b.optimizer.m[name])
            np.testing.assert_array_equal(base_a.optimizer.v[name], base_b.optimizer.v[name])
    if hasattr(base_a, "hedge"):
        np.testing.assert_array_equal(base_a.hedge.weights, base_b.hedge.weights)
        assert base_a.hedge.discount == base_b.hedge.discount
        assert base_a.hedge.floor == base_b.hedge.floor
    if hasattr(base_a, "tradeoff"):
        for field in ("recon_weight", "pred_weight", "recon_discount", "pred_discount", "adaptive"):
            assert getattr(base_a.tradeoff, field) == getattr(base_b.tradeoff, field)


@pytest.mark.parametrize("variant", ["odlae1", "odlae2", "odldae1", "odldae2"])
class TestRoundTrip:
    def test_round_trip_restores_everything_bitwise(self, tmp_path, variant):
        model = train_a_little(make_variant(variant))
        path = tmp_path / "model.ckpt"
        save_model(path, model)
        loaded, run_state = load_model(path)
        assert run_state is None
        assert loaded.variant == variant
        assert_bitwise_equal_state(model, loaded)

    def test_resumed_trajectory_matches_unbroken(self, tmp_path, variant):
        unbroken = train_a_little(make_variant(variant), steps=50)
        half = train_a_little(make_variant(variant), steps=25)
        path = tmp_path / "half.ckpt"
        save_model(path, half)
        resumed, _ = load_model(path)
        # continue with the same example sequence the unbroken run saw
        rng = make_rng(123)
        for _ in range(25):
            rng.random(5), rng.integers(3)
        for _ in range(25):
            resumed.step(rng.random(5), int(rng.integers(3)))
        assert_bitwise_equal_state(unbroken, resumed)


class TestRunStateRoundTrip:
    def test_run_state_restored(self, tmp_path):
        model = train_a_little(make_variant("odlae1"))
        cm = ConfusionMatrix(3, np.array([[5, 1, 0], [2, 7, 1], [0, 0, 9]]))
        state = RunState(cm=cm, step=25, window_correct=4, windows=[(10, 0.8), (20, 0.9)])
        path = tmp_path / "run.ckpt"
        save_model(path, model, state)
        _, loaded = load_model(path)
        np.testing.assert_array_equal(loaded.cm.counts, cm.counts)
        assert loaded.step == 25
        assert loaded.window_correct == 4
        assert loaded.windows == [(10, 0.8), (20, 0.9)]


class TestLinearCheckpoint:
    def test_round_trip(self, tmp_path):
        model = LinearBaseline(4, 3, lr=0.2)
        rng = make_rng(5)
        for _ in range(10):
            model.step(rng.random(4), int(rng.integers(3)))
        path = tmp_path / "lin.ckpt"
        save_model(path, model)
        loaded, _ = load_model(path)
        assert loaded.variant == "linear_ogd_baseline"
        assert loaded.lr == 0.2
        assert loaded.step_count == 10
        np.testing.assert_array_equal(loaded.weight, model.weight)
        np.testing.assert_array_equal(loaded.bias, model.bias)


class TestFormatErrors:
    def test_corrupt_magic_rejected(self, tmp_path):
        model = make_variant("odlae1")
        path = tmp_path / "bad.ckpt"
        save_model(path, model)
        raw = bytearray(path.read_bytes())
        raw[0:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointError, match="magic"):
            load_model(path)

    def test_version_mismatch_rejected(self, tmp_path):
        model = make_variant("odlae1")
        path = tmp_path / "future.ckpt"
        save_model(path, model)
        raw = bytearray(path.read_bytes())
        raw[4:6] = (999).to_bytes(2, "little")
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointError, match="version"):
            load_model(path)

    def test_truncated_file_rejected(self, tmp_path):
        model = make_variant("odlae1")
        path = tmp_path / "short.ckpt"
        save_model(path, model)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(CheckpointError, match="truncated"):
            load_model(path)
