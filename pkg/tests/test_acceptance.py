"""Acceptance suite: one test per criterion, each printing a PASS line.

Criteria 6 and 7(a) need the real mnist CSV (label-first, 784 raw pixel
columns, no header). Build it with scripts/fetch_mnist.py on a networked
machine, or point $ODLAE_MNIST_CSV at an existing copy; without the file
those tests skip loudly instead of asserting against surrogate data.
"""

import json
import os
import time
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest

from conftest import fd_worst_rel_error, jitter_params, min_abs_preactivation
from odlae.attention import AttentionFusionModel
from odlae.autoencoder import ModelDims
from odlae.balance import TradeoffState, update_tradeoffs
from odlae.baseline import LinearBaseline
from odlae.cli import main
from odlae.denoise import CorruptionPolicy, DenoisingModel
from odlae.evaluate import ConfusionMatrix, compute_metrics, prequential_run
from odlae.experiment import RunConfig, run_experiment
from odlae.hedge import HedgeFusionModel, init_hedge, hedge_update
from odlae.numerics import make_rng
from odlae.optimize import Adam, Sgd
from odlae.streams import DriftStream, GaussianStream, two_gaussian_bayes_error

GRADCHECK_DIMS = ModelDims(6, 4, 3, 3)  # hidden layers h_0..h_2
TWO_CLASS_MEANS = np.array([[0.2, 0.2], [0.8, 0.8]])
MEAN_DISTANCE = float(np.linalg.norm(TWO_CLASS_MEANS[0] - TWO_CLASS_MEANS[1]))


def _report(criterion: int, text: str) -> None:
    print(f"ACCEPTANCE {criterion}: PASS - {text}")


def mnist_csv_path():
    candidates = [os.environ.get("ODLAE_MNIST_CSV"), Path(__file__).resolve().parent.parent / "data" / "mnist_784.csv"]
    for cand in candidates:
        if cand and Path(cand).is_file():
            return str(cand)
    pytest.skip(
        "mnist CSV not present; run scripts/fetch_mnist.py (needs network) or set "
        "ODLAE_MNIST_CSV, then re-run this test"
    )


def test_c1_gradient_correctness():
    started = time.perf_counter()
    seeds = (0, 1, 2, 3, 6)
    for factory, offset in ((HedgeFusionModel, 1000), (AttentionFusionModel, 2000)):
        for seed in seeds:
            rng = make_rng(offset + seed)
            x = rng.uniform(0.05, 0.95, 6)
            y = int(rng.integers(3))
            model = factory(GRADCHECK_DIMS, optimizer=Sgd(0.0), seed=seed)
            jitter_params(model, rng)
            # keep the check meaningful: no pre-activation may sit near enough to
            # the ReLU kink for a +/-1e-4 parameter step to cross it
            assert min_abs_preactivation(model, x) > 2e-3
            worst = fd_worst_rel_error(model, x, y, eps=1e-4)
            assert worst < 1e-4, f"{factory.__name__} seed {seed}: worst rel error {worst}"
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0
    _report(1, f"gradients match central differences over {len(seeds)} seeds per variant ({elapsed:.1f}s)")


def test_c2_simplex_invariants():
    stream = list(GaussianStream(np.array([[0.25, 0.3, 0.4], [0.7, 0.6, 0.75], [0.2, 0.8, 0.5]]), 0.12, 1000, seed=10))
    for factory in (HedgeFusionModel, AttentionFusionModel):
        model = factory(ModelDims(3, 16, 3, 3), optimizer=Adam(0.01), seed=20)
        for ex in stream:
            rec = model.step(ex.x, ex.y)
            assert abs(rec.probs.sum() - 1.0) < 1e-9 and (rec.probs >= 0).all()
            assert abs(rec.a_re + rec.a_pre - 1.0) < 1e-9 and rec.a_re >= 0 and rec.a_pre >= 0
            if rec.ensemble_weights is not None:
                assert abs(rec.ensemble_weights.sum() - 1.0) < 1e-9
                assert (rec.ensemble_weights >= 0).all()
            if rec.attention is not None:
                assert abs(rec.attention.sum() - 1.0) < 1e-9
                assert (rec.attention >= 0).all()
    _report(2, "ensemble weights, attention, predictions, and trade-offs stay on their simplexes for 1000 steps")


def test_c3_tradeoff_adaptation_direction(capsys):
    def oracle(a0, l_re, l_pre, steps):
        with mp.workdps(60):
            a = mp.mpf(a0)
            values = []
            for _ in range(steps):
                t_re = a * mp.mpf("0.9") ** min(mp.mpf(l_re), 1)
                t_pre = (1 - a) * mp.mpf("0.9") ** min(mp.mpf(l_pre), 1)
                a = t_re / (t_re + t_pre)
                values.append(float(a))
            return values

    state = TradeoffState(recon_discount=0.9, pred_discount=0.9)
    expected = oracle(0.5, 0.9, 0.1, 200)
    prev = state.recon_weight
    for step in range(200):
        update_tradeoffs(state, 0.9, 0.1)
        assert state.recon_weight < prev
        assert abs(state.recon_weight - expected[step]) < 1e-10
        prev = state.recon_weight
    assert state.recon_weight > 0.0

    state = TradeoffState(recon_discount=0.9, pred_discount=0.9)
    expected_pre = oracle(0.5, 0.1, 0.9, 200)
    prev = state.pred_weight
    for step in range(200):
        update_tradeoffs(state, 0.1, 0.9)
        assert state.pred_weight < prev
        assert abs(state.recon_weight - expected_pre[step]) < 1e-10
        prev = state.pred_weight

    # non-binding report: adaptive vs a few fixed settings on one stream
    base = dict(variant="odlae1", dataset="synth", classes=3, dim=6, sigma=0.15,
                n_examples=600, hidden_units=16, layers=3, window=200, seed=6)
    lines = []
    for a_re in (0.1, 0.5, 0.9):
        acc = run_experiment(RunConfig(**base, a_re=a_re, fixed_tradeoff=True))["metrics"]["accuracy"]
        lines.append(f"fixed ({a_re:.1f}, {1 - a_re:.1f}): {acc:.4f}")
    adaptive = run_experiment(RunConfig(**base))["metrics"]["accuracy"]
    lines.append(f"adaptive: {adaptive:.4f}")
    with capsys.disabled():
        print("\n[criterion 3 report, not asserted] fixed-vs-adaptive trade-off accuracies:")
        for line in lines:
            print("   ", line)
    _report(3, "trade-off recurrence strictly down-weights the worse loss and tracks the high-precision oracle")


def test_c4_separable_stream_learning():
    started = time.perf_counter()
    sigma = MEAN_DISTANCE / 8.0
    assert two_gaussian_bayes_error(MEAN_DISTANCE, sigma) < 1e-4
    stream = GaussianStream(TWO_CLASS_MEANS, sigma, 5000, seed=41)

    # the linear baseline certifies that the 0.97 bar is attainable
    baseline_report, _ = prequential_run(stream, LinearBaseline(2, 2, lr=0.1), window=1000, class_count=2)
    assert baseline_report.window_accuracy[-1][1] >= 0.97

    dims = ModelDims(2, 32, 2, 3)
    for factory in (HedgeFusionModel, AttentionFusionModel):
        model = factory(dims, optimizer=Adam(0.01), seed=40)
        report, _ = prequential_run(stream, model, window=1000, class_count=2)
        final_window = report.window_accuracy[-1][1]
        assert final_window >= 0.97, f"{factory.__name__}: final-window accuracy {final_window}"
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    _report(4, f"both variants reach >= 0.97 on the final 1000 of a separable stream ({elapsed:.1f}s)")


def test_c5_drift_recovery():
    sigma = MEAN_DISTANCE / 4.0  # moderate overlap keeps confidence, and the drift shock, bounded
    stream = DriftStream(
        GaussianStream(TWO_CLASS_MEANS, sigma, 10000, seed=42),
        "label_swap",
        5000,
        label_permutation=[1, 0],
    )
    for factory in (HedgeFusionModel, AttentionFusionModel):
        model = factory(ModelDims(2, 32, 2, 3), optimizer=Adam(0.01), seed=43)
        report, _ = prequential_run(stream, model, window=1000, class_count=2)
        windows = dict(report.window_accuracy)
        pre, post = windows[5000], windows[10000]
        assert post >= pre - 0.02, f"{factory.__name__}: pre-drift {pre}, post-drift {post}"
    _report(5, "both variants recover to pre-drift windowed accuracy after a label permutation")


def test_c6_mnist_desk_scale():
    path = mnist_csv_path()
    started = time.perf_counter()
    cfg = RunConfig(
        variant="odlae1", dataset=path, label_col="0", classes=10,
        layers=3, hidden_units=64, optimizer="adam", lr=0.01,
        steps=10_000, window=1000, seed=1,
    )
    accuracy = run_experiment(cfg)["metrics"]["accuracy"]
    elapsed = time.perf_counter() - started
    assert accuracy >= 0.85, f"mnist-10k prequential accuracy {accuracy}"
    assert elapsed < 300.0
    _report(6, f"mnist-10k prequential accuracy {accuracy:.4f} ({elapsed:.0f}s)")


def test_c7_denoising_policy_none_is_bitwise_identical():
    stream = list(GaussianStream(np.array([[0.3, 0.3, 0.3], [0.7, 0.7, 0.7]]), 0.1, 300, seed=3))
    dims = ModelDims(3, 12, 2, 3)
    for factory in (HedgeFusionModel, AttentionFusionModel):
        plain = factory(dims, optimizer=Adam(0.01), seed=30)
        wrapped = DenoisingModel(factory(dims, optimizer=Adam(0.01), seed=30), CorruptionPolicy("none"), noise_seed=9)
        for ex in stream:
            rec_a = plain.step(ex.x, ex.y)
            rec_b = wrapped.step(ex.x, ex.y)
            np.testing.assert_array_equal(rec_a.probs, rec_b.probs)
            assert rec_a.loss_total == rec_b.loss_total
        for name, tensor in plain.parameters().items():
            np.testing.assert_array_equal(tensor, wrapped.parameters()[name])
    _report(7, "denoising wrappers with a none policy reproduce the base trajectories bitwise")


def test_c7_denoising_robustness_on_noisy_mnist():
    path = mnist_csv_path()
    shared = dict(dataset=path, label_col="0", classes=10, layers=3, hidden_units=64,
                  steps=10_000, window=1000, seed=1)
    clean = run_experiment(RunConfig(variant="odlae1", **shared))["metrics"]["accuracy"]
    noisy = run_experiment(
        RunConfig(variant="odldae1", corruption="masking:0.1", noise="masking:0.1", **shared)
    )["metrics"]["accuracy"]
    assert noisy >= clean - 0.03, f"clean {clean}, under noise {noisy}"
    _report(7, f"denoising variant within 0.03 of clean accuracy under masking noise ({clean:.4f} vs {noisy:.4f})")


def test_c8_metric_oracle_equivalence():
    def brute_force(true, pred, k):
        correct = sum(t == p for t, p in zip(true, pred))
        accuracy = correct / len(true)
        precisions, recalls, f1s = [], [], []
        for c in range(k):
            tp = sum(1 for t, p in zip(true, pred) if t == c and p == c)
            fp = sum(1 for t, p in zip(true, pred) if t != c and p == c)
            fn = sum(1 for t, p in zip(true, pred) if t == c and p != c)
            precision = tp / (tp + fp) if tp + fp else 0.0
            recall = tp / (tp + fn) if tp + fn else 0.0
            f1s.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
            precisions.append(precision)
            recalls.append(recall)
        return accuracy, sum(precisions) / k, sum(f1s) / k

    rng = make_rng(800)
    for _ in range(200):
        n = int(rng.integers(10, 120))
        true = [int(v) for v in rng.integers(0, 5, n)]
        pred = [int(v) for v in rng.integers(0, 5, n)]
        cm = ConfusionMatrix(5)
        for t, p in zip(true, pred):
            cm.record(t, p)
        report = compute_metrics(cm)
        accuracy, precision, f1 = brute_force(true, pred, 5)
        assert abs(report.accuracy - accuracy) < 1e-12
        assert abs(report.macro_precision - precision) < 1e-12
        assert abs(report.macro_f1 - f1) < 1e-12
        assert report.hamming_loss == 1.0 - report.accuracy
    _report(8, "metrics match the brute-force oracle on 200 random label sequences; hamming = 1 - accuracy exactly")


def test_c9_determinism_and_resumption(tmp_path):
    def args(out, steps, extra=()):
        return [
            "run", "--variant", "odlae1", "--dataset", "synth", "--classes", "2",
            "--dim", "2", "--sigma", "0.15", "--n-examples", "1000",
            "--hidden-units", "8", "--window", "100", "--seed", "17",
            "--steps", str(steps), "--out", str(out), *extra,
        ]

    full = tmp_path / "full.json"
    assert main(args(full, 1000, ("--checkpoint-out", str(tmp_path / "full.ckpt")))) == 0
    first = full.read_bytes()
    assert main(args(full, 1000, ("--checkpoint-out", str(tmp_path / "full.ckpt")))) == 0
    assert full.read_bytes() == first, "identical config+seed must give byte-identical summaries"

    mid = tmp_path / "mid.ckpt"
    end = tmp_path / "end.ckpt"
    assert main(args(tmp_path / "half.json", 500, ("--checkpoint-out", str(mid)))) == 0
    assert main(args(tmp_path / "resumed.json", 500, ("--checkpoint-in", str(mid), "--checkpoint-out", str(end)))) == 0

    full_summary = json.loads(first)
    resumed_summary = json.loads((tmp_path / "resumed.json").read_text())
    assert resumed_summary["metrics"] == full_summary["metrics"]
    assert (tmp_path / "full.ckpt").read_bytes() == end.read_bytes(), "resumed state must equal the unbroken state"
    _report(9, "summaries are byte-identical across reruns; 500+checkpoint+500 equals 1000 unbroken steps")


def test_c10_hedge_behavior():
    state = init_hedge(2, discount=0.99, floor=0.01)
    losses = np.array([1.0, 0.0])  # layer 0 strictly worse at every step
    prev_ratio = state.weights[1] / state.weights[0]
    for _ in range(10_000):
        hedge_update(state, losses)
        assert abs(state.weights.sum() - 1.0) < 1e-9
        assert (state.weights >= 0).all()
        ratio = state.weights[1] / state.weights[0]
        assert ratio >= prev_ratio * (1 - 1e-12)
        prev_ratio = ratio
    assert state.weights[1] > state.weights[0]
    _report(10, "the better layer's weight ratio is nondecreasing over 10,000 hedge updates")
