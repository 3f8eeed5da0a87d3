"""Experiment orchestration: turn a RunConfig into a stream, a model, a
prequential run, and machine-readable outputs.

All randomness in a run is derived from one seed via fixed sub-seed slots,
so identical configs produce byte-identical summaries.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, replace


from .attention import AttentionFusionModel
from .autoencoder import ModelDims
from .balance import TradeoffState
from .baseline import LinearBaseline
from .checkpoint import load_model, save_model
from .denoise import CorruptionPolicy, DenoisingModel
from .errors import ConfigError
from .evaluate import ConfusionMatrix, RunState, prequential_run
from .hedge import HedgeFusionModel
from .numerics import derive_seed
from .optimize import make_optimizer
from .streams import CsvStream, DriftStream, GaussianStream, NoisyStream, diagonal_means

VARIANTS = ("odlae1", "odlae2", "odldae1", "odldae2", "linear_ogd_baseline")

# sub-seed slots of the run seed
_SEED_MODEL, _SEED_STREAM, _SEED_NOISE, _SEED_CORRUPT, _SEED_DRIFT = range(5)


@dataclass
class RunConfig:
    variant: str = "odlae1"
    # model
    layers: int = 3  # number of hidden layers
    hidden_units: int = 64
    attention_dim: int = 30
    optimizer: str = "adam"
    lr: float = 0.01
    theta0: float = 0.99
    eps_beta: float = 0.01
    beta_re: float = 0.99
    beta_pre: float = 0.99
    a_re: float = 0.5
    fixed_tradeoff: bool = False
    out_activation: str = "sigmoid"
    corruption: str = "masking:0.1"  # training-time corruption of the denoising variants
    # stream
    dataset: str = "synth"  # "synth" or a CSV path
    label_col: str = "0"
    has_header: bool = False
    delimiter: str = ","
    scaling: str = "minmax"
    classes: int = 2
    dim: int = 2
    sigma: float = 0.05
    n_examples: int = 5000
    drift: str = "none"  # none | permute | rotate | label-swap
    drift_at: int = 0
    drift_perm: str = ""  # comma-separated label permutation; default rotates labels by one
    noise: str = "none"  # evaluation-stream corruption
    # run
    seed: int = 0
    window: int = 1000
    steps: int | None = None
    offset: int = 0
    out: str | None = None
    trace_csv: str | None = None
    window_csv: str | None = None
    checkpoint_in: str | None = None
    checkpoint_out: str | None = None

    def validate(self) -> "RunConfig":
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        for name in ("layers", "hidden_units", "attention_dim", "classes", "dim", "n_examples", "window"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.lr < 0 or self.sigma < 0 or self.offset < 0 or self.drift_at < 0:
            raise ConfigError("lr, sigma, offset, and drift-at must be nonnegative")
        if not 0.0 < self.theta0 < 1.0:
            raise ConfigError(f"theta0 must lie in (0, 1), got {self.theta0}")
        if not 0.0 <= self.eps_beta < 1.0:
            raise ConfigError(f"eps-beta must lie in [0, 1), got {self.eps_beta}")
        for name in ("beta_re", "beta_pre"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {getattr(self, name)}")
        if not 0.0 < self.a_re < 1.0:
            raise ConfigError(f"a-re must lie strictly in (0, 1), got {self.a_re}")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}; choose adam or sgd")
        if self.drift not in ("none", "permute", "rotate", "label-swap"):
            raise ConfigError(f"unknown drift {self.drift!r}")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be >= 1 when given")
        CorruptionPolicy.parse(self.corruption)
        CorruptionPolicy.parse(self.noise)
        return self


def _label_permutation(cfg: RunConfig) -> list[int]:
    if cfg.drift_perm:
        try:
            return [int(v) for v in cfg.drift_perm.split(",")]
        except ValueError:
            raise ConfigError(f"bad label permutation {cfg.drift_perm!r}") from None
    return [(k + 1) % cfg.classes for k in range(cfg.classes)]


def build_stream(cfg: RunConfig):
    """(stream, class_count, feature_dim) for the configured source + transforms."""
    if cfg.dataset == "synth":
        stream = GaussianStream(
            diagonal_means(cfg.classes, cfg.dim),
            cfg.sigma,
            cfg.n_examples,
            seed=derive_seed(cfg.seed, _SEED_STREAM),
        )
        class_count, feature_dim = cfg.classes, cfg.dim
    else:
        stream = CsvStream(
            cfg.dataset,
            cfg.label_col,
            scaling=cfg.scaling,
            has_header=cfg.has_header,
            delimiter=cfg.delimiter,
        )
        class_count, feature_dim = cfg.classes, stream.feature_dim

    if cfg.drift != "none":
        kind = {"permute": "permute_features", "rotate": "rotate", "label-swap": "label_swap"}[cfg.drift]
        stream = DriftStream(
            stream,
            kind,
            cfg.drift_at,
            seed=derive_seed(cfg.seed, _SEED_DRIFT),
            label_permutation=_label_permutation(cfg) if kind == "label_swap" else None,
        )
    noise = CorruptionPolicy.parse(cfg.noise)
    if noise.kind != "none":
        stream = NoisyStream(stream, noise, seed=derive_seed(cfg.seed, _SEED_NOISE))
    return stream, class_count, feature_dim


def build_model(cfg: RunConfig, feature_dim: int):
    if cfg.variant == "linear_ogd_baseline":
        return LinearBaseline(feature_dim, cfg.classes, lr=cfg.lr)
    dims = ModelDims(feature_dim, cfg.hidden_units, cfg.classes, cfg.layers, cfg.attention_dim)
    tradeoff = TradeoffState(
        recon_weight=cfg.a_re,
        pred_weight=1.0 - cfg.a_re,
        recon_discount=cfg.beta_re,
        pred_discount=cfg.beta_pre,
        adaptive=not cfg.fixed_tradeoff,
    )
    optimizer = make_optimizer(cfg.optimizer, cfg.lr)
    model_seed = derive_seed(cfg.seed, _SEED_MODEL)
    if cfg.variant in ("odlae1", "odldae1"):
        base = HedgeFusionModel(
            dims,
            optimizer=optimizer,
            tradeoff=tradeoff,
            discount=cfg.theta0,
            floor=cfg.eps_beta,
            output_activation=cfg.out_activation,
            seed=model_seed,
        )
    else:
        base = AttentionFusionModel(
            dims,
            optimizer=optimizer,
            tradeoff=tradeoff,
            output_activation=cfg.out_activation,
            seed=model_seed,
        )
    if cfg.variant in ("odldae1", "odldae2"):
        return DenoisingModel(base, CorruptionPolicy.parse(cfg.corruption), noise_seed=derive_seed(cfg.seed, _SEED_CORRUPT))
    return base


class _TraceWriter:
    """Per-step diagnostic CSV; vector fields get one column per layer."""

    def __init__(self, fh):
        self.writer = csv.writer(fh)
        self.header_written = False

    def __call__(self, rec) -> None:
        if not self.header_written:
            header = ["t", "true", "pred", "l_re", "l_pre", "l_total", "a_re", "a_pre"]
            if rec.ensemble_weights is not None:
                header += [f"beta_{l}" for l in range(len(rec.ensemble_weights))]
                header += [f"loss_{l}" for l in range(len(rec.layer_losses))]
            if rec.attention is not None:
                header += [f"att_{l}" for l in range(len(rec.attention))]
            self.writer.writerow(header)
            self.header_written = True
        row = [rec.step, rec.label, rec.predicted, rec.loss_re, rec.loss_pre, rec.loss_total, rec.a_re, rec.a_pre]
        if rec.ensemble_weights is not None:
            row += list(rec.ensemble_weights) + list(rec.layer_losses)
        if rec.attention is not None:
            row += list(rec.attention)
        self.writer.writerow(row)


def summary_json(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=2) + "\n"


def run_experiment(cfg: RunConfig) -> dict:
    """Run one prequential experiment and return (and optionally write) its summary."""
    cfg.validate()
    stream, class_count, feature_dim = build_stream(cfg)

    state = None
    if cfg.checkpoint_in:
        model, state = load_model(cfg.checkpoint_in)
        if model.variant != cfg.variant:
            raise ConfigError(f"checkpoint holds variant {model.variant!r}, config asks for {cfg.variant!r}")
        model_input = model.input_dim if cfg.variant == "linear_ogd_baseline" else model.dims.input_dim
        if model_input != feature_dim:
            raise ConfigError(f"checkpoint expects {model_input} features, stream provides {feature_dim}")
    else:
        model = build_model(cfg, feature_dim)

    if state is not None:
        if cfg.offset and state.step != cfg.offset:
            raise ConfigError(f"checkpoint was taken at step {state.step}, but offset is {cfg.offset}")
        cfg = replace(cfg, offset=state.step)
    elif cfg.offset:
        state = RunState(cm=ConfusionMatrix(class_count), step=cfg.offset)

    trace_fh = open(cfg.trace_csv, "w", newline="", encoding="utf-8") if cfg.trace_csv else None
    try:
        on_step = _TraceWriter(trace_fh) if trace_fh else None
        report, state = prequential_run(
            stream,
            model,
            window=cfg.window,
            class_count=class_count,
            state=state,
            max_steps=cfg.steps,
            on_step=on_step,
        )
    finally:
        if trace_fh:
            trace_fh.close()

    if cfg.checkpoint_out:
        save_model(cfg.checkpoint_out, model, state)
    if cfg.window_csv:
        with open(cfg.window_csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["window_end_t", "accuracy"])
            w.writerows(report.window_accuracy)

    summary = {"config": asdict(cfg), "metrics": report.to_dict()}
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(summary_json(summary))
    return summary


def run_sweep(cfg: RunConfig, layer_grid, hidden_grid, out_csv=None) -> dict:
    """Run every (layers, hidden_units) cell with a cell-derived seed.

    A failing cell is recorded with its error and the sweep continues. Rows
    are ordered by (layers, hidden_units); the summary names the
    argmax-accuracy cell.
    """
    cfg.validate()
    if not layer_grid or not hidden_grid:
        raise ConfigError("sweep grids must be nonempty")
    cells = sorted((int(l), int(h)) for l in layer_grid for h in hidden_grid)
    rows, best = [], None
    for index, (layers, hidden) in enumerate(cells):
        cell_cfg = replace(
            cfg,
            layers=layers,
            hidden_units=hidden,
            seed=derive_seed(cfg.seed, 1000 + index),
            out=None,
            trace_csv=None,
            window_csv=None,
            checkpoint_in=None,
            checkpoint_out=None,
        )
        started = time.perf_counter()
        try:
            summary = run_experiment(cell_cfg)
            metrics = summary["metrics"]
            row = {
                "layers": layers,
                "hidden_units": hidden,
                "accuracy": metrics["accuracy"],
                "macro_f1": metrics["macro_f1"],
                "hamming_loss": metrics["hamming_loss"],
                "wall_time_s": time.perf_counter() - started,
                "status": "ok",
            }
            if best is None or metrics["accuracy"] > best["accuracy"]:
                best = row
        except Exception as exc:  # noqa: BLE001 - a cell failure must not kill the sweep
            row = {
                "layers": layers,
                "hidden_units": hidden,
                "accuracy": "",
                "macro_f1": "",
                "hamming_loss": "",
                "wall_time_s": time.perf_counter() - started,
                "status": f"error: {exc}",
            }
        rows.append(row)

    if out_csv:
        with open(out_csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    return {"cells": rows, "best": best}
