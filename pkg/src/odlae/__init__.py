"""Streaming autoencoder classifiers trained one example at a time.

Two fusion heads sit on the encoder's hidden layers: a hedge-weighted
ensemble of per-layer softmax classifiers, and a self-attention head over
the stacked hidden representations. Reconstruction and prediction losses
are combined under adaptively rebalanced trade-off weights; a denoising
wrapper corrupts the encoder input for robustness.
"""

from .attention import AttentionFusionModel
from .autoencoder import ModelDims
from .balance import TradeoffState
from .baseline import LinearBaseline
from .checkpoint import load_model, save_model
from .denoise import CorruptionPolicy, DenoisingModel
from .evaluate import ConfusionMatrix, MetricsReport, RunState, compute_metrics, prequential_run
from .experiment import RunConfig, build_model, build_stream, run_experiment, run_sweep
from .hedge import HedgeFusionModel
from .optimize import Adam, Sgd
from .streams import CsvStream, DriftStream, Example, GaussianStream, NoisyStream

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AttentionFusionModel",
    "ConfusionMatrix",
    "CorruptionPolicy",
    "CsvStream",
    "DenoisingModel",
    "DriftStream",
    "Example",
    "GaussianStream",
    "HedgeFusionModel",
    "LinearBaseline",
    "MetricsReport",
    "ModelDims",
    "NoisyStream",
    "RunConfig",
    "RunState",
    "Sgd",
    "TradeoffState",
    "build_model",
    "build_stream",
    "compute_metrics",
    "load_model",
    "prequential_run",
    "run_experiment",
    "run_sweep",
    "save_model",
]
