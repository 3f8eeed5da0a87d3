"""Versioned binary checkpoints for every model variant.

Layout (all little-endian):

    magic          4 bytes  b"ODLA"
    format version u16      currently 1
    variant tag    u8       1 odlae1, 2 odlae2, 3 odldae1, 4 odldae2, 5 linear_ogd_baseline
    dims           5 x u32  input_dim, hidden_dim, output_dim, L (= hidden_layers - 1), attention_dim
    tensors        each as rows u32, cols u32, rows*cols float64 row-major

Tensor order (vectors are written as 1 x n, scalars as 1 x 1):

    1. every model parameter, in ``model.parameters()`` order
    2. variant state
       - autoencoder variants (1-4):
         hedge weights (1 x layers) and [discount, floor]   (variants 1 and 3 only)
         trade-off [recon_weight, pred_weight, recon_discount, pred_discount, adaptive]
         output activation tag [0 identity, 1 relu, 2 sigmoid]
         corruption policy [kind, rate, sigma, noise_seed]  (kind 0 none, 1 masking, 2 gaussian)
         model step counter
       - linear baseline (5): [lr], step counter
    3. optimizer (autoencoder variants): [kind 0 sgd / 1 adam], [lr]; for adam
       additionally [beta1, beta2, eps], [t], then first and second moments in
       parameter order
    4. run state: [present 0/1]; when present, the confusion matrix
       (classes x classes), [step, window_correct], and the windowed-accuracy
       series (n x 2 of window_end, accuracy)

Counters and seeds are exact in float64 (all are below 2**53).
"""

from __future__ import annotations

import struct

import numpy as np

from .attention import AttentionFusionModel
from .autoencoder import ModelDims
from .balance import TradeoffState
from .baseline import LinearBaseline
from .denoise import CorruptionPolicy, DenoisingModel
from .errors import CheckpointError
from .evaluate import ConfusionMatrix, RunState
from .hedge import HedgeFusionModel
from .numerics import activation_by_name
from .optimize import Adam, Sgd

MAGIC = b"ODLA"
FORMAT_VERSION = 1

VARIANT_TAGS = {"odlae1": 1, "odlae2": 2, "odldae1": 3, "odldae2": 4, "linear_ogd_baseline": 5}
TAG_VARIANTS = {v: k for k, v in VARIANT_TAGS.items()}
_ACT_TAGS = {"identity": 0, "relu": 1, "sigmoid": 2}
_TAG_ACTS = {v: k for k, v in _ACT_TAGS.items()}
_POLICY_TAGS = {"none": 0, "masking": 1, "gaussian": 2}
_TAG_POLICIES = {v: k for k, v in _POLICY_TAGS.items()}


def _write_tensor(fh, array) -> None:
    a = np.atleast_2d(np.asarray(array, dtype=np.float64))
    fh.write(struct.pack("<II", a.shape[0], a.shape[1]))
    fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def _read_tensor(fh) -> np.ndarray:
    head = fh.read(8)
    if len(head) != 8:
        raise CheckpointError("truncated checkpoint: missing tensor header")
    rows, cols = struct.unpack("<II", head)
    payload = fh.read(8 * rows * cols)
    if len(payload) != 8 * rows * cols:
        raise CheckpointError("truncated checkpoint: missing tensor data")
    return np.frombuffer(payload, dtype="<f8").astype(np.float64).reshape(rows, cols)


def _read_vector(fh) -> np.ndarray:
    return _read_tensor(fh)[0]


def _base_of(model):
    return model.base if isinstance(model, DenoisingModel) else model


def save_model(path, model, run_state: RunState | None = None) -> None:
    base = _base_of(model)
    tag = VARIANT_TAGS[model.variant]
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sHB", MAGIC, FORMAT_VERSION, tag))
        if tag == 5:
            dims = (base.input_dim, 1, base.class_count, 0, 1)
        else:
            d = base.dims
            dims = (d.input_dim, d.hidden_dim, d.output_dim, d.hidden_layers - 1, d.attention_dim)
        fh.write(struct.pack("<5I", *dims))

        params = base.parameters()
        for tensor in params.values():
            _write_tensor(fh, tensor)

        if tag == 5:
            _write_tensor(fh, [base.lr])
            _write_tensor(fh, [float(base.step_count)])
        else:
            if tag in (1, 3):
                _write_tensor(fh, base.hedge.weights)
                _write_tensor(fh, [base.hedge.discount, base.hedge.floor])
            t = base.tradeoff
            _write_tensor(fh, [t.recon_weight, t.pred_weight, t.recon_discount, t.pred_discount, float(t.adaptive)])
            _write_tensor(fh, [float(_ACT_TAGS[base.output_activation.name])])
            if isinstance(model, DenoisingModel):
                policy = model.policy
                noise_seed = model.noise_seed
            else:
                policy, noise_seed = CorruptionPolicy("none"), 0
            _write_tensor(fh, [float(_POLICY_TAGS[policy.kind]), policy.rate, policy.sigma, float(noise_seed)])
            _write_tensor(fh, [float(base.step_count)])

            opt = base.optimizer
            _write_tensor(fh, [0.0 if opt.kind == "sgd" else 1.0])
            _write_tensor(fh, [opt.lr])
            if opt.kind == "adam":
                _write_tensor(fh, [opt.beta1, opt.beta2, opt.eps])
                _write_tensor(fh, [float(opt.t)])
                for name in params:
                    _write_tensor(fh, opt.m.get(name, np.zeros_like(params[name])))
                for name in params:
                    _write_tensor(fh, opt.v.get(name, np.zeros_like(params[name])))

        if run_state is None:
            _write_tensor(fh, [0.0])
        else:
            _write_tensor(fh, [1.0])
            _write_tensor(fh, run_state.cm.counts)
            _write_tensor(fh, [float(run_state.step), float(run_state.window_correct)])
            windows = np.array(run_state.windows, dtype=np.float64).reshape(len(run_state.windows), 2)
            _write_tensor(fh, windows)


def load_model(path):
    """Rebuild (model, run_state-or-None) from a checkpoint file."""
    with open(path, "rb") as fh:
        head = fh.read(7)
        if len(head) != 7 or head[:4] != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint (bad magic bytes)")
        version, tag = struct.unpack("<HB", head[4:])
        if version != FORMAT_VERSION:
            raise CheckpointError(f"{path}: incompatible format version {version}, expected {FORMAT_VERSION}")
        if tag not in TAG_VARIANTS:
            raise CheckpointError(f"{path}: unknown variant tag {tag}")
        raw_dims = struct.unpack("<5I", fh.read(20))

        if tag == 5:
            model = LinearBaseline(raw_dims[0], raw_dims[2])
            _load_params(fh, model.parameters())
            model.lr = float(_read_vector(fh)[0])
            model.step_count = int(_read_vector(fh)[0])
            return model, _read_run_state(fh)

        dims = ModelDims(raw_dims[0], raw_dims[1], raw_dims[2], raw_dims[3] + 1, raw_dims[4])
        if tag in (1, 3):
            base = HedgeFusionModel(dims, optimizer=Sgd(0.0))
        else:
            base = AttentionFusionModel(dims, optimizer=Sgd(0.0))
        _load_params(fh, base.parameters())
        if tag in (1, 3):
            base.hedge.weights = _read_vector(fh)
            discount, floor = _read_vector(fh)
            base.hedge.discount = float(discount)
            base.hedge.floor = float(floor)
        return _finish_autoencoder_load(fh, base, tag)


def _load_params(fh, params: dict) -> None:
    # the constructor drew random weights; overwrite them in place
    for name, tensor in params.items():
        loaded = _read_tensor(fh)
        target = np.atleast_2d(tensor)
        if loaded.shape != target.shape:
            raise CheckpointError(f"tensor {name!r} has shape {loaded.shape}, expected {target.shape}")
        np.copyto(tensor, loaded.reshape(tensor.shape))


def _finish_autoencoder_load(fh, base, tag):
    tradeoff = _read_vector(fh)
    base.tradeoff = TradeoffState(
        recon_weight=float(tradeoff[0]),
        pred_weight=float(tradeoff[1]),
        recon_discount=float(tradeoff[2]),
        pred_discount=float(tradeoff[3]),
        adaptive=bool(tradeoff[4]),
    )
    act_tag = int(_read_vector(fh)[0])
    base.output_activation = activation_by_name(_TAG_ACTS[act_tag])
    policy_row = _read_vector(fh)
    base.step_count = int(_read_vector(fh)[0])

    opt_kind = int(_read_vector(fh)[0])
    lr = float(_read_vector(fh)[0])
    params = base.parameters()
    if opt_kind == 1:
        beta1, beta2, eps = _read_vector(fh)
        opt = Adam(lr, float(beta1), float(beta2), float(eps))
        opt.t = int(_read_vector(fh)[0])
        for name in params:
            opt.m[name] = _read_tensor(fh).reshape(params[name].shape)
        for name in params:
            opt.v[name] = _read_tensor(fh).reshape(params[name].shape)
    else:
        opt = Sgd(lr)
    base.optimizer = opt

    kind = _TAG_POLICIES[int(policy_row[0])]
    if tag in (3, 4):
        policy = CorruptionPolicy(kind, rate=float(policy_row[1]), sigma=float(policy_row[2]))
        model = DenoisingModel(base, policy, noise_seed=int(policy_row[3]))
    else:
        model = base
    return model, _read_run_state(fh)


def _read_run_state(fh):
    present = int(_read_vector(fh)[0])
    if not present:
        return None
    counts = _read_tensor(fh).astype(np.int64)
    cm = ConfusionMatrix(counts.shape[0], counts)
    step, window_correct = _read_vector(fh)
    windows_raw = _read_tensor(fh)
    windows = [(int(t), float(a)) for t, a in windows_raw] if windows_raw.size else []
    return RunState(cm=cm, step=int(step), window_correct=int(window_correct), windows=windows)
