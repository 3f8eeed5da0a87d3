"""Stream sources: CSV files, synthetic gaussian mixtures, drift transforms,
and evaluation-time noise injection.

A stream is any iterable of Examples whose iteration order is a
deterministic function of its construction arguments, so re-iterating
replays the exact same sequence (checkpoint resumption relies on this).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .denoise import CorruptionPolicy, corrupt
from .errors import ConfigError, DataError
from .numerics import make_rng

SCALINGS = ("none", "minmax", "minmax_prescan")
DRIFT_KINDS = ("permute_features", "label_swap", "rotate")


@dataclass(frozen=True)
class Example:
    x: np.ndarray
    y: int


class _OnlineMinMax:
    """Running per-feature min/max; scales with only the past, then learns
    the current example. Unseen or constant features scale to 0."""

    def __init__(self):
        self.lo = None
        self.hi = None

    def scale(self, x: np.ndarray) -> np.ndarray:
        if self.lo is None:
            scaled = np.zeros_like(x)
            self.lo = x.copy()
            self.hi = x.copy()
            return scaled
        span = self.hi - self.lo
        with np.errstate(invalid="ignore", divide="ignore"):
            scaled = np.where(span > 0, np.clip((x - self.lo) / np.where(span > 0, span, 1.0), 0.0, 1.0), 0.0)
        np.minimum(self.lo, x, out=self.lo)
        np.maximum(self.hi, x, out=self.hi)
        return scaled


class CsvStream:
    """Ordered examples from a delimited text file, one row per example.

    Labels are re-indexed densely in first-appearance order. minmax scaling
    is purely online by default; minmax_prescan reads the file once up front
    to reproduce offline-normalized setups.
    """

    def __init__(
        self,
        path,
        label_column: str | int = 0,
        *,
        scaling: str = "minmax",
        has_header: bool = False,
        delimiter: str = ",",
    ):
        if scaling not in SCALINGS:
            raise ConfigError(f"unknown scaling {scaling!r}; choose from {SCALINGS}")
        self.path = str(path)
        self.label_column = label_column
        self.scaling = scaling
        self.has_header = has_header
        self.delimiter = delimiter
        self._prescan_bounds = None

    def _label_index(self, header: list | None, width: int) -> int:
        col = self.label_column
        if isinstance(col, str) and not col.lstrip("-").isdigit():
            if header is None:
                raise DataError(f"label column {col!r} needs a header row")
            if col not in header:
                raise DataError(f"label column {col!r} not found in header {header}")
            return header.index(col)
        idx = int(col)
        if idx < 0:
            idx += width
        if not 0 <= idx < width:
            raise DataError(f"label column {self.label_column!r} out of range for {width} columns")
        return idx

    def _rows(self):
        with open(self.path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, delimiter=self.delimiter)
            header = None
            first_line = 1
            if self.has_header:
                header = next(reader, None)
                if header is None:
                    raise DataError(f"{self.path}: empty file")
                first_line = 2
            width = None
            label_idx = None
            for line_no, row in enumerate(reader, start=first_line):
                if not row:
                    continue
                if width is None:
                    width = len(row)
                    if width < 2:
                        raise DataError(f"{self.path}:{line_no}: need at least one feature and a label")
                    label_idx = self._label_index(header, width)
                if len(row) != width:
                    raise DataError(f"{self.path}:{line_no}: expected {width} columns, got {len(row)}")
                label_token = row[label_idx].strip()
                try:
                    features = np.array(
                        [float(v) for i, v in enumerate(row) if i != label_idx], dtype=np.float64
                    )
                except ValueError:
                    raise DataError(f"{self.path}:{line_no}: non-numeric feature value") from None
                if not np.all(np.isfinite(features)):
                    raise DataError(f"{self.path}:{line_no}: non-finite feature value")
                yield line_no, label_token, features

    @property
    def feature_dim(self) -> int:
        for _, _, features in self._rows():
            return features.shape[0]
        raise DataError(f"{self.path}: no data rows")

    def _prescan(self):
        if self._prescan_bounds is None:
            lo = hi = None
            for _, _, feats in self._rows():
                lo = feats.copy() if lo is None else np.minimum(lo, feats)
                hi = feats.copy() if hi is None else np.maximum(hi, feats)
            if lo is None:
                raise DataError(f"{self.path}: no data rows")
            self._prescan_bounds = (lo, hi)
        return self._prescan_bounds

    def __iter__(self):
        labels: dict[str, int] = {}
        if self.scaling == "minmax":
            scaler = _OnlineMinMax()
        elif self.scaling == "minmax_prescan":
            lo, hi = self._prescan()
            span = hi - lo
        for _, label_token, feats in self._rows():
            if label_token not in labels:
                labels[label_token] = len(labels)
            if self.scaling == "minmax":
                feats = scaler.scale(feats)
            elif self.scaling == "minmax_prescan":
                feats = np.where(span > 0, (feats - lo) / np.where(span > 0, span, 1.0), 0.0)
            yield Example(feats, labels[label_token])


def load_csv(path, label_column: str | int = 0, scaling: str = "minmax", **kwargs) -> CsvStream:
    return CsvStream(path, label_column, scaling=scaling, **kwargs)


class GaussianStream:
    """length examples of K isotropic gaussians clamped to [0,1]^dim; the class
    of each example is drawn uniformly."""

    def __init__(self, means, sigma: float, length: int, seed: int = 0):
        self.means = np.asarray(means, dtype=np.float64)
        if self.means.ndim != 2:
            raise ConfigError("means must be a class_count x dim array")
        if sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if length < 1:
            raise ConfigError("length must be >= 1")
        self.sigma = float(sigma)
        self.length = int(length)
        self.seed = int(seed)

    @property
    def class_count(self) -> int:
        return self.means.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.means.shape[1]

    def __iter__(self):
        rng = make_rng(self.seed)
        k, dim = self.means.shape
        for _ in range(self.length):
            y = int(rng.integers(k))
            x = np.clip(self.means[y] + self.sigma * rng.standard_normal(dim), 0.0, 1.0)
            yield Example(x, y)


def diagonal_means(class_count: int, dim: int) -> np.ndarray:
    """Class means spread along the main diagonal of the unit cube."""
    positions = (np.arange(class_count) + 1.0) / (class_count + 1.0)
    return np.tile(positions[:, None], (1, dim))


def two_gaussian_bayes_error(distance: float, sigma: float) -> float:
    """Bayes error of two equal-prior isotropic gaussians at this mean distance."""
    if sigma == 0:
        return 0.0
    return 0.5 * math.erfc(distance / (2.0 * sigma) / math.sqrt(2.0))


def _rotate_square_image(flat: np.ndarray, side: int, angle: float) -> np.ndarray:
    """Nearest-neighbour rotation about the image centre; out-of-frame pixels are 0."""
    img = flat.reshape(side, side)
    out = np.zeros_like(img)
    c = (side - 1) / 2.0
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    rr, cc = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    # inverse map: rotate target coords back into the source frame
    src_r = cos_a * (rr - c) + sin_a * (cc - c) + c
    src_c = -sin_a * (rr - c) + cos_a * (cc - c) + c
    sr = np.rint(src_r).astype(int)
    sc = np.rint(src_c).astype(int)
    ok = (sr >= 0) & (sr < side) & (sc >= 0) & (sc < side)
    out[ok] = img[sr[ok], sc[ok]]
    return out.reshape(-1)


class DriftStream:
    """Passes the base stream through unchanged until at_step, then applies one
    fixed transform to every later example.

    permute_features: one random feature permutation (covariate drift).
    rotate: one random angle in (-pi, pi]; 2-D features rotate about the
        cube centre (clamped back to [0,1]), square-image features rotate
        about the image centre. real drift is label_swap: a fixed label
        permutation.
    """

    def __init__(self, base, kind: str, at_step: int, *, seed: int = 0, label_permutation=None):
        if kind not in DRIFT_KINDS:
            raise ConfigError(f"unknown drift kind {kind!r}; choose from {DRIFT_KINDS}")
        if at_step < 0:
            raise ConfigError("at_step must be >= 0")
        self.base = base
        self.kind = kind
        self.at_step = int(at_step)
        self.seed = int(seed)
        if kind == "label_swap":
            if label_permutation is None:
                raise ConfigError("label_swap needs a label permutation")
            perm = [int(v) for v in label_permutation]
            if sorted(perm) != list(range(len(perm))):
                raise ConfigError(f"{label_permutation!r} is not a permutation of 0..{len(perm) - 1}")
            self.label_permutation = perm
        else:
            self.label_permutation = None

    def _feature_transform(self, dim: int):
        rng = make_rng(self.seed)
        if self.kind == "permute_features":
            perm = rng.permutation(dim)
            return lambda x: x[perm]
        # rotate: one angle in (-pi, pi]
        angle = math.pi - rng.random() * 2.0 * math.pi
        if dim == 2:
            cos_a, sin_a = math.cos(angle), math.sin(angle)
            rot = np.array([[cos_a, -sin_a], [sin_a, cos_a]])
            return lambda x: np.clip(rot @ (x - 0.5) + 0.5, 0.0, 1.0)
        side = math.isqrt(dim)
        if side * side != dim:
            raise ConfigError(f"rotate needs 2-D or square-image features, got dim {dim}")
        return lambda x: _rotate_square_image(x, side, angle)

    def __iter__(self):
        transform = None
        for idx, ex in enumerate(iter(self.base)):
            if idx < self.at_step:
                yield ex
                continue
            if self.kind == "label_swap":
                if ex.y >= len(self.label_permutation):
                    raise DataError(f"record {idx}: label {ex.y} outside the given permutation")
                yield Example(ex.x, self.label_permutation[ex.y])
            else:
                if transform is None:
                    transform = self._feature_transform(ex.x.shape[0])
                yield Example(transform(ex.x), ex.y)


def apply_drift(stream, kind: str, at_step: int, **kwargs) -> DriftStream:
    return DriftStream(stream, kind, at_step, **kwargs)


class NoisyStream:
    """Applies a corruption policy to every example's features; labels untouched."""

    def __init__(self, base, policy: CorruptionPolicy, seed: int = 0):
        self.base = base
        self.policy = policy
        self.seed = int(seed)

    def __iter__(self):
        if self.policy.kind == "none":
            yield from iter(self.base)
            return
        rng = make_rng(self.seed)
        for ex in iter(self.base):
            yield Example(corrupt(ex.x, self.policy, rng), ex.y)


def inject_noise(stream, policy: CorruptionPolicy, seed: int = 0) -> NoisyStream:
    return NoisyStream(stream, policy, seed)
