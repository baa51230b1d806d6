"""Feature files, dataset manifests, target encoding, and stratified splits.

The on-disk feature container ("TTF1") is a little-endian binary layout:

========  ======  =====================================================
offset    size    field
========  ======  =====================================================
0         4       magic, ASCII ``TTF1``
4         4       u32 format version (currently 1)
8         8       u64 n, number of samples
16        4       u32 d, feature dimension
20        4       u32 C, number of classes
24        n*d*4   features, row-major IEEE-754 float32
24+n*d*4  n*4     labels, u32 class indices in [0, C)
========  ======  =====================================================

A JSON sidecar manifest lives at the same path with ``".json"`` appended,
a UTF-8 object with keys ``dataset_name``, ``class_names``,
``backbone_name``, ``preprocessing_tag``, ``n``, ``d``, ``C``.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import FeatureFileError, ValidationError

_MAGIC = b"TTF1"
_VERSION = 1
_HEADER = struct.Struct("<4sIQII")

__all__ = [
    "FeatureSet",
    "DatasetManifest",
    "SplitPlan",
    "write_feature_file",
    "read_feature_file",
    "stratified_kfold",
    "encode_targets",
]


def _locked(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FeatureSet:
    """An n-by-d float32 feature matrix with integer class labels.

    Immutable after construction; the backing arrays are copied and
    marked read-only, so instances are safe to share across threads.
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self) -> None:
        feats = np.array(self.features, dtype=np.float32, copy=True, order="C")
        labs = np.array(self.labels, dtype=np.int64, copy=True)
        if feats.ndim != 2:
            raise ValidationError(f"features must be 2-D, got shape {feats.shape}")
        if labs.ndim != 1:
            raise ValidationError(f"labels must be 1-D, got shape {labs.shape}")
        n, d = feats.shape
        if n < 1 or d < 1:
            raise ValidationError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
        if labs.shape[0] != n:
            raise ValidationError(
                f"labels length {labs.shape[0]} does not match n={n}"
            )
        if self.num_classes < 1:
            raise ValidationError(f"num_classes must be >= 1, got {self.num_classes}")
        if labs.size and (labs.min() < 0 or labs.max() >= self.num_classes):
            raise ValidationError(
                f"labels must lie in [0, {self.num_classes}), "
                f"found range [{labs.min()}, {labs.max()}]"
            )
        if not np.isfinite(feats).all():
            raise ValidationError("features contain non-finite values")
        object.__setattr__(self, "features", _locked(feats))
        object.__setattr__(self, "labels", _locked(labs))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, indices: np.ndarray) -> "FeatureSet":
        """New FeatureSet holding the given rows (class count unchanged)."""
        return FeatureSet(self.features[indices], self.labels[indices], self.num_classes)


@dataclass(frozen=True)
class DatasetManifest:
    """Provenance record paired with a feature file: where the rows came
    from and which backbone / preprocessing produced them."""

    dataset_name: str
    class_names: tuple[str, ...]
    backbone_name: str
    preprocessing_tag: str
    n: int
    d: int
    num_classes: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if len(self.class_names) != self.num_classes:
            raise ValidationError(
                f"class_names has {len(self.class_names)} entries, "
                f"expected num_classes={self.num_classes}"
            )
        if self.n < 1 or self.d < 1 or self.num_classes < 1:
            raise ValidationError("manifest n, d, num_classes must be positive")

    def check_matches(self, fs: FeatureSet) -> None:
        if (self.n, self.d, self.num_classes) != (fs.n, fs.d, fs.num_classes):
            raise ValidationError(
                f"manifest (n={self.n}, d={self.d}, C={self.num_classes}) does not "
                f"match features (n={fs.n}, d={fs.d}, C={fs.num_classes})"
            )

    def to_json_dict(self) -> dict:
        return {
            "dataset_name": self.dataset_name,
            "class_names": list(self.class_names),
            "backbone_name": self.backbone_name,
            "preprocessing_tag": self.preprocessing_tag,
            "n": self.n,
            "d": self.d,
            "C": self.num_classes,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DatasetManifest":
        try:
            return cls(
                dataset_name=obj["dataset_name"],
                class_names=tuple(obj["class_names"]),
                backbone_name=obj["backbone_name"],
                preprocessing_tag=obj["preprocessing_tag"],
                n=int(obj["n"]),
                d=int(obj["d"]),
                num_classes=int(obj["C"]),
            )
        except KeyError as exc:
            raise FeatureFileError(f"manifest is missing key {exc}") from exc


@dataclass(frozen=True)
class SplitPlan:
    """Assignment of every sample to one of k folds."""

    k: int
    assignments: np.ndarray
    seed: int = field(default=0)

    def __post_init__(self) -> None:
        a = np.array(self.assignments, dtype=np.int64, copy=True)
        if self.k < 2:
            raise ValidationError(f"fold count k must be >= 2, got {self.k}")
        if a.ndim != 1 or a.size < 1:
            raise ValidationError("assignments must be a non-empty 1-D array")
        if a.min() < 0 or a.max() >= self.k:
            raise ValidationError(f"fold ids must lie in [0, {self.k})")
        object.__setattr__(self, "assignments", _locked(a))

    @property
    def n(self) -> int:
        return self.assignments.shape[0]

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def write_feature_file(fs: FeatureSet, manifest: DatasetManifest, path) -> None:
    """Write *fs* to *path* in the TTF1 layout plus the JSON sidecar.

    All validation happens before the file is opened, so an invalid input
    never leaves a partial file behind.
    """
    manifest.check_matches(fs)
    header = _HEADER.pack(_MAGIC, _VERSION, fs.n, fs.d, fs.num_classes)
    feat_bytes = np.ascontiguousarray(fs.features, dtype="<f4").tobytes()
    label_bytes = fs.labels.astype("<u4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(feat_bytes)
        fh.write(label_bytes)
    with open(f"{path}.json", "w", encoding="utf-8") as fh:
        json.dump(manifest.to_json_dict(), fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def read_feature_file(path) -> tuple[FeatureSet, DatasetManifest]:
    """Read a TTF1 file and its sidecar manifest, validating everything:
    magic, version, declared sizes, payload length, label range, and
    feature finiteness."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != _MAGIC:
        got = blob[:4]
        raise FeatureFileError(f"{path}: bad magic {got!r}, expected {_MAGIC!r}")
    if len(blob) < _HEADER.size:
        raise FeatureFileError(
            f"{path}: truncated header, expected at least {_HEADER.size} bytes, "
            f"got {len(blob)}"
        )
    _, version, n, d, c = _HEADER.unpack_from(blob, 0)
    if version != _VERSION:
        raise FeatureFileError(f"{path}: unsupported version {version}")
    if n < 1 or d < 1 or c < 1:
        raise FeatureFileError(f"{path}: invalid header sizes n={n}, d={d}, C={c}")
    expected = _HEADER.size + n * d * 4 + n * 4
    if len(blob) != expected:
        raise FeatureFileError(
            f"{path}: truncated or oversized payload, expected {expected} bytes, "
            f"got {len(blob)}"
        )
    features = (
        np.frombuffer(blob, dtype="<f4", count=n * d, offset=_HEADER.size)
        .reshape(n, d)
    )
    labels = np.frombuffer(blob, dtype="<u4", count=n, offset=_HEADER.size + n * d * 4)
    if labels.size and labels.max() >= c:
        raise FeatureFileError(
            f"{path}: label {labels.max()} out of range for C={c}"
        )
    if not np.isfinite(features).all():
        raise FeatureFileError(f"{path}: features contain non-finite values")
    fs = FeatureSet(features, labels.astype(np.int64), c)

    manifest_path = f"{path}.json"
    try:
        with open(manifest_path, "r", encoding="utf-8") as fh:
            manifest = DatasetManifest.from_json_dict(json.load(fh))
    except FileNotFoundError:
        raise FeatureFileError(f"missing sidecar manifest {manifest_path}") from None
    except json.JSONDecodeError as exc:
        raise FeatureFileError(f"{manifest_path}: invalid JSON ({exc})") from exc
    manifest.check_matches(fs)
    return fs, manifest


def stratified_kfold(labels, k: int, seed: int) -> SplitPlan:
    """Deterministic stratified k-fold assignment.

    Each class is shuffled with the seeded generator and dealt round-robin
    across folds, so per-class fold counts differ by at most one. The fold
    offset rotates between classes to keep total fold sizes balanced.
    Classes with fewer than k samples get a best-effort assignment and a
    warning; they simply do not appear in every fold.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1 or labels.size < 2:
        raise ValidationError("labels must be a 1-D array with at least 2 entries")
    if k < 2:
        raise ValidationError(f"fold count k must be >= 2, got {k}")
    if labels.min() < 0:
        raise ValidationError("labels must be non-negative class indices")

    rng = np.random.default_rng(seed & 0xFFFF_FFFF_FFFF_FFFF)
    assignments = np.empty(labels.shape[0], dtype=np.int64)
    offset = 0
    small = []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < k:
            small.append(int(cls))
        rng.shuffle(idx)
        assignments[idx] = (offset + np.arange(idx.size)) % k
        offset = (offset + idx.size) % k
    if small:
        warnings.warn(
            f"classes {small} have fewer than k={k} samples; "
            "they will be absent from some folds",
            stacklevel=2,
        )
    return SplitPlan(k=k, assignments=assignments, seed=seed)


def encode_targets(labels, num_classes: int) -> np.ndarray:
    """One-hot target matrix: row i is 1 at labels[i], 0 elsewhere."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise ValidationError("labels must be 1-D")
    if num_classes < 1:
        raise ValidationError(f"num_classes must be >= 1, got {num_classes}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValidationError(f"labels must lie in [0, {num_classes})")
    out = np.zeros((labels.shape[0], num_classes), dtype=np.float64)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out
