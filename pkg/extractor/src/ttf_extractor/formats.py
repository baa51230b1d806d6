"""TTF1 feature-file writer.

Independent implementation of the byte contract consumed by the kernel
classifier library: little-endian ``TTF1`` magic, u32 version, u64 n,
u32 d, u32 C, n*d row-major float32 features, n u32 labels, plus a JSON
sidecar manifest at ``<path>.json``.
"""

from __future__ import annotations

import json
import struct

import numpy as np

_MAGIC = b"TTF1"
_VERSION = 1
_HEADER = struct.Struct("<4sIQII")


def write_ttf1(
    features: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    manifest: dict,
    path,
) -> None:
    """Write features/labels in the TTF1 layout with its sidecar manifest.

    Everything is validated before the file is opened.
    """
    features = np.ascontiguousarray(features, dtype="<f4")
    labels = np.asarray(labels)
    if features.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {features.shape}")
    n, d = features.shape
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if labels.shape != (n,):
        raise ValueError(f"labels shape {labels.shape} does not match n={n}")
    if num_classes < 1:
        raise ValueError(f"num_classes must be >= 1, got {num_classes}")
    if labels.min() < 0 or labels.max() >= num_classes:
        raise ValueError(f"labels must lie in [0, {num_classes})")
    if not np.isfinite(features).all():
        raise ValueError("features contain non-finite values")
    required = {"dataset_name", "class_names", "backbone_name", "preprocessing_tag"}
    missing = required - manifest.keys()
    if missing:
        raise ValueError(f"manifest is missing keys {sorted(missing)}")
    if len(manifest["class_names"]) != num_classes:
        raise ValueError("manifest class_names length must equal num_classes")

    sidecar = {
        "dataset_name": manifest["dataset_name"],
        "class_names": list(manifest["class_names"]),
        "backbone_name": manifest["backbone_name"],
        "preprocessing_tag": manifest["preprocessing_tag"],
        "n": n,
        "d": d,
        "C": num_classes,
    }
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, n, d, num_classes))
        fh.write(features.tobytes())
        fh.write(labels.astype("<u4").tobytes())
    with open(f"{path}.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
