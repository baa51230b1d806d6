"""Dump pooled backbone activations for an image folder into a TTF1 file."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .backbones import BackboneSpec, load_backbone
from .dataset import load_batch, preprocessing_tag, scan_image_folder
from .formats import write_ttf1

logger = logging.getLogger(__name__)

EXTRACTION_BATCH = 32


@dataclass(frozen=True)
class ExtractionSummary:
    n: int
    d: int
    num_classes: int
    skipped: int
    out_path: str


def extract_features(
    spec: BackboneSpec,
    image_dir,
    out_path,
    seed: int = 0,
    batch_size: int = EXTRACTION_BATCH,
) -> ExtractionSummary:
    """Run the backbone over every image (sorted paths, fixed batch size)
    and write features plus labels as TTF1 with a sidecar manifest.

    Unreadable images are skipped with a warning and counted in the
    summary; inference runs in eval mode under no_grad, so two runs over
    the same directory produce bit-identical files.
    """
    folder = scan_image_folder(image_dir)
    model, width = load_backbone(spec, seed=seed)
    size = spec.resolved_input_size

    chunks: list[np.ndarray] = []
    labels: list[int] = []
    skipped = 0
    with torch.no_grad():
        for lo in range(0, folder.n, batch_size):
            batch_paths = list(folder.paths[lo : lo + batch_size])
            batch, kept, kept_pos = load_batch(batch_paths, size)
            skipped += len(batch_paths) - len(kept)
            if not kept:
                continue
            feats = model(batch)
            if feats.ndim != 2 or feats.shape[1] != width:
                raise RuntimeError(
                    f"backbone produced shape {tuple(feats.shape)}, expected "
                    f"(batch, {width})"
                )
            chunks.append(feats.to(torch.float32).numpy())
            labels.extend(int(folder.labels[lo + pos]) for pos in kept_pos)
    if skipped:
        logger.warning("skipped %d unreadable image(s)", skipped)
    if not labels:
        raise ValueError(f"no readable images under {image_dir}")

    features = np.vstack(chunks)
    manifest = {
        "dataset_name": Path(image_dir).name,
        "class_names": list(folder.class_names),
        "backbone_name": f"{spec.name}[{spec.weights_tag}]",
        "preprocessing_tag": preprocessing_tag(size),
    }
    write_ttf1(features, np.asarray(labels), folder.num_classes, manifest, out_path)
    return ExtractionSummary(
        n=features.shape[0],
        d=features.shape[1],
        num_classes=folder.num_classes,
        skipped=skipped,
        out_path=str(out_path),
    )
