"""Image-folder scanning and deterministic preprocessing.

Directories follow the one-subfolder-per-class convention. Class indices
come from sorted class-directory names and rows follow sorted relative
paths, so two scans of the same tree always agree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision.transforms import functional as TF

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".gif", ".webp")


@dataclass(frozen=True)
class ImageFolder:
    root: Path
    class_names: tuple[str, ...]
    paths: tuple[Path, ...]
    labels: np.ndarray

    @property
    def n(self) -> int:
        return len(self.paths)

    @property
    def num_classes(self) -> int:
        return len(self.class_names)


def scan_image_folder(root) -> ImageFolder:
    """Enumerate ``root/<class>/<image>`` in sorted order.

    Raises on a missing root, no class directories, or a class directory
    with no image files.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"image directory {root} does not exist")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise ValueError(f"{root} contains no class subdirectories")
    class_names = tuple(p.name for p in class_dirs)
    paths: list[Path] = []
    labels: list[int] = []
    for idx, cdir in enumerate(class_dirs):
        files = sorted(
            p for p in cdir.iterdir()
            if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
        )
        if not files:
            raise ValueError(f"class directory {cdir} contains no images")
        paths.extend(files)
        labels.extend([idx] * len(files))
    return ImageFolder(
        root=root,
        class_names=class_names,
        paths=tuple(paths),
        labels=np.asarray(labels, dtype=np.int64),
    )


# ImageNet channel statistics, the conventional inference normalization.
_MEAN = (0.485, 0.456, 0.406)
_STD = (0.229, 0.224, 0.225)


def preprocessing_tag(input_size: int) -> str:
    return f"resize{input_size}-centercrop{input_size}-imagenet-norm"


def load_image_tensor(path: Path, input_size: int) -> torch.Tensor:
    """One image as a normalized (3, S, S) float tensor: shorter side
    resized to S (bilinear, antialiased), center-cropped, scaled to [0, 1],
    channel-normalized."""
    with Image.open(path) as img:
        img = img.convert("RGB")
        t = TF.pil_to_tensor(img)
    t = TF.resize(t, [input_size], antialias=True)
    t = TF.center_crop(t, [input_size, input_size])
    t = t.to(torch.float32) / 255.0
    return TF.normalize(t, list(_MEAN), list(_STD))


def load_batch(
    paths: list[Path], input_size: int
) -> tuple[torch.Tensor, list[Path], list[int]]:
    """Load a batch, skipping unreadable files with a warning.

    Returns (stacked tensor, kept paths, kept positions-within-batch).
    """
    tensors, kept, kept_pos = [], [], []
    for pos, path in enumerate(paths):
        try:
            tensors.append(load_image_tensor(path, input_size))
        except (OSError, Image.DecompressionBombError) as exc:
            logger.warning("skipping unreadable image %s (%s)", path, exc)
            continue
        kept.append(path)
        kept_pos.append(pos)
    if tensors:
        return torch.stack(tensors), kept, kept_pos
    return torch.empty((0, 3, input_size, input_size)), kept, kept_pos
