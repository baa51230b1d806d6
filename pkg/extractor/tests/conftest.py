from pathlib import Path

import numpy as np
import pytest
from PIL import Image


def build_image_tree(root: Path, classes: dict[str, int], side: int = 56, seed: int = 0) -> Path:
    """Synthetic one-subfolder-per-class image tree with noise PNGs."""
    rng = np.random.default_rng(seed)
    for cls, count in classes.items():
        d = root / cls
        d.mkdir(parents=True, exist_ok=True)
        for i in range(count):
            arr = rng.integers(0, 256, (side, side, 3), dtype=np.uint8)
            Image.fromarray(arr).save(d / f"img_{i:03d}.png")
    return root


@pytest.fixture(scope="session")
def toy_tree(tmp_path_factory) -> Path:
    """60 images, 3 balanced classes."""
    root = tmp_path_factory.mktemp("images")
    return build_image_tree(root, {"alpha": 20, "beta": 20, "gamma": 20})
