import json
from pathlib import Path

import numpy as np
import pytest

from toptune import FeatureSet

DATA_DIR = Path(__file__).parent / "data"


def make_blobs(n: int, d: int, num_classes: int, separation: float, seed: int) -> FeatureSet:
    """Gaussian blobs with unit within-class std and centers ``separation``
    apart (pairwise, in feature-space distance)."""
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((num_classes, d))
    # place centers on a simplex-ish shell so pairwise distances ~ separation
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    centers *= separation / np.sqrt(2.0)
    labels = rng.integers(0, num_classes, n)
    features = centers[labels] + rng.standard_normal((n, d))
    return FeatureSet(features.astype(np.float32), labels, num_classes)


def random_featureset(n: int, d: int, num_classes: int, seed: int) -> FeatureSet:
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, d)).astype(np.float32)
    labels = rng.integers(0, num_classes, n)
    return FeatureSet(features, labels, num_classes)


@pytest.fixture(scope="session")
def table1_rows() -> list[dict]:
    with open(DATA_DIR / "table1.json", "r", encoding="utf-8") as fh:
        return json.load(fh)["rows"]
