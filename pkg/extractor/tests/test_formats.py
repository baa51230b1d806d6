"""The byte contract with the classifier library: files written here must
parse there with bit-identical content."""

import numpy as np
import pytest

from ttf_extractor import write_ttf1

toptune = pytest.importorskip("toptune")


def manifest(n_classes: int) -> dict:
    return {
        "dataset_name": "toy",
        "class_names": [f"c{i}" for i in range(n_classes)],
        "backbone_name": "mobilenet_v2[none]",
        "preprocessing_tag": "resize64-centercrop64-imagenet-norm",
    }


class TestCrossPackageRoundTrip:
    def test_bit_identical_read_back(self, tmp_path):
        rng = np.random.default_rng(5)
        features = (rng.standard_normal((17, 9)) * 3).astype(np.float32)
        labels = rng.integers(0, 4, 17)
        path = tmp_path / "x.ttf1"
        write_ttf1(features, labels, 4, manifest(4), path)

        fs, man = toptune.read_feature_file(path)
        assert fs.features.tobytes() == features.tobytes()
        assert np.array_equal(fs.labels, labels)
        assert fs.num_classes == 4
        assert man.dataset_name == "toy"
        assert man.backbone_name == "mobilenet_v2[none]"
        assert man.class_names == ("c0", "c1", "c2", "c3")

    def test_header_byte_layout(self, tmp_path):
        features = np.arange(6, dtype=np.float32).reshape(2, 3)
        path = tmp_path / "h.ttf1"
        write_ttf1(features, np.array([0, 1]), 2, manifest(2), path)
        blob = path.read_bytes()
        assert len(blob) == 56
        assert blob[:4] == b"TTF1"
        assert int.from_bytes(blob[4:8], "little") == 1
        assert int.from_bytes(blob[8:16], "little") == 2
        assert int.from_bytes(blob[16:20], "little") == 3
        assert int.from_bytes(blob[20:24], "little") == 2


class TestWriterValidation:
    def test_rejects_label_out_of_range(self, tmp_path):
        with pytest.raises(ValueError):
            write_ttf1(np.zeros((2, 2), np.float32), np.array([0, 2]), 2,
                       manifest(2), tmp_path / "bad.ttf1")
        assert not (tmp_path / "bad.ttf1").exists()

    def test_rejects_non_finite(self, tmp_path):
        feats = np.zeros((2, 2), np.float32)
        feats[0, 0] = np.inf
        with pytest.raises(ValueError):
            write_ttf1(feats, np.array([0, 1]), 2, manifest(2), tmp_path / "nan.ttf1")

    def test_rejects_incomplete_manifest(self, tmp_path):
        with pytest.raises(ValueError, match="manifest"):
            write_ttf1(np.zeros((1, 1), np.float32), np.array([0]), 1,
                       {"dataset_name": "x"}, tmp_path / "m.ttf1")
