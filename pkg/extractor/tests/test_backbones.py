import pytest

from ttf_extractor import (
    SUPPORTED_BACKBONES,
    BackboneSpec,
    BackboneUnavailableError,
    pooled_width,
)


class TestBackboneSpec:
    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unsupported backbone"):
            BackboneSpec("resnet51")

    def test_all_supported_names_construct(self):
        for name in SUPPORTED_BACKBONES:
            BackboneSpec(name, "none")

    def test_weights_tag_validated(self):
        with pytest.raises(ValueError):
            BackboneSpec("densenet201", weights_tag="cifar")


class TestPooledWidths:
    """Widths come from each model definition's own metadata at runtime
    (classifier input width / transformer hidden size), not constants."""

    @pytest.mark.parametrize(
        "name,width",
        [
            ("densenet201", 1920),
            ("vit_l16", 1024),
            ("efficientnet_b0", 1280),
            ("mobilenet_v2", 1280),
            ("resnet152", 2048),
        ],
    )
    def test_width_matches_model_metadata(self, name, width):
        assert pooled_width(BackboneSpec(name, "none")) == width

    def test_timm_only_backbones_raise_cleanly_when_unavailable(self):
        pytest.importorskip("torch")
        try:
            import timm  # noqa: F401
            pytest.skip("timm installed; these backbones are available")
        except ImportError:
            pass
        for name in ("xception", "inception_resnet_v2"):
            with pytest.raises(BackboneUnavailableError, match="timm"):
                pooled_width(BackboneSpec(name, "none"))
