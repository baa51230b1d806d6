"""Pretrained backbone registry: pooled-feature modules over torchvision.

Every backbone exposes the same surface: a module mapping a preprocessed
image batch to globally pooled activations of width ``pooled_width``,
where the width is read from the model definition's own metadata at
runtime (classifier input width or transformer hidden size), never
hard-coded.

``xception`` and ``inception_resnet_v2`` are accepted names but need the
optional ``timm`` package; without it they raise
:class:`BackboneUnavailableError`.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

SUPPORTED_BACKBONES = (
    "densenet201",
    "efficientnet_b0",
    "inception_resnet_v2",
    "mobilenet_v2",
    "resnet152",
    "xception",
    "vit_l16",
)

_DEFAULT_INPUT_SIZE = {
    "densenet201": 224,
    "efficientnet_b0": 224,
    "inception_resnet_v2": 299,
    "mobilenet_v2": 224,
    "resnet152": 224,
    "xception": 299,
    "vit_l16": 224,
}


class BackboneUnavailableError(RuntimeError):
    """The backbone name is valid but no loadable implementation exists in
    this environment."""


@dataclass(frozen=True)
class BackboneSpec:
    """Which pretrained network to use and how to feed it."""

    name: str
    weights_tag: str = "imagenet"
    input_size: int | None = None
    pooling: str = "global_average"

    def __post_init__(self) -> None:
        if self.name not in SUPPORTED_BACKBONES:
            raise ValueError(
                f"unsupported backbone {self.name!r}; expected one of "
                f"{', '.join(SUPPORTED_BACKBONES)}"
            )
        if self.weights_tag not in ("imagenet", "none"):
            raise ValueError(
                f"weights_tag must be 'imagenet' or 'none', got {self.weights_tag!r}"
            )
        if self.pooling != "global_average":
            raise ValueError(f"unsupported pooling {self.pooling!r}")
        if self.input_size is not None and self.input_size < 32:
            raise ValueError(f"input_size must be >= 32, got {self.input_size}")

    @property
    def resolved_input_size(self) -> int:
        return self.input_size or _DEFAULT_INPUT_SIZE[self.name]


class _PooledConvNet(nn.Module):
    """Feature trunk followed by global average pooling."""

    def __init__(self, trunk: nn.Module, relu_before_pool: bool = False):
        super().__init__()
        self.trunk = trunk
        self.relu_before_pool = relu_before_pool

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.trunk(x)
        if self.relu_before_pool:
            x = torch.relu(x)
        x = torch.mean(x, dim=(2, 3))
        return x


class _PooledViT(nn.Module):
    """Transformer encoder; the class-token embedding is the pooled feature."""

    def __init__(self, vit: nn.Module):
        super().__init__()
        self.vit = vit

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        v = self.vit
        x = v._process_input(x)
        cls = v.class_token.expand(x.shape[0], -1, -1)
        x = torch.cat([cls, x], dim=1)
        x = v.encoder(x)
        return x[:, 0]


def _tv_weights(spec: BackboneSpec, builder_name: str):
    if spec.weights_tag == "none":
        return None
    from torchvision.models import get_model_weights

    return get_model_weights(builder_name).IMAGENET1K_V1


def _build(spec: BackboneSpec, device: str) -> tuple[nn.Module, int]:
    from torchvision import models

    name = spec.name
    with torch.device(device):
        if name == "densenet201":
            m = models.densenet201(weights=_tv_weights(spec, "densenet201"))
            return _PooledConvNet(m.features, relu_before_pool=True), m.classifier.in_features
        if name == "efficientnet_b0":
            m = models.efficientnet_b0(weights=_tv_weights(spec, "efficientnet_b0"))
            return _PooledConvNet(m.features), m.classifier[1].in_features
        if name == "mobilenet_v2":
            m = models.mobilenet_v2(weights=_tv_weights(spec, "mobilenet_v2"))
            return _PooledConvNet(m.features), m.classifier[1].in_features
        if name == "resnet152":
            m = models.resnet152(weights=_tv_weights(spec, "resnet152"))
            trunk = nn.Sequential(
                m.conv1, m.bn1, m.relu, m.maxpool,
                m.layer1, m.layer2, m.layer3, m.layer4,
            )
            return _PooledConvNet(trunk), m.fc.in_features
        if name == "vit_l16":
            if spec.weights_tag == "none":
                m = models.vit_l_16(weights=None, image_size=spec.resolved_input_size)
            else:
                # published weights fix the token grid, so the input size
                # must stay at the architecture default
                m = models.vit_l_16(weights=models.ViT_L_16_Weights.IMAGENET1K_V1)
            return _PooledViT(m), m.hidden_dim

    if name in ("xception", "inception_resnet_v2"):
        try:
            import timm
        except ImportError:
            raise BackboneUnavailableError(
                f"{name} needs the optional 'timm' package, which is not installed"
            ) from None
        timm_name = {"xception": "legacy_xception", "inception_resnet_v2": "inception_resnet_v2"}[name]
        m = timm.create_model(
            timm_name, pretrained=spec.weights_tag == "imagenet", num_classes=0
        ).to(device)
        return m, m.num_features

    raise BackboneUnavailableError(f"no loader for backbone {name!r}")


def pooled_width(spec: BackboneSpec) -> int:
    """Pooled feature width from the model definition, without allocating
    real parameter storage (meta-device construction) or touching weights."""
    bare = BackboneSpec(spec.name, "none", spec.input_size, spec.pooling)
    _, width = _build(bare, device="meta")
    return int(width)


def load_backbone(spec: BackboneSpec, seed: int = 0) -> tuple[nn.Module, int]:
    """Instantiate the pooled-feature module on CPU.

    ``weights_tag='imagenet'`` downloads published weights (needs network
    access); ``'none'`` initializes randomly from ``seed``, which keeps
    repeated extractions bit-identical.
    """
    torch.manual_seed(seed & 0xFFFF_FFFF)
    model, width = _build(spec, device="cpu")
    model.eval()
    return model, int(width)
