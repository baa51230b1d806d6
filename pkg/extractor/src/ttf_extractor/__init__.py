"""ttf_extractor: pooled pretrained-backbone features as TTF1 files, plus
the gradient-descent fine-tuning baseline for training-time comparisons.

This package talks to the kernel-classifier library only through file
formats (TTF1 features, baseline JSON), never through imports.
"""

from .backbones import (
    SUPPORTED_BACKBONES,
    BackboneSpec,
    BackboneUnavailableError,
    load_backbone,
    pooled_width,
)
from .extract import ExtractionSummary, extract_features
from .finetune import FineTuneResult, RunDiagnostics, fine_tune_baseline
from .formats import write_ttf1
from .protocol import FineTuneProtocol, batch_size

__version__ = "0.1.0"
