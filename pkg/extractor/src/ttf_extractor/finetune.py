"""Gradient-descent fine-tuning baseline.

One training run per learning rate, each updating every weight of
(backbone + linear head) with plain SGD. Validation runs once per epoch
on a held-out fraction of the training images; a run stops early when
the validation loss has not improved for ``patience`` consecutive
validations, or at the step cap. The reported accuracy is the best
validation accuracy over the surviving runs and the reported time is
the sum of wall time across all learning rates.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .backbones import BackboneSpec, load_backbone
from .dataset import load_batch, scan_image_folder
from .protocol import FineTuneProtocol, batch_size

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunDiagnostics:
    learning_rate: float
    steps: int
    epochs: int
    stop_reason: str  # "patience" | "max_steps" | "diverged"
    best_val_loss: float
    best_val_accuracy: float
    wall_time_s: float


@dataclass(frozen=True)
class FineTuneResult:
    dataset: str
    acc_fine_percent: float
    time_fine_s: float
    protocol_tag: str
    runs: tuple[RunDiagnostics, ...]

    def to_baseline_record(self) -> dict:
        return {
            "dataset": self.dataset,
            "acc_fine_percent": self.acc_fine_percent,
            "time_fine_s": self.time_fine_s,
            "protocol_tag": self.protocol_tag,
        }


def _stratified_holdout(labels: np.ndarray, fraction: float, seed: int):
    """Per-class split of indices into (train, val); every class keeps at
    least one sample on each side when it has two or more."""
    rng = np.random.default_rng(seed & 0xFFFF_FFFF_FFFF_FFFF)
    train_idx, val_idx = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        k = max(1, int(round(idx.size * fraction))) if idx.size > 1 else 0
        val_idx.extend(idx[:k])
        train_idx.extend(idx[k:])
    return np.sort(np.asarray(train_idx)), np.sort(np.asarray(val_idx))


class _Classifier(nn.Module):
    def __init__(self, backbone: nn.Module, width: int, num_classes: int):
        super().__init__()
        self.backbone = backbone
        self.head = nn.Linear(width, num_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.backbone(x))


def _load_split(paths, labels, input_size: int):
    batch, kept, kept_pos = load_batch(list(paths), input_size)
    if not kept:
        raise ValueError("no readable images in split")
    y = torch.as_tensor(np.asarray([labels[p] for p in kept_pos]), dtype=torch.int64)
    return batch, y


def _validate(model: nn.Module, x: torch.Tensor, y: torch.Tensor, loss_fn) -> tuple[float, float]:
    model.eval()
    with torch.no_grad():
        logits = model(x)
        loss = float(loss_fn(logits, y))
        acc = float((logits.argmax(dim=1) == y).to(torch.float64).mean())
    model.train()
    return loss, acc


def _single_run(
    spec: BackboneSpec,
    num_classes: int,
    lr: float,
    b: int,
    protocol: FineTuneProtocol,
    seed: int,
    train_x: torch.Tensor,
    train_y: torch.Tensor,
    val_x: torch.Tensor,
    val_y: torch.Tensor,
) -> RunDiagnostics:
    t0 = time.perf_counter()
    backbone, width = load_backbone(spec, seed=seed)
    torch.manual_seed((seed ^ 0x5EED) & 0xFFFF_FFFF)
    model = _Classifier(backbone, width, num_classes)
    model.train()
    opt = torch.optim.SGD(model.parameters(), lr=lr)
    loss_fn = nn.CrossEntropyLoss()
    order_rng = np.random.default_rng((seed + 1) & 0xFFFF_FFFF)

    n = train_x.shape[0]
    best_val_loss = math.inf
    best_val_acc = 0.0
    bad_validations = 0
    steps = 0
    epochs = 0
    stop = "max_steps"

    while steps < protocol.max_steps:
        perm = order_rng.permutation(n)
        diverged = False
        for lo in range(0, n, b):
            idx = torch.as_tensor(perm[lo : lo + b])
            opt.zero_grad()
            loss = loss_fn(model(train_x[idx]), train_y[idx])
            if not torch.isfinite(loss):
                diverged = True
                break
            loss.backward()
            opt.step()
            steps += 1
            if steps >= protocol.max_steps:
                break
        epochs += 1
        if diverged:
            stop = "diverged"
            break
        val_loss, val_acc = _validate(model, val_x, val_y, loss_fn)
        best_val_acc = max(best_val_acc, val_acc)
        if val_loss < best_val_loss:
            best_val_loss = val_loss
            bad_validations = 0
        else:
            bad_validations += 1
            if bad_validations >= protocol.patience:
                stop = "patience"
                break

    return RunDiagnostics(
        learning_rate=lr,
        steps=steps,
        epochs=epochs,
        stop_reason=stop,
        best_val_loss=best_val_loss,
        best_val_accuracy=best_val_acc,
        wall_time_s=time.perf_counter() - t0,
    )


def fine_tune_baseline(
    spec: BackboneSpec,
    image_dir,
    protocol: FineTuneProtocol = FineTuneProtocol(),
    seed: int = 0,
) -> FineTuneResult:
    """Run the baseline once per learning rate and summarize.

    A diverged run (non-finite loss) is logged and excluded from the
    accuracy; its wall time still counts. All runs diverging is an error.
    """
    folder = scan_image_folder(image_dir)
    train_idx, val_idx = _stratified_holdout(folder.labels, protocol.val_fraction, seed)
    if train_idx.size < 2 or val_idx.size < 1:
        raise ValueError(
            f"dataset too small to hold out validation data "
            f"(train={train_idx.size}, val={val_idx.size})"
        )
    size = spec.resolved_input_size
    train_x, train_y = _load_split(
        [folder.paths[i] for i in train_idx], folder.labels[train_idx], size
    )
    val_x, val_y = _load_split(
        [folder.paths[i] for i in val_idx], folder.labels[val_idx], size
    )
    b = batch_size(train_x.shape[0])

    runs = []
    for lr in protocol.learning_rates:
        run = _single_run(
            spec, folder.num_classes, lr, b, protocol, seed,
            train_x, train_y, val_x, val_y,
        )
        if run.stop_reason == "diverged":
            logger.warning("learning rate %g diverged after %d steps", lr, run.steps)
        runs.append(run)

    surviving = [r for r in runs if r.stop_reason != "diverged"]
    if not surviving:
        raise RuntimeError("every learning rate diverged; no baseline accuracy")
    best = max(surviving, key=lambda r: r.best_val_accuracy)
    return FineTuneResult(
        dataset=Path(image_dir).name,
        acc_fine_percent=best.best_val_accuracy * 100.0,
        time_fine_s=sum(r.wall_time_s for r in runs),
        protocol_tag=protocol.tag(seed, b),
        runs=tuple(runs),
    )
