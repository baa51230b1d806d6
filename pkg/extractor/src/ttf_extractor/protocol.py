"""Fine-tuning baseline protocol constants and arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass


def batch_size(n: int) -> int:
    """Gradient-descent batch size from the training-set size:
    floor(2^(2 log10(n) - 1)), clamped to at least 1.

    Reference vector: 1000 -> 32, 50000 -> 337, 100000 -> 512.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    return max(1, math.floor(2.0 ** (2.0 * math.log10(n) - 1.0)))


@dataclass(frozen=True)
class FineTuneProtocol:
    """The baseline training recipe. Defaults are the protocol's fixed
    values; override fields explicitly only when you mean to deviate.

    Validation runs once per epoch; ``patience`` counts consecutive
    validations without a new best validation loss. The batch size is
    computed from the training-set size, never set directly.
    """

    max_steps: int = 20_000
    patience: int = 10
    learning_rates: tuple[float, ...] = (0.1, 0.01)
    optimizer: str = "sgd"
    val_fraction: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "learning_rates", tuple(float(lr) for lr in self.learning_rates)
        )
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if not self.learning_rates or any(lr <= 0 for lr in self.learning_rates):
            raise ValueError("learning_rates must be non-empty and positive")
        if self.optimizer != "sgd":
            raise ValueError(f"unsupported optimizer {self.optimizer!r}")
        if not (0.0 < self.val_fraction < 1.0):
            raise ValueError(f"val_fraction must lie in (0, 1), got {self.val_fraction}")

    def tag(self, seed: int, b: int) -> str:
        lrs = ",".join(f"{lr:g}" for lr in self.learning_rates)
        return (
            f"sgd-lr{{{lrs}}}-b{b}-patience{self.patience}"
            f"-maxsteps{self.max_steps}-seed{seed}"
        )
