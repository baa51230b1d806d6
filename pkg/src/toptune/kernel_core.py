"""Gaussian kernel evaluation, scalar and blocked.

The blocked path computes squared distances through the expansion
``|x - z|^2 = |x|^2 + |z|^2 - 2 x.z`` so the dominant cost is one matrix
multiply per row block; tiny negative distances produced by cancellation
are clamped to zero before exponentiation. All accumulation happens in
float64 regardless of the input dtype.

Repeated calls with identical arguments are bit-identical (fixed block
schedule, fixed reduction order). Results for *different* block sizes
agree to 1e-12 relative, not bitwise: that is the contract callers get.
For a bitwise batching-invariant path see :func:`kernel_row`, which
evaluates one row at a time with shapes that do not depend on the batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["KernelParams", "gaussian_kernel", "kernel_block", "kernel_row"]

DEFAULT_BLOCK_ROWS = 512


@dataclass(frozen=True)
class KernelParams:
    """Gaussian kernel width gamma: k(z, z') = exp(-|z - z'|^2 / (2 gamma^2))."""

    gamma: float

    def __post_init__(self) -> None:
        g = float(self.gamma)
        if not math.isfinite(g) or g <= 0.0:
            raise ValidationError(f"gamma must be positive and finite, got {self.gamma}")
        object.__setattr__(self, "gamma", g)

    @property
    def scale(self) -> float:
        """Multiplier applied to squared distances: 1 / (2 gamma^2)."""
        return 1.0 / (2.0 * self.gamma * self.gamma)


def gaussian_kernel(z, z2, params: KernelParams) -> float:
    """Scalar kernel value for two vectors, via the direct squared difference.

    This is the brute-force reference the blocked path is tested against.
    """
    z = np.asarray(z, dtype=np.float64)
    z2 = np.asarray(z2, dtype=np.float64)
    if z.ndim != 1 or z2.ndim != 1:
        raise ValidationError("inputs must be 1-D vectors")
    if z.shape[0] != z2.shape[0]:
        raise ValidationError(
            f"dimension mismatch: {z.shape[0]} vs {z2.shape[0]}"
        )
    if not (np.isfinite(z).all() and np.isfinite(z2).all()):
        raise ValidationError("inputs contain non-finite values")
    diff = z - z2
    return float(np.exp(-params.scale * np.dot(diff, diff)))


def _as_f64(a, name: str) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix, got shape {a.shape}")
    return a


def kernel_block(X, Z, params: KernelParams, block_rows: int = DEFAULT_BLOCK_ROWS) -> np.ndarray:
    """Dense kernel matrix K[i, j] = k(X_i, Z_j) of shape (a, b).

    Rows of X are processed in blocks of ``block_rows``. When X and Z are
    the same object the diagonal is set to exactly 1. The output is
    allocated up-front; an allocation failure raises before any entry is
    written, never returning partial output.
    """
    same = X is Z
    Xc = _as_f64(X, "X")
    Zc = Xc if same else _as_f64(Z, "Z")
    if Xc.shape[1] != Zc.shape[1]:
        raise ValidationError(
            f"dimension mismatch: X has d={Xc.shape[1]}, Z has d={Zc.shape[1]}"
        )
    if block_rows < 1:
        raise ValidationError(f"block_rows must be >= 1, got {block_rows}")
    a, b = Xc.shape[0], Zc.shape[0]
    out = np.empty((a, b), dtype=np.float64)
    if a == 0 or b == 0:
        return out

    scale = params.scale
    xn = np.einsum("ij,ij->i", Xc, Xc)
    zn = xn if same else np.einsum("ij,ij->i", Zc, Zc)
    Zt = Zc.T
    for lo in range(0, a, block_rows):
        hi = min(lo + block_rows, a)
        g = Xc[lo:hi] @ Zt
        d2 = xn[lo:hi, None] + zn[None, :] - 2.0 * g
        np.maximum(d2, 0.0, out=d2)
        d2 *= -scale
        np.exp(d2, out=out[lo:hi])
    if same:
        np.fill_diagonal(out, 1.0)
    return out


def kernel_row(x, Zc: np.ndarray, params: KernelParams, z_norms: np.ndarray) -> np.ndarray:
    """Kernel values between one vector and every row of Zc, shape (b,).

    All intermediate shapes depend only on (b, d), so the result for a
    given row is bitwise identical no matter how callers batch their
    queries. ``Zc`` must already be float64 C-contiguous and ``z_norms``
    its per-row squared norms; callers hoist both out of their row loops.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    d2 = z_norms + np.dot(x, x) - 2.0 * (Zc @ x)
    np.maximum(d2, 0.0, out=d2)
    d2 *= -params.scale
    return np.exp(d2, out=d2)
