"""Classifiers over fixed features.

Three estimators share one prediction surface:

* :func:`fit_exact` -- dense kernel ridge regression, the small-n oracle.
  Solves ``(K + lambda * n * I) A = Y`` by Cholesky.
* :func:`fit_nystrom` -- the production path. Restricts the solution to M
  sampled centers and solves the normal equations
  ``(K_nm^T K_nm / n + lambda * K_mm) beta = K_nm^T Y / n``
  with preconditioned conjugate gradient.
* :func:`fit_linear_ridge` -- plain linear ridge ``(X^T X + alpha I) W = X^T Y``.

Targets are one-hot rows; predicted scores are per-class affinities and
:func:`predict_labels` takes the row argmax (ties to the smallest index).

All fits are deterministic given (data, params, seed). Prediction is
evaluated row by row through :func:`toptune.kernel_core.kernel_row`, so
scores for a given query row are bitwise identical no matter how queries
are batched.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .errors import SolverError, ValidationError
from .feature_store import FeatureSet, encode_targets
from .kernel_core import KernelParams, kernel_block, kernel_row

__all__ = [
    "SolverOptions",
    "TrainingLog",
    "NystromModel",
    "ExactModel",
    "LinearModel",
    "default_num_centers",
    "sample_centers",
    "fit_exact",
    "fit_nystrom",
    "fit_linear_ridge",
    "pcg_solve",
    "predict_scores",
    "predict_labels",
    "nystrom_normal_equations",
    "save_model",
    "load_model",
]

logger = logging.getLogger(__name__)

DEFAULT_ORACLE_CAP = 4096
_JITTER_LADDER = (1e-10, 1e-8, 1e-6)


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for the Nystrom fit.

    ``num_centers=None`` applies the default rule
    ``min(n, ceil(5 * sqrt(n)) * 10, 5000)``. ``jitter`` is an initial
    diagonal stabilizer relative to the mean diagonal; on factorization
    failure it escalates through {1e-10, 1e-8, 1e-6} before giving up.
    """

    num_centers: int | None = None
    max_iter: int = 100
    tol: float = 1e-8
    seed: int = 0
    jitter: float = 0.0

    def __post_init__(self) -> None:
        if self.num_centers is not None and self.num_centers < 1:
            raise ValidationError(f"num_centers must be >= 1, got {self.num_centers}")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if not (0.0 < self.tol < 1.0):
            raise ValidationError(f"tol must lie in (0, 1), got {self.tol}")
        if self.jitter < 0.0:
            raise ValidationError(f"jitter must be >= 0, got {self.jitter}")


@dataclass(frozen=True)
class TrainingLog:
    """What the iterative solve actually did; stored on the model and
    emitted by the CLI, never silent."""

    iterations: int
    relative_residual: float
    converged: bool
    preconditioner: str
    jitter_used: float
    num_centers: int
    wall_time_s: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "relative_residual": self.relative_residual,
            "converged": self.converged,
            "preconditioner": self.preconditioner,
            "jitter_used": self.jitter_used,
            "num_centers": self.num_centers,
            "wall_time_s": self.wall_time_s,
        }


def _finite_2d(a: np.ndarray, name: str) -> np.ndarray:
    if not np.isfinite(a).all():
        raise SolverError(f"{name} contains non-finite values")
    return a


@dataclass(frozen=True)
class NystromModel:
    """M kernel centers plus an M-by-C coefficient matrix."""

    centers: np.ndarray
    coefficients: np.ndarray
    params: KernelParams
    lam: float
    training_log: TrainingLog | None = None

    def __post_init__(self) -> None:
        c = np.array(self.centers, dtype=np.float32, copy=True, order="C")
        a = np.array(self.coefficients, dtype=np.float64, copy=True, order="C")
        if c.ndim != 2 or a.ndim != 2 or c.shape[0] != a.shape[0]:
            raise ValidationError(
                f"centers {c.shape} and coefficients {a.shape} are inconsistent"
            )
        if self.lam <= 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        _finite_2d(a, "coefficients")
        c.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "coefficients", a)

    @property
    def num_centers(self) -> int:
        return self.centers.shape[0]

    @property
    def d(self) -> int:
        return self.centers.shape[1]

    @property
    def num_classes(self) -> int:
        return self.coefficients.shape[1]


@dataclass(frozen=True)
class ExactModel:
    """Dense kernel ridge model supported on every training row."""

    support: np.ndarray
    coefficients: np.ndarray
    params: KernelParams
    lam: float

    def __post_init__(self) -> None:
        s = np.array(self.support, dtype=np.float32, copy=True, order="C")
        a = np.array(self.coefficients, dtype=np.float64, copy=True, order="C")
        if s.ndim != 2 or a.ndim != 2 or s.shape[0] != a.shape[0]:
            raise ValidationError(
                f"support {s.shape} and coefficients {a.shape} are inconsistent"
            )
        if self.lam <= 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        _finite_2d(a, "coefficients")
        s.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "coefficients", a)

    @property
    def d(self) -> int:
        return self.support.shape[1]

    @property
    def num_classes(self) -> int:
        return self.coefficients.shape[1]


@dataclass(frozen=True)
class LinearModel:
    """Linear ridge classifier: scores = X W."""

    weights: np.ndarray
    alpha: float

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=np.float64, copy=True, order="C")
        if w.ndim != 2:
            raise ValidationError(f"weights must be 2-D, got shape {w.shape}")
        if self.alpha <= 0:
            raise ValidationError(f"alpha must be positive, got {self.alpha}")
        _finite_2d(w, "weights")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return self.weights.shape[0]

    @property
    def num_classes(self) -> int:
        return self.weights.shape[1]


Model = Union[NystromModel, ExactModel, LinearModel]


def default_num_centers(n: int) -> int:
    """Center count rule: min(n, ceil(5 sqrt(n)) * 10), capped at 5000."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return min(n, math.ceil(5.0 * math.sqrt(n)) * 10, 5000)


def sample_centers(fs: FeatureSet, num_centers: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniformly sample ``num_centers`` distinct training rows.

    Returns (centers, indices) with indices sorted ascending; deterministic
    for a fixed seed.
    """
    if not (1 <= num_centers <= fs.n):
        raise ValidationError(
            f"num_centers must lie in [1, n={fs.n}], got {num_centers}"
        )
    rng = np.random.default_rng(seed & 0xFFFF_FFFF_FFFF_FFFF)
    idx = np.sort(rng.choice(fs.n, size=num_centers, replace=False))
    return fs.features[idx].copy(), idx


def _cholesky_with_jitter(H: np.ndarray, initial_jitter: float = 0.0) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of H, escalating diagonal jitter on failure.

    Jitter is relative to the mean diagonal. Returns (L, jitter_used);
    raises SolverError once the ladder is exhausted. H is not modified.
    """
    mean_diag = float(np.mean(np.diag(H)))
    if not math.isfinite(mean_diag):
        raise SolverError("matrix diagonal is non-finite")
    ladder = [initial_jitter] + [j for j in _JITTER_LADDER if j > initial_jitter]
    diag_idx = np.diag_indices_from(H)
    for jit in ladder:
        if jit == 0.0:
            Hj = H
        else:
            Hj = H.copy()
            Hj[diag_idx] += jit * mean_diag
        try:
            return scipy.linalg.cholesky(Hj, lower=True), jit
        except scipy.linalg.LinAlgError:
            continue
    raise SolverError(
        f"Cholesky failed after jitter escalation up to {_JITTER_LADDER[-1]}"
    )


def fit_exact(
    fs: FeatureSet,
    params: KernelParams,
    lam: float,
    oracle_cap: int = DEFAULT_ORACLE_CAP,
) -> ExactModel:
    """Dense kernel ridge fit: solve (K + lambda n I) A = Y.

    Refuses n above ``oracle_cap`` (the dense kernel is O(n^2) memory and
    O(n^3) time). The normal-equation residual is checked to 1e-8 relative.
    """
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if fs.n > oracle_cap:
        raise ValidationError(
            f"n={fs.n} exceeds the exact-solver cap {oracle_cap}; "
            "raise oracle_cap explicitly if you really want the dense solve"
        )
    K = kernel_block(fs.features, fs.features, params)
    Y = encode_targets(fs.labels, fs.num_classes)
    H = K  # reuse the kernel buffer; it is not needed on its own
    H[np.diag_indices_from(H)] += lam * fs.n
    L, _ = _cholesky_with_jitter(H)
    A = scipy.linalg.cho_solve((L, True), Y)
    _finite_2d(A, "exact-solver coefficients")
    resid = np.linalg.norm(H @ A - Y) / np.linalg.norm(Y)
    if resid > 1e-8:
        raise SolverError(
            f"exact solve did not meet the residual contract: {resid:.3e} > 1e-8"
        )
    return ExactModel(support=fs.features, coefficients=A, params=params, lam=float(lam))


def nystrom_normal_equations(
    fs: FeatureSet,
    centers: np.ndarray,
    params: KernelParams,
    lam: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Materialized Nystrom system (H, rhs) with
    H = K_nm^T K_nm / n + lambda K_mm and rhs = K_nm^T Y / n.

    Used by tests as an independent check of the iterative path; the
    fitted solver never forms H explicitly.
    """
    K_nm = kernel_block(fs.features, centers, params)
    K_mm = kernel_block(centers, centers, params)
    Y = encode_targets(fs.labels, fs.num_classes)
    H = K_nm.T @ K_nm / fs.n + lam * K_mm
    rhs = K_nm.T @ Y / fs.n
    return H, rhs


def pcg_solve(
    apply_operator: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    apply_preconditioner: Callable[[np.ndarray], np.ndarray] | None = None,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> tuple[np.ndarray, int, float]:
    """Preconditioned conjugate gradient for SPD operators.

    ``rhs`` may be a vector or a matrix of independent right-hand sides
    (each column is driven to the tolerance). Returns
    (solution, iterations, final_relative_residual); the residual is the
    true ``|A x - b| / |b|`` (max over columns), re-verified with one
    operator application at convergence, so a recurrence that drifted
    keeps iterating instead of reporting a false success.

    Raises SolverError on non-finite iterates.
    """
    b = np.asarray(rhs, dtype=np.float64)
    single = b.ndim == 1
    B = b[:, None] if single else b
    if B.ndim != 2:
        raise ValidationError(f"rhs must be 1-D or 2-D, got shape {b.shape}")
    if not (0.0 < tol < 1.0):
        raise ValidationError(f"tol must lie in (0, 1), got {tol}")
    if max_iter < 1:
        raise ValidationError(f"max_iter must be >= 1, got {max_iter}")

    def op(V: np.ndarray) -> np.ndarray:
        W = apply_operator(V[:, 0]) if single else apply_operator(V)
        return W[:, None] if single else W

    def prec(V: np.ndarray) -> np.ndarray:
        if apply_preconditioner is None:
            return V
        W = apply_preconditioner(V[:, 0]) if single else apply_preconditioner(V)
        return W[:, None] if single else W

    b_norm = np.linalg.norm(B, axis=0)
    live = b_norm > 0.0
    safe_norm = np.where(live, b_norm, 1.0)

    X = np.zeros_like(B)
    if not live.any():
        return (X[:, 0] if single else X), 0, 0.0

    R = B.copy()
    Z = prec(R)
    P = Z.copy()
    rz = np.einsum("ij,ij->j", R, Z)

    def true_residual() -> float:
        res = np.linalg.norm(op(X) - B, axis=0) / safe_norm
        return float(res[live].max())

    iterations = 0
    for _ in range(max_iter):
        AP = op(P)
        pap = np.einsum("ij,ij->j", P, AP)
        alpha = np.where(pap > 0.0, rz / np.where(pap > 0.0, pap, 1.0), 0.0)
        X += alpha * P
        R -= alpha * AP
        iterations += 1
        res = np.linalg.norm(R, axis=0) / safe_norm
        if not np.isfinite(res).all():
            raise SolverError(
                f"conjugate gradient produced non-finite residuals at "
                f"iteration {iterations}"
            )
        if res[live].max() <= tol and true_residual() <= tol:
            break
        Z = prec(R)
        rz_new = np.einsum("ij,ij->j", R, Z)
        beta = np.where(rz > 0.0, rz_new / np.where(rz > 0.0, rz, 1.0), 0.0)
        P = Z + beta * P
        rz = rz_new

    final = true_residual()
    return (X[:, 0] if single else X), iterations, final


def _triangular_preconditioner(
    K_mm: np.ndarray, lam: float, initial_jitter: float
) -> tuple[Callable[[np.ndarray], np.ndarray], float]:
    """Cholesky preconditioner for the Nystrom normal equations.

    With T = chol(K_mm) (upper, K_mm = T^T T) and
    A = chol(T T^T / M + lambda I) (upper), the normal matrix is
    approximately T^T A^T A T, so applying (T^-1 A^-1)(A^-T T^-T) maps it
    close to the identity. Cost per apply is four triangular solves.
    """
    M = K_mm.shape[0]
    L, jit = _cholesky_with_jitter(K_mm, initial_jitter)
    T = L.T
    inner = T @ T.T
    inner /= M
    inner[np.diag_indices_from(inner)] += lam
    A = scipy.linalg.cholesky(inner, lower=False)

    def apply(v: np.ndarray) -> np.ndarray:
        s = scipy.linalg.solve_triangular(T, v, trans="T", lower=False)
        s = scipy.linalg.solve_triangular(A, s, trans="T", lower=False)
        s = scipy.linalg.solve_triangular(A, s, trans="N", lower=False)
        return scipy.linalg.solve_triangular(T, s, trans="N", lower=False)

    return apply, jit


def fit_nystrom(
    fs: FeatureSet,
    params: KernelParams,
    lam: float,
    opts: SolverOptions = SolverOptions(),
    center_indices: np.ndarray | None = None,
) -> NystromModel:
    """Nystrom-restricted kernel ridge fit via preconditioned CG.

    Centers are sampled uniformly without replacement using ``opts.seed``
    unless explicit ``center_indices`` are given. The solve targets
    relative residual ``opts.tol``; if ``opts.max_iter`` is exhausted
    first, the achieved residual is recorded in the training log and a
    warning is logged, never silently discarded.
    """
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    t0 = time.perf_counter()
    if center_indices is not None:
        idx = np.asarray(center_indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size < 1:
            raise ValidationError("center_indices must be a non-empty 1-D array")
        if np.unique(idx).size != idx.size:
            raise ValidationError("center_indices must be distinct")
        if idx.min() < 0 or idx.max() >= fs.n:
            raise ValidationError(f"center_indices must lie in [0, {fs.n})")
        centers = fs.features[idx].copy()
    else:
        m = opts.num_centers if opts.num_centers is not None else default_num_centers(fs.n)
        centers, idx = sample_centers(fs, m, opts.seed)
    M = centers.shape[0]

    K_nm = kernel_block(fs.features, centers, params)
    K_mm = kernel_block(centers, centers, params)
    Y = encode_targets(fs.labels, fs.num_classes)
    rhs = K_nm.T @ Y / fs.n

    inv_n = 1.0 / fs.n

    def apply_operator(v: np.ndarray) -> np.ndarray:
        return K_nm.T @ (K_nm @ v) * inv_n + lam * (K_mm @ v)

    # The triangular preconditioner is cheap at every M (O(M^3) setup); the
    # diagonal one is only a last resort if factorization fails outright,
    # since it leaves gamma-grid systems too ill-conditioned to converge.
    try:
        apply_preconditioner, jit = _triangular_preconditioner(K_mm, lam, opts.jitter)
        precond_name = "cholesky"
    except SolverError:
        diag = np.einsum("ij,ij->j", K_nm, K_nm) * inv_n + lam * np.diag(K_mm)
        inv_diag = 1.0 / np.maximum(diag, np.finfo(np.float64).tiny)
        jit = 0.0
        precond_name = "jacobi"

        def apply_preconditioner(v: np.ndarray) -> np.ndarray:
            return inv_diag[:, None] * v if v.ndim == 2 else inv_diag * v

    beta, iterations, rel_res = pcg_solve(
        apply_operator, rhs, apply_preconditioner, tol=opts.tol, max_iter=opts.max_iter
    )
    _finite_2d(beta, "nystrom coefficients")
    converged = rel_res <= opts.tol
    if not converged:
        logger.warning(
            "nystrom solve stopped at max_iter=%d with relative residual %.3e > tol %.3e",
            opts.max_iter, rel_res, opts.tol,
        )
    log = TrainingLog(
        iterations=iterations,
        relative_residual=float(rel_res),
        converged=bool(converged),
        preconditioner=precond_name,
        jitter_used=float(jit),
        num_centers=M,
        wall_time_s=time.perf_counter() - t0,
    )
    return NystromModel(
        centers=centers, coefficients=beta, params=params, lam=float(lam), training_log=log
    )


def fit_linear_ridge(fs: FeatureSet, alpha: float) -> LinearModel:
    """Linear ridge fit: solve (X^T X + alpha I) W = X^T Y."""
    if alpha <= 0:
        raise ValidationError(f"alpha must be positive, got {alpha}")
    X = np.ascontiguousarray(fs.features, dtype=np.float64)
    Y = encode_targets(fs.labels, fs.num_classes)
    H = X.T @ X + alpha * np.eye(fs.d)
    rhs = X.T @ Y
    L, _ = _cholesky_with_jitter(H)
    W = scipy.linalg.cho_solve((L, True), rhs)
    _finite_2d(W, "linear-ridge weights")
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm > 0:
        resid = np.linalg.norm(H @ W - rhs) / rhs_norm
        if resid > 1e-8:
            raise SolverError(
                f"linear ridge normal equations residual {resid:.3e} > 1e-8"
            )
    return LinearModel(weights=W, alpha=float(alpha))


def predict_scores(model: Model, X) -> np.ndarray:
    """Per-class scores for each query row, shape (q, C).

    Kernel models score ``k(x, centers) . coefficients``; the linear model
    scores ``x . W``. Every row is evaluated independently with
    batch-size-free shapes, so concatenating batches concatenates scores
    bitwise.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValidationError(f"X must be 2-D, got shape {X.shape}")
    q = X.shape[0]

    if isinstance(model, LinearModel):
        if X.shape[1] != model.d:
            raise ValidationError(
                f"dimension mismatch: X has d={X.shape[1]}, model expects {model.d}"
            )
        Wt = np.ascontiguousarray(model.weights.T)
        out = np.empty((q, model.num_classes), dtype=np.float64)
        for i in range(q):
            out[i] = Wt @ X[i]
        return out

    if isinstance(model, (NystromModel, ExactModel)):
        centers = model.centers if isinstance(model, NystromModel) else model.support
        if X.shape[1] != model.d:
            raise ValidationError(
                f"dimension mismatch: X has d={X.shape[1]}, model expects {model.d}"
            )
        Zc = np.ascontiguousarray(centers, dtype=np.float64)
        z_norms = np.einsum("ij,ij->i", Zc, Zc)
        Ct = np.ascontiguousarray(model.coefficients.T)
        out = np.empty((q, model.num_classes), dtype=np.float64)
        for i in range(q):
            out[i] = Ct @ kernel_row(X[i], Zc, model.params, z_norms)
        return out

    raise ValidationError(f"unsupported model type {type(model).__name__}")


def predict_labels(scores: np.ndarray) -> np.ndarray:
    """Row argmax of a score matrix; ties go to the smallest class index."""
    scores = np.asarray(scores)
    if scores.ndim != 2 or scores.shape[1] < 1:
        raise ValidationError(f"scores must be (q, C) with C >= 1, got {scores.shape}")
    return np.argmax(scores, axis=1)


# --- model container ------------------------------------------------------
#
# Layout: magic "TTM1", u32 version, u64 header length, UTF-8 JSON header,
# then the arrays listed in header["arrays"], each row-major little-endian.

_MODEL_MAGIC = b"TTM1"
_MODEL_VERSION = 1


def _model_header(model: Model) -> tuple[dict, list[np.ndarray]]:
    if isinstance(model, NystromModel):
        header = {
            "model_kind": "nystrom",
            "gamma": model.params.gamma,
            "lambda": model.lam,
            "m": model.num_centers,
            "d": model.d,
            "c": model.num_classes,
            "training_log": model.training_log.to_json_dict() if model.training_log else None,
            "arrays": [
                {"name": "centers", "dtype": "<f4", "shape": list(model.centers.shape)},
                {"name": "coefficients", "dtype": "<f8", "shape": list(model.coefficients.shape)},
            ],
        }
        return header, [model.centers, model.coefficients]
    if isinstance(model, ExactModel):
        header = {
            "model_kind": "exact",
            "gamma": model.params.gamma,
            "lambda": model.lam,
            "m": model.support.shape[0],
            "d": model.d,
            "c": model.num_classes,
            "training_log": None,
            "arrays": [
                {"name": "support", "dtype": "<f4", "shape": list(model.support.shape)},
                {"name": "coefficients", "dtype": "<f8", "shape": list(model.coefficients.shape)},
            ],
        }
        return header, [model.support, model.coefficients]
    if isinstance(model, LinearModel):
        header = {
            "model_kind": "linear",
            "alpha": model.alpha,
            "d": model.d,
            "c": model.num_classes,
            "training_log": None,
            "arrays": [
                {"name": "weights", "dtype": "<f8", "shape": list(model.weights.shape)},
            ],
        }
        return header, [model.weights]
    raise ValidationError(f"unsupported model type {type(model).__name__}")


def save_model(model: Model, path) -> None:
    """Serialize a fitted model: JSON header plus raw array payload."""
    header, arrays = _model_header(model)
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MODEL_MAGIC)
        fh.write(np.uint32(_MODEL_VERSION).tobytes())
        fh.write(np.uint64(len(header_bytes)).tobytes())
        fh.write(header_bytes)
        for spec, arr in zip(header["arrays"], arrays):
            fh.write(np.ascontiguousarray(arr, dtype=spec["dtype"]).tobytes())


def load_model(path) -> Model:
    """Read back a model written by :func:`save_model`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MODEL_MAGIC:
        raise ValidationError(f"{path}: bad model magic {blob[:4]!r}")
    version = int(np.frombuffer(blob, "<u4", count=1, offset=4)[0])
    if version != _MODEL_VERSION:
        raise ValidationError(f"{path}: unsupported model version {version}")
    hlen = int(np.frombuffer(blob, "<u8", count=1, offset=8)[0])
    header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
    offset = 16 + hlen
    arrays = {}
    for spec in header["arrays"]:
        dtype = np.dtype(spec["dtype"])
        shape = tuple(spec["shape"])
        count = int(np.prod(shape))
        arrays[spec["name"]] = (
            np.frombuffer(blob, dtype, count=count, offset=offset).reshape(shape).copy()
        )
        offset += count * dtype.itemsize
    if offset != len(blob):
        raise ValidationError(
            f"{path}: payload size mismatch, expected {offset} bytes, got {len(blob)}"
        )

    kind = header["model_kind"]
    if kind == "nystrom":
        log = header.get("training_log")
        return NystromModel(
            centers=arrays["centers"],
            coefficients=arrays["coefficients"],
            params=KernelParams(header["gamma"]),
            lam=header["lambda"],
            training_log=TrainingLog(**log) if log else None,
        )
    if kind == "exact":
        return ExactModel(
            support=arrays["support"],
            coefficients=arrays["coefficients"],
            params=KernelParams(header["gamma"]),
            lam=header["lambda"],
        )
    if kind == "linear":
        return LinearModel(weights=arrays["weights"], alpha=header["alpha"])
    raise ValidationError(f"{path}: unknown model kind {kind!r}")
