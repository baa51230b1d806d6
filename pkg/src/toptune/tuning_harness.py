"""Hyperparameter grids, k-fold cross validation, and comparison reports.

The default kernel grid is gamma in {1e2, 1e3} crossed with lambda in
{1e-5, 1e-6} (four configurations); the default linear grid is alpha in
{1e1, 1e-1, 1e-3}. One stratified split plan is shared by every
configuration, per-configuration wall time covers fit+predict only, and
the grid's total time is the sum over configurations.

Comparison reports hold one row per dataset -- accuracy difference in
percentage points and the training-time speed-up ratio -- plus aggregate
statistics (mean/std of speed-ups, fraction of accuracy deltas inside a
band). Standard deviations are population style (ddof=0).
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import SolverError, ValidationError
from .feature_store import FeatureSet, SplitPlan, stratified_kfold
from .kernel_core import KernelParams
from .krr_solver import (
    SolverOptions,
    fit_linear_ridge,
    fit_nystrom,
    predict_labels,
    predict_scores,
)

__all__ = [
    "KernelConfig",
    "LinearConfig",
    "GridSpec",
    "RunRecord",
    "ConfigFailure",
    "GridCVResult",
    "AggregateStats",
    "ReportRow",
    "ComparisonReport",
    "run_grid_cv",
    "select_best",
    "compute_delta_acc",
    "compute_speedup",
    "aggregate_stats",
    "build_report",
    "emit_report",
    "fine_tune_batch_size",
    "WALL_TIME_KEYS",
]

# JSON keys that carry wall-clock measurements; reproducibility diffs of
# harness output must ignore exactly these.
WALL_TIME_KEYS = ("wall_time_s", "total_wall_time_s", "time_top_s")


@dataclass(frozen=True)
class KernelConfig:
    gamma: float
    lam: float

    def to_json_dict(self) -> dict:
        return {"gamma": self.gamma, "lambda": self.lam}

    def describe(self) -> str:
        return f"gamma={self.gamma:g}, lambda={self.lam:g}"


@dataclass(frozen=True)
class LinearConfig:
    alpha: float

    def to_json_dict(self) -> dict:
        return {"alpha": self.alpha}

    def describe(self) -> str:
        return f"alpha={self.alpha:g}"


@dataclass(frozen=True)
class GridSpec:
    """A hyperparameter grid: kernel (gammas x lambdas) or linear (alphas)."""

    kind: str = "kernel"
    gammas: tuple[float, ...] = ()
    lambdas: tuple[float, ...] = ()
    alphas: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if self.kind not in ("kernel", "linear"):
            raise ValidationError(f"grid kind must be 'kernel' or 'linear', got {self.kind!r}")
        if self.kind == "kernel":
            if not self.gammas or not self.lambdas:
                raise ValidationError("kernel grid needs non-empty gammas and lambdas")
            bad = [v for v in self.gammas + self.lambdas if not (v > 0 and math.isfinite(v))]
        else:
            if not self.alphas:
                raise ValidationError("linear grid needs non-empty alphas")
            bad = [v for v in self.alphas if not (v > 0 and math.isfinite(v))]
        if bad:
            raise ValidationError(f"grid values must be positive and finite, got {bad}")

    @classmethod
    def default_kernel(cls) -> "GridSpec":
        return cls(kind="kernel", gammas=(1e2, 1e3), lambdas=(1e-5, 1e-6))

    @classmethod
    def default_linear(cls) -> "GridSpec":
        return cls(kind="linear", alphas=(1e1, 1e-1, 1e-3))

    def configs(self) -> list[KernelConfig | LinearConfig]:
        if self.kind == "kernel":
            return [KernelConfig(g, v) for g in self.gammas for v in self.lambdas]
        return [LinearConfig(a) for a in self.alphas]


@dataclass(frozen=True)
class RunRecord:
    """Cross-validation outcome for one grid point."""

    config: KernelConfig | LinearConfig
    fold_accuracies: tuple[float, ...]
    mean_accuracy: float
    wall_time_s: float

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "fold_accuracies", tuple(float(a) for a in self.fold_accuracies)
        )
        if not self.fold_accuracies:
            raise ValidationError("fold_accuracies must be non-empty")
        if any(not (0.0 <= a <= 1.0) for a in self.fold_accuracies):
            raise ValidationError("fold accuracies must lie in [0, 1]")
        if self.wall_time_s < 0:
            raise ValidationError("wall_time_s must be non-negative")
        expected = float(np.mean(self.fold_accuracies))
        if abs(self.mean_accuracy - expected) > 1e-12:
            raise ValidationError(
                f"mean_accuracy {self.mean_accuracy!r} does not equal the fold mean "
                f"{expected!r}"
            )

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "fold_accuracies": list(self.fold_accuracies),
            "mean_accuracy": self.mean_accuracy,
            "wall_time_s": self.wall_time_s,
        }


@dataclass(frozen=True)
class ConfigFailure:
    config: KernelConfig | LinearConfig
    error: str

    def to_json_dict(self) -> dict:
        return {"config": self.config.to_json_dict(), "error": self.error}


@dataclass(frozen=True)
class GridCVResult:
    """Everything one grid run produced, in grid order."""

    records: tuple[RunRecord, ...]
    failures: tuple[ConfigFailure, ...]
    total_wall_time_s: float
    folds: int
    seed: int

    def best(self) -> RunRecord:
        return select_best(list(self.records))

    def to_json_dict(self, dataset_name: str = "", protocol_tag: str = "") -> dict:
        best = self.best()
        return {
            "dataset": dataset_name,
            "protocol_tag": protocol_tag,
            "folds": self.folds,
            "seed": self.seed,
            "records": [r.to_json_dict() for r in self.records],
            "failures": [f.to_json_dict() for f in self.failures],
            "best": best.to_json_dict(),
            "total_wall_time_s": self.total_wall_time_s,
            "acc_top_percent": best.mean_accuracy * 100.0,
            "time_top_s": self.total_wall_time_s,
        }


def _standardizer(train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    std[std == 0.0] = 1.0
    return mean, std


def _fit_predict_accuracy(
    train: FeatureSet,
    test_features: np.ndarray,
    test_labels: np.ndarray,
    config: KernelConfig | LinearConfig,
    opts: SolverOptions,
) -> tuple[float, float]:
    """Train one config on one fold; returns (accuracy, fit+predict seconds)."""
    t0 = time.perf_counter()
    if isinstance(config, KernelConfig):
        model = fit_nystrom(train, KernelParams(config.gamma), config.lam, opts)
    else:
        model = fit_linear_ridge(train, config.alpha)
    pred = predict_labels(predict_scores(model, test_features))
    elapsed = time.perf_counter() - t0
    return float(np.mean(pred == test_labels)), elapsed


def run_grid_cv(
    fs: FeatureSet,
    grid: GridSpec,
    k: int = 5,
    seed: int = 0,
    opts: SolverOptions = SolverOptions(),
    standardize: bool = False,
) -> GridCVResult:
    """k-fold cross validation of every grid point on one feature set.

    All configurations share the same stratified split plan. A solver
    failure in one configuration is recorded and the rest still run;
    only a grid with zero surviving configurations raises. Wall time per
    configuration covers fit and predict, summed over folds; file I/O
    and split construction are excluded.
    """
    if fs.num_classes < 2:
        raise ValidationError("cross-validated classification needs at least 2 classes")
    if k < 2:
        raise ValidationError(f"fold count k must be >= 2, got {k}")
    plan = stratified_kfold(fs.labels, k, seed)

    folds = []
    for fold in range(k):
        tr, te = plan.train_indices(fold), plan.test_indices(fold)
        if te.size == 0:
            raise ValidationError(f"fold {fold} is empty; use fewer folds for n={fs.n}")
        folds.append((tr, te))

    records: list[RunRecord] = []
    failures: list[ConfigFailure] = []
    for config in grid.configs():
        accs: list[float] = []
        elapsed = 0.0
        try:
            for tr, te in folds:
                train = fs.subset(tr)
                test_features = fs.features[te]
                if standardize:
                    mean, std = _standardizer(train.features.astype(np.float64))
                    train = FeatureSet(
                        (train.features - mean) / std, train.labels, fs.num_classes
                    )
                    test_features = (test_features - mean) / std
                acc, dt = _fit_predict_accuracy(
                    train, test_features, fs.labels[te], config, opts
                )
                accs.append(acc)
                elapsed += dt
        except SolverError as exc:
            failures.append(ConfigFailure(config, f"{config.describe()}: {exc}"))
            continue
        records.append(
            RunRecord(
                config=config,
                fold_accuracies=tuple(accs),
                mean_accuracy=float(np.mean(accs)),
                wall_time_s=elapsed,
            )
        )
    if not records:
        details = "; ".join(f.error for f in failures)
        raise SolverError(f"every grid configuration failed: {details}")
    total = float(sum(r.wall_time_s for r in records))
    return GridCVResult(
        records=tuple(records),
        failures=tuple(failures),
        total_wall_time_s=total,
        folds=k,
        seed=seed,
    )


def refit_and_score(
    fs_train: FeatureSet,
    fs_test: FeatureSet,
    config: KernelConfig | LinearConfig,
    opts: SolverOptions = SolverOptions(),
    standardize: bool = False,
) -> float:
    """Refit one configuration on the full training set and return held-out
    test accuracy (fraction in [0, 1]).

    Cross-validation means and held-out accuracies are different numbers;
    callers should label which one they report.
    """
    if fs_train.d != fs_test.d or fs_train.num_classes != fs_test.num_classes:
        raise ValidationError("train and test feature sets are incompatible")
    test_features = fs_test.features
    if standardize:
        mean, std = _standardizer(fs_train.features.astype(np.float64))
        fs_train = FeatureSet(
            (fs_train.features - mean) / std, fs_train.labels, fs_train.num_classes
        )
        test_features = (test_features - mean) / std
    acc, _ = _fit_predict_accuracy(
        fs_train, test_features, fs_test.labels, config, opts
    )
    return acc


def select_best(records: list[RunRecord]) -> RunRecord:
    """Record with maximal mean accuracy; ties broken by grid order."""
    if not records:
        raise ValidationError("select_best needs at least one record")
    return max(records, key=lambda r: r.mean_accuracy)


def compute_delta_acc(acc_top: float, acc_fine: float) -> float:
    """Signed accuracy difference in percentage points."""
    for name, v in (("acc_top", acc_top), ("acc_fine", acc_fine)):
        if not (0.0 <= v <= 100.0):
            raise ValidationError(f"{name} must lie in [0, 100], got {v}")
    return acc_top - acc_fine


def compute_speedup(time_fine_s: float, time_top_s: float) -> float:
    """Training-time ratio: baseline seconds over fast-path seconds."""
    if time_fine_s <= 0 or time_top_s <= 0:
        raise ValidationError(
            f"times must be positive, got fine={time_fine_s}, top={time_top_s}"
        )
    return time_fine_s / time_top_s


@dataclass(frozen=True)
class AggregateStats:
    mean_speedup: float
    std_speedup: float
    frac_within_band: float
    band: float

    def to_json_dict(self) -> dict:
        return {
            "mean_speedup": self.mean_speedup,
            "std_speedup": self.std_speedup,
            "frac_within_band": self.frac_within_band,
            "band": self.band,
        }


def aggregate_stats(speedups, deltas, band: float = 2.5) -> AggregateStats:
    """Mean/std of speed-ups (population std) and the fraction of accuracy
    deltas with absolute value <= band."""
    speedups = np.asarray(speedups, dtype=np.float64)
    deltas = np.asarray(deltas, dtype=np.float64)
    if speedups.size == 0 or deltas.size == 0:
        raise ValidationError("aggregate_stats needs non-empty inputs")
    if band < 0:
        raise ValidationError(f"band must be >= 0, got {band}")
    return AggregateStats(
        mean_speedup=float(speedups.mean()),
        std_speedup=float(speedups.std(ddof=0)),
        frac_within_band=float(np.mean(np.abs(deltas) <= band)),
        band=float(band),
    )


@dataclass(frozen=True)
class ReportRow:
    name: str
    acc_top: float
    acc_fine: float
    delta_acc: float
    time_top_s: float
    time_fine_s: float
    speedup: float

    def __post_init__(self) -> None:
        if abs(self.delta_acc - (self.acc_top - self.acc_fine)) > 1e-9:
            raise ValidationError(
                f"row {self.name!r}: delta_acc {self.delta_acc} does not recompute "
                f"from accuracies {self.acc_top} - {self.acc_fine}"
            )
        if self.speedup != self.time_fine_s / self.time_top_s:
            raise ValidationError(
                f"row {self.name!r}: speedup {self.speedup} does not recompute "
                f"from times {self.time_fine_s} / {self.time_top_s}"
            )

    def to_json_dict(self) -> dict:
        return {
            "dataset": self.name,
            "acc_top_percent": self.acc_top,
            "acc_fine_percent": self.acc_fine,
            "delta_acc_percent": self.delta_acc,
            "time_top_s": self.time_top_s,
            "time_fine_s": self.time_fine_s,
            "speedup": self.speedup,
        }


@dataclass(frozen=True)
class ComparisonReport:
    """Per-dataset accuracy/speed comparison plus aggregate statistics.

    Construction re-derives every row's delta and speed-up and the
    aggregate from the raw fields; mismatched inputs are refused.
    """

    rows: tuple[ReportRow, ...]
    aggregate: AggregateStats

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        if not self.rows:
            raise ValidationError("a report needs at least one row")
        expected = aggregate_stats(
            [r.speedup for r in self.rows],
            [r.delta_acc for r in self.rows],
            self.aggregate.band,
        )
        if expected != self.aggregate:
            raise ValidationError("report aggregate does not recompute from its rows")

    @classmethod
    def from_pairs(cls, pairs, band: float = 2.5) -> "ComparisonReport":
        """Build from (name, acc_top, time_top_s, acc_fine, time_fine_s)."""
        rows = []
        for name, acc_top, time_top, acc_fine, time_fine in pairs:
            rows.append(
                ReportRow(
                    name=name,
                    acc_top=acc_top,
                    acc_fine=acc_fine,
                    delta_acc=compute_delta_acc(acc_top, acc_fine),
                    time_top_s=time_top,
                    time_fine_s=time_fine,
                    speedup=compute_speedup(time_fine, time_top),
                )
            )
        agg = aggregate_stats(
            [r.speedup for r in rows], [r.delta_acc for r in rows], band
        )
        return cls(rows=tuple(rows), aggregate=agg)


def build_report(top_records: list[dict], baseline_records: list[dict], band: float = 2.5) -> ComparisonReport:
    """Join per-dataset summaries against a baseline by dataset name.

    ``top_records`` entries need dataset, acc_top_percent, time_top_s;
    ``baseline_records`` need dataset, acc_fine_percent, time_fine_s.
    The two dataset-name sets must match exactly; row order follows the
    top records.
    """
    def index(records: list[dict], keys: tuple[str, ...], label: str) -> dict[str, dict]:
        out = {}
        for rec in records:
            missing = [key for key in ("dataset",) + keys if key not in rec]
            if missing:
                raise ValidationError(f"{label} record is missing keys {missing}: {rec}")
            if rec["dataset"] in out:
                raise ValidationError(f"{label} has duplicate dataset {rec['dataset']!r}")
            out[rec["dataset"]] = rec
        return out

    top = index(top_records, ("acc_top_percent", "time_top_s"), "top")
    base = index(baseline_records, ("acc_fine_percent", "time_fine_s"), "baseline")
    if set(top) != set(base):
        only_top = sorted(set(top) - set(base))
        only_base = sorted(set(base) - set(top))
        raise ValidationError(
            f"dataset names do not match: only in top {only_top}, only in baseline {only_base}"
        )
    pairs = [
        (
            name,
            float(top[name]["acc_top_percent"]),
            float(top[name]["time_top_s"]),
            float(base[name]["acc_fine_percent"]),
            float(base[name]["time_fine_s"]),
        )
        for name in top
    ]
    return ComparisonReport.from_pairs(pairs, band)


def _markdown_lines(report: ComparisonReport, extended: bool) -> list[str]:
    if extended:
        lines = ["| Dataset | ΔAcc | SpUp | Acc top | Acc fine |", "|---|---|---|---|---|"]
        for r in report.rows:
            lines.append(
                f"| {r.name} | {r.delta_acc:+.2f}% | {r.speedup:.2f}× | "
                f"{r.acc_top:.1f}% | {r.acc_fine:.1f}% |"
            )
        agg = report.aggregate
        lines.append("")
        lines.append(
            f"Mean speed-up {agg.mean_speedup:.2f}× ± {agg.std_speedup:.2f}; "
            f"|ΔAcc| ≤ {agg.band:g}% in {agg.frac_within_band:.0%} of datasets."
        )
        return lines
    lines = ["| Dataset | ΔAcc | SpUp |", "|---|---|---|"]
    for r in report.rows:
        lines.append(f"| {r.name} | {r.delta_acc:+.2f}% | {r.speedup:.2f}× |")
    return lines


def _csv_text(report: ComparisonReport, extended: bool) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if extended:
        writer.writerow(
            ["dataset", "delta_acc_percent", "speedup", "acc_top_percent",
             "acc_fine_percent", "time_top_s", "time_fine_s"]
        )
        for r in report.rows:
            writer.writerow(
                [r.name, repr(r.delta_acc), repr(r.speedup), repr(r.acc_top),
                 repr(r.acc_fine), repr(r.time_top_s), repr(r.time_fine_s)]
            )
    else:
        writer.writerow(["dataset", "delta_acc_percent", "speedup"])
        for r in report.rows:
            writer.writerow([r.name, repr(r.delta_acc), repr(r.speedup)])
    return buf.getvalue()


def report_json_dict(report: ComparisonReport) -> dict:
    return {
        "rows": [r.to_json_dict() for r in report.rows],
        "aggregate": report.aggregate.to_json_dict(),
    }


def emit_report(report: ComparisonReport, format: str, path) -> None:
    """Write a report as markdown, csv, or json.

    Markdown is the presentation surface (one/two decimals); csv uses
    ``repr`` floats so values re-parse identically; json carries full
    precision plus the aggregate block.
    """
    if format == "markdown":
        text = "\n".join(_markdown_lines(report, extended=False)) + "\n"
    elif format == "markdown-extended":
        text = "\n".join(_markdown_lines(report, extended=True)) + "\n"
    elif format == "csv":
        text = _csv_text(report, extended=False)
    elif format == "csv-extended":
        text = _csv_text(report, extended=True)
    elif format == "json":
        text = json.dumps(report_json_dict(report), indent=2, sort_keys=True) + "\n"
    else:
        raise ValidationError(
            f"format must be markdown, csv, or json (optionally -extended), got {format!r}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def fine_tune_batch_size(n: int) -> int:
    """Batch size used by the gradient-descent baseline protocol:
    floor(2^(2 log10(n) - 1)), clamped to at least 1."""
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    return max(1, math.floor(2.0 ** (2.0 * math.log10(n) - 1.0)))
