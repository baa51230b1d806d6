"""Command-line surface: ``toptune train | grid-cv | compare``.

Exit codes: 0 success, 2 validation/usage error, 3 numerical solver
failure. Flags are validated before any file is read. Outputs are UTF-8;
runs with the same inputs and seed are byte-identical apart from the
wall-time fields listed in ``toptune.tuning_harness.WALL_TIME_KEYS``.

Every command accepts ``--config FILE``, a JSON object whose keys mirror
the long flag names (``lambda``, ``num-centers`` or ``num_centers``,
...). Values given on the command line override the config file.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .errors import SolverError, ValidationError
from .feature_store import read_feature_file
from .kernel_core import KernelParams
from .krr_solver import SolverOptions, fit_nystrom, save_model
from .tuning_harness import (
    GridSpec,
    build_report,
    emit_report,
    refit_and_score,
    run_grid_cv,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def _positive_floats(text: str, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ValidationError(f"{flag} expects comma-separated numbers, got {text!r}")
    if not values:
        raise ValidationError(f"{flag} expects at least one value")
    return values


def _load_json_records(path, label: str) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"missing {label} file {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})")
    if isinstance(data, dict):
        data = [data]
    if not isinstance(data, list) or not all(isinstance(x, dict) for x in data):
        raise ValidationError(f"{path}: expected a JSON object or array of objects")
    return data


def _solver_options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(
        num_centers=args.num_centers,
        max_iter=args.max_iter,
        tol=args.tol,
        seed=args.seed,
    )


_FLAG_BY_DEST = {"lam": "--lambda"}


def _require(args: argparse.Namespace, *dests: str) -> None:
    missing = [d for d in dests if getattr(args, d) is None]
    if missing:
        flags = ", ".join(_FLAG_BY_DEST.get(d, "--" + d.replace("_", "-")) for d in missing)
        raise ValidationError(f"missing required value(s): {flags} (flag or config file)")


def _load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"missing config file {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})")
    if not isinstance(config, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return config


def _apply_config(subparser: argparse.ArgumentParser, config: dict, path) -> None:
    """Install config values as subcommand defaults; explicit flags win."""
    dest_by_key = {}
    action_by_dest = {}
    for action in subparser._actions:
        action_by_dest[action.dest] = action
        for opt in action.option_strings:
            if opt.startswith("--"):
                dest_by_key[opt[2:].replace("-", "_")] = action.dest
        dest_by_key.setdefault(action.dest, action.dest)
    dest_by_key.pop("help", None)
    dest_by_key.pop("config", None)

    defaults = {}
    unknown = []
    for key, value in config.items():
        dest = dest_by_key.get(key.replace("-", "_"))
        if dest is None:
            unknown.append(key)
            continue
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        # set_defaults skips argparse's own conversion, so apply it here
        converter = action_by_dest[dest].type
        if converter is not None and value is not None and not isinstance(value, bool):
            try:
                value = converter(value)
            except (TypeError, ValueError):
                raise ValidationError(
                    f"{path}: config key {key!r} has invalid value {value!r}"
                )
        defaults[dest] = value
    if unknown:
        raise ValidationError(f"{path}: unknown config keys {sorted(unknown)}")
    subparser.set_defaults(**defaults)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--num-centers", type=int, default=None,
                   help="Nystrom center count (default: rule of thumb from n)")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)


def _cmd_train(args: argparse.Namespace) -> int:
    _require(args, "features", "gamma", "lam", "out")
    params = KernelParams(args.gamma)  # validates before any file access
    if args.lam <= 0:
        raise ValidationError(f"--lambda must be positive, got {args.lam}")
    opts = _solver_options(args)

    fs, manifest = read_feature_file(args.features)
    t0 = time.perf_counter()
    model = fit_nystrom(fs, params, args.lam, opts)
    wall = time.perf_counter() - t0
    save_model(model, args.out)

    log = model.training_log
    line = {
        "command": "train",
        "dataset": manifest.dataset_name,
        "n": fs.n,
        "d": fs.d,
        "C": fs.num_classes,
        "gamma": params.gamma,
        "lambda": args.lam,
        "num_centers": model.num_centers,
        "iterations": log.iterations,
        "relative_residual": log.relative_residual,
        "converged": log.converged,
        "wall_time_s": wall,
        "model_path": str(args.out),
    }
    print(json.dumps(line, sort_keys=True))
    return EXIT_OK


def _grid_from_args(args: argparse.Namespace) -> GridSpec:
    if args.kind == "linear":
        if args.alphas is not None:
            return GridSpec(kind="linear", alphas=_positive_floats(args.alphas, "--alphas"))
        return GridSpec.default_linear()
    if args.gammas is not None or args.lambdas is not None:
        if args.gammas is None or args.lambdas is None:
            raise ValidationError("--gammas and --lambdas must be given together")
        return GridSpec(
            kind="kernel",
            gammas=_positive_floats(args.gammas, "--gammas"),
            lambdas=_positive_floats(args.lambdas, "--lambdas"),
        )
    return GridSpec.default_kernel()


def _cmd_grid_cv(args: argparse.Namespace) -> int:
    _require(args, "features", "out")
    grid = _grid_from_args(args)  # validates before any file access
    if args.folds < 2:
        raise ValidationError(f"--folds must be >= 2, got {args.folds}")
    opts = _solver_options(args)

    fs, manifest = read_feature_file(args.features)
    result = run_grid_cv(
        fs, grid, k=args.folds, seed=args.seed, opts=opts, standardize=args.standardize
    )
    out = result.to_json_dict(
        dataset_name=manifest.dataset_name,
        protocol_tag=f"{grid.kind}-cv{args.folds}",
    )
    out["accuracy_source"] = "cv_mean"
    if args.test_features:
        fs_test, _ = read_feature_file(args.test_features)
        test_acc = refit_and_score(
            fs, fs_test, result.best().config, opts, standardize=args.standardize
        )
        out["test_accuracy_percent"] = test_acc * 100.0
        out["test_accuracy_source"] = "holdout_test"

    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(json.dumps(
        {
            "command": "grid-cv",
            "dataset": manifest.dataset_name,
            "configs": len(result.records),
            "failed_configs": len(result.failures),
            "best_mean_accuracy": result.best().mean_accuracy,
            "total_wall_time_s": result.total_wall_time_s,
            "out": str(args.out),
        },
        sort_keys=True,
    ))
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    _require(args, "top", "baseline", "out")
    if args.band < 0:
        raise ValidationError(f"--band must be >= 0, got {args.band}")
    fmt = args.format + ("-extended" if args.extended and args.format != "json" else "")

    top = _load_json_records(args.top, "top-tuning summary")
    baseline = _load_json_records(args.baseline, "baseline")
    report = build_report(top, baseline, band=args.band)
    emit_report(report, fmt, args.out)
    agg = report.aggregate
    print(json.dumps(
        {
            "command": "compare",
            "rows": len(report.rows),
            "mean_speedup": agg.mean_speedup,
            "std_speedup": agg.std_speedup,
            "frac_within_band": agg.frac_within_band,
            "band": agg.band,
            "out": str(args.out),
        },
        sort_keys=True,
    ))
    return EXIT_OK


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="toptune",
        description="Fast kernel classification over fixed features: train, "
        "cross-validate grids, and compare against baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub_map: dict[str, argparse.ArgumentParser] = {}

    # "required" values may come from the config file instead of a flag,
    # so they are enforced per command after the config merge
    p = sub_map["train"] = sub.add_parser("train", help="fit one Nystrom kernel model and save it")
    p.add_argument("--features", help="input feature file (TTF1)")
    p.add_argument("--gamma", type=float, help="kernel width")
    p.add_argument("--lambda", dest="lam", type=float, help="ridge regularization")
    p.add_argument("--out", help="output model path")
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub_map["grid-cv"] = sub.add_parser("grid-cv", help="cross-validate a hyperparameter grid")
    p.add_argument("--features", help="input feature file (TTF1)")
    p.add_argument("--grid", choices=["default"], default="default",
                   help="named grid (default: gammas 1e2,1e3 x lambdas 1e-5,1e-6)")
    p.add_argument("--kind", choices=["kernel", "linear"], default="kernel")
    p.add_argument("--gammas", default=None, help="comma-separated kernel widths")
    p.add_argument("--lambdas", default=None, help="comma-separated regularizers")
    p.add_argument("--alphas", default=None,
                   help="comma-separated linear-ridge regularizers (with --kind linear)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--standardize", action="store_true",
                   help="standardize features per fold using training statistics")
    p.add_argument("--test-features", default=None,
                   help="optional held-out TTF1 file; the best config is refit on all "
                        "training data and scored on it")
    p.add_argument("--out", help="output JSON path")
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_grid_cv)

    p = sub_map["compare"] = sub.add_parser(
        "compare", help="join top-tuning and baseline summaries into a report"
    )
    p.add_argument("--top", help="JSON with per-dataset top-tuning summaries")
    p.add_argument("--baseline",
                   help="JSON with per-dataset baseline records "
                        "(dataset, acc_fine_percent, time_fine_s, protocol_tag)")
    p.add_argument("--band", type=float, default=2.5,
                   help="accuracy-delta band (percentage points) for the aggregate")
    p.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")
    p.add_argument("--extended", action="store_true",
                   help="include absolute accuracies and times in markdown/csv")
    p.add_argument("--out", help="output report path")
    p.set_defaults(func=_cmd_compare)

    for command_parser in sub_map.values():
        command_parser.add_argument(
            "--config", default=None,
            help="JSON file whose keys mirror the long flag names; "
                 "command-line flags take precedence",
        )

    return parser, sub_map


def main(argv: list[str] | None = None) -> int:
    parser, sub_map = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
            if args.config:
                _apply_config(sub_map[args.command], _load_config(args.config), args.config)
                args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse usage errors
            return int(exc.code) if exc.code else 0
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: cannot read/write {exc.filename}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
