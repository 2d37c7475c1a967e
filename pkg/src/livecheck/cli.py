"""Command line front end.

Subcommands: train, gridsearch, predict, evaluate.  Results and tables
go to stdout; progress notes, warnings, and timing measurements go to
stderr so that stdout stays scriptable and reproducible.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import ParsedConfig, parse_config_file
from .dataset import load_dataset, load_images
from .imageproc import ingest
from .model_io import load_model, save_model
from .modelsel import GridSearchResult, ace, grid_search
from .pipeline import fit_pipeline

_LABEL_NAMES = {True: "live", False: "fake"}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="livecheck", description="Fingerprint liveness detection pipeline."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a model from a config and a dataset")
    train.add_argument("--config", required=True, help="pipeline config file")
    train.add_argument("--data", required=True, help="dataset root with live/ and fake/")
    train.add_argument("--out", required=True, help="where to write the model file")
    train.set_defaults(handler=_cmd_train)

    grid = sub.add_parser("gridsearch", help="cross-validate a config grid")
    grid.add_argument("--config", required=True, help="pipeline config file with | alternatives")
    grid.add_argument("--data", required=True, help="dataset root with live/ and fake/")
    grid.add_argument("--report", required=True, help="where to write the candidate table (TSV)")
    grid.add_argument("--out", help="also train the winner on all data and store it here")
    grid.set_defaults(handler=_cmd_gridsearch)

    predict = sub.add_parser("predict", help="score images with a stored model")
    predict.add_argument("--model", required=True, help="model file")
    predict.add_argument("--timing", action="store_true", help="report per-image latency on stderr")
    predict.add_argument("images", nargs="+", help="PGM files to score")
    predict.set_defaults(handler=_cmd_predict)

    evaluate = sub.add_parser("evaluate", help="error rates of a model on a labeled dataset")
    evaluate.add_argument("--model", required=True, help="model file")
    evaluate.add_argument("--data", required=True, help="dataset root with live/ and fake/")
    evaluate.set_defaults(handler=_cmd_evaluate)
    return parser


def _load_training_data(data_dir: str):
    manifest = load_dataset(data_dir, skip_unreadable=True)
    for rel, reason in manifest.skipped:
        print(f"warning: skipping {rel}: {reason}", file=sys.stderr)
    return load_images(manifest)


def _describe(cfg) -> str:
    return repr(cfg)


def _print_grid_table(result: GridSearchResult, stream) -> None:
    names = [stage.name for stage in result.grid.stages]
    print("candidate\t" + "\t".join(names) + "\tmean_ace\tstatus", file=stream)
    for row in result.candidates:
        configs = [
            _describe(stage.candidates[i]) for stage, i in zip(result.grid.stages, row.indices)
        ]
        status = f"failed: {row.message}" if row.failed else "ok"
        cells = ["/".join(str(i) for i in row.indices), *configs, f"{row.mean_ace:.4f}", status]
        print("\t".join(cells), file=stream)


def _write_report(path: str, result: GridSearchResult) -> None:
    names = [stage.name for stage in result.grid.stages]
    lines = ["\t".join(["candidate", *names, "mean_ace", "fold_aces", "status"])]
    for row in result.candidates:
        configs = [
            _describe(stage.candidates[i]) for stage, i in zip(result.grid.stages, row.indices)
        ]
        folds = ",".join(f"{a:.6f}" for a in row.fold_aces)
        status = f"failed: {row.message}" if row.failed else "ok"
        lines.append(
            "\t".join(["/".join(str(i) for i in row.indices), *configs, f"{row.mean_ace:.6f}", folds, status])
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _search(parsed: ParsedConfig, images, labels) -> GridSearchResult:
    return grid_search(
        images, labels, parsed.grid_spec(), parsed.seed, augmented=parsed.augmented
    )


def _best_pipeline_config(parsed: ParsedConfig, result: GridSearchResult):
    pre, ext, tr, cl = result.best_configs()
    return parsed.pipeline_config(pre, ext, tr, cl)


def _cmd_train(args) -> int:
    parsed = parse_config_file(args.config)
    images, labels = _load_training_data(args.data)
    if parsed.is_grid:
        result = _search(parsed, images, labels)
        _print_grid_table(result, sys.stdout)
        config = _best_pipeline_config(parsed, result)
        best = next(r for r in result.candidates if r.indices == result.best_indices)
        print(f"selected candidate {'/'.join(str(i) for i in best.indices)} "
              f"with mean ACE {best.mean_ace:.4f}")
    else:
        config = parsed.single_config()
    trained = fit_pipeline(images, labels, config)
    digest = save_model(args.out, trained)
    print(f"model written to {args.out}")
    print(f"model digest {digest}")
    return 0


def _cmd_gridsearch(args) -> int:
    parsed = parse_config_file(args.config)
    images, labels = _load_training_data(args.data)
    result = _search(parsed, images, labels)
    _print_grid_table(result, sys.stdout)
    _write_report(args.report, result)
    print(f"report written to {args.report}")
    best = next(r for r in result.candidates if r.indices == result.best_indices)
    print(f"selected candidate {'/'.join(str(i) for i in best.indices)} "
          f"with mean ACE {best.mean_ace:.4f}")
    if args.out:
        config = _best_pipeline_config(parsed, result)
        trained = fit_pipeline(images, labels, config)
        digest = save_model(args.out, trained)
        print(f"model written to {args.out}")
        print(f"model digest {digest}")
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.model)
    failures = 0
    timings = []
    for image_path in args.images:
        try:
            img = ingest(Path(image_path).read_bytes())
        except (OSError, ValueError) as exc:
            print(f"error: {image_path}: {exc}", file=sys.stderr)
            failures += 1
            continue
        started = time.perf_counter()
        score = model.decision_score(img)
        elapsed = time.perf_counter() - started
        timings.append(elapsed)
        label = _LABEL_NAMES[score >= 0.0]
        print(f"{image_path}\t{score:+.6f}\t{label}")
        if args.timing:
            print(f"# timing {image_path}: {elapsed * 1000.0:.1f} ms", file=sys.stderr)
    if args.timing and timings:
        mean_ms = sum(timings) / len(timings) * 1000.0
        print(f"# timing mean: {mean_ms:.1f} ms/image over {len(timings)} images", file=sys.stderr)
    return 1 if failures else 0


def _cmd_evaluate(args) -> int:
    model = load_model(args.model)
    manifest = load_dataset(args.data, skip_unreadable=True)
    for rel, reason in manifest.skipped:
        print(f"warning: skipping {rel}: {reason}", file=sys.stderr)
    images, labels = load_images(manifest)
    predictions = [model.predict(img) for img in images]
    report = ace(predictions, labels)
    print(f"FPR {report.fpr * 100.0:.2f}%  ({report.live_wrong}/{report.live_total} live called fake)")
    print(f"FNR {report.fnr * 100.0:.2f}%  ({report.fake_wrong}/{report.fake_total} fake called live)")
    print(f"ACE {report.ace * 100.0:.2f}%")
    return 0


if __name__ == "__main__":
    sys.exit(main())
