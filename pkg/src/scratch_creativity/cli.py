"""Command line for scoring projects, comparing them, and training or
evaluating the rank model.  Every command is deterministic given its
inputs, flags, and seed; per-item failures produce a machine-readable
error list on stderr and a non-zero exit code.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .concepts import cosine_metric, matrix_metric
from .errors import CreativityError, MissingFeatures
from .measures import FEATURE_NAMES, TARGETS, feature_indices, mean_pairwise_distance
from .media import (
    AudioFrameConfig,
    FeatureSidecar,
    FeatureStore,
    baseline_audio_features,
    baseline_image_embedding,
    decode_image,
    decode_wav,
    write_sidecar,
)
from .pipeline import _feature_products, load_corpus_dir, score_corpus, score_project
from .ranking import (
    DEFAULT_SEED,
    ExpertLabels,
    GbtParams,
    build_rows,
    fit_gbt,
    load_labels_csv,
    load_weights_csv,
    run_experiment,
    save_model,
)
from .sb3 import code_project_distance, parse_sb3, read_asset

SIDECAR_ENV = "SCRATCH_CREATIVITY_SIDECARS"

ROW_COLUMNS = ["project_id", *FEATURE_NAMES, "visual_features", "audio_features"]


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--sidecars",
        default=os.environ.get(SIDECAR_ENV),
        help=f"feature sidecar directory (default: ${SIDECAR_ENV})",
    )
    parser.add_argument(
        "--no-fallback-features",
        dest="fallback_features",
        action="store_false",
        help="fail instead of extracting baseline features for assets without sidecars",
    )
    parser.add_argument(
        "--no-squared",
        dest="squared",
        action="store_false",
        help="use raw instead of squared block distances in the code pipeline",
    )
    parser.add_argument(
        "--no-dedup",
        dest="dedup",
        action="store_false",
        help="keep duplicate concepts when computing flexibility",
    )
    parser.add_argument(
        "--include-shadow",
        action="store_true",
        help="count shadow (dropdown) blocks as concepts",
    )
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--tau", choices=["a", "b"], default="b", help="tau variant")
    parser.add_argument(
        "--format", choices=["json", "csv", "table"], default="json"
    )
    parser.add_argument("--output", help="write to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scratch-creativity",
        description="Distance-based creativity scores for Scratch projects "
        "and a boosted-tree model of expert creativity rankings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="nine creativity features per project")
    p_score.add_argument("projects", nargs="+", help=".sb3 files")
    p_score.add_argument(
        "--reference",
        help="directory of .sb3 files used as the originality reference sample",
    )
    p_score.add_argument("--workers", type=int, default=1)
    _add_common_flags(p_score)

    p_dist = sub.add_parser("distance", help="product distance between two projects")
    p_dist.add_argument("left")
    p_dist.add_argument("right")
    p_dist.add_argument("--modality", choices=["code", "visual", "audio"], required=True)
    _add_common_flags(p_dist)

    p_train = sub.add_parser("train", help="fit and persist rank models")
    p_train.add_argument("--labels", required=True)
    p_train.add_argument("--weights", required=True)
    p_train.add_argument("--corpus", required=True, help="directory of .sb3 files")
    p_train.add_argument("--mode", choices=["per-expert", "combined"], default="combined")
    p_train.add_argument("--target", choices=list(TARGETS), default="weighted")
    p_train.add_argument("--out", required=True, help="model file (or directory for per-expert)")
    _add_common_flags(p_train)

    p_eval = sub.add_parser("evaluate", help="cross-validated tau report")
    p_eval.add_argument("--labels", required=True)
    p_eval.add_argument("--weights", required=True)
    p_eval.add_argument("--corpus", required=True)
    p_eval.add_argument(
        "--mode", choices=["per-expert", "combined", "both"], default="both"
    )
    p_eval.add_argument(
        "--target", choices=[*TARGETS, "all"], default="all"
    )
    p_eval.add_argument("--folds", type=int, default=None)
    _add_common_flags(p_eval)

    p_extract = sub.add_parser(
        "extract-features", help="write feature sidecars for project assets"
    )
    p_extract.add_argument("projects", nargs="+")
    p_extract.add_argument("--out", required=True, help="sidecar directory")
    p_extract.add_argument("--images", action="store_true")
    p_extract.add_argument("--sounds", action="store_true")
    p_extract.add_argument(
        "--backend",
        choices=["auto", "baseline", "adapter"],
        default="auto",
        help="auto prefers the external adapter package when installed",
    )
    _add_common_flags(p_extract)
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fail(errors: list[dict]) -> int:
    sys.stderr.write(json.dumps({"errors": errors}, sort_keys=True, indent=2) + "\n")
    return 1


def _rows_to_csv(rows: list[dict]) -> str:
    lines = [",".join(ROW_COLUMNS)]
    for row in rows:
        cells = []
        for col in ROW_COLUMNS:
            value = row.get(col)
            cells.append("" if value is None else str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _rows_to_table(rows: list[dict]) -> str:
    widths = {
        col: max([len(col)] + [len(_cell(row.get(col))) for row in rows])
        for col in ROW_COLUMNS
    }
    header = "  ".join(col.ljust(widths[col]) for col in ROW_COLUMNS)
    lines = [header, "  ".join("-" * widths[col] for col in ROW_COLUMNS)]
    for row in rows:
        lines.append(
            "  ".join(_cell(row.get(col)).ljust(widths[col]) for col in ROW_COLUMNS)
        )
    return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def cmd_score(args) -> int:
    store = FeatureStore(args.sidecars, fallback=args.fallback_features)
    reference = []
    if args.reference:
        reference = load_corpus_dir(args.reference, include_shadow=args.include_shadow)

    def worker(path: str):
        project = parse_sb3(path, include_shadow=args.include_shadow)
        scores = score_project(
            project,
            store,
            reference,
            squared_code=args.squared,
            dedup=args.dedup,
        )
        return scores.as_row()

    rows: list[dict | None] = [None] * len(args.projects)
    errors: list[dict] = []
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            futures = {pool.submit(worker, p): i for i, p in enumerate(args.projects)}
            for future, index in futures.items():
                try:
                    rows[index] = future.result()
                except CreativityError as exc:
                    errors.append({"item": args.projects[index], "error": str(exc)})
    else:
        for index, path in enumerate(args.projects):
            try:
                rows[index] = worker(path)
            except CreativityError as exc:
                errors.append({"item": path, "error": str(exc)})
    done = [r for r in rows if r is not None]
    if args.format == "json":
        _emit(json.dumps(done, sort_keys=True, indent=2) + "\n", args.output)
    elif args.format == "csv":
        _emit(_rows_to_csv(done), args.output)
    else:
        _emit(_rows_to_table(done), args.output)
    if errors:
        return _fail(errors)
    return 0


def cmd_distance(args) -> int:
    store = FeatureStore(args.sidecars, fallback=args.fallback_features)
    left = parse_sb3(args.left, include_shadow=args.include_shadow)
    right = parse_sb3(args.right, include_shadow=args.include_shadow)
    if args.modality == "code":
        value = code_project_distance(left, right, squared=args.squared)
    else:
        kind = "image" if args.modality == "visual" else "sound"
        metric = cosine_metric() if args.modality == "visual" else matrix_metric()
        products = _feature_products(store, [left, right], kind)
        value = mean_pairwise_distance(products[0], products[1], metric)
    _emit(
        json.dumps(
            {"left": args.left, "right": args.right, "modality": args.modality, "distance": value},
            sort_keys=True,
            indent=2,
        )
        + "\n",
        args.output,
    )
    return 0


def _load_experiment_inputs(args) -> tuple:
    labels = ExpertLabels(
        rows=load_labels_csv(args.labels), weights=load_weights_csv(args.weights)
    )
    projects = load_corpus_dir(args.corpus, include_shadow=args.include_shadow)
    store = FeatureStore(args.sidecars, fallback=args.fallback_features)
    corpus = score_corpus(
        projects, store, squared_code=args.squared, dedup=args.dedup
    )
    return labels, corpus


def cmd_train(args) -> int:
    labels, corpus = _load_experiment_inputs(args)
    rows = build_rows(corpus, labels)
    columns = list(feature_indices(args.target))
    depth = 4 if args.target == "weighted" else 3
    out = Path(args.out)
    if args.mode == "combined":
        X = np.array([r.features[columns] for r in rows])
        y = np.array([r.targets[args.target] for r in rows])
        model = fit_gbt(X, y, GbtParams(n_trees=29, max_depth=depth))
        save_model(model, out)
        written = [str(out)]
    else:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for expert in labels.experts():
            expert_rows = [r for r in rows if r.expert_id == expert]
            X = np.array([r.features[columns] for r in expert_rows])
            y = np.array([r.targets[args.target] for r in expert_rows])
            trees = 10 if len(expert_rows) <= 10 else 15
            model = fit_gbt(X, y, GbtParams(n_trees=trees, max_depth=depth))
            path = out / f"expert-{expert}.gbt"
            save_model(model, path)
            written.append(str(path))
    _emit(
        json.dumps({"models": written, "target": args.target, "mode": args.mode},
                   sort_keys=True, indent=2) + "\n",
        args.output,
    )
    return 0


def _report_table(reports: dict) -> str:
    """Rows are experts plus the combined model, columns the targets."""
    experts: list[str] = []
    for per_target in reports.values():
        per_expert = per_target.get("per-expert")
        if per_expert:
            experts = [g.name for g in per_expert.groups]
            break
    targets = list(reports)
    lines = []
    header = ["Expert", *[t.capitalize() for t in targets]]
    rows = []
    for expert in experts:
        cells = [expert]
        for target in targets:
            report = reports[target].get("per-expert")
            value = None
            if report:
                for group in report.groups:
                    if group.name == expert:
                        value = group.mean_tau
            cells.append("-" if value is None else f"{value:.2f}")
        rows.append(cells)
    combined_cells = ["Combined"]
    for target in targets:
        report = reports[target].get("combined")
        value = report.mean_tau if report else None
        combined_cells.append("-" if value is None else f"{value:.2f}")
    rows.append(combined_cells)
    widths = [
        max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))
    ]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    labels, corpus = _load_experiment_inputs(args)
    targets = list(TARGETS) if args.target == "all" else [args.target]
    modes = ["per-expert", "combined"] if args.mode == "both" else [args.mode]
    reports: dict[str, dict] = {}
    for target in targets:
        reports[target] = {}
        for mode in modes:
            reports[target][mode] = run_experiment(
                corpus,
                labels,
                mode=mode,
                target=target,
                seed=args.seed,
                n_folds=args.folds,
                tau_variant=args.tau,
            )
    if args.format == "table":
        _emit(_report_table(reports), args.output)
    else:
        payload = {
            "seed": args.seed,
            "tau_variant": args.tau,
            "targets": {
                target: {mode: report.to_dict() for mode, report in per_mode.items()}
                for target, per_mode in reports.items()
            },
        }
        _emit(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.output)
    return 0


def _adapter_extractors():
    try:
        from scratch_creativity_adapter import extract_audio_matrix, extract_image_vector
    except ImportError:
        return None
    return extract_image_vector, extract_audio_matrix


def cmd_extract_features(args) -> int:
    want_images = args.images or not (args.images or args.sounds)
    want_sounds = args.sounds or not (args.images or args.sounds)
    adapter = _adapter_extractors() if args.backend in ("auto", "adapter") else None
    if args.backend == "adapter" and adapter is None:
        sys.stderr.write("adapter backend requested but not installed\n")
        return 2
    out = Path(args.out)
    errors: list[dict] = []
    written = 0
    for path in args.projects:
        try:
            project = parse_sb3(path, include_shadow=args.include_shadow)
        except CreativityError as exc:
            errors.append({"item": path, "error": str(exc)})
            continue
        assets = []
        if want_images:
            assets.extend(project.images)
        if want_sounds:
            assets.extend(project.sounds)
        for asset in assets:
            try:
                data = read_asset(project, asset)
                if asset.kind == "image":
                    if adapter:
                        vector = adapter[0](data)
                    else:
                        vector = baseline_image_embedding(decode_image(data))
                    matrix = vector.reshape(1, -1)
                    kind = "image"
                else:
                    if adapter:
                        matrix = adapter[1](data)
                    else:
                        samples, rate = decode_wav(data)
                        matrix = baseline_audio_features(
                            samples, rate, AudioFrameConfig.for_rate(rate)
                        )
                    kind = "audio"
                write_sidecar(out, FeatureSidecar(asset.digest, kind, matrix))
                written += 1
            except CreativityError as exc:
                errors.append({"item": asset.digest, "error": str(exc)})
    _emit(
        json.dumps(
            {"written": written, "backend": "adapter" if adapter else "baseline"},
            sort_keys=True,
            indent=2,
        )
        + "\n",
        args.output,
    )
    if errors:
        return _fail(errors)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "score": cmd_score,
        "distance": cmd_distance,
        "train": cmd_train,
        "evaluate": cmd_evaluate,
        "extract-features": cmd_extract_features,
    }
    try:
        return handlers[args.command](args)
    except CreativityError as exc:
        if isinstance(exc, MissingFeatures):
            return _fail([{"item": d, "error": "missing feature sidecar"} for d in exc.digests])
        return _fail([{"item": args.command, "error": str(exc)}])


if __name__ == "__main__":
    sys.exit(main())
