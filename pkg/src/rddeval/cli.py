"""rddeval command line: evaluate, fuse, sweep, stats, convert, serve.

Exit codes: 0 success, 1 usage or configuration error, 2 data or parse
error. Diagnostics go to standard error only; primary output is
deterministic for identical inputs and flags.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__, dataset_io, fusion, matching, report
from .dataset_io import format_number
from .errors import DataError, RddEvalError, UsageError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

DETECTION_FORMATS = ("submission", "scored")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise UsageError(message)


def _default_threads() -> int:
    value = os.environ.get("RDDEVAL_THREADS", "")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from None


def _check_thresholds(iou: float, conf: float) -> None:
    if not (0.0 < iou < 1.0):
        raise UsageError(f"--iou must be in (0, 1), got {iou}")
    if not (0.0 <= conf < 1.0):
        raise UsageError(f"--conf must be in [0, 1), got {conf}")


def _load_ground_truth(source: str, strict: bool):
    annotations = dataset_io.load_annotations(source, strict=strict)
    return dataset_io.ground_truth_index(annotations)


def parse_grid(text: str) -> list[float]:
    """Grid flag syntax: ``start:stop:step`` (start inclusive, stop
    exclusive) or an explicit comma-separated list."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"grid range must be start:stop:step, got {text!r}")
            start, stop, step = (float(p) for p in parts)
            if step <= 0.0:
                raise UsageError(f"grid step must be > 0, got {step}")
            values = []
            k = 0
            while start + k * step < stop:
                values.append(start + k * step)
                k += 1
            return values
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}") from None


def cmd_eval(args) -> int:
    _check_thresholds(args.iou, args.conf)
    gt_index = _load_ground_truth(args.gt, args.strict)
    detections = dataset_io.parse_detections(_read_text(args.det), fmt=args.format)
    result = matching.evaluate(
        gt_index,
        detections,
        conf_threshold=args.conf,
        iou_threshold=args.iou,
        threads=args.threads,
    )
    if args.kv:
        sys.stdout.write(report.report_to_kv(result))
    else:
        sys.stdout.write(
            report.format_report(result, per_class=args.per_class, per_country=args.per_country)
        )
    return EXIT_OK


def _fusion_config(args) -> fusion.FusionConfig:
    base = fusion.load_fusion_config(_read_text(args.config)) if args.config else fusion.FusionConfig()
    weights = dict(base.model_weights)
    if args.weights:
        for item in args.weights.split(","):
            model_id, sep, value = item.partition("=")
            if not sep:
                raise UsageError(f"--weights entries must be model_id=weight, got {item!r}")
            try:
                weights[model_id.strip()] = float(value)
            except ValueError:
                raise UsageError(f"bad weight {value!r} for model {model_id!r}") from None
    return fusion.FusionConfig(
        strategy=args.strategy if args.strategy is not None else base.strategy,
        iou_cluster_threshold=(
            args.iou_cluster if args.iou_cluster is not None else base.iou_cluster_threshold
        ),
        min_votes=args.min_votes if args.min_votes is not None else base.min_votes,
        model_weights=weights,
        skip_box_threshold=(
            args.skip_box if args.skip_box is not None else base.skip_box_threshold
        ),
    )


def cmd_fuse(args) -> int:
    det_sets: dict[str, list[dataset_io.Detection]] = {}
    for path in args.det:
        model_id = Path(path).stem
        if model_id in det_sets:
            raise UsageError(f"duplicate model id {model_id!r}; rename the input files")
        det_sets[model_id] = dataset_io.parse_detections(
            _read_text(path), fmt="scored", model_id=model_id
        )
    cfg = _fusion_config(args)
    fused = fusion.fuse(det_sets, cfg, threads=args.threads)
    _write_text(args.out, dataset_io.write_scored(fused))
    print(f"wrote {len(fused)} detections to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not (0.0 < args.iou < 1.0):
        raise UsageError(f"--iou must be in (0, 1), got {args.iou}")
    gt_index = _load_ground_truth(args.gt, args.strict)
    detections = dataset_io.parse_detections(_read_text(args.det), fmt=args.format)
    grid = parse_grid(args.grid)
    best, curve = fusion.sweep_threshold(
        gt_index, detections, grid, iou_threshold=args.iou, threads=args.threads
    )
    best_f1 = max(point[3] for point in curve)
    sys.stdout.write(f"best_threshold {format_number(best)}\n")
    sys.stdout.write(f"best_f1 {best_f1:.4f}\n")
    if args.curve_out:
        _write_text(args.curve_out, report.emit_curve(curve))
    return EXIT_OK


def cmd_stats(args) -> int:
    annotations = dataset_io.load_annotations(args.gt, strict=args.strict)
    stats = dataset_io.dataset_stats(annotations)
    lines = []
    for country, count in stats.images_per_country.items():
        lines.append(f"images.{country.value} {count}")
    lines.append(f"images.total {stats.total_images}")
    for cls, count in stats.boxes_per_class.items():
        lines.append(f"boxes.{cls.value} {count}")
    lines.append(f"boxes.total {stats.total_boxes}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_convert(args) -> int:
    if args.conf and not (0.0 <= args.conf <= 1.0):
        raise UsageError(f"--conf must be in [0, 1], got {args.conf}")
    detections = dataset_io.parse_detections(_read_text(args.infile), fmt=args.in_format)
    if args.out_format == "submission":
        text = dataset_io.write_submission(detections, args.conf, args.max_per_image)
    else:
        selected = dataset_io.select_detections(detections, args.conf, args.max_per_image)
        text = dataset_io.write_scored(selected)
    _write_text(args.out, text)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(gt_source=args.gt, strict=args.strict)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_threads_flag(parser) -> None:
    parser.add_argument(
        "--threads",
        type=int,
        default=_default_threads(),
        help="worker cap for per-image work; output does not depend on it "
        "(default: RDDEVAL_THREADS or 1)",
    )


def _add_gt_flags(parser) -> None:
    parser.add_argument(
        "--gt",
        required=True,
        help="ground truth: directory of VOC XML files, one XML file, or a list file of paths",
    )
    parser.add_argument(
        "--strict",
        action="store_true",
        help="fail on unknown damage classes instead of dropping them with a warning",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rddeval", description=__doc__)
    parser.add_argument("--version", action="version", version=f"rddeval {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_eval = sub.add_parser("eval", help="score detections against ground truth")
    _add_gt_flags(p_eval)
    p_eval.add_argument("--det", required=True, help="detection file to score")
    p_eval.add_argument("--format", choices=DETECTION_FORMATS, default="scored")
    p_eval.add_argument("--iou", type=float, default=0.5, help="IoU gate; a match needs IoU strictly above it")
    p_eval.add_argument("--conf", type=float, default=0.0, help="drop detections below this confidence")
    p_eval.add_argument("--per-class", action="store_true", help="add per-class breakdown lines")
    p_eval.add_argument("--per-country", action="store_true", help="add per-country breakdown lines")
    p_eval.add_argument("--kv", action="store_true", help="emit the machine-readable key=value report")
    _add_threads_flag(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_fuse = sub.add_parser("fuse", help="fuse per-model detection files into one set")
    p_fuse.add_argument(
        "--det",
        action="append",
        required=True,
        metavar="FILE",
        help="scored-format detections of one model; repeat per model "
        "(the file stem becomes the model id)",
    )
    p_fuse.add_argument("--strategy", choices=[s.value for s in fusion.FusionStrategy], default=None)
    p_fuse.add_argument("--iou-cluster", type=float, default=None, help="IoU threshold for grouping boxes")
    p_fuse.add_argument("--min-votes", type=int, default=None, help="consensus: minimum distinct models per cluster")
    p_fuse.add_argument("--weights", default=None, help="per-model weights, e.g. m0=1.0,m1=2.0")
    p_fuse.add_argument("--skip-box", type=float, default=None, help="weighted fusion: drop fused boxes below this confidence")
    p_fuse.add_argument("--config", default=None, help="key=value fusion config file; flags override it")
    p_fuse.add_argument("--out", required=True, help="output file (scored format)")
    _add_threads_flag(p_fuse)
    p_fuse.set_defaults(func=cmd_fuse)

    p_sweep = sub.add_parser("sweep", help="sweep the confidence threshold and report the best F1")
    _add_gt_flags(p_sweep)
    p_sweep.add_argument("--det", required=True)
    p_sweep.add_argument("--format", choices=DETECTION_FORMATS, default="scored")
    p_sweep.add_argument("--iou", type=float, default=0.5)
    p_sweep.add_argument(
        "--grid",
        required=True,
        help="thresholds to try: start:stop:step (stop exclusive) or a comma list",
    )
    p_sweep.add_argument("--curve-out", default=None, help="write the sweep curve as CSV")
    _add_threads_flag(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_stats = sub.add_parser("stats", help="dataset composition: images per country, boxes per class")
    _add_gt_flags(p_stats)
    p_stats.set_defaults(func=cmd_stats)

    p_convert = sub.add_parser("convert", help="convert between detection file formats")
    p_convert.add_argument("--in", dest="infile", required=True)
    p_convert.add_argument("--in-format", choices=DETECTION_FORMATS, required=True)
    p_convert.add_argument("--out", required=True)
    p_convert.add_argument("--out-format", choices=DETECTION_FORMATS, required=True)
    p_convert.add_argument("--conf", type=float, default=0.0, help="drop detections below this confidence")
    p_convert.add_argument("--max-per-image", type=int, default=None, help="keep at most this many boxes per image")
    p_convert.set_defaults(func=cmd_convert)

    p_serve = sub.add_parser("serve", help="run the HTTP scoring service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--gt", default=None, help="preload ground truth so clients can POST /score")
    p_serve.add_argument("--strict", action="store_true")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"rddeval: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"rddeval: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RddEvalError as exc:
        print(f"rddeval: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"rddeval: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
