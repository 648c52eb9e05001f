"""Batch front door: synthesis, preprocessing, training, segmentation,
post-processing, evaluation, overlay rendering, and reconstruction
benchmarking.

Every subcommand is deterministic given its flags and seeds, writes its
primary outputs first, and finishes by atomically writing a JSON run
manifest (resolved flags, paths, seeds, tool version, wall-clock timing)
alongside them. Exit codes: 0 success, 1 I/O or precondition failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import LocalWindowClassifier, load_model, predict, save_model, segment, train
from .io import (
    read_image_png,
    read_labels_png,
    read_p3f,
    write_image_png,
    write_labels_png,
    write_p3f,
)
from .metrics import evaluate
from .morphology import RECONSTRUCTION_ALGORITHMS, reconstruct
from .phantom import PhantomSpec, generate_phantom
from .postprocess import enforce_topology
from .preprocess import PreprocessConfig, build_border_marker, geodesic_preprocess
from .raster import IntensityRaster, LabelMap
from .tiling import CropSpec, grid_crops

__all__ = ["run", "main"]

OVERLAY_COLORS = {1: (0, 255, 255), 2: (255, 0, 255), 3: (255, 165, 0)}


def _write_manifest(path: Path, subcommand: str, args: argparse.Namespace, outputs: list[str], started: float) -> None:
    doc = {
        "subcommand": subcommand,
        "flags": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "outputs": outputs,
        "version": __version__,
        "wall_clock_s": round(time.perf_counter() - started, 6),
    }
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2, default=str) + "\n")
    os.replace(tmp, path)


def _manifest_path(primary_output: str | Path) -> Path:
    p = Path(primary_output)
    if p.is_dir():
        return p / "run_manifest.json"
    return p.with_name(p.name + ".manifest.json")


def _add_phantom_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--width", type=int, default=PhantomSpec.width)
    parser.add_argument("--height", type=int, default=PhantomSpec.height)
    parser.add_argument("--detached", choices=("none", "unbroken", "broken", "alternate"), default="alternate",
                        help="detached-layer variant; 'alternate' flips per index")
    parser.add_argument("--break-width", type=int, default=PhantomSpec.break_width)
    parser.add_argument("--hole-count", type=int, default=PhantomSpec.scaffold_hole_count)


def _cmd_synth(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    specs = []
    outputs = []
    for i in range(args.count):
        if args.detached == "alternate":
            layer = "unbroken" if i % 2 == 0 else "broken"
        else:
            layer = args.detached
        spec = PhantomSpec(
            width=args.width,
            height=args.height,
            seed=args.seed + i,
            detached_layer=layer,
            break_width=args.break_width,
            scaffold_hole_count=args.hole_count,
        )
        pair = generate_phantom(spec)
        img_name, gt_name = f"img_{i:04d}.png", f"gt_{i:04d}.png"
        write_image_png(pair.image, out / img_name)
        write_labels_png(pair.gt, out / gt_name)
        outputs += [str(out / img_name), str(out / gt_name)]
        specs.append({"image": img_name, "gt": gt_name, **{f.name: getattr(spec, f.name) for f in fields(spec)}})
    (out / "phantoms.json").write_text(json.dumps({"generator": "numpy PCG64", "specs": specs}, indent=2) + "\n")
    outputs.append(str(out / "phantoms.json"))
    _write_manifest(_manifest_path(out), "synth", args, outputs, started)
    return 0


def _cmd_preprocess(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    img = read_image_png(args.infile)
    result = geodesic_preprocess(img, PreprocessConfig(blend=not args.no_blend))
    write_image_png(result, args.out)
    _write_manifest(_manifest_path(args.out), "preprocess", args, [args.out], started)
    return 0


def _load_pairs(data_dir: Path) -> list[tuple[IntensityRaster, LabelMap]]:
    imgs = sorted(data_dir.glob("img_*.png"))
    if not imgs:
        raise FileNotFoundError(f"{data_dir}: no img_*.png files found")
    pairs = []
    for img_path in imgs:
        gt_path = img_path.with_name(img_path.name.replace("img_", "gt_", 1))
        if not gt_path.exists():
            raise FileNotFoundError(f"{gt_path}: ground truth missing for {img_path.name}")
        pairs.append((read_image_png(img_path), read_labels_png(gt_path)))
    return pairs


def _cmd_train(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    pairs = _load_pairs(Path(args.data))
    spec = CropSpec(size=args.crop_size, stride=args.stride)
    crops = []
    for img, gt in pairs:
        if args.preprocess:
            img = geodesic_preprocess(img)
        crops.extend(grid_crops(img, gt, spec))
    if not crops:
        raise ValueError(f"{args.data}: no crop contains label 2 or 3")
    clf = LocalWindowClassifier(
        radius=args.radius,
        channels=crops[0].image.channels,
        trained_on_preprocessed=args.preprocess,
    )
    clf, history = train(
        clf,
        crops,
        epochs=args.epochs,
        learning_rate=args.lr,
        subsample_rate=args.subsample,
        seed=args.seed,
    )
    save_model(clf, args.model)
    manifest = _manifest_path(args.model)
    _write_manifest(manifest, "train", args, [args.model], started)
    doc = json.loads(manifest.read_text())
    doc["crops"] = len(crops)
    doc["final_loss"] = history[-1] if history else None
    manifest.write_text(json.dumps(doc, indent=2, default=str) + "\n")
    return 0


def _cmd_segment(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    clf = load_model(args.model)
    img = read_image_png(args.infile)
    outputs = []
    if args.probs:
        from .raster import argmax_labels
        from .tiling import pad_to_multiple, unpad

        padded, dims = pad_to_multiple(img, args.pad_multiple)
        pm = predict(clf, padded)
        write_p3f(pm, args.probs)
        outputs.append(args.probs)
        labels = unpad(argmax_labels(pm), dims)
    else:
        labels = segment(clf, img, args.pad_multiple)
    write_labels_png(labels, args.labels)
    outputs.append(args.labels)
    _write_manifest(_manifest_path(args.labels), "segment", args, outputs, started)
    return 0


def _cmd_postprocess(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    labels = read_labels_png(args.infile)
    write_labels_png(enforce_topology(labels), args.out)
    _write_manifest(_manifest_path(args.out), "postprocess", args, [args.out], started)
    return 0


def _collect_eval_pairs(pred: str, gt: str) -> list[tuple[str, str]]:
    pred_path, gt_path = Path(pred), Path(gt)
    if pred_path.is_dir() != gt_path.is_dir():
        raise ValueError("--pred and --gt must both be files or both be directories")
    if not pred_path.is_dir():
        return [(str(pred_path), str(gt_path))]
    preds = sorted(p for p in pred_path.glob("*.png"))
    gts = sorted(p for p in gt_path.glob("*.png"))
    if len(preds) != len(gts):
        raise ValueError(f"{pred}: {len(preds)} predictions vs {len(gts)} ground truths")
    if not preds:
        raise ValueError(f"{pred}: no PNG files to evaluate")
    return [(str(p), str(g)) for p, g in zip(preds, gts)]


def _cmd_eval(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    rows = []
    for pred_file, gt_file in _collect_eval_pairs(args.pred, args.gt):
        report = evaluate(read_labels_png(pred_file), read_labels_png(gt_file))
        rows.append({"prediction": pred_file, "ground_truth": gt_file, **report.as_dict()})
    metric_names = ["accuracy", "jaccard_sc", "jaccard_le", "mean_contour_distance"]
    aggregate = {m: sum(r[m] for r in rows) / len(rows) for m in metric_names}
    doc = {"images": rows, "aggregate": aggregate}
    Path(args.report).write_text(json.dumps(doc, indent=2) + "\n")
    outputs = [args.report]
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["prediction", "ground_truth"] + metric_names)
            writer.writeheader()
            writer.writerows(rows)
        outputs.append(args.csv)
    _write_manifest(_manifest_path(args.report), "eval", args, outputs, started)
    return 0


def _cmd_overlay(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    img = read_image_png(args.image)
    labels = read_labels_png(args.labels)
    if (img.width, img.height) != (labels.width, labels.height):
        raise ValueError(
            f"image {img.width}x{img.height} and labels {labels.width}x{labels.height} differ"
        )
    if (labels.data == 0).any():
        raise ValueError(f"{args.labels}: overlay needs fully labeled maps (no 0)")
    rgb = img.data if img.channels == 3 else np.repeat(img.data, 3, axis=0)
    color = np.zeros_like(rgb)
    for label, (r, g, b) in OVERLAY_COLORS.items():
        mask = labels.data == label
        color[0][mask], color[1][mask], color[2][mask] = r, g, b
    blended = (rgb.astype(np.uint16) + color.astype(np.uint16) + 1) // 2
    write_image_png(IntensityRaster(blended.astype(np.uint8)), args.out)
    _write_manifest(_manifest_path(args.out), "overlay", args, [args.out], started)
    return 0


def _cmd_pipeline(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    clf = load_model(args.model)
    img = read_image_png(args.infile)
    use_pre = clf.trained_on_preprocessed if args.preprocess is None else args.preprocess
    if use_pre:
        img = geodesic_preprocess(img)
    labels = enforce_topology(segment(clf, img, args.pad_multiple))
    outputs = []
    if args.labels:
        write_labels_png(labels, args.labels)
        outputs.append(args.labels)
    report = evaluate(labels, read_labels_png(args.gt))
    Path(args.report).write_text(json.dumps(report.as_dict(), indent=2) + "\n")
    outputs.append(args.report)
    _write_manifest(_manifest_path(args.report), "pipeline", args, outputs, started)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    spec = PhantomSpec(width=args.width, height=args.height, seed=args.seed, detached_layer="unbroken")
    channel = IntensityRaster(generate_phantom(spec).image.data[0][np.newaxis])
    marker = build_border_marker(channel)
    result = reconstruct(marker, channel, algo=args.algo)
    if args.algo == "naive":
        validated = True  # the naive iteration is the oracle itself
    else:
        reference = reconstruct(marker, channel, algo="naive")
        validated = bool(np.array_equal(result.data, reference.data))
    timings = []
    for _ in range(args.repeat):
        t0 = time.perf_counter_ns()
        reconstruct(marker, channel, algo=args.algo)
        timings.append(time.perf_counter_ns() - t0)
    median_ns = int(np.median(timings))
    row = {
        "algo": args.algo,
        "width": args.width,
        "height": args.height,
        "repeat": args.repeat,
        "median_ns": median_ns,
        "validated": str(validated).lower(),
    }
    exists = Path(args.csv).exists()
    with open(args.csv, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(row))
        if not exists:
            writer.writeheader()
        writer.writerow(row)
    _write_manifest(_manifest_path(args.csv), "bench", args, [args.csv], started)
    print(f"{args.algo}: median {median_ns / 1e6:.3f} ms over {args.repeat} runs, validated={validated}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geoseg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"geoseg {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("synth", help="generate seeded phantom image/GT pairs")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    _add_phantom_flags(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("preprocess", help="geodesic border-reconstruction preprocessing, PNG in/out")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-blend", action="store_true", help="return the reconstruction J instead of (J+I)/2")
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("train", help="train the local-window classifier on img_/gt_ pairs")
    p.add_argument("--data", required=True, help="directory of img_NNNN.png / gt_NNNN.png pairs")
    p.add_argument("--model", required=True, help="output model JSON")
    p.add_argument("--radius", type=int, default=5)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--lr", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--subsample", type=float, default=0.04)
    p.add_argument("--crop-size", type=int, default=192)
    p.add_argument("--stride", type=int, default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--preprocess", dest="preprocess", action="store_true")
    group.add_argument("--no-preprocess", dest="preprocess", action="store_false")
    p.set_defaults(preprocess=False, func=_cmd_train)

    p = sub.add_parser("segment", help="full-image inference with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--labels", required=True, help="output label PNG")
    p.add_argument("--probs", default=None, help="optional P3F probability output")
    p.add_argument("--pad-multiple", type=int, default=16)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("postprocess", help="topological clean-up of a label PNG")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_postprocess)

    p = sub.add_parser("eval", help="metrics report for predictions vs ground truth")
    p.add_argument("--pred", required=True, help="label PNG or directory of them")
    p.add_argument("--gt", required=True, help="label PNG or directory of them")
    p.add_argument("--report", required=True, help="output JSON report")
    p.add_argument("--csv", default=None, help="optional per-image CSV")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("overlay", help="blend label colors 50/50 over the image")
    p.add_argument("--image", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_overlay)

    p = sub.add_parser("pipeline", help="preprocess, segment, postprocess, and evaluate in one call")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--labels", default=None, help="optionally save the final label PNG")
    p.add_argument("--pad-multiple", type=int, default=16)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--preprocess", dest="preprocess", action="store_true", default=None)
    group.add_argument("--no-preprocess", dest="preprocess", action="store_false")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("bench", help="time one reconstruction variant on a seeded phantom channel")
    p.add_argument("--algo", choices=RECONSTRUCTION_ALGORITHMS, required=True)
    p.add_argument("--width", type=int, default=2048)
    p.add_argument("--height", type=int, default=2048)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--csv", required=True)
    p.set_defaults(func=_cmd_bench)

    return parser


def run(argv: list[str]) -> int:
    """Parse and execute; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"geoseg {args.subcommand}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
