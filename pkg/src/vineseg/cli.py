"""Command-line pipeline driver.

Verbs: synth, rasterize, train, segment, analyze, evaluate. All commands
exit nonzero with a single-line `error: ...` message on failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import annotation as ann_mod
from .analysis import AnalysisParams
from .evaluate import EvaluationError, score_pair, write_report
from .imaging import mask_to_gray, probmap_to_gray, read_image, write_image, gray_to_mask
from .manifest import DatasetManifest, ImageRecord, load_manifest, save_manifest
from .net import NetworkConfig, TrainConfig, build_network, load_model, save_model
from .net.train import train as train_net, write_cost_history
from .pipeline import (TILINGS, TRAIN_MODES, analyze_mask, load_ground_truth,
                       load_image, segment_image, training_patches, write_json)
from .synth import SyntheticSceneSpec, generate_scene


def _add_synth(sub):
    p = sub.add_parser("synth", help="generate a synthetic dataset with ground truth")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--name", default="synthetic")
    p.add_argument("--train", type=int, default=30)
    p.add_argument("--eval", type=int, default=15)
    p.add_argument("--test", type=int, default=0)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--kind", choices=["disc", "polygon-blob", "line"], default="disc")
    p.add_argument("--count-min", type=int, default=20)
    p.add_argument("--count-max", type=int, default=60)
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--stroke-width", type=float, default=3.0)
    p.add_argument("--noise", type=float, default=8.0)
    p.add_argument("--profile", choices=["easy", "hard"], default="easy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-region-size", type=int, default=0)
    p.add_argument("--cluster-dist", type=float, default=20.0)
    p.add_argument("--tolerance", type=float, default=9.0)


def cmd_synth(args):
    out = Path(args.out_dir)
    for sub in ("images", "annotations", "masks"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    records = []
    index = 0
    for split, count in (("train", args.train), ("eval", args.eval), ("test", args.test)):
        for _ in range(count):
            image_id = f"{split}_{index:04d}"
            spec = SyntheticSceneSpec(
                width=args.width, height=args.height, kind=args.kind,
                count_range=(args.count_min, args.count_max),
                radius=args.radius, stroke_width=args.stroke_width,
                noise_level=args.noise, profile=args.profile,
                seed=args.seed * 1_000_003 + index)
            img, ann, mask = generate_scene(spec, image_id)
            write_image(img, out / "images" / f"{image_id}.png")
            ann_mod.save_annotations(ann, out / "annotations" / f"{image_id}.json")
            write_image(mask_to_gray(mask), out / "masks" / f"{image_id}.png")
            records.append(ImageRecord(
                image_id=image_id, image=f"images/{image_id}.png", split=split,
                annotation=f"annotations/{image_id}.json",
                mask=f"masks/{image_id}.png"))
            index += 1
    manifest = DatasetManifest(
        name=args.name,
        params={"radius": args.radius, "stroke_width": args.stroke_width,
                "kind": args.kind, "min_region_size": args.min_region_size,
                "cluster_dist": args.cluster_dist, "tolerance": args.tolerance,
                "channels": 3, "profile": args.profile, "seed": args.seed},
        records=records, root=out)
    save_manifest(manifest, out / "manifest.json")
    print(f"wrote {len(records)} images to {out}")


def _add_rasterize(sub):
    p = sub.add_parser("rasterize", help="rasterize annotation files into mask PNGs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)


def cmd_rasterize(args):
    manifest = load_manifest(args.manifest)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    for rec in manifest.records:
        if not rec.annotation:
            continue
        ann = ann_mod.load_annotations(manifest.path(rec.annotation))
        write_image(mask_to_gray(ann_mod.rasterize(ann)), out / f"{rec.image_id}.png")
        n += 1
    print(f"rasterized {n} annotation files to {out}")


def _add_train(sub):
    p = sub.add_parser("train", help="train a segmentation model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=list(TRAIN_MODES), required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--arch", choices=["full", "toy"], default="full")
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--epochs", type=int, default=23)
    p.add_argument("--batch-size", type=int, default=20)
    p.add_argument("--learning-rate", type=float, default=0.0001)
    p.add_argument("--momentum", type=float, default=0.0)
    p.add_argument("--random-count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dtype", choices=["float32", "float64"], default="float64")
    p.add_argument("--quiet", action="store_true")


def cmd_train(args):
    manifest = load_manifest(args.manifest)
    if args.arch == "toy":
        config = NetworkConfig.toy(input_channels=args.channels)
    else:
        config = NetworkConfig(input_channels=args.channels)
    patches = training_patches(manifest, args.mode, config.input_side,
                               random_count=args.random_count,
                               seed=args.seed, channels=args.channels)
    net = build_network(config, seed=args.seed, dtype=np.dtype(args.dtype))
    tcfg = TrainConfig(batch_size=args.batch_size, learning_rate=args.learning_rate,
                       epochs=args.epochs, momentum=args.momentum,
                       shuffle_seed=args.seed)
    progress = None if args.quiet else (
        lambda e, c: print(f"epoch {e + 1}/{args.epochs}: cost {c:.6f}"))
    history = train_net(net, patches, tcfg, progress=progress)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_model(net, out / "model.npz")
    write_cost_history(history, out / "cost_history.csv")
    print(f"trained on {len(patches)} patches; final cost {history[-1]:.6f}")


def _add_segment(sub):
    p = sub.add_parser("segment", help="segment images with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", choices=["train", "eval", "test"], default="eval")
    p.add_argument("--tiling", choices=list(TILINGS), default="adjacent")
    p.add_argument("--threshold", type=int, default=127)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--deterministic", action="store_true")
    p.add_argument("--out-dir", required=True)


def cmd_segment(args):
    net = load_model(args.model)
    manifest = load_manifest(args.manifest)
    out = Path(args.out_dir)
    (out / "probabilities").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    threads = 1 if args.deterministic else max(1, args.threads)
    records = manifest.split(args.split)
    for rec in records:
        img = load_image(manifest, rec, net.config.input_channels)
        pmap, mask = segment_image(net, img, args.tiling, args.threshold, threads)
        write_image(probmap_to_gray(pmap), out / "probabilities" / f"{rec.image_id}.png")
        write_image(mask_to_gray(mask), out / "masks" / f"{rec.image_id}.png")
    print(f"segmented {len(records)} images into {out}")


def _add_analyze(sub):
    p = sub.add_parser("analyze", help="detect, cluster and measure objects in masks")
    p.add_argument("--masks", required=True, help="directory of mask PNGs")
    p.add_argument("--min-region-size", type=int, default=0)
    p.add_argument("--cluster-dist", type=float, default=20.0)
    p.add_argument("--kind", choices=["", "circle", "polygon", "line"], default="")
    p.add_argument("--out-dir", required=True)


def cmd_analyze(args):
    mask_dir = Path(args.masks)
    files = sorted(mask_dir.glob("*.png"))
    if not files:
        raise FileNotFoundError(f"no mask PNGs in {mask_dir}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = AnalysisParams(min_region_size=args.min_region_size,
                            cluster_distance_threshold=args.cluster_dist)
    for path in files:
        mask = gray_to_mask(read_image(path))
        report = analyze_mask(mask, params, kind=args.kind, image_id=path.stem)
        write_json(report, out / f"{path.stem}.json")
    print(f"analyzed {len(files)} masks into {out}")


def _add_evaluate(sub):
    p = sub.add_parser("evaluate", help="score predicted masks against ground truth")
    p.add_argument("--predictions", required=True, help="directory of predicted mask PNGs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", choices=["train", "eval"], default="eval")
    p.add_argument("--tolerance", type=float, required=True)
    p.add_argument("--min-region-size", type=int, default=0)
    p.add_argument("--out-dir", required=True)


def cmd_evaluate(args):
    manifest = load_manifest(args.manifest)
    pred_dir = Path(args.predictions)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scores = []
    for rec in manifest.split(args.split):
        pred_path = pred_dir / f"{rec.image_id}.png"
        if not pred_path.exists():
            raise EvaluationError(f"no prediction for image id {rec.image_id!r}")
        pred = gray_to_mask(read_image(pred_path))
        truth = load_ground_truth(manifest, rec)
        if pred.shape != truth.shape:
            raise EvaluationError(f"size mismatch for image id {rec.image_id!r}")
        scores.append(score_pair(pred, truth, args.tolerance,
                                 args.min_region_size, rec.image_id))
    summary = write_report(scores, out / "report.csv", out / "report.json")
    print(f"evaluated {summary['images']} images: "
          f"mIoU {summary['mean_miou']:.3f}, F1 {summary['mean_f1']:.3f}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="vineseg",
        description="Patch-based segmentation and object counting pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for add in (_add_synth, _add_rasterize, _add_train, _add_segment,
                _add_analyze, _add_evaluate):
        add(sub)
    return parser


COMMANDS = {
    "synth": cmd_synth,
    "rasterize": cmd_rasterize,
    "train": cmd_train,
    "segment": cmd_segment,
    "analyze": cmd_analyze,
    "evaluate": cmd_evaluate,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except Exception as exc:   # single-line machine-parsable failure
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
