"""Command-line interface.

Subcommands mirror the pipeline: scan a dataset into a manifest, split it,
generate stage-1/stage-2 prompt files, evaluate predictions, debug CVT
click placement on a single mask, and synthesize a demo corpus.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .batch import format_report_table, run_batch
from .cvt import ClickBudgetPolicy, CvtClicker
from .dataset import load_manifest, save_manifest, scan_dataset, split_dataset
from .masks import load_mask, resize_mask
from .overlay import click_overlay, save_overlay
from .regions import label_components
from .synthetic import make_corpus


def _parse_frame(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"frame must look like WxH, got {text!r}")
    try:
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"frame must look like WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError(f"frame must be positive, got {text!r}")
    return (w, h)


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="seed for split / synthesis (default 0)")
    p.add_argument("--frame", type=_parse_frame, default=(256, 256), metavar="WxH",
                   help="target mask frame (default 256x256)")
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8,
                   help="pixel connectivity for components (default 8)")
    p.add_argument("--min-area", type=int, default=10,
                   help="regions below this area get no clicks (default 10)")
    p.add_argument("--area-per-click", type=int, default=400,
                   help="pixels per click in the budget rule (default 400)")
    p.add_argument("--max-clicks", type=int, default=10,
                   help="per-region click cap (default 10)")
    p.add_argument("--bbox-iou", action="store_true",
                   help="make bbox IoU the headline metric in eval output")
    p.add_argument("--overlay", metavar="DIR", default=None,
                   help="write TP/FP/FN overlay PNGs into DIR (stage2/eval)")


def _policy(args) -> ClickBudgetPolicy:
    return ClickBudgetPolicy(
        min_area=args.min_area,
        area_per_click=args.area_per_click,
        max_clicks=args.max_clicks,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskprompt",
        description="Click-prompt generation and evaluation for promptable segmentation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="inventory a BUSI-style dataset directory")
    p.add_argument("root", help="dataset root directory")
    p.add_argument("--out", required=True, help="manifest file to write")
    p.add_argument("--include-normal", action="store_true",
                   help="keep images of the 'normal' class (excluded by default)")
    _common_flags(p)

    p = sub.add_parser("split", help="assign the seeded train/test split")
    p.add_argument("manifest", help="manifest file from 'scan'")
    p.add_argument("--out", required=True, help="manifest file to write")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--stratify", action="store_true", help="balance the split per class")
    _common_flags(p)

    p = sub.add_parser("stage1", help="write stage-1 centroid prompt files")
    p.add_argument("manifest")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--split", choices=("all", "train", "test"), default="all")
    _common_flags(p)

    p = sub.add_parser("stage2", help="write stage-2 CVT prompt files from predictions")
    p.add_argument("manifest")
    p.add_argument("--pred-dir", required=True, help="directory of <image_id>.png predictions")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--split", choices=("all", "train", "test"), default="all")
    _common_flags(p)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("manifest")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--out-dir", required=True, help="directory for report.tsv")
    p.add_argument("--split", choices=("all", "train", "test"), default="all")
    _common_flags(p)

    p = sub.add_parser("cvt-debug", help="place k clicks on one mask and render them")
    p.add_argument("mask", help="mask image file")
    p.add_argument("--clicks", type=int, default=3, metavar="K")
    p.add_argument("--component", type=int, default=None,
                   help="component id to click (default: largest component)")
    p.add_argument("--out", required=True, help="overlay PNG to write")
    _common_flags(p)

    p = sub.add_parser("make-synthetic", help="generate the bundled synthetic corpus")
    p.add_argument("root", help="directory to create")
    p.add_argument("--count", type=int, default=220)
    p.add_argument("--normals", type=int, default=0)
    p.add_argument("--size", type=int, default=256)
    _common_flags(p)

    return parser


def _cmd_scan(args) -> int:
    manifest = scan_dataset(args.root, include_normal=args.include_normal)
    save_manifest(manifest, args.out)
    print(f"scanned {len(manifest)} images -> {args.out}")
    return 0


def _cmd_split(args) -> int:
    manifest = load_manifest(args.manifest)
    manifest = split_dataset(manifest, train_fraction=args.train_fraction,
                             seed=args.seed, stratify=args.stratify)
    save_manifest(manifest, args.out)
    n_train = len(manifest.subset("train"))
    print(f"split {len(manifest)} images: {n_train} train, {len(manifest) - n_train} test "
          f"(seed {args.seed}) -> {args.out}")
    return 0


def _cmd_batch(args, mode: str) -> int:
    manifest = load_manifest(args.manifest)
    result = run_batch(
        manifest, mode,
        out_dir=args.out_dir,
        frame=args.frame,
        policy=_policy(args),
        connectivity=args.connectivity,
        predictions_dir=getattr(args, "pred_dir", None),
        split=args.split,
        overlay_dir=args.overlay,
    )
    if mode == "eval" and result.reports:
        print(format_report_table(result, headline="bbox_iou" if args.bbox_iou else "mask_iou"))
    for image_id, message in result.failed:
        print(f"error: {image_id}: {message}", file=sys.stderr)
    print(result.summary_line())
    return result.exit_code


def _cmd_cvt_debug(args) -> int:
    mask = load_mask(args.mask)
    w, h = args.frame
    if mask.shape != (h, w):
        mask = resize_mask(mask, w, h)
    regions = label_components(mask, connectivity=args.connectivity)
    if not regions:
        print("error: mask has no foreground", file=sys.stderr)
        return 1
    if args.component is None:
        region = max(regions, key=lambda r: r.area)
    else:
        matches = [r for r in regions if r.component_id == args.component]
        if not matches:
            print(f"error: no component with id {args.component} "
                  f"(have 0..{len(regions) - 1})", file=sys.stderr)
            return 1
        region = matches[0]
    clicker = CvtClicker(n_clicks=args.clicks).fit(region.pixels)
    print(f"component {region.component_id}: area {region.area}, "
          f"energy {clicker.energy_}, iterations {clicker.n_iter_}, "
          f"converged {clicker.converged_}")
    for x, y in clicker.clicks_.tolist():
        print(f"{x}\t{y}")
    save_overlay(click_overlay(mask, clicker.clicks_), args.out)
    print(f"overlay -> {args.out}")
    return 0


def _cmd_make_synthetic(args) -> int:
    written = make_corpus(args.root, count=args.count, seed=args.seed,
                          size=args.size, normals=args.normals)
    print(f"wrote {len(written)} synthetic images under {args.root}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "scan": _cmd_scan,
        "split": _cmd_split,
        "stage1": lambda a: _cmd_batch(a, "stage1"),
        "stage2": lambda a: _cmd_batch(a, "stage2"),
        "eval": lambda a: _cmd_batch(a, "eval"),
        "cvt-debug": _cmd_cvt_debug,
        "make-synthetic": _cmd_make_synthetic,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
