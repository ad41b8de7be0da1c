"""Batch driver: prompt generation and evaluation over a manifest."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cvt import ClickBudgetPolicy
from .dataset import DatasetManifest, merge_masks
from .masks import load_mask, resize_mask
from .metrics import MetricReport, evaluate_pair
from .overlay import error_overlay, save_overlay
from .prompts import serialize_prompts, stage1_prompts, stage2_prompts

MODES = ("stage1", "stage2", "eval")
REPORT_COLUMNS = ("image_id", "class_label", "split", "mask_iou", "bbox_iou", "dice")
MEAN_ROW_ID = "__mean__"


@dataclass
class BatchResult:
    """Outcome of one run_batch call."""

    mode: str
    ok: list[str] = field(default_factory=list)
    failed: list[tuple[str, str]] = field(default_factory=list)
    outputs: list[Path] = field(default_factory=list)
    reports: list[MetricReport] = field(default_factory=list)
    means: dict[str, float] | None = None

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def summary_line(self) -> str:
        line = f"{self.mode}: {len(self.ok)} ok, {len(self.failed)} failed"
        if self.means is not None:
            stats = ", ".join(f"mean {k} {v:.4f}" for k, v in self.means.items())
            line += f" ({stats})"
        return line


def _load_frame_mask(path: Path, frame: tuple[int, int], threshold: int) -> np.ndarray:
    mask = load_mask(path, threshold=threshold)
    w, h = frame
    if mask.shape != (h, w):
        mask = resize_mask(mask, w, h)
    return mask


def _ground_truth(manifest: DatasetManifest, entry, frame, threshold) -> np.ndarray:
    merged = merge_masks(manifest.mask_files(entry), threshold=threshold)
    w, h = frame
    if merged.shape != (h, w):
        merged = resize_mask(merged, w, h)
    return merged


def run_batch(
    manifest: DatasetManifest,
    mode: str,
    out_dir,
    frame: tuple[int, int] = (256, 256),
    policy: ClickBudgetPolicy = ClickBudgetPolicy(),
    connectivity: int = 8,
    predictions_dir=None,
    split: str = "all",
    threshold: int = 127,
    overlay_dir=None,
) -> BatchResult:
    """Run one pipeline mode over every selected manifest entry.

    stage1/stage2 write one "<image_id>.prompts" file per image; eval
    writes "report.tsv" with one record per image plus a mean summary row.
    Per-image failures (e.g. a missing prediction file) are recorded and
    the batch continues; the result carries a nonzero exit code if any
    image failed.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode in ("stage2", "eval") and predictions_dir is None:
        raise ValueError(f"{mode} requires a predictions directory")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    overlay_dir = Path(overlay_dir) if overlay_dir is not None else None

    result = BatchResult(mode=mode)
    for entry in manifest.subset(split):
        try:
            gt = _ground_truth(manifest, entry, frame, threshold)
            if mode == "stage1":
                ps = stage1_prompts(gt, policy=policy, connectivity=connectivity, image_id=entry.image_id)
                out = out_dir / f"{entry.image_id}.prompts"
                serialize_prompts(ps, out)
                result.outputs.append(out)
            else:
                pred_path = Path(predictions_dir) / f"{entry.image_id}.png"
                if not pred_path.is_file():
                    raise FileNotFoundError(f"missing prediction {pred_path}")
                pred = _load_frame_mask(pred_path, frame, threshold)
                if mode == "stage2":
                    ps = stage2_prompts(
                        pred, gt, policy=policy, connectivity=connectivity, image_id=entry.image_id,
                    )
                    out = out_dir / f"{entry.image_id}.prompts"
                    serialize_prompts(ps, out)
                    result.outputs.append(out)
                else:
                    result.reports.append(evaluate_pair(pred, gt, image_id=entry.image_id))
                if overlay_dir is not None:
                    save_overlay(error_overlay(pred, gt), overlay_dir / f"{entry.image_id}.png")
            result.ok.append(entry.image_id)
        except Exception as exc:  # noqa: BLE001 - per-image isolation is the contract
            result.failed.append((entry.image_id, str(exc)))

    if mode == "eval":
        by_id = {e.image_id: e for e in manifest.entries}
        result.means = {
            "mask_iou": float(np.mean([r.mask_iou for r in result.reports])) if result.reports else float("nan"),
            "bbox_iou": float(np.mean([r.bbox_iou for r in result.reports])) if result.reports else float("nan"),
            "dice": float(np.mean([r.dice for r in result.reports])) if result.reports else float("nan"),
        }
        report_path = out_dir / "report.tsv"
        lines = ["\t".join(REPORT_COLUMNS)]
        for r in result.reports:
            e = by_id[r.image_id]
            lines.append(
                f"{r.image_id}\t{e.class_label}\t{e.split}"
                f"\t{r.mask_iou:.6f}\t{r.bbox_iou:.6f}\t{r.dice:.6f}"
            )
        m = result.means
        lines.append(f"{MEAN_ROW_ID}\t\t\t{m['mask_iou']:.6f}\t{m['bbox_iou']:.6f}\t{m['dice']:.6f}")
        report_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        result.outputs.append(report_path)
    return result


def format_report_table(result: BatchResult, headline: str = "mask_iou") -> str:
    """Human-readable metric table with the headline metric first."""
    order = ["mask_iou", "bbox_iou", "dice"]
    if headline in order:
        order.remove(headline)
        order.insert(0, headline)
    header = f"{'image_id':<24} " + " ".join(f"{c:>9}" for c in order)
    rows = [header, "-" * len(header)]
    for r in result.reports:
        vals = {"mask_iou": r.mask_iou, "bbox_iou": r.bbox_iou, "dice": r.dice}
        rows.append(f"{r.image_id:<24} " + " ".join(f"{vals[c]:>9.4f}" for c in order))
    if result.means is not None:
        rows.append(f"{'mean':<24} " + " ".join(f"{result.means[c]:>9.4f}" for c in order))
    return "\n".join(rows)
