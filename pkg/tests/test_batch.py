"""Manifest-driven batch runs: prompt generation, evaluation, failure isolation."""

from __future__ import annotations

import numpy as np
import pytest

from maskprompt import (
    bbox_iou,
    dice_coeff,
    load_mask,
    mask_iou,
    merge_masks,
    parse_prompts,
    resize_mask,
    run_batch,
    save_mask,
    scan_dataset,
    split_dataset,
    stage1_prompts,
)

FRAME = (64, 64)


def lesion_mask(seed, size=64):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    cx, cy = rng.integers(16, 48, size=2)
    rx, ry = rng.integers(6, 14, size=2)
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


@pytest.fixture
def tiny_dataset(tmp_path):
    """Three benign images with one mask each; returns (manifest, gts)."""
    root = tmp_path / "data"
    gts = {}
    for i in (1, 2, 3):
        stem = f"benign ({i})"
        mask = lesion_mask(i)
        save_mask(mask, root / "benign" / f"{stem}.png")  # image content is irrelevant
        save_mask(mask, root / "benign" / f"{stem}_mask.png")
        gts[stem] = mask
    manifest = split_dataset(scan_dataset(root), seed=0)
    return manifest, gts


class TestStage1Batch:
    def test_three_images_all_ok(self, tiny_dataset, tmp_path):
        manifest, gts = tiny_dataset
        out = tmp_path / "s1"
        result = run_batch(manifest, "stage1", out, frame=FRAME)
        assert result.summary_line() == "stage1: 3 ok, 0 failed"
        assert result.exit_code == 0
        files = sorted(out.glob("*.prompts"))
        assert len(files) == 3
        for f in files:
            ps = parse_prompts(f)
            assert ps.stage == 1 and ps.frame == FRAME and len(ps.prompts) >= 1

    def test_prompts_match_direct_call(self, tiny_dataset, tmp_path):
        manifest, gts = tiny_dataset
        run_batch(manifest, "stage1", tmp_path / "s1", frame=FRAME)
        for stem, gt in gts.items():
            got = parse_prompts(tmp_path / "s1" / f"{stem}.prompts")
            want = stage1_prompts(gt, image_id=stem)
            assert got == want

    def test_respects_split_filter(self, tiny_dataset, tmp_path):
        manifest, _ = tiny_dataset
        result = run_batch(manifest, "stage1", tmp_path / "s1", frame=FRAME, split="test")
        n_test = len(manifest.subset("test"))
        assert len(result.ok) == n_test == 1


class TestStage2Batch:
    def test_missing_prediction_isolated(self, tiny_dataset, tmp_path):
        manifest, gts = tiny_dataset
        preds = tmp_path / "preds"
        for stem in list(gts)[:2]:  # third prediction deliberately absent
            save_mask(gts[stem], preds / f"{stem}.png")
        result = run_batch(manifest, "stage2", tmp_path / "s2", frame=FRAME,
                           predictions_dir=preds)
        assert result.summary_line() == "stage2: 2 ok, 1 failed"
        assert result.exit_code == 1
        assert len(list((tmp_path / "s2").glob("*.prompts"))) == 2
        (failed_id, message), = result.failed
        assert failed_id == "benign (3)" and "missing prediction" in message

    def test_requires_predictions_dir(self, tiny_dataset, tmp_path):
        manifest, _ = tiny_dataset
        with pytest.raises(ValueError, match="predictions"):
            run_batch(manifest, "stage2", tmp_path / "x", frame=FRAME)


class TestEvalBatch:
    def test_perfect_predictions_mean_iou_one(self, tiny_dataset, tmp_path):
        manifest, gts = tiny_dataset
        preds = tmp_path / "preds"
        for stem, gt in gts.items():
            save_mask(gt, preds / f"{stem}.png")
        result = run_batch(manifest, "eval", tmp_path / "ev", frame=FRAME,
                           predictions_dir=preds)
        assert result.means["mask_iou"] == 1.0
        assert result.means["dice"] == 1.0
        report = (tmp_path / "ev" / "report.tsv").read_text().splitlines()
        assert report[0].split("\t") == [
            "image_id", "class_label", "split", "mask_iou", "bbox_iou", "dice",
        ]
        assert len(report) == 5  # header + 3 images + mean row
        assert report[-1].startswith("__mean__")

    def test_report_values_match_metrics(self, tiny_dataset, tmp_path):
        manifest, gts = tiny_dataset
        preds = tmp_path / "preds"
        # degrade one prediction so the numbers are nontrivial
        for stem, gt in gts.items():
            pred = gt.copy()
            pred[:, :10] = False
            save_mask(pred, preds / f"{stem}.png")
        result = run_batch(manifest, "eval", tmp_path / "ev", frame=FRAME,
                           predictions_dir=preds)
        for rep in result.reports:
            gt = gts[rep.image_id]
            pred = load_mask(preds / f"{rep.image_id}.png")
            assert rep.mask_iou == mask_iou(pred, gt)
            assert rep.bbox_iou == bbox_iou(pred, gt)
            assert rep.dice == dice_coeff(pred, gt)

    def test_overlay_files_written(self, tiny_dataset, tmp_path):
        manifest, gts = tiny_dataset
        preds = tmp_path / "preds"
        for stem, gt in gts.items():
            save_mask(gt, preds / f"{stem}.png")
        overlays = tmp_path / "ov"
        run_batch(manifest, "eval", tmp_path / "ev", frame=FRAME,
                  predictions_dir=preds, overlay_dir=overlays)
        assert len(list(overlays.glob("*.png"))) == 3


class TestFrameHandling:
    def test_gt_resized_to_frame(self, tiny_dataset, tmp_path):
        manifest, gts = tiny_dataset
        result = run_batch(manifest, "stage1", tmp_path / "s1", frame=(32, 32))
        for f in result.outputs:
            assert parse_prompts(f).frame == (32, 32)

    def test_multi_mask_union(self, tmp_path):
        root = tmp_path / "data"
        a = np.zeros((64, 64), dtype=bool)
        b = np.zeros((64, 64), dtype=bool)
        a[10:20, 10:20] = True
        b[40:50, 40:50] = True
        stem = "malignant (1)"
        save_mask(a | b, root / "malignant" / f"{stem}.png")
        save_mask(a, root / "malignant" / f"{stem}_mask.png")
        save_mask(b, root / "malignant" / f"{stem}_mask_1.png")
        manifest = scan_dataset(root)
        entry = manifest.entries[0]
        merged = merge_masks(manifest.mask_files(entry))
        assert np.array_equal(merged, a | b)
        result = run_batch(manifest, "stage1", tmp_path / "s1", frame=(64, 64))
        ps = parse_prompts(result.outputs[0])
        assert len(ps.prompts) == 2  # one click per lesion

    def test_bad_mode_rejected(self, tiny_dataset, tmp_path):
        manifest, _ = tiny_dataset
        with pytest.raises(ValueError, match="mode"):
            run_batch(manifest, "train", tmp_path / "x")


def test_resize_roundtrip_through_frame():
    # sanity for the frame path used by batch: 64 -> 256 -> 64 is lossless
    mask = lesion_mask(9)
    up = resize_mask(mask, 256, 256)
    back = resize_mask(up, 64, 64)
    assert np.array_equal(back, mask)
