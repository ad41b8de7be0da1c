"""Prompt generation, the prompt file format, and its parser."""

from __future__ import annotations

from contextlib import nullcontext
from pathlib import Path

import numpy as np
import pytest

from maskprompt import (
    ClickBudgetPolicy,
    ClickPrompt,
    EmptyMaskWarning,
    PromptFormatError,
    PromptSet,
    Stage1Prompter,
    Stage2Prompter,
    click_budget,
    decompose_errors,
    label_components,
    parse_prompts,
    serialize_prompts,
    stage1_prompts,
    stage2_prompts,
)

from conftest import random_mask, random_mask_pair

GOLDEN = Path(__file__).parent / "golden"


def square(size, x0, y0, side):
    mask = np.zeros((size, size), dtype=bool)
    mask[y0:y0 + side, x0:x0 + side] = True
    return mask


class TestClickPrompt:
    def test_polarity_kind_coupling(self):
        ClickPrompt(1, 1, 1, 2, "TP", 0)
        ClickPrompt(1, 1, 1, 2, "FN", 0)
        ClickPrompt(1, 1, -1, 2, "FP", 0)
        ClickPrompt(1, 1, 1, 1, "GT", 0)
        with pytest.raises(ValueError, match="polarity"):
            ClickPrompt(1, 1, -1, 2, "TP", 0)
        with pytest.raises(ValueError, match="polarity"):
            ClickPrompt(1, 1, 1, 2, "FP", 0)

    def test_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            ClickPrompt(1, 1, 0, 2, "TP", 0)
        with pytest.raises(ValueError):
            ClickPrompt(1, 1, 1, 3, "TP", 0)
        with pytest.raises(ValueError):
            ClickPrompt(-1, 1, 1, 2, "TP", 0)
        with pytest.raises(ValueError):
            ClickPrompt(1, 1, 1, 2, "??", 0)


class TestPromptSet:
    def test_rejects_out_of_frame(self):
        with pytest.raises(ValueError, match="outside frame"):
            PromptSet("x", 2, (4, 4), (ClickPrompt(4, 0, 1, 2, "TP", 0),))

    def test_rejects_duplicate_position(self):
        clicks = (ClickPrompt(1, 1, 1, 2, "TP", 0), ClickPrompt(1, 1, -1, 2, "FP", 0))
        with pytest.raises(ValueError, match="duplicate"):
            PromptSet("x", 2, (4, 4), clicks)

    def test_rejects_stage_mismatch(self):
        with pytest.raises(ValueError, match="stage"):
            PromptSet("x", 1, (4, 4), (ClickPrompt(1, 1, 1, 2, "TP", 0),))

    def test_polarity_views(self):
        ps = PromptSet("x", 2, (8, 8), (
            ClickPrompt(1, 1, 1, 2, "TP", 0),
            ClickPrompt(2, 2, -1, 2, "FP", 0),
            ClickPrompt(3, 3, 1, 2, "FN", 0),
        ))
        assert [p.region_kind for p in ps.positives()] == ["TP", "FN"]
        assert [p.region_kind for p in ps.negatives()] == ["FP"]


class TestStage1:
    def test_single_square_center_click(self):
        gt = square(20, 0, 0, 20)
        ps = stage1_prompts(gt, image_id="sq")
        assert len(ps.prompts) == 1
        p = ps.prompts[0]
        # 20x20 at origin: centroid (9.5, 9.5), tie-break -> (9, 9)
        assert (p.x, p.y) == (9, 9)
        assert p.polarity == 1 and p.stage == 1 and p.region_kind == "GT"
        assert ps.frame == (20, 20)

    def test_empty_mask_warns_and_returns_empty(self):
        with pytest.warns(EmptyMaskWarning):
            ps = stage1_prompts(np.zeros((8, 8), dtype=bool), image_id="e")
        assert ps.prompts == ()

    def test_small_component_skipped(self):
        # areas 100 and 5: only the area-100 component gets a click
        gt = square(30, 0, 0, 10)
        gt[20, 20:25] = True
        ps = stage1_prompts(gt)
        assert len(ps.prompts) == 1
        p = ps.prompts[0]
        assert (p.x, p.y) == (4, 4)

    def test_one_click_per_large_component(self, rng):
        for _ in range(50):
            gt = random_mask(rng, 48, 48)
            regions = label_components(gt)
            want = sum(1 for r in regions if r.area >= 10)
            with pytest.warns(EmptyMaskWarning) if not gt.any() else nullcontext():
                ps = stage1_prompts(gt)
            assert len(ps.prompts) == want
            for p in ps.prompts:
                assert gt[p.y, p.x]

    def test_component_ids_kept(self):
        gt = np.zeros((40, 40), dtype=bool)
        gt[0, 0:5] = True          # component 0: area 5, skipped
        gt[10:20, 10:20] = True    # component 1: area 100, clicked
        ps = stage1_prompts(gt)
        assert len(ps.prompts) == 1 and ps.prompts[0].component_id == 1


class TestStage2:
    def test_perfect_prediction_single_tp_click(self):
        gt = square(20, 0, 0, 20)
        ps = stage2_prompts(gt, gt)
        assert len(ps.prompts) == 1
        p = ps.prompts[0]
        assert p.region_kind == "TP" and p.polarity == 1 and p.stage == 2

    def test_empty_prediction_fn_click_at_center(self):
        gt = square(20, 0, 0, 20)
        ps = stage2_prompts(np.zeros_like(gt), gt)
        assert len(ps.prompts) == 1
        p = ps.prompts[0]
        assert p.region_kind == "FN" and p.polarity == 1
        assert (p.x, p.y) == (9, 9)

    def test_empty_gt_fp_click(self):
        pred = square(20, 0, 0, 20)
        ps = stage2_prompts(pred, np.zeros_like(pred))
        assert len(ps.prompts) == 1
        p = ps.prompts[0]
        assert p.region_kind == "FP" and p.polarity == -1

    def test_order_tp_fn_fp(self):
        gt = square(12, 2, 2, 6)
        pred = square(12, 4, 4, 6)
        kinds = [p.region_kind for p in stage2_prompts(pred, gt).prompts]
        assert kinds == ["TP", "FN", "FP"]

    def test_gt_vs_gt_has_no_negatives(self, rng):
        for _ in range(30):
            gt = random_mask(rng, 32, 32)
            ps = stage2_prompts(gt, gt)
            assert ps.negatives() == ()
            for p in ps.prompts:
                assert gt[p.y, p.x]

    def test_click_counts_match_budgets(self, rng):
        policy = ClickBudgetPolicy()
        for _ in range(30):
            pred, gt = random_mask_pair(rng, 48, 48)
            dec = decompose_errors(pred, gt)
            want = 0
            for kind in ("TP", "FP", "FN"):
                for r in label_components(dec.mask_for(kind), kind=kind):
                    want += click_budget(r.area, policy)
            assert len(stage2_prompts(pred, gt).prompts) == want

    def test_containment(self, rng):
        for _ in range(30):
            pred, gt = random_mask_pair(rng, 48, 48)
            ps = stage2_prompts(pred, gt)
            for p in ps.positives():
                assert gt[p.y, p.x]
            for p in ps.negatives():
                assert pred[p.y, p.x] and not gt[p.y, p.x]

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError, match="dimensions"):
            stage2_prompts(np.zeros((4, 4), dtype=bool), np.zeros((5, 5), dtype=bool))


class TestGolden:
    """Byte-level pins computed by hand, independent of the implementation."""

    def test_stage2_lshape_bytes(self, tmp_path):
        gt = square(12, 2, 2, 6)
        pred = square(12, 4, 4, 6)
        ps = stage2_prompts(pred, gt, image_id="golden-l")
        out = tmp_path / "got.prompts"
        serialize_prompts(ps, out)
        assert out.read_bytes() == (GOLDEN / "stage2_lshape.prompts").read_bytes()

    def test_stage1_square_bytes(self, tmp_path):
        gt = square(12, 2, 2, 6)
        ps = stage1_prompts(gt, image_id="golden-s1")
        out = tmp_path / "got.prompts"
        serialize_prompts(ps, out)
        assert out.read_bytes() == (GOLDEN / "stage1_square.prompts").read_bytes()

    def test_golden_files_parse_back(self):
        ps = parse_prompts(GOLDEN / "stage2_lshape.prompts")
        assert ps.image_id == "golden-l" and ps.stage == 2 and ps.frame == (12, 12)
        assert [(p.x, p.y, p.polarity) for p in ps.prompts] == [
            (5, 5, 1), (4, 3, 1), (8, 7, -1),
        ]


def random_prompt_set(rng) -> PromptSet:
    w = int(rng.integers(4, 300))
    h = int(rng.integers(4, 300))
    stage = int(rng.integers(1, 3))
    kinds = ("GT",) if stage == 1 else ("TP", "FN", "FP")
    n = int(rng.integers(0, 12))
    coords = set()
    prompts = []
    for _ in range(n):
        x, y = int(rng.integers(0, w)), int(rng.integers(0, h))
        if (x, y) in coords:
            continue
        coords.add((x, y))
        kind = kinds[int(rng.integers(0, len(kinds)))]
        polarity = -1 if kind == "FP" else 1
        prompts.append(ClickPrompt(x, y, polarity, stage, kind, int(rng.integers(0, 9))))
    image_id = "img-" + "".join(chr(97 + int(c)) for c in rng.integers(0, 26, size=8))
    return PromptSet(image_id=image_id, stage=stage, frame=(w, h), prompts=tuple(prompts))


class TestSerialization:
    def test_empty_set_round_trip(self, tmp_path):
        ps = PromptSet("empty", 1, (16, 16), ())
        path = tmp_path / "e.prompts"
        serialize_prompts(ps, path)
        assert path.read_text() == "promptset\tv1\timage=empty\tstage=1\tframe=16x16\n"
        assert parse_prompts(path) == ps

    def test_single_click_round_trip(self, tmp_path):
        ps = PromptSet("one", 2, (8, 8), (ClickPrompt(3, 4, -1, 2, "FP", 1),))
        path = tmp_path / "o.prompts"
        serialize_prompts(ps, path)
        assert parse_prompts(path) == ps

    def test_round_trip_random_sets(self, tmp_path, rng):
        for i in range(100):
            ps = random_prompt_set(rng)
            path = tmp_path / f"{i}.prompts"
            serialize_prompts(ps, path)
            assert parse_prompts(path) == ps

    def test_serialization_is_byte_stable(self, tmp_path, rng):
        ps = random_prompt_set(rng)
        a, b = tmp_path / "a", tmp_path / "b"
        serialize_prompts(ps, a)
        serialize_prompts(ps, b)
        assert a.read_bytes() == b.read_bytes()

    def test_rejects_separator_in_image_id(self, tmp_path):
        ps = PromptSet("bad\tid", 1, (4, 4), ())
        with pytest.raises(ValueError, match="separator"):
            serialize_prompts(ps, tmp_path / "x")


def _write(tmp_path, text: str) -> Path:
    path = tmp_path / "f.prompts"
    path.write_text(text, encoding="utf-8")
    return path


class TestParseErrors:
    HEADER = "promptset\tv1\timage=i\tstage=2\tframe=8x8\n"

    def _err(self, tmp_path, text: str) -> PromptFormatError:
        with pytest.raises(PromptFormatError) as info:
            parse_prompts(_write(tmp_path, text))
        return info.value

    def test_empty_file(self, tmp_path):
        assert self._err(tmp_path, "").line == 1

    def test_bad_magic(self, tmp_path):
        err = self._err(tmp_path, "clickset\tv1\timage=i\tstage=1\tframe=4x4\n")
        assert err.line == 1 and "header" in str(err)

    def test_bad_version(self, tmp_path):
        err = self._err(tmp_path, "promptset\tv9\timage=i\tstage=1\tframe=4x4\n")
        assert err.line == 1 and "version" in str(err)

    def test_bad_stage(self, tmp_path):
        err = self._err(tmp_path, "promptset\tv1\timage=i\tstage=3\tframe=4x4\n")
        assert err.line == 1

    def test_bad_frame(self, tmp_path):
        err = self._err(tmp_path, "promptset\tv1\timage=i\tstage=1\tframe=4by4\n")
        assert err.line == 1

    def test_wrong_field_count_names_line(self, tmp_path):
        err = self._err(tmp_path, self.HEADER + "1\t1\t+1\tTP\t0\n" + "2\t2\t+1\n")
        assert err.line == 3 and "5" in str(err)

    def test_non_integer_coordinate_names_line(self, tmp_path):
        err = self._err(tmp_path, self.HEADER + "x\t1\t+1\tTP\t0\n")
        assert err.line == 2 and "integer" in str(err)

    def test_bad_polarity_literal(self, tmp_path):
        err = self._err(tmp_path, self.HEADER + "1\t1\t1\tTP\t0\n")
        assert err.line == 2 and "polarity" in str(err)

    def test_unknown_kind(self, tmp_path):
        err = self._err(tmp_path, self.HEADER + "1\t1\t+1\tXX\t0\n")
        assert err.line == 2 and "kind" in str(err)

    def test_polarity_kind_contradiction(self, tmp_path):
        # positive FP violates the prompt invariant
        err = self._err(tmp_path, self.HEADER + "1\t1\t+1\tFP\t0\n")
        assert err.line == 2

    def test_click_outside_header_frame(self, tmp_path):
        err = self._err(tmp_path, self.HEADER + "8\t1\t+1\tTP\t0\n")
        assert err.line == 2 and "outside" in str(err)

    def test_duplicate_click(self, tmp_path):
        err = self._err(tmp_path, self.HEADER + "1\t1\t+1\tTP\t0\n" + "1\t1\t+1\tTP\t1\n")
        assert err.line == 3 and "duplicate" in str(err)

    def test_stage_mismatch_with_header(self, tmp_path):
        # GT record under a stage-2 header violates the prompt invariant
        err = self._err(tmp_path, self.HEADER + "1\t1\t+1\tGT\t0\n")
        assert err.line == 2


class TestEstimators:
    def test_stage1_prompter(self):
        gt = square(20, 0, 0, 20)
        ps = Stage1Prompter().fit().transform(gt, image_id="a")
        assert ps == stage1_prompts(gt, image_id="a")

    def test_stage2_prompter_params_flow_through(self):
        gt = square(30, 0, 0, 24)  # area 576
        pred = np.zeros_like(gt)
        loose = Stage2Prompter(area_per_click=100, max_clicks=4)
        ps = loose.fit().transform(pred, gt)
        # budget = clamp(round(576/100), 1, 4) = 4
        assert len(ps.prompts) == 4

    def test_get_params(self):
        est = Stage2Prompter(min_area=3)
        params = est.get_params()
        assert params["min_area"] == 3 and params["max_clicks"] == 10
