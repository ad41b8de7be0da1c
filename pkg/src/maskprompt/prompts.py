"""Stage-1/stage-2 click prompt generation and the prompt file format.

Stage 1 places one positive click at the snapped centroid of every
ground-truth component that is large enough. Stage 2 decomposes a
prediction/ground-truth pair into TP/FP/FN regions and spreads a
size-dependent number of clicks over each via constrained CVT: TP and FN
clicks are positive prompts, FP clicks are negative prompts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

from sklearn.base import BaseEstimator

from .cvt import ClickBudgetPolicy, click_budget, lloyd_relax, seed_clicks
from .masks import snapped_centroid
from .regions import FN, FP, GT, POSITIVE_KINDS, REGION_KINDS, TP, decompose_errors, label_components, regions_of
from .validation import as_binary_mask, check_same_shape

POSITIVE = 1
NEGATIVE = -1

FORMAT_VERSION = "v1"
_MAGIC = "promptset"


class EmptyMaskWarning(UserWarning):
    """Raised (as a warning) when prompt generation sees an empty mask."""


class PromptFormatError(ValueError):
    """Malformed prompt file; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class ClickPrompt:
    """One simulated click in the mask frame."""

    x: int
    y: int
    polarity: int  # +1 positive, -1 negative
    stage: int
    region_kind: str
    component_id: int

    def __post_init__(self):
        if self.polarity not in (POSITIVE, NEGATIVE):
            raise ValueError(f"polarity must be +1 or -1, got {self.polarity}")
        if self.region_kind not in REGION_KINDS:
            raise ValueError(f"unknown region kind {self.region_kind!r}")
        expected = POSITIVE if self.region_kind in POSITIVE_KINDS else NEGATIVE
        if self.polarity != expected:
            raise ValueError(
                f"{self.region_kind} clicks must have polarity "
                f"{'+1' if expected == POSITIVE else '-1'}"
            )
        if self.stage not in (1, 2):
            raise ValueError(f"stage must be 1 or 2, got {self.stage}")
        if (self.region_kind == GT) != (self.stage == 1):
            raise ValueError(f"{self.region_kind} clicks belong to stage {1 if self.region_kind == GT else 2}")
        if self.x < 0 or self.y < 0 or self.component_id < 0:
            raise ValueError("coordinates and component_id must be nonnegative")


@dataclass(frozen=True)
class PromptSet:
    """All prompts for one image at one training stage."""

    image_id: str
    stage: int
    frame: tuple[int, int]  # (width, height)
    prompts: tuple[ClickPrompt, ...]

    def __post_init__(self):
        w, h = self.frame
        if w < 1 or h < 1:
            raise ValueError(f"frame must be positive, got {self.frame}")
        seen: dict[tuple[int, int], int] = {}
        for p in self.prompts:
            if p.stage != self.stage:
                raise ValueError(f"prompt stage {p.stage} differs from set stage {self.stage}")
            if not (0 <= p.x < w and 0 <= p.y < h):
                raise ValueError(f"click ({p.x}, {p.y}) outside frame {w}x{h}")
            key = (p.x, p.y)
            if key in seen:
                raise ValueError(f"duplicate click at ({p.x}, {p.y})")
            seen[key] = p.polarity

    def positives(self) -> tuple[ClickPrompt, ...]:
        return tuple(p for p in self.prompts if p.polarity == POSITIVE)

    def negatives(self) -> tuple[ClickPrompt, ...]:
        return tuple(p for p in self.prompts if p.polarity == NEGATIVE)


def _frame_of(mask) -> tuple[int, int]:
    h, w = mask.shape
    return (w, h)


def stage1_prompts(
    gt,
    policy: ClickBudgetPolicy = ClickBudgetPolicy(),
    connectivity: int = 8,
    image_id: str = "",
) -> PromptSet:
    """One positive centroid click per sufficiently large GT component."""
    gt = as_binary_mask(gt, "gt")
    clicks = []
    for region in label_components(gt, connectivity=connectivity, kind=GT):
        if region.area < policy.min_area:
            continue
        x, y = snapped_centroid(region)
        clicks.append(ClickPrompt(x, y, POSITIVE, 1, GT, region.component_id))
    if not gt.any():
        warnings.warn(f"stage-1 input mask is empty (image_id={image_id!r})", EmptyMaskWarning, stacklevel=2)
    return PromptSet(image_id=image_id, stage=1, frame=_frame_of(gt), prompts=tuple(clicks))


def stage2_prompts(
    pred,
    gt,
    policy: ClickBudgetPolicy = ClickBudgetPolicy(),
    connectivity: int = 8,
    image_id: str = "",
    max_iters: int = 100,
) -> PromptSet:
    """CVT clicks over the TP/FN/FP decomposition of a prediction.

    Prompt order is fixed: TP regions, then FN, then FP, each in
    component_id order with clicks in CVT output order.
    """
    pred = as_binary_mask(pred, "pred")
    gt = as_binary_mask(gt, "gt")
    check_same_shape(pred, gt, "pred", "gt")
    dec = decompose_errors(pred, gt)
    clicks = []
    for kind in (TP, FN, FP):
        polarity = POSITIVE if kind in POSITIVE_KINDS else NEGATIVE
        for region in regions_of(dec, kind, connectivity=connectivity):
            k = click_budget(region.area, policy)
            if k == 0:
                continue
            state = lloyd_relax(region, seed_clicks(region, k), max_iters=max_iters)
            for cx, cy in state.clicks.tolist():
                clicks.append(ClickPrompt(cx, cy, polarity, 2, kind, region.component_id))
    return PromptSet(image_id=image_id, stage=2, frame=_frame_of(gt), prompts=tuple(clicks))


# ---------------------------------------------------------------------------
# prompt file format
#
# UTF-8, LF line endings, tab-separated. Header:
#   promptset<TAB>v1<TAB>image=<id><TAB>stage=<1|2><TAB>frame=<W>x<H>
# one record per click, fields in this order:
#   <x><TAB><y><TAB><+1|-1><TAB><GT|TP|FN|FP><TAB><component_id>
# ---------------------------------------------------------------------------

def serialize_prompts(ps: PromptSet, path) -> None:
    """Write a PromptSet to its line-oriented text format (byte-stable)."""
    if "\t" in ps.image_id or "\n" in ps.image_id or "\r" in ps.image_id:
        raise ValueError(f"image_id contains separator characters: {ps.image_id!r}")
    w, h = ps.frame
    lines = [f"{_MAGIC}\t{FORMAT_VERSION}\timage={ps.image_id}\tstage={ps.stage}\tframe={w}x{h}"]
    for p in ps.prompts:
        pol = "+1" if p.polarity == POSITIVE else "-1"
        lines.append(f"{p.x}\t{p.y}\t{pol}\t{p.region_kind}\t{p.component_id}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _parse_int(text: str, what: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise PromptFormatError(f"{what} is not an integer: {text!r}", line) from None


def parse_prompts(path) -> PromptSet:
    """Parse a prompt file, validating every record against the frame."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise PromptFormatError("empty file", 1)

    header = lines[0].split("\t")
    if len(header) != 5 or header[0] != _MAGIC:
        raise PromptFormatError(f"bad header, expected '{_MAGIC}' with 5 fields", 1)
    if header[1] != FORMAT_VERSION:
        raise PromptFormatError(f"unsupported format version {header[1]!r}", 1)
    for idx, prefix in ((2, "image="), (3, "stage="), (4, "frame=")):
        if not header[idx].startswith(prefix):
            raise PromptFormatError(f"expected {prefix}... in header field {idx + 1}", 1)
    image_id = header[2][len("image="):]
    stage = _parse_int(header[3][len("stage="):], "stage", 1)
    if stage not in (1, 2):
        raise PromptFormatError(f"stage must be 1 or 2, got {stage}", 1)
    frame_txt = header[4][len("frame="):]
    parts = frame_txt.split("x")
    if len(parts) != 2:
        raise PromptFormatError(f"frame must look like WxH, got {frame_txt!r}", 1)
    w = _parse_int(parts[0], "frame width", 1)
    h = _parse_int(parts[1], "frame height", 1)
    if w < 1 or h < 1:
        raise PromptFormatError(f"frame must be positive, got {w}x{h}", 1)

    prompts = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        fields = raw.split("\t")
        if len(fields) != 5:
            raise PromptFormatError(f"expected 5 tab-separated fields, got {len(fields)}", lineno)
        x = _parse_int(fields[0], "x", lineno)
        y = _parse_int(fields[1], "y", lineno)
        if fields[2] not in ("+1", "-1"):
            raise PromptFormatError(f"polarity must be +1 or -1, got {fields[2]!r}", lineno)
        polarity = POSITIVE if fields[2] == "+1" else NEGATIVE
        kind = fields[3]
        if kind not in REGION_KINDS:
            raise PromptFormatError(f"unknown region kind {kind!r}", lineno)
        component_id = _parse_int(fields[4], "component_id", lineno)
        if not (0 <= x < w and 0 <= y < h):
            raise PromptFormatError(f"click ({x}, {y}) outside header frame {w}x{h}", lineno)
        if (x, y) in seen:
            raise PromptFormatError(f"duplicate click at ({x}, {y})", lineno)
        seen.add((x, y))
        try:
            prompts.append(ClickPrompt(x, y, polarity, stage, kind, component_id))
        except ValueError as exc:
            raise PromptFormatError(str(exc), lineno) from None
    return PromptSet(image_id=image_id, stage=stage, frame=(w, h), prompts=tuple(prompts))


class Stage1Prompter(BaseEstimator):
    """Transformer that turns a ground-truth mask into centroid prompts."""

    def __init__(self, min_area: int = 10, connectivity: int = 8):
        self.min_area = min_area
        self.connectivity = connectivity

    def fit(self, X=None, y=None):
        return self

    def transform(self, gt, image_id: str = "") -> PromptSet:
        policy = ClickBudgetPolicy(min_area=self.min_area)
        return stage1_prompts(gt, policy=policy, connectivity=self.connectivity, image_id=image_id)


class Stage2Prompter(BaseEstimator):
    """Transformer that turns a (prediction, ground truth) pair into CVT prompts."""

    def __init__(
        self,
        min_area: int = 10,
        area_per_click: int = 400,
        max_clicks: int = 10,
        connectivity: int = 8,
        max_iter: int = 100,
    ):
        self.min_area = min_area
        self.area_per_click = area_per_click
        self.max_clicks = max_clicks
        self.connectivity = connectivity
        self.max_iter = max_iter

    def fit(self, X=None, y=None):
        return self

    def _policy(self) -> ClickBudgetPolicy:
        return ClickBudgetPolicy(
            min_area=self.min_area,
            area_per_click=self.area_per_click,
            max_clicks=self.max_clicks,
        )

    def transform(self, pred, gt, image_id: str = "") -> PromptSet:
        return stage2_prompts(
            pred, gt,
            policy=self._policy(),
            connectivity=self.connectivity,
            image_id=image_id,
            max_iters=self.max_iter,
        )
