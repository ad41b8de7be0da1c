"""Debug renderings: error decompositions and click placements as PNGs."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .prompts import POSITIVE, PromptSet
from .regions import decompose_errors
from .validation import as_binary_mask, as_pixel_array

TP_COLOR = (255, 255, 255)
FP_COLOR = (255, 165, 0)
FN_COLOR = (0, 0, 255)
POS_COLOR = (0, 200, 0)
NEG_COLOR = (220, 0, 0)
MASK_GRAY = 110


def error_overlay(pred, gt) -> np.ndarray:
    """RGB render of the decomposition: TP white, FP orange, FN blue."""
    dec = decompose_errors(pred, gt)
    h, w = dec.tp_mask.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[dec.tp_mask] = TP_COLOR
    rgb[dec.fp_mask] = FP_COLOR
    rgb[dec.fn_mask] = FN_COLOR
    return rgb


def _stamp_disk(rgb: np.ndarray, x: int, y: int, color, radius: int) -> None:
    h, w = rgb.shape[:2]
    y0, y1 = max(0, y - radius), min(h, y + radius + 1)
    x0, x1 = max(0, x - radius), min(w, x + radius + 1)
    yy, xx = np.mgrid[y0:y1, x0:x1]
    inside = (yy - y) ** 2 + (xx - x) ** 2 <= radius * radius
    rgb[y0:y1, x0:x1][inside] = color


def click_overlay(mask, prompts, radius: int = 3) -> np.ndarray:
    """Mask rendered gray with clicks stamped as green (+) / red (-) disks.

    `prompts` may be a PromptSet or a bare (n, 2) coordinate array, in
    which case every click is drawn as positive.
    """
    mask = as_binary_mask(mask)
    h, w = mask.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[mask] = (MASK_GRAY, MASK_GRAY, MASK_GRAY)
    if isinstance(prompts, PromptSet):
        points = [(p.x, p.y, p.polarity) for p in prompts.prompts]
    else:
        points = [(int(x), int(y), POSITIVE) for x, y in as_pixel_array(prompts, "clicks")]
    for x, y, polarity in points:
        _stamp_disk(rgb, x, y, POS_COLOR if polarity == POSITIVE else NEG_COLOR, radius)
    return rgb


def save_overlay(rgb: np.ndarray, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(rgb, mode="RGB").save(path)
