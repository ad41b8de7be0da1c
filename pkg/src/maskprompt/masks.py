"""Binary mask primitives: file I/O, resizing, centroids, bounding boxes.

All masks live in pixel space: ``mask[y, x]`` with the origin at the top
left. Prompts emitted downstream use the same frame as the mask they were
derived from, conventionally 256x256 after :func:`resize_mask`.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .validation import as_binary_mask, as_pixel_array

DEFAULT_THRESHOLD = 127


class PixelBox(NamedTuple):
    """Inclusive pixel bounds of a foreground area."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    @property
    def area(self) -> int:
        return (self.x_max - self.x_min + 1) * (self.y_max - self.y_min + 1)


def load_mask(path, threshold: int = DEFAULT_THRESHOLD) -> np.ndarray:
    """Load a grayscale/RGB raster and binarize it.

    A pixel is foreground iff its gray value (luma for RGB inputs) is
    strictly greater than ``threshold``. The result depends only on decoded
    pixel values, never on the container format.
    """
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.width < 1 or img.height < 1:
                raise ValueError(f"zero-dimension image: {path}")
            gray = img.convert("L")
            arr = np.asarray(gray, dtype=np.uint8)
    except (UnidentifiedImageError, SyntaxError, ValueError) as exc:
        raise ValueError(f"cannot decode image {path}: {exc}") from exc
    if arr.size == 0:
        raise ValueError(f"zero-dimension image: {path}")
    return arr > threshold


def save_mask(mask, path) -> None:
    """Write a mask as 8-bit grayscale PNG, foreground 255 / background 0."""
    mask = as_binary_mask(mask)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(mask.astype(np.uint8) * 255, mode="L").save(path)


def resize_mask(mask, out_w: int, out_h: int) -> np.ndarray:
    """Nearest-neighbor resize that keeps the mask strictly binary.

    Output pixel (x, y) samples input pixel
    (floor((x+0.5)*W/out_w), floor((y+0.5)*H/out_h)). Computed in integer
    arithmetic so results are identical on every platform.
    """
    mask = as_binary_mask(mask)
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target size must be >= 1, got {out_w}x{out_h}")
    in_h, in_w = mask.shape
    src_x = ((2 * np.arange(out_w, dtype=np.int64) + 1) * in_w) // (2 * out_w)
    src_y = ((2 * np.arange(out_h, dtype=np.int64) + 1) * in_h) // (2 * out_h)
    return mask[np.ix_(src_y, src_x)]


def snapped_centroid(region) -> tuple[int, int]:
    """In-region pixel nearest the arithmetic mean of the region's pixels.

    Accepts a Region or an (n, 2) array of (x, y) coordinates. Ties are
    broken by smallest y, then smallest x. Distances are compared in exact
    integer arithmetic: with n pixels and coordinate sums (Sx, Sy), the
    squared distance of pixel p to the mean is ((n*px - Sx)^2 +
    (n*py - Sy)^2) / n^2, and the common 1/n^2 factor drops out.
    """
    pixels = as_pixel_array(region, "region")
    n = pixels.shape[0]
    if n == 0:
        raise ValueError("region must be nonempty")
    sums = pixels.sum(axis=0)
    d2 = ((n * pixels - sums) ** 2).sum(axis=1)
    order = np.lexsort((pixels[:, 0], pixels[:, 1]))  # y first, then x
    best = order[np.argmin(d2[order])]
    return int(pixels[best, 0]), int(pixels[best, 1])


def bounding_box(mask) -> Optional[PixelBox]:
    """Tight inclusive bounds of the foreground, or None for an empty mask."""
    mask = as_binary_mask(mask)
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        return None
    return PixelBox(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
