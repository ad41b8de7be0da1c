"""Deterministic synthetic ultrasound-style corpus.

Generates a BUSI-shaped directory tree (benign/, malignant/, normal/) of
speckled grayscale images with lesion masks, so the whole pipeline and the
training harness can run without downloading the real dataset. Every file
is a pure function of (seed, class, index): regenerating with the same
arguments produces byte-identical PNGs.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .dataset import BENIGN, MALIGNANT, NORMAL
from .masks import save_mask

_CLASS_CODE = {BENIGN: 0, MALIGNANT: 1, NORMAL: 2}


def _rng(seed: int, label: str, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, _CLASS_CODE[label], index])


def _ellipse_mask(size: int, rng: np.random.Generator) -> np.ndarray:
    cx, cy = rng.uniform(0.32, 0.68, size=2) * size
    a = rng.uniform(0.10, 0.24) * size
    b = rng.uniform(0.10, 0.24) * size
    theta = rng.uniform(0.0, np.pi)
    yy, xx = np.mgrid[0:size, 0:size]
    dx, dy = xx - cx, yy - cy
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def _star_mask(size: int, rng: np.random.Generator) -> np.ndarray:
    """Star-convex blob with an irregular, spiky boundary."""
    cx, cy = rng.uniform(0.35, 0.65, size=2) * size
    r0 = rng.uniform(0.12, 0.22) * size
    harmonics = range(2, 7)
    amps = [rng.uniform(0.04, 0.30) / np.sqrt(j) for j in harmonics]
    phases = [rng.uniform(0.0, 2 * np.pi) for _ in harmonics]
    yy, xx = np.mgrid[0:size, 0:size]
    dx, dy = xx - cx, yy - cy
    phi = np.arctan2(dy, dx)
    radius = r0 * (1.0 + sum(a * np.cos(j * phi + p) for j, a, p in zip(harmonics, amps, phases)))
    return dx * dx + dy * dy <= np.maximum(radius, 2.0) ** 2


def _small_ellipse(size: int, rng: np.random.Generator) -> np.ndarray:
    cx, cy = rng.uniform(0.12, 0.88, size=2) * size
    a = rng.uniform(0.04, 0.08) * size
    b = rng.uniform(0.04, 0.08) * size
    yy, xx = np.mgrid[0:size, 0:size]
    return ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 <= 1.0


def _render_image(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Speckled grayscale render with a hypoechoic (dark) lesion."""
    size = mask.shape[0]
    field = ndimage.gaussian_filter(rng.normal(0.0, 1.0, mask.shape), sigma=size / 10)
    field = field / (np.abs(field).max() + 1e-9)
    base = 0.55 + 0.18 * field
    soft = ndimage.gaussian_filter(mask.astype(np.float64), sigma=2.0)
    img = base * (1.0 - 0.62 * soft)
    speckle = rng.gamma(shape=6.0, scale=1.0 / 6.0, size=mask.shape)
    img = np.clip(img * speckle, 0.0, 1.0)
    return (img * 255.0 + 0.5).astype(np.uint8)


def _save_gray(arr: np.ndarray, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr, mode="L").save(path)


def make_corpus(
    root,
    count: int = 220,
    seed: int = 0,
    size: int = 256,
    benign_fraction: float = 0.6,
    normals: int = 0,
    second_lesion_every: int = 5,
) -> list[tuple[str, str]]:
    """Write a synthetic corpus under root; returns (image_id, class) pairs.

    Benign images carry a smooth ellipse lesion, malignant ones a spiky
    star blob; every second_lesion_every-th malignant image gets an extra
    small lesion stored as a separate "_mask_1" file. Normal images have an
    all-background mask, mirroring the real dataset's layout.
    """
    root = Path(root)
    n_benign = int(round(count * benign_fraction))
    plan = [(BENIGN, i + 1) for i in range(n_benign)]
    plan += [(MALIGNANT, i + 1) for i in range(count - n_benign)]
    plan += [(NORMAL, i + 1) for i in range(normals)]

    written = []
    for label, idx in plan:
        rng = _rng(seed, label, idx)
        stem = f"{label} ({idx})"
        folder = root / label
        masks = []
        if label == BENIGN:
            masks.append(_ellipse_mask(size, rng))
        elif label == MALIGNANT:
            masks.append(_star_mask(size, rng))
            if second_lesion_every and idx % second_lesion_every == 0:
                masks.append(_small_ellipse(size, rng))
        else:
            masks.append(np.zeros((size, size), dtype=bool))

        combined = masks[0]
        for extra in masks[1:]:
            combined = combined | extra
        _save_gray(_render_image(combined, rng), folder / f"{stem}.png")
        save_mask(masks[0], folder / f"{stem}_mask.png")
        for j, extra in enumerate(masks[1:], start=1):
            save_mask(extra, folder / f"{stem}_mask_{j}.png")
        written.append((stem, label))
    return written
