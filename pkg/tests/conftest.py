"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest


def random_mask(rng: np.random.Generator, h: int = 64, w: int = 64) -> np.ndarray:
    """Random binary mask mixing blobs, noise, and empty frames."""
    kind = rng.integers(0, 4)
    mask = np.zeros((h, w), dtype=bool)
    if kind == 0:
        return mask
    if kind == 1:
        # pure salt noise; exercises many tiny components
        return rng.random((h, w)) < rng.uniform(0.02, 0.3)
    # one or two solid blobs, optionally with noise on top
    for _ in range(rng.integers(1, 3)):
        cx, cy = rng.integers(0, w), rng.integers(0, h)
        rx = rng.integers(1, max(w // 3, 2))
        ry = rng.integers(1, max(h // 3, 2))
        yy, xx = np.mgrid[0:h, 0:w]
        mask |= ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    if kind == 3:
        mask |= rng.random((h, w)) < 0.05
    return mask


def random_mask_pair(rng: np.random.Generator, h: int = 64, w: int = 64):
    """Correlated (pred, gt) pair: pred is gt with shifts, erosion, noise."""
    gt = random_mask(rng, h, w)
    style = rng.integers(0, 4)
    if style == 0:
        pred = gt.copy()
    elif style == 1:
        dx, dy = rng.integers(-5, 6, size=2)
        pred = np.zeros_like(gt)
        src = gt[max(0, -dy):h - max(0, dy), max(0, -dx):w - max(0, dx)]
        pred[max(0, dy):max(0, dy) + src.shape[0],
             max(0, dx):max(0, dx) + src.shape[1]] = src
    elif style == 2:
        pred = gt & (rng.random((h, w)) > 0.2)
    else:
        pred = random_mask(rng, h, w)
    flip = rng.random((h, w)) < 0.02
    pred = pred ^ flip
    return pred, gt


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260817)
