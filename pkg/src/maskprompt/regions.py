"""Connected components and prediction/ground-truth error decomposition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .validation import as_binary_mask, check_connectivity, check_same_shape

GT = "GT"
TP = "TP"
FP = "FP"
FN = "FN"
REGION_KINDS = (GT, TP, FP, FN)
POSITIVE_KINDS = (GT, TP, FN)


@dataclass(frozen=True)
class Region:
    """One connected component of a mask.

    pixels holds (x, y) coordinates as an (n, 2) int64 array in row-major
    scan order (ascending y, then x). component_id is unique within
    (mask, kind) and follows the row-major order of each region's first
    pixel.
    """

    pixels: np.ndarray = field(repr=False)
    kind: str
    component_id: int

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValueError(f"unknown region kind {self.kind!r}")
        if self.pixels.ndim != 2 or self.pixels.shape[1] != 2 or self.pixels.shape[0] < 1:
            raise ValueError("region pixels must be a nonempty (n, 2) array")
        self.pixels.setflags(write=False)

    @property
    def area(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ErrorDecomposition:
    """TP/FP/FN mask triple for one prediction/ground-truth pair."""

    tp_mask: np.ndarray = field(repr=False)
    fp_mask: np.ndarray = field(repr=False)
    fn_mask: np.ndarray = field(repr=False)

    def mask_for(self, kind: str) -> np.ndarray:
        try:
            return {TP: self.tp_mask, FP: self.fp_mask, FN: self.fn_mask}[kind]
        except KeyError:
            raise ValueError(f"decomposition has no {kind!r} mask") from None


def _structure(connectivity: int) -> np.ndarray:
    return ndimage.generate_binary_structure(2, 1 if connectivity == 4 else 2)


def label_components(mask, connectivity: int = 8, kind: str = GT) -> list[Region]:
    """Split a mask into maximal connected regions.

    Component ids are assigned in order of each region's first pixel in a
    row-major scan, independent of how the labeling backend numbers them.
    """
    mask = as_binary_mask(mask)
    check_connectivity(connectivity)
    labeled, n_labels = ndimage.label(mask, structure=_structure(connectivity))
    if n_labels == 0:
        return []
    ys, xs = np.nonzero(labeled)  # row-major scan order
    ids = labeled[ys, xs]
    # rank labels by first appearance so ids follow the scan order
    uniq, first_idx = np.unique(ids, return_index=True)
    rank = np.empty(n_labels + 1, dtype=np.int64)
    rank[uniq[np.argsort(first_idx)]] = np.arange(uniq.size)
    new_ids = rank[ids]
    order = np.argsort(new_ids, kind="stable")  # groups regions, keeps scan order inside
    counts = np.bincount(new_ids, minlength=uniq.size)
    bounds = np.concatenate(([0], np.cumsum(counts)))
    coords = np.column_stack((xs[order], ys[order])).astype(np.int64)
    return [
        Region(pixels=coords[bounds[i]:bounds[i + 1]], kind=kind, component_id=i)
        for i in range(uniq.size)
    ]


def decompose_errors(pred, gt) -> ErrorDecomposition:
    """Pixelwise TP = pred & gt, FP = pred & ~gt, FN = ~pred & gt."""
    pred = as_binary_mask(pred, "pred")
    gt = as_binary_mask(gt, "gt")
    check_same_shape(pred, gt, "pred", "gt")
    dec = ErrorDecomposition(
        tp_mask=pred & gt,
        fp_mask=pred & ~gt,
        fn_mask=~pred & gt,
    )
    for m in (dec.tp_mask, dec.fp_mask, dec.fn_mask):
        m.setflags(write=False)
    return dec


def regions_of(dec: ErrorDecomposition, kind: str, connectivity: int = 8) -> list[Region]:
    """Connected regions of the selected error mask, tagged with its kind."""
    return label_components(dec.mask_for(kind), connectivity=connectivity, kind=kind)
