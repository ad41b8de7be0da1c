"""Input validation helpers shared by every module.

Masks are plain 2D numpy arrays indexed ``mask[y, x]`` (row-major, origin
top-left). Pixel coordinates are ``(x, y)`` pairs with x = column, y = row.
"""

from __future__ import annotations

import numpy as np

VALID_CONNECTIVITIES = (4, 8)


def as_binary_mask(mask, name: str = "mask") -> np.ndarray:
    """Coerce array-like input to a 2D boolean mask.

    Accepts boolean arrays and integer arrays whose values are 0/1.
    Anything else (floats, gray levels, wrong rank) is rejected so that
    unthresholded rasters cannot sneak into the pipeline.
    """
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have positive dimensions, got {arr.shape}")
    if arr.dtype == bool:
        return arr
    if np.issubdtype(arr.dtype, np.integer):
        if np.isin(arr, (0, 1)).all():
            return arr.astype(bool)
        raise ValueError(f"{name} has integer values outside {{0, 1}}; threshold it first")
    raise ValueError(f"{name} must be boolean or 0/1 integer, got dtype {arr.dtype}")


def as_probability_mask(prob, name: str = "prob") -> np.ndarray:
    """Coerce array-like input to a 2D float64 array with values in [0, 1]."""
    arr = np.asarray(prob, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must have positive dimensions, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} has values outside [0, 1]")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, a_name: str = "a", b_name: str = "b") -> None:
    if a.shape != b.shape:
        raise ValueError(
            f"{a_name} and {b_name} must have identical dimensions, "
            f"got {a.shape} vs {b.shape}"
        )


def check_connectivity(connectivity: int) -> int:
    if connectivity not in VALID_CONNECTIVITIES:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity!r}")
    return connectivity


def as_pixel_array(pixels, name: str = "pixels") -> np.ndarray:
    """Coerce to an (n, 2) int64 array of (x, y) pixel coordinates.

    Also accepts any object exposing a ``pixels`` attribute (e.g. Region).
    """
    if hasattr(pixels, "pixels"):
        pixels = pixels.pixels
    arr = np.asarray(pixels)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must be an (n, 2) coordinate array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if np.issubdtype(arr.dtype, np.floating) and np.all(arr == np.floor(arr)):
            arr = arr.astype(np.int64)
        else:
            raise ValueError(f"{name} must hold integer pixel coordinates")
    return np.ascontiguousarray(arr, dtype=np.int64)
