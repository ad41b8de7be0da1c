"""Evenly spaced click placement inside pixel regions.

Clicks are generators of a Centroidal Voronoi Tessellation restricted to a
region's pixel set, computed with Lloyd's algorithm. Everything here is
deterministic: seeding is farthest-point sampling from the snapped
centroid, all distance comparisons happen in exact integer arithmetic, and
ties are broken in row-major scan order (smallest y, then smallest x).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .masks import snapped_centroid
from .validation import as_binary_mask, as_pixel_array

BRUTE_FORCE_MAX_AREA = 16
BRUTE_FORCE_MAX_CLICKS = 2

# Regions up to this many pixels get a deterministic escape pass after Lloyd
# converges (single-click relocations plus re-anchored farthest-point
# restarts, each relaxed to its own fixed point). The pass is quadratic in
# area, so larger regions (where clicks only need even spacing, not
# certified energy) rely on plain Lloyd to stay within latency budgets.
ESCAPE_MAX_AREA = 16


@dataclass(frozen=True)
class ClickBudgetPolicy:
    """Region-size to click-count rule.

    Regions below min_area get no clicks at all; every other region gets
    round(area / area_per_click) clicks clamped to [1, max_clicks], with
    halves rounded away from zero so the rule is platform independent.
    """

    min_area: int = 10
    area_per_click: int = 400
    max_clicks: int = 10

    def __post_init__(self):
        if self.min_area < 1 or self.area_per_click < 1 or self.max_clicks < 1:
            raise ValueError("policy fields must all be >= 1")


@dataclass(frozen=True)
class CvtState:
    """Result of a Lloyd relaxation run on one region."""

    pixels: np.ndarray = field(repr=False)  # (n, 2) region pixels, row-major order
    clicks: np.ndarray = field(repr=False)  # (k, 2) generators, all in-region
    energy: int  # sum over pixels of squared distance to nearest click
    iterations: int
    converged: bool


def click_budget(area: int, policy: ClickBudgetPolicy = ClickBudgetPolicy()) -> int:
    """Number of clicks a region of the given area receives."""
    if area < 0:
        raise ValueError(f"area must be >= 0, got {area}")
    if area < policy.min_area:
        return 0
    wanted = int(np.floor(area / policy.area_per_click + 0.5))  # half away from zero
    return min(max(wanted, 1), policy.max_clicks)


def _sorted_pixels(region, name: str = "region") -> np.ndarray:
    pixels = as_pixel_array(region, name)
    if pixels.shape[0] == 0:
        raise ValueError(f"{name} must be nonempty")
    order = np.lexsort((pixels[:, 0], pixels[:, 1]))
    return pixels[order]


def _farthest_point_seeds(pixels: np.ndarray, first: np.ndarray, k: int) -> np.ndarray:
    """k distinct pixels: `first`, then repeated max-min-distance picks."""
    seeds = np.empty((k, 2), dtype=np.int64)
    seeds[0] = first
    min_d2 = ((pixels - seeds[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        best = int(np.argmax(min_d2))  # first max = row-major tie-break
        seeds[i] = pixels[best]
        min_d2 = np.minimum(min_d2, ((pixels - seeds[i]) ** 2).sum(axis=1))
    return seeds


def seed_clicks(region, k: int) -> np.ndarray:
    """Deterministic farthest-point sampling of k distinct region pixels.

    The first seed is the snapped centroid; every following seed is the
    region pixel farthest from its nearest already-chosen seed.
    """
    pixels = _sorted_pixels(region)
    n = pixels.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    return _farthest_point_seeds(pixels, snapped_centroid(pixels), k)


def cvt_energy(region, clicks) -> int:
    """Sum over region pixels of the squared distance to the nearest click."""
    pixels = _sorted_pixels(region)
    clicks = as_pixel_array(clicks, "clicks")
    if clicks.shape[0] == 0:
        raise ValueError("clicks must be nonempty")
    d2 = ((pixels[:, None, :] - clicks[None, :, :]) ** 2).sum(axis=2)
    return int(d2.min(axis=1).sum())


def _snap_to_mean(cell: np.ndarray) -> np.ndarray:
    """Cell pixel nearest the cell mean, exact ties in row-major order."""
    m = cell.shape[0]
    sums = cell.sum(axis=0)
    d2 = ((m * cell - sums) ** 2).sum(axis=1)
    return cell[int(np.argmin(d2))]


def _reseed(pixels: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Region pixel farthest from every click in `others` (max-min distance)."""
    d2 = ((pixels[:, None, :] - others[None, :, :]) ** 2).sum(axis=2).min(axis=1)
    return pixels[int(np.argmax(d2))]


def _lloyd_loop(pixels: np.ndarray, clicks: np.ndarray, max_iters: int) -> tuple[np.ndarray, int, bool]:
    """Core Lloyd iteration; returns (clicks, iterations run, converged)."""
    k = clicks.shape[0]
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        d2 = ((pixels[:, None, :] - clicks[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        new_clicks = clicks.copy()
        empties = []
        for j in range(k):
            cell = pixels[assign == j]
            if cell.shape[0] == 0:
                empties.append(j)
            else:
                new_clicks[j] = _snap_to_mean(cell)
        # collisions: keep the lowest-index occupant of a pixel, re-seed the rest
        seen: dict[tuple[int, int], int] = {}
        offenders = list(empties)
        for j in range(k):
            if j in empties:
                continue
            key = (int(new_clicks[j, 0]), int(new_clicks[j, 1]))
            if key in seen:
                offenders.append(j)
            else:
                seen[key] = j
        for j in sorted(offenders):
            others = np.delete(new_clicks, j, axis=0)
            new_clicks[j] = _reseed(pixels, others)
        if np.array_equal(new_clicks, clicks):
            converged = True
            break
        clicks = new_clicks
    return clicks, iterations, converged


def _escape_trials(pixels: np.ndarray, clicks: np.ndarray):
    """Candidate click sets to re-relax from a converged state.

    Single-click relocations to every unoccupied pixel, followed by
    farthest-point seedings anchored at each region pixel in turn. Yielded
    in a fixed order so the first strict improvement found is deterministic.
    """
    k = clicks.shape[0]
    occupied = {tuple(c) for c in clicks.tolist()}
    for j in range(k):
        for t in pixels.tolist():
            if tuple(t) in occupied:
                continue
            trial = clicks.copy()
            trial[j] = t
            yield trial
    for i in range(pixels.shape[0]):
        yield _farthest_point_seeds(pixels, pixels[i], k)


def _fixed_point_escape(
    pixels: np.ndarray, clicks: np.ndarray, energy: int, max_iters: int,
) -> tuple[np.ndarray, int, int]:
    """Escape poor Lloyd fixed points on small regions.

    Each candidate from _escape_trials is re-relaxed to its own fixed point;
    the strictly best resulting energy wins (ties to the earliest candidate).
    Repeats until no candidate improves. Returns (clicks, energy, extra
    iterations spent inside the accepted re-relaxations).
    """
    extra = 0
    improved = True
    while improved:
        improved = False
        best = None
        for trial in _escape_trials(pixels, clicks):
            relaxed, iters, done = _lloyd_loop(pixels, trial, max_iters)
            if not done:
                continue
            trial_energy = cvt_energy(pixels, relaxed)
            if trial_energy < energy and (best is None or trial_energy < best[0]):
                best = (trial_energy, relaxed, iters)
        if best is not None:
            energy, clicks, iters = best
            extra += iters
            improved = True
    return clicks, energy, extra


def lloyd_relax(region, seeds, max_iters: int = 100) -> CvtState:
    """Relax seed clicks to a Lloyd fixed point constrained to region pixels.

    Each iteration assigns every region pixel to its nearest click (ties to
    the lowest click index), then moves each click to the in-cell pixel
    nearest its cell's coordinate mean. A click whose cell emptied or that
    collided with another is re-seeded at the region pixel farthest from
    all other clicks. Stops when no click moved, or after max_iters.

    On regions of at most ESCAPE_MAX_AREA pixels, a converged state is
    additionally polished by a deterministic escape search over single-click
    relocations and re-anchored farthest-point seedings (each candidate
    re-relaxed to its own fixed point, accepted only on strict energy
    improvement), which escapes the poor local minima a single seeding can
    fall into on tiny regions. The returned state is always a Lloyd fixed
    point when converged is true.
    """
    pixels = _sorted_pixels(region)
    clicks = as_pixel_array(seeds, "seeds").copy()
    k = clicks.shape[0]
    if k == 0:
        raise ValueError("seeds must be nonempty")
    if np.unique(clicks, axis=0).shape[0] != k:
        raise ValueError("seeds must be pairwise distinct")
    pixel_keys = {tuple(p) for p in pixels.tolist()}
    for c in clicks.tolist():
        if tuple(c) not in pixel_keys:
            raise ValueError(f"seed {tuple(c)} is not a region pixel")
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")

    clicks, iterations, converged = _lloyd_loop(pixels, clicks, max_iters)
    energy = cvt_energy(pixels, clicks)
    if converged and k >= 2 and pixels.shape[0] <= ESCAPE_MAX_AREA:
        clicks, energy, extra = _fixed_point_escape(pixels, clicks, energy, max_iters)
        iterations += extra
    return CvtState(
        pixels=pixels, clicks=clicks, energy=energy,
        iterations=iterations, converged=converged,
    )


def brute_force_cvt(region, k: int) -> tuple[np.ndarray, int]:
    """Exact CVT minimizer by exhaustive enumeration. Small instances only.

    Guards: area <= 16 and k <= 2. Ties between equal-energy click sets go
    to the lexicographically smallest row-major click list.
    """
    pixels = _sorted_pixels(region)
    n = pixels.shape[0]
    if n > BRUTE_FORCE_MAX_AREA or k > BRUTE_FORCE_MAX_CLICKS:
        raise ValueError(
            f"instance too large for brute force (area {n} > {BRUTE_FORCE_MAX_AREA} "
            f"or k {k} > {BRUTE_FORCE_MAX_CLICKS})"
        )
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    d2_all = ((pixels[:, None, :] - pixels[None, :, :]) ** 2).sum(axis=2)
    best_energy = None
    best_idx = None
    # combinations over row-major-sorted indices: first minimum found is the
    # lexicographically smallest click list
    for idx in itertools.combinations(range(n), k):
        energy = int(d2_all[list(idx)].min(axis=0).sum())
        if best_energy is None or energy < best_energy:
            best_energy = energy
            best_idx = idx
    return pixels[list(best_idx)], best_energy


class CvtClicker(BaseEstimator):
    """KMeans-style estimator that places n_clicks inside one pixel region.

    fit(X) accepts an (n, 2) array of (x, y) pixel coordinates or a 2D
    boolean mask (its foreground pixels become the region). Fitted
    attributes mirror sklearn clustering conventions:

    clicks_     (n_clicks, 2) relaxed click coordinates
    energy_     summed squared pixel-to-nearest-click distance
    n_iter_     Lloyd iterations actually run
    converged_  True if a fixed point was reached before max_iter
    labels_     nearest-click index of every region pixel
    """

    def __init__(self, n_clicks: int = 1, max_iter: int = 100):
        self.n_clicks = n_clicks
        self.max_iter = max_iter

    def _region_pixels(self, X) -> np.ndarray:
        arr = np.asarray(X)
        if arr.ndim == 2 and arr.shape[1] != 2:
            fg = as_binary_mask(arr, "X")
            ys, xs = np.nonzero(fg)
            arr = np.column_stack((xs, ys))
        elif arr.dtype == bool:
            fg = as_binary_mask(arr, "X")
            ys, xs = np.nonzero(fg)
            arr = np.column_stack((xs, ys))
        return as_pixel_array(arr, "X")

    def fit(self, X, y=None):
        pixels = self._region_pixels(X)
        seeds = seed_clicks(pixels, self.n_clicks)
        state = lloyd_relax(pixels, seeds, max_iters=self.max_iter)
        self.pixels_ = state.pixels
        self.clicks_ = state.clicks
        self.energy_ = state.energy
        self.n_iter_ = state.iterations
        self.converged_ = state.converged
        self.labels_ = self.predict(state.pixels)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "clicks_"):
            raise AttributeError("CvtClicker is not fitted yet; call fit first")
        pts = as_pixel_array(X, "X")
        d2 = ((pts[:, None, :] - self.clicks_[None, :, :]) ** 2).sum(axis=2)
        return d2.argmin(axis=1)

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).labels_
