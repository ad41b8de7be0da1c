"""BUSI-style dataset discovery, mask merging, and the seeded 80/20 split.

Expected layout: class folders (benign/, malignant/, normal/) holding
"<class> (<n>).png" images with sibling "<stem>_mask.png" (and optionally
"<stem>_mask_1.png", ...) ground-truth files. Flat folders with the class
encoded in the filename prefix work too.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .masks import load_mask
from .validation import check_same_shape

BENIGN = "benign"
MALIGNANT = "malignant"
NORMAL = "normal"
CLASS_LABELS = (BENIGN, MALIGNANT, NORMAL)
SPLITS = ("train", "test", "unassigned")

IMAGE_SUFFIXES = (".png", ".pgm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")

MANIFEST_VERSION = "v1"
_MANIFEST_MAGIC = "manifest"


class DatasetWarning(UserWarning):
    """Non-fatal dataset discovery issue (e.g. an image without masks)."""


class ManifestFormatError(ValueError):
    """Malformed manifest file; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class DatasetEntry:
    """One image with its ground-truth mask file(s). Paths are relative to root."""

    image_id: str
    class_label: str
    image_path: str
    mask_paths: tuple[str, ...]
    split: str = "unassigned"


@dataclass(frozen=True)
class DatasetManifest:
    """Inventory of a dataset plus (optionally) its train/test assignment."""

    root: str  # absolute path
    entries: tuple[DatasetEntry, ...]
    seed: int | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def image_file(self, entry: DatasetEntry) -> Path:
        return Path(self.root) / entry.image_path

    def mask_files(self, entry: DatasetEntry) -> list[Path]:
        return [Path(self.root) / p for p in entry.mask_paths]

    def subset(self, split: str) -> tuple[DatasetEntry, ...]:
        if split == "all":
            return self.entries
        if split not in SPLITS:
            raise ValueError(f"unknown split {split!r}")
        return tuple(e for e in self.entries if e.split == split)


def _class_of(path: Path, root: Path) -> str | None:
    for part in path.relative_to(root).parts[:-1]:
        low = part.lower()
        if low in CLASS_LABELS:
            return low
    stem = path.stem.lower()
    for label in CLASS_LABELS:
        if stem.startswith(label):
            return label
    return None


def scan_dataset(root, include_normal: bool = False) -> DatasetManifest:
    """Inventory image/mask pairs under a directory tree.

    An image's masks are every sibling named "<stem>_mask<suffix>" or
    "<stem>_mask_<n><suffix>". Images without any mask are excluded with a
    warning, as are classes other than benign/malignant (normal images are
    re-admitted via include_normal).
    """
    root = Path(root)
    if not root.is_dir():
        raise OSError(f"dataset root is not a readable directory: {root}")
    root = root.resolve()

    files = [p for p in sorted(root.rglob("*")) if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES]
    mask_stems = {}
    images = []
    for p in files:
        if "_mask" in p.stem:
            mask_stems.setdefault(p.parent, []).append(p)
        else:
            images.append(p)

    entries = []
    seen_ids: dict[str, Path] = {}
    for img in images:
        stem = img.stem
        masks = sorted(
            m for m in mask_stems.get(img.parent, [])
            if m.stem == f"{stem}_mask" or m.stem.startswith(f"{stem}_mask_")
        )
        label = _class_of(img, root)
        if label is None:
            warnings.warn(f"cannot infer class of {img.name}; skipped", DatasetWarning, stacklevel=2)
            continue
        if label == NORMAL and not include_normal:
            continue
        if not masks:
            warnings.warn(f"image {stem!r} has no mask files; excluded", DatasetWarning, stacklevel=2)
            continue
        if stem in seen_ids:
            raise ValueError(f"duplicate image_id {stem!r}: {seen_ids[stem]} vs {img}")
        seen_ids[stem] = img
        entries.append(DatasetEntry(
            image_id=stem,
            class_label=label,
            image_path=img.relative_to(root).as_posix(),
            mask_paths=tuple(m.relative_to(root).as_posix() for m in masks),
        ))
    entries.sort(key=lambda e: e.image_id)
    return DatasetManifest(root=root.as_posix(), entries=tuple(entries))


def merge_masks(mask_paths, threshold: int = 127) -> np.ndarray:
    """Pixelwise union of one or more mask files of identical dimensions."""
    paths = list(mask_paths)
    if not paths:
        raise ValueError("merge_masks needs at least one path")
    merged = load_mask(paths[0], threshold=threshold)
    for p in paths[1:]:
        nxt = load_mask(p, threshold=threshold)
        check_same_shape(merged, nxt, "mask", str(p))
        merged = merged | nxt
    return merged


def _shuffle_key(seed: int, image_id: str) -> str:
    return hashlib.sha256(f"{seed}:{image_id}".encode("utf-8")).hexdigest()


def split_dataset(
    manifest: DatasetManifest,
    train_fraction: float = 0.8,
    seed: int = 0,
    stratify: bool = False,
) -> DatasetManifest:
    """Assign floor(train_fraction * N) entries to train, the rest to test.

    The shuffle is a seed-keyed hash order over image_ids, so the
    assignment depends only on (image_ids, seed, fraction) and is identical
    on every platform regardless of how the filesystem enumerated files.
    With stratify=True the train quota is spread over class labels by
    largest remainder while keeping the total at floor(train_fraction * N).
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if any(e.split != "unassigned" for e in manifest.entries):
        raise ValueError("manifest already has split assignments")
    n = len(manifest.entries)
    n_train = int(math.floor(train_fraction * n))

    ordered = sorted(manifest.entries, key=lambda e: (_shuffle_key(seed, e.image_id), e.image_id))
    train_ids: set[str] = set()
    if stratify:
        by_class: dict[str, list[DatasetEntry]] = {}
        for e in ordered:
            by_class.setdefault(e.class_label, []).append(e)
        quotas = {c: train_fraction * len(group) for c, group in by_class.items()}
        take = {c: int(math.floor(q)) for c, q in quotas.items()}
        leftover = n_train - sum(take.values())
        remainders = sorted(quotas, key=lambda c: (take[c] - quotas[c], c))
        for c in remainders[:leftover]:
            take[c] += 1
        for c, group in by_class.items():
            train_ids.update(e.image_id for e in group[:take[c]])
    else:
        train_ids.update(e.image_id for e in ordered[:n_train])

    entries = tuple(
        replace(e, split="train" if e.image_id in train_ids else "test")
        for e in manifest.entries
    )
    return DatasetManifest(root=manifest.root, entries=entries, seed=seed)


# ---------------------------------------------------------------------------
# manifest file format
#
# UTF-8, LF, tab-separated. Header:
#   manifest<TAB>v1<TAB>seed=<int|none><TAB>root=<abs path>
# one entry per line:
#   <image_id><TAB><class><TAB><split><TAB><image_path><TAB><mask_path>[<TAB><mask_path>...]
# ---------------------------------------------------------------------------

def save_manifest(manifest: DatasetManifest, path) -> None:
    seed_txt = "none" if manifest.seed is None else str(manifest.seed)
    lines = [f"{_MANIFEST_MAGIC}\t{MANIFEST_VERSION}\tseed={seed_txt}\troot={manifest.root}"]
    for e in manifest.entries:
        fields = [e.image_id, e.class_label, e.split, e.image_path, *e.mask_paths]
        for f in fields:
            if "\t" in f or "\n" in f:
                raise ValueError(f"manifest field contains separator characters: {f!r}")
        lines.append("\t".join(fields))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ManifestFormatError("empty file", 1)
    header = lines[0].split("\t")
    if len(header) != 4 or header[0] != _MANIFEST_MAGIC:
        raise ManifestFormatError(f"bad header, expected '{_MANIFEST_MAGIC}' with 4 fields", 1)
    if header[1] != MANIFEST_VERSION:
        raise ManifestFormatError(f"unsupported manifest version {header[1]!r}", 1)
    if not header[2].startswith("seed=") or not header[3].startswith("root="):
        raise ManifestFormatError("header must carry seed=... and root=...", 1)
    seed_txt = header[2][len("seed="):]
    if seed_txt == "none":
        seed = None
    else:
        try:
            seed = int(seed_txt)
        except ValueError:
            raise ManifestFormatError(f"seed is not an integer: {seed_txt!r}", 1) from None
    root = header[3][len("root="):]

    entries = []
    seen = set()
    for lineno, raw in enumerate(lines[1:], start=2):
        fields = raw.split("\t")
        if len(fields) < 5:
            raise ManifestFormatError(f"expected at least 5 tab-separated fields, got {len(fields)}", lineno)
        image_id, label, split = fields[0], fields[1], fields[2]
        if label not in CLASS_LABELS:
            raise ManifestFormatError(f"unknown class label {label!r}", lineno)
        if split not in SPLITS:
            raise ManifestFormatError(f"unknown split {split!r}", lineno)
        if image_id in seen:
            raise ManifestFormatError(f"duplicate image_id {image_id!r}", lineno)
        seen.add(image_id)
        entries.append(DatasetEntry(
            image_id=image_id,
            class_label=label,
            split=split,
            image_path=fields[3],
            mask_paths=tuple(fields[4:]),
        ))
    return DatasetManifest(root=root, entries=tuple(entries), seed=seed)
