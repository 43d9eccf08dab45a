"""Build, persist, and load the image feature index.

The index holds, per image, the 25-d global descriptor, the per-segment
descriptors with member counts, the category id (from the directory
layout), and the source path.  Per-dimension min/max over all global and
segment vectors are stored so every consumer can scale features to [0, 1]
before computing distances.

On disk the index is a little-endian binary file ("SGSX" magic, version 1,
64-bit floats) with a human-readable ``.manifest.tsv`` sidecar listing the
categories.
"""
from __future__ import annotations

import logging
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .color_features import (
    FEATURE_DIM,
    HUE_LEVELS,
    SAT_LEVELS,
    VAL_LEVELS,
    HsvImage,
    extract_features,
)
from .segmentation import (
    DEFAULT_BLOCK_COLS,
    DEFAULT_BLOCK_ROWS,
    DEFAULT_CLUSTERS,
    SegmentSet,
    block_feature_matrix,
    kmeans_segment,
)

log = logging.getLogger(__name__)

MAGIC = b"SGSX"
VERSION = 1

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff", ".webp"}


class IndexFormatError(ValueError):
    """The file is not a feature index (bad magic) or an unknown version."""


class IndexCorruptError(ValueError):
    """The file is a feature index but its contents are truncated or inconsistent."""


@dataclass
class IndexedImage:
    image_id: int
    category: int
    path: str
    block_count: int
    features: np.ndarray  # (25,) raw global descriptor
    segments: np.ndarray  # (n_segments, 25) raw segment descriptors
    member_counts: np.ndarray  # (n_segments,)


@dataclass
class FeatureIndex:
    """In-memory index; ids are dense from 0 in image order."""

    images: list[IndexedImage]
    category_names: list[str]
    norm_min: np.ndarray
    norm_max: np.ndarray
    seed: int
    block_rows: int = DEFAULT_BLOCK_ROWS
    block_cols: int = DEFAULT_BLOCK_COLS
    clusters: int = DEFAULT_CLUSTERS
    levels: tuple[int, int, int] = (HUE_LEVELS, SAT_LEVELS, VAL_LEVELS)
    build_warnings: list[str] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.images)

    def normalize(self, vectors: np.ndarray) -> np.ndarray:
        """Min-max scale vectors with the index's per-dimension bounds."""
        span = np.where(self.norm_max > self.norm_min, self.norm_max - self.norm_min, 1.0)
        return (np.asarray(vectors, dtype=np.float64) - self.norm_min) / span

    @property
    def features_matrix(self) -> np.ndarray:
        """Normalized global descriptors, row i = image id i."""
        cached = getattr(self, "_features_matrix", None)
        if cached is None:
            raw = np.stack([img.features for img in self.images])
            cached = self.normalize(raw)
            self._features_matrix = cached
        return cached

    @property
    def segment_sets(self) -> list[SegmentSet]:
        """Normalized per-image segment sets, index i = image id i."""
        cached = getattr(self, "_segment_sets", None)
        if cached is None:
            cached = [
                SegmentSet(
                    image_id=img.image_id,
                    segments=self.normalize(img.segments),
                    member_counts=img.member_counts,
                )
                for img in self.images
            ]
            self._segment_sets = cached
        return cached

    @property
    def categories(self) -> np.ndarray:
        cached = getattr(self, "_categories", None)
        if cached is None:
            cached = np.array([img.category for img in self.images], dtype=np.int64)
            self._categories = cached
        return cached

    def category_size(self, category: int) -> int:
        return int((self.categories == category).sum())

    def equals(self, other: "FeatureIndex") -> bool:
        """Exact field-for-field equality (used by round-trip checks)."""
        if (
            len(self.images) != len(other.images)
            or self.category_names != other.category_names
            or self.seed != other.seed
            or (self.block_rows, self.block_cols, self.clusters, self.levels)
            != (other.block_rows, other.block_cols, other.clusters, other.levels)
            or not np.array_equal(self.norm_min, other.norm_min)
            or not np.array_equal(self.norm_max, other.norm_max)
        ):
            return False
        for a, b in zip(self.images, other.images):
            if (
                (a.image_id, a.category, a.path, a.block_count)
                != (b.image_id, b.category, b.path, b.block_count)
                or not np.array_equal(a.features, b.features)
                or not np.array_equal(a.segments, b.segments)
                or not np.array_equal(a.member_counts, b.member_counts)
            ):
                return False
        return True


def image_seed(seed: int, image_id: int) -> int:
    """Stable per-image segmentation seed, independent of build order."""
    return int(np.random.SeedSequence([seed, image_id]).generate_state(1)[0])


def _extract_one(
    path: str, image_id: int, seed: int, n1: int, n2: int, k: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"))
    hsv = HsvImage.from_rgb(rgb)
    features = extract_features(hsv)
    block_feats = block_feature_matrix(hsv, n1, n2)
    seg = kmeans_segment(block_feats, k=k, seed=image_seed(seed, image_id), image_id=image_id)
    return features, seg.segments, seg.member_counts, block_feats.shape[0]


def _list_image_tree(root: Path) -> tuple[list[str], list[tuple[Path, int]]]:
    """Category names (sorted subdirectories) and (file, category) pairs."""
    if not root.is_dir():
        raise ValueError(f"image root {root} is not a directory")
    categories = sorted(p.name for p in root.iterdir() if p.is_dir())
    files: list[tuple[Path, int]] = []
    for cat_id, name in enumerate(categories):
        for f in sorted((root / name).iterdir()):
            if f.is_file() and f.suffix.lower() in IMAGE_EXTENSIONS:
                files.append((f, cat_id))
    return categories, files


def build_index(
    image_root: str | Path,
    seed: int = 0,
    block_rows: int = DEFAULT_BLOCK_ROWS,
    block_cols: int = DEFAULT_BLOCK_COLS,
    clusters: int = DEFAULT_CLUSTERS,
    workers: int = 1,
) -> FeatureIndex:
    """Index every decodable image under a category-per-subdirectory root.

    Undecodable files are skipped with a warning record; the result is
    deterministic for a fixed seed regardless of the worker count.
    """
    root = Path(image_root)
    categories, files = _list_image_tree(root)
    if not files:
        raise ValueError(f"no images found under {root}")

    warnings: list[str] = []
    entries: list[tuple[Path, int]] = []
    for path, cat in files:
        try:
            with Image.open(path) as img:
                img.verify()
            entries.append((path, cat))
        except (UnidentifiedImageError, OSError) as exc:
            msg = f"skipping undecodable file {path}: {exc}"
            warnings.append(msg)
            log.warning(msg)
    if not entries:
        raise ValueError(f"no decodable images under {root}")

    args = [
        (str(path.resolve()), image_id, seed, block_rows, block_cols, clusters)
        for image_id, (path, _) in enumerate(entries)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_extract_one_star, args, chunksize=8))
    else:
        results = [_extract_one_star(a) for a in args]

    images = [
        IndexedImage(
            image_id=image_id,
            category=cat,
            path=args[image_id][0],
            block_count=block_count,
            features=features,
            segments=segments,
            member_counts=member_counts,
        )
        for image_id, ((_, cat), (features, segments, member_counts, block_count)) in enumerate(
            zip(entries, results)
        )
    ]
    all_rows = np.concatenate(
        [np.stack([img.features for img in images])] + [img.segments for img in images]
    )
    index = FeatureIndex(
        images=images,
        category_names=categories,
        norm_min=all_rows.min(axis=0),
        norm_max=all_rows.max(axis=0),
        seed=seed,
        block_rows=block_rows,
        block_cols=block_cols,
        clusters=clusters,
        build_warnings=warnings,
    )
    return index


def _extract_one_star(args: tuple) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    path, image_id, seed, n1, n2, k = args
    return _extract_one(path, image_id, seed, n1, n2, k)


def manifest_path(path: str | Path) -> Path:
    return Path(str(path) + ".manifest.tsv")


def save_index(index: FeatureIndex, path: str | Path) -> None:
    """Write the binary index plus its category manifest sidecar."""
    buf = bytearray()
    buf += MAGIC
    buf += struct.pack(
        "<HIIQHHHHHHH",
        VERSION,
        len(index.images),
        len(index.category_names),
        index.seed,
        index.block_rows,
        index.block_cols,
        index.clusters,
        *index.levels,
        FEATURE_DIM,
    )
    buf += np.asarray(index.norm_min, dtype="<f8").tobytes()
    buf += np.asarray(index.norm_max, dtype="<f8").tobytes()
    for name in index.category_names:
        raw = name.encode("utf-8")
        buf += struct.pack("<H", len(raw)) + raw
    for img in index.images:
        raw = img.path.encode("utf-8")
        buf += struct.pack("<IIH", img.image_id, img.category, len(raw)) + raw
        buf += struct.pack("<I", img.block_count)
        buf += np.asarray(img.features, dtype="<f8").tobytes()
        buf += struct.pack("<H", len(img.segments))
        for count, seg in zip(img.member_counts, img.segments):
            buf += struct.pack("<I", int(count))
            buf += np.asarray(seg, dtype="<f8").tobytes()
    Path(path).write_bytes(bytes(buf))

    counts = np.bincount(
        [img.category for img in index.images], minlength=len(index.category_names)
    )
    lines = [
        f"{cat_id}\t{name}\t{counts[cat_id]}"
        for cat_id, name in enumerate(index.category_names)
    ]
    manifest_path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IndexCorruptError("index file is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64)

    def done(self) -> bool:
        return self.pos == len(self.data)


def load_index(path: str | Path) -> FeatureIndex:
    """Read an index file written by :func:`save_index`."""
    reader = _Reader(Path(path).read_bytes())
    if reader.take(4) != MAGIC:
        raise IndexFormatError(f"{path} is not a feature index (bad magic)")
    (version,) = reader.unpack("<H")
    if version != VERSION:
        raise IndexFormatError(f"unsupported index version {version}")
    n_images, n_categories, seed, n1, n2, k, lh, ls, lv, dim = reader.unpack(
        "<IIQHHHHHHH"
    )
    if dim != FEATURE_DIM:
        raise IndexCorruptError(f"unexpected feature dimension {dim}")
    norm_min = reader.floats(dim)
    norm_max = reader.floats(dim)
    categories = []
    for _ in range(n_categories):
        (length,) = reader.unpack("<H")
        categories.append(reader.take(length).decode("utf-8"))
    images = []
    for _ in range(n_images):
        image_id, category, path_len = reader.unpack("<IIH")
        img_path = reader.take(path_len).decode("utf-8")
        (block_count,) = reader.unpack("<I")
        features = reader.floats(dim)
        (n_segments,) = reader.unpack("<H")
        counts = np.empty(n_segments, dtype=np.int64)
        segments = np.empty((n_segments, dim), dtype=np.float64)
        for s in range(n_segments):
            (counts[s],) = reader.unpack("<I")
            segments[s] = reader.floats(dim)
        images.append(
            IndexedImage(
                image_id=int(image_id),
                category=int(category),
                path=img_path,
                block_count=int(block_count),
                features=features,
                segments=segments,
                member_counts=counts,
            )
        )
    if not reader.done():
        raise IndexCorruptError("trailing bytes after index payload")
    return FeatureIndex(
        images=images,
        category_names=categories,
        norm_min=norm_min,
        norm_max=norm_max,
        seed=int(seed),
        block_rows=int(n1),
        block_cols=int(n2),
        clusters=int(k),
        levels=(int(lh), int(ls), int(lv)),
    )
