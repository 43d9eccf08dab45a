"""Block splitting and k-means segmentation of block features.

Images are cut into fixed-size pixel blocks, each block is described by the
same 25-dimensional co-occurrence descriptor used for whole images, and the
blocks are clustered with k-means.  The surviving cluster centroids act as
the image's segment descriptors; segments may be spatially scattered.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .color_features import (
    HUE_LEVELS,
    SAT_LEVELS,
    VAL_LEVELS,
    HsvImage,
    quantize_hsv,
)

DEFAULT_BLOCK_ROWS = 4
DEFAULT_BLOCK_COLS = 4
DEFAULT_CLUSTERS = 8
MAX_KMEANS_ITER = 100


@dataclass(frozen=True)
class Block:
    """One image block: grid position plus its 25-d feature vector."""

    row: int
    col: int
    features: np.ndarray


@dataclass(frozen=True)
class SegmentSet:
    """Per-image segment descriptors: one centroid row per non-empty cluster."""

    image_id: int
    segments: np.ndarray  # (n_segments, 25)
    member_counts: np.ndarray  # (n_segments,)

    def __post_init__(self):
        if len(self.segments) == 0:
            raise ValueError("a segment set needs at least one segment")
        if len(self.segments) != len(self.member_counts):
            raise ValueError("segments and member_counts disagree")


def _offdiag_weights(levels: int) -> np.ndarray:
    """Strict-upper-triangle weights (i + j), 1-based, on a flat L*L grid."""
    i, j = np.meshgrid(np.arange(levels), np.arange(levels), indexing="ij")
    w = np.where(j > i, i + j + 2, 0)
    return w.ravel().astype(np.float64)


def _block_plane_features(cells: np.ndarray, levels: int, n1: int, n2: int) -> np.ndarray:
    """Per-block [diag proportions..., off-diagonal summary] of one plane.

    Works on the cropped plane only: trailing rows/columns beyond the last
    whole block are ignored.  Returns an array of shape (blocks, levels + 1).
    """
    rows = cells.shape[0] // n1
    cols = cells.shape[1] // n2
    tiles = (
        cells[: rows * n1, : cols * n2]
        .reshape(rows, n1, cols, n2)
        .transpose(0, 2, 1, 3)
        .reshape(rows * cols, n1, n2)
    )
    b = tiles.shape[0]
    ah = tiles[:, :, :-1].reshape(b, -1)
    bh = tiles[:, :, 1:].reshape(b, -1)
    av = tiles[:, :-1, :].reshape(b, -1)
    bv = tiles[:, 1:, :].reshape(b, -1)
    pa = np.concatenate([ah, av], axis=1)
    pb = np.concatenate([bh, bv], axis=1)
    codes = np.minimum(pa, pb) * levels + np.maximum(pa, pb)
    offsets = np.arange(b, dtype=np.int64)[:, None] * (levels * levels)
    counts = np.bincount((codes + offsets).ravel(), minlength=b * levels * levels)
    total = n1 * (n2 - 1) + n2 * (n1 - 1)
    p = counts.reshape(b, levels * levels) / total
    diag_idx = np.arange(levels) * levels + np.arange(levels)
    summary = p @ _offdiag_weights(levels)
    return np.concatenate([p[:, diag_idx], summary[:, None]], axis=1)


def block_feature_matrix(
    image: HsvImage,
    n1: int = DEFAULT_BLOCK_ROWS,
    n2: int = DEFAULT_BLOCK_COLS,
) -> np.ndarray:
    """Feature vectors of every whole n1 x n2 block, row-major, shape (b, 25)."""
    if image.height < n1 or image.width < n2:
        raise ValueError(
            f"image {image.height}x{image.width} smaller than one {n1}x{n2} block"
        )
    qh, qs, qv = quantize_hsv(image)
    return np.concatenate(
        [
            _block_plane_features(qh, HUE_LEVELS, n1, n2),
            _block_plane_features(qs, SAT_LEVELS, n1, n2),
            _block_plane_features(qv, VAL_LEVELS, n1, n2),
        ],
        axis=1,
    )


def split_blocks(
    image: HsvImage,
    n1: int = DEFAULT_BLOCK_ROWS,
    n2: int = DEFAULT_BLOCK_COLS,
) -> list[Block]:
    """Split an image into n1 x n2 blocks with per-block features.

    Trailing pixels beyond the largest block multiple are dropped.
    """
    feats = block_feature_matrix(image, n1, n2)
    cols = image.width // n2
    return [
        Block(row=i // cols, col=i % cols, features=feats[i])
        for i in range(feats.shape[0])
    ]


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding; stops early once every remaining point coincides
    with a chosen center, so duplicates never produce duplicate centers."""
    n = x.shape[0]
    first = int(rng.integers(n))
    centers = [x[first]]
    d2 = ((x - x[first]) ** 2).sum(axis=1)
    while len(centers) < min(k, n):
        total = d2.sum()
        if total <= 0.0:
            break
        idx = int(rng.choice(n, p=d2 / total))
        centers.append(x[idx])
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return np.stack(centers)


def _squared_distances(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        (x**2).sum(axis=1)[:, None]
        - 2.0 * x @ centers.T
        + (centers**2).sum(axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _lloyd(
    x: np.ndarray, centers: np.ndarray, max_iter: int = MAX_KMEANS_ITER
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Lloyd iterations; returns (centers, assignment, objective history).

    Clusters that empty out keep their previous center so the objective
    stays monotone; they are discarded by the caller if still empty at the
    end.
    """
    assign = None
    history: list[float] = []
    for _ in range(max_iter):
        new_assign = _squared_distances(x, centers).argmin(axis=1)
        history.append(float(((x - centers[new_assign]) ** 2).sum()))
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(centers.shape[0]):
            members = x[assign == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    return centers, assign, history


def kmeans_segment(
    blocks: list[Block] | np.ndarray,
    k: int = DEFAULT_CLUSTERS,
    seed: int = 0,
    image_id: int = -1,
) -> SegmentSet:
    """Cluster block features into at most k segments.

    Deterministic for a fixed seed.  Empty clusters are discarded; each
    surviving segment's descriptor is the mean of its member block features.
    """
    if isinstance(blocks, np.ndarray):
        x = np.asarray(blocks, dtype=np.float64)
    else:
        x = np.stack([b.features for b in blocks]).astype(np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("need at least one block")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(x, k, rng)
    _, assign, _ = _lloyd(x, centers)
    labels, counts = np.unique(assign, return_counts=True)
    segments = np.stack([x[assign == c].mean(axis=0) for c in labels])
    return SegmentSet(
        image_id=image_id,
        segments=segments,
        member_counts=counts.astype(np.int64),
    )


def segment_image(
    image: HsvImage,
    image_id: int = -1,
    n1: int = DEFAULT_BLOCK_ROWS,
    n2: int = DEFAULT_BLOCK_COLS,
    k: int = DEFAULT_CLUSTERS,
    seed: int = 0,
) -> SegmentSet:
    """Block-split then cluster in one call."""
    feats = block_feature_matrix(image, n1, n2)
    return kmeans_segment(feats, k=k, seed=seed, image_id=image_id)
