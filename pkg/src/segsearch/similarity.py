"""Weighted feature-space distances and the segment rank-sum distance.

Whole-image retrieval uses a weighted L1 or L2 distance between feature
vectors.  Segment-based retrieval greedily pairs query segments with
database-image segments by successive minimum extraction, then scores each
image by the sum of the database-wide ranks of its match distances; lower
rank sums mean more similar images.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .segmentation import SegmentSet

DEFAULT_MATCH_DEPTH = 4


@dataclass(frozen=True)
class GreedyMatchResult:
    """Distances and (query row, image column) pairs picked by greedy matching."""

    distances: np.ndarray  # (r,)
    pairs: list[tuple[int, int]]


def weighted_distance(
    a: np.ndarray, b: np.ndarray, w: np.ndarray, norm: str = "l2"
) -> float:
    """Weighted L1 or L2 distance between two equal-length vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if a.shape != b.shape or a.shape != w.shape:
        raise ValueError("vectors and weights must have identical shapes")
    if np.isnan(a).any() or np.isnan(b).any() or np.isnan(w).any():
        raise ValueError("NaN input")
    if norm == "l1":
        return float((w * np.abs(a - b)).sum())
    if norm == "l2":
        return float(np.sqrt((w * (a - b) ** 2).sum()))
    raise ValueError(f"unknown norm {norm!r}")


def weighted_sq_distances(a: np.ndarray, b: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Pairwise weighted squared L2 distances, shape (len(a), len(b)).

    Uses explicit differencing so identical rows give an exact zero.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    return ((a[:, None, :] - b[None, :, :]) ** 2 * w).sum(axis=-1)


def segment_distance_matrix(
    query_segments: np.ndarray, image_segments: np.ndarray, w: np.ndarray
) -> np.ndarray:
    """Weighted L2 distances between every query/image segment pair."""
    return np.sqrt(weighted_sq_distances(query_segments, image_segments, w))


def greedy_min_match(dmat: np.ndarray, r: int) -> GreedyMatchResult:
    """Extract r successive global minima with row/column deletion.

    Ties on the minimum are broken by smallest row index, then smallest
    column index.  Pairs are disjoint in both coordinates.
    """
    m = np.array(dmat, dtype=np.float64, copy=True)
    if m.ndim != 2:
        raise ValueError("expected a 2-D distance matrix")
    if np.isnan(m).any() or np.isinf(m).any():
        raise ValueError("distance matrix entries must be finite")
    if not 1 <= r <= min(m.shape):
        raise ValueError(f"r={r} outside [1, min(n_rows, n_cols)]")
    distances = np.empty(r, dtype=np.float64)
    pairs: list[tuple[int, int]] = []
    for i in range(r):
        flat = int(m.argmin())  # row-major scan implements the tie rule
        row, col = divmod(flat, m.shape[1])
        distances[i] = m[row, col]
        pairs.append((row, col))
        m[row, :] = np.inf
        m[:, col] = np.inf
    return GreedyMatchResult(distances=distances, pairs=pairs)


def match_depth(query: SegmentSet, database: Sequence[SegmentSet], r_max: int) -> int:
    """Effective match depth: r_max capped by the smallest segment count
    anywhere in the database or the query itself."""
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    q = min(min(len(s.segments) for s in database), len(query.segments))
    return min(r_max, q)


def segment_rank_distance(
    query: SegmentSet,
    database: Sequence[SegmentSet],
    w: np.ndarray,
    r_max: int = DEFAULT_MATCH_DEPTH,
) -> np.ndarray:
    """Rank-sum distance of the query to every database image.

    For each match depth i = 1..r, the i-th greedy match distances of all N
    images are ranked ascending (average ranks on ties); an image's score is
    the sum of its ranks over the r depths.  Lower is more similar.
    """
    if len(database) == 0:
        raise ValueError("empty database")
    r = match_depth(query, database, r_max)
    dist = np.empty((len(database), r), dtype=np.float64)
    for j, entry in enumerate(database):
        dmat = segment_distance_matrix(query.segments, entry.segments, w)
        dist[j] = greedy_min_match(dmat, r).distances
    ranks = rankdata(dist, method="average", axis=0)
    return ranks.sum(axis=1)
