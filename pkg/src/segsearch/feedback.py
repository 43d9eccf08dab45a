"""Relevance-feedback mathematics.

Covers the per-feature statistics over the relevant/non-relevant sets, the
three weight-update formulas, the instance-based distances to those sets,
and the combined relevance score used to re-rank candidates between
feedback iterations.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .similarity import weighted_sq_distances

DEFAULT_EPS = 1e-6

SCHEME_SIGMA_RATIO = "sigma-ratio"
SCHEME_DELTA_OVER_SIGMA = "delta-over-sigma"
SCHEME_DELTA_TIMES_RATIO = "delta-times-sigma-ratio"
REWEIGHT_SCHEMES = (
    SCHEME_SIGMA_RATIO,
    SCHEME_DELTA_OVER_SIGMA,
    SCHEME_DELTA_TIMES_RATIO,
)

SCORE_BASIC = "basic"
SCORE_CLUSTER_DENSITY = "cluster-density"
SCORE_MODES = (SCORE_BASIC, SCORE_CLUSTER_DENSITY)


@dataclass
class RfState:
    """One query session's feedback state.

    ``relevant`` and ``nonrelevant`` are disjoint id sets drawn from
    ``shown``; ``weights`` is the current per-feature weight vector.
    """

    query_id: int
    query_features: np.ndarray
    weights: np.ndarray
    relevant: set[int] = field(default_factory=set)
    nonrelevant: set[int] = field(default_factory=set)
    shown: list[int] = field(default_factory=list)
    iteration: int = 0

    def validate(self) -> None:
        if self.relevant & self.nonrelevant:
            raise ValueError("relevant and nonrelevant sets overlap")
        shown = set(self.shown)
        if not (self.relevant | self.nonrelevant) <= shown:
            raise ValueError("feedback sets contain images never shown")
        w = np.asarray(self.weights, dtype=np.float64)
        if (w < 0).any() or not np.isfinite(w).all() or not (w > 0).any():
            raise ValueError("weights must be finite, non-negative, not all zero")


@dataclass(frozen=True)
class FeatureStats:
    """Per-feature statistics of the current feedback sets."""

    sigma_all: np.ndarray  # std over relevant + nonrelevant
    sigma_rel: np.ndarray  # std over relevant only
    dominant_min: np.ndarray  # per-feature min over relevant
    dominant_max: np.ndarray  # per-feature max over relevant
    delta: np.ndarray  # discriminant ratio in [0, 1]


def compute_stats(state: RfState, features: np.ndarray) -> FeatureStats:
    """Population statistics of the feedback sets over an id-indexed matrix.

    The discriminant ratio of a feature is 1 minus the fraction of
    non-relevant images whose value falls inside the relevant set's
    [min, max] range, endpoints included; it is 1 when the non-relevant set
    is empty.
    """
    if not state.relevant:
        raise ValueError("relevant set is empty (the query always belongs to it)")
    rel = features[sorted(state.relevant)]
    both = features[sorted(state.relevant | state.nonrelevant)]
    sigma_all = both.std(axis=0)
    sigma_rel = rel.std(axis=0)
    dom_min = rel.min(axis=0)
    dom_max = rel.max(axis=0)
    if state.nonrelevant:
        non = features[sorted(state.nonrelevant)]
        inside = ((non >= dom_min) & (non <= dom_max)).sum(axis=0)
        delta = 1.0 - inside / len(non)
    else:
        delta = np.ones(features.shape[1])
    return FeatureStats(
        sigma_all=sigma_all,
        sigma_rel=sigma_rel,
        dominant_min=dom_min,
        dominant_max=dom_max,
        delta=delta,
    )


def reweight(
    stats: FeatureStats, scheme: str = SCHEME_DELTA_TIMES_RATIO, eps: float = DEFAULT_EPS
) -> np.ndarray:
    """New feature weights from the chosen update formula.

    A zero relevant-set deviation in the denominator is replaced by eps.
    Under the plain deviation-ratio scheme, features with zero deviation in
    both sets carry no information and get weight 1.  A degenerate all-zero
    result falls back to uniform weights so downstream ranking stays
    well-defined.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    denom = np.where(stats.sigma_rel == 0.0, eps, stats.sigma_rel)
    if scheme == SCHEME_SIGMA_RATIO:
        w = stats.sigma_all / denom
        w = np.where((stats.sigma_all == 0.0) & (stats.sigma_rel == 0.0), 1.0, w)
    elif scheme == SCHEME_DELTA_OVER_SIGMA:
        w = stats.delta / denom
    elif scheme == SCHEME_DELTA_TIMES_RATIO:
        w = stats.delta * stats.sigma_all / denom
    else:
        raise ValueError(f"unknown reweighting scheme {scheme!r}")
    if not (w > 0).any():
        return np.full(w.shape, 1.0 / w.shape[0])
    return w


def _ref_distances(
    candidates: np.ndarray, refs: np.ndarray, w: np.ndarray
) -> np.ndarray:
    return np.sqrt(weighted_sq_distances(candidates, refs, w))


def dist_to_relevant(
    candidate: np.ndarray, state: RfState, features: np.ndarray
) -> float:
    """Minimum weighted distance to the query plus the relevant images."""
    return float(batch_dist_to_relevant(np.atleast_2d(candidate), state, features)[0])


def dist_to_nonrelevant(
    candidate: np.ndarray, state: RfState, features: np.ndarray
) -> float:
    """Minimum weighted distance to the non-relevant images; 1 when none."""
    return float(
        batch_dist_to_nonrelevant(np.atleast_2d(candidate), state, features)[0]
    )


def mean_relevant_distance(
    candidate: np.ndarray, state: RfState, features: np.ndarray
) -> float:
    """Mean weighted distance over the relevant images; 0 when none."""
    return float(
        batch_mean_relevant_distance(np.atleast_2d(candidate), state, features)[0]
    )


def batch_dist_to_relevant(
    candidates: np.ndarray, state: RfState, features: np.ndarray
) -> np.ndarray:
    refs = [np.atleast_2d(state.query_features)]
    if state.relevant:
        refs.append(features[sorted(state.relevant)])
    return _ref_distances(candidates, np.concatenate(refs), state.weights).min(axis=1)


def batch_dist_to_nonrelevant(
    candidates: np.ndarray, state: RfState, features: np.ndarray
) -> np.ndarray:
    if not state.nonrelevant:
        return np.ones(len(np.atleast_2d(candidates)))
    refs = features[sorted(state.nonrelevant)]
    return _ref_distances(candidates, refs, state.weights).min(axis=1)


def batch_mean_relevant_distance(
    candidates: np.ndarray, state: RfState, features: np.ndarray
) -> np.ndarray:
    if not state.relevant:
        return np.zeros(len(np.atleast_2d(candidates)))
    refs = features[sorted(state.relevant)]
    return _ref_distances(candidates, refs, state.weights).mean(axis=1)


def score_candidates(
    candidates: np.ndarray,
    state: RfState,
    features: np.ndarray,
    mode: str = SCORE_CLUSTER_DENSITY,
) -> np.ndarray:
    """Relevance scores in [0, 1] for a matrix of candidate vectors.

    The basic score is 1 / (1 + d_rel / d_non); the cluster-density score
    additionally multiplies d_rel by the mean distance to the relevant set,
    rewarding candidates near the bulk of that set rather than near a
    single outlying member.  A candidate coinciding with a non-relevant
    image (d_non == 0) scores 0.
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    d_rel = batch_dist_to_relevant(candidates, state, features)
    d_non = batch_dist_to_nonrelevant(candidates, state, features)
    if mode == SCORE_BASIC:
        numer = d_rel
    elif mode == SCORE_CLUSTER_DENSITY:
        numer = batch_mean_relevant_distance(candidates, state, features) * d_rel
    else:
        raise ValueError(f"unknown score mode {mode!r}")
    safe = np.where(d_non == 0.0, 1.0, d_non)
    scores = 1.0 / (1.0 + numer / safe)
    return np.where(d_non == 0.0, 0.0, scores)


def relevance_score(
    candidate: np.ndarray,
    state: RfState,
    features: np.ndarray,
    mode: str = SCORE_CLUSTER_DENSITY,
) -> float:
    """Relevance score of a single candidate vector."""
    return float(score_candidates(np.atleast_2d(candidate), state, features, mode)[0])


def rank_candidates(
    state: RfState,
    features: np.ndarray,
    exclude: set[int],
    mode: str = SCORE_CLUSTER_DENSITY,
) -> list[tuple[int, float]]:
    """Score every image id not excluded, best first.

    Returns (image id, score) pairs ordered by descending score, ties
    broken by ascending id.
    """
    ids = np.array([i for i in range(len(features)) if i not in exclude])
    if len(ids) == 0:
        return []
    scores = score_candidates(features[ids], state, features, mode)
    order = np.lexsort((ids, -scores))
    return [(int(ids[i]), float(scores[i])) for i in order]
