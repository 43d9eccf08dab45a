"""Query sessions: initial retrieval schemes and the iterative feedback loop.

A session starts with one of four initializations -- plain global-feature
retrieval, segment rank-sum retrieval combined with it by intersection or
union, or both lists shown back to back -- and then iterates relevance
feedback.  Images are never shown twice; each feedback step retrieves only
as many new images as the scope minus the number already marked relevant.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .feedback import (
    DEFAULT_EPS,
    SCHEME_DELTA_TIMES_RATIO,
    SCORE_CLUSTER_DENSITY,
    RfState,
    compute_stats,
    rank_candidates,
    reweight,
)
from .index_store import FeatureIndex
from .segmentation import SegmentSet
from .similarity import (
    DEFAULT_MATCH_DEPTH,
    segment_rank_distance,
    weighted_sq_distances,
)

SCHEME_WOS = "wos"
SCHEME_WS_INTER = "ws-inter"
SCHEME_WS_UNION = "ws-union"
SCHEME_WS_COMB = "ws-comb"
SCHEMES = (SCHEME_WOS, SCHEME_WS_INTER, SCHEME_WS_UNION, SCHEME_WS_COMB)

RANK_RW = "rw"
RANK_RW_IBCD = "rw-ibcd"
RANKINGS = (RANK_RW, RANK_RW_IBCD)

STATUS_AWAITING = "awaiting_feedback"
STATUS_CONVERGED = "converged"
STATUS_EXHAUSTED = "exhausted"

FeedbackSource = Callable[[Sequence[int]], dict[int, bool]]


@dataclass(frozen=True)
class SessionConfig:
    """Session-level knobs; the iteration budget counts the initial display
    (twice for the double-size union and combination displays)."""

    scope: int = 20
    r_max: int = DEFAULT_MATCH_DEPTH
    total_iterations: int = 7
    eps: float = DEFAULT_EPS
    seed: int = 0
    ranking: str = RANK_RW_IBCD

    def __post_init__(self):
        if self.scope < 1:
            raise ValueError("scope must be >= 1")
        if not 1 <= self.r_max <= 4:
            raise ValueError("r_max must be in [1, 4]")
        if self.total_iterations < 1:
            raise ValueError("total_iterations must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.ranking not in RANKINGS:
            raise ValueError(f"unknown ranking mode {self.ranking!r}")


@dataclass(frozen=True)
class RetrievalPage:
    """Images newly displayed at one step; never overlaps earlier pages."""

    iteration: int
    images: tuple[int, ...]
    carried_relevant: tuple[int, ...]
    spans: int = 1  # iteration slots this display consumes (2 for union)


@dataclass(frozen=True)
class PageRecord:
    page: RetrievalPage
    marks: dict[int, bool]
    relevant_after: frozenset[int]
    nonrelevant_after: frozenset[int]


@dataclass
class SessionTranscript:
    query_id: int
    scheme: str
    config: SessionConfig
    pages: list[PageRecord]
    weight_history: list[np.ndarray]
    status: str


def rank_by_global_distance(
    index: FeatureIndex, query_features: np.ndarray, weights: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """All image ids ordered by weighted distance to the query vector
    (uniform weights by default), ties broken by ascending id."""
    feats = index.features_matrix
    if weights is None:
        weights = np.full(feats.shape[1], 1.0 / feats.shape[1])
    dists = np.sqrt(
        weighted_sq_distances(query_features[None, :], feats, weights)
    ).ravel()
    order = np.lexsort((np.arange(len(feats)), dists))
    return order, dists[order]


def rank_by_segment_match(
    index: FeatureIndex, query_segments: SegmentSet, r_max: int = DEFAULT_MATCH_DEPTH
) -> tuple[np.ndarray, np.ndarray]:
    """All image ids ordered by segment rank-sum distance, ties by id."""
    feats = index.features_matrix
    weights = np.full(feats.shape[1], 1.0 / feats.shape[1])
    scores = segment_rank_distance(query_segments, index.segment_sets, weights, r_max)
    order = np.lexsort((np.arange(len(scores)), scores))
    return order, scores[order]


def initial_wos(
    query_features: np.ndarray, index: FeatureIndex, config: SessionConfig
) -> RetrievalPage:
    """First page of the plain global-feature scheme."""
    if len(index) == 0:
        raise ValueError("empty index")
    order, _ = rank_by_global_distance(index, query_features)
    return RetrievalPage(
        iteration=1,
        images=tuple(int(i) for i in order[: config.scope]),
        carried_relevant=(),
    )


def initial_ws(
    query_segments: SegmentSet, index: FeatureIndex, config: SessionConfig
) -> RetrievalPage:
    """First page of the segment-matching scheme."""
    if len(index) == 0:
        raise ValueError("empty index")
    order, _ = rank_by_segment_match(index, query_segments, config.r_max)
    return RetrievalPage(
        iteration=1,
        images=tuple(int(i) for i in order[: config.scope]),
        carried_relevant=(),
    )


def init_intersection(
    wos_page: RetrievalPage, ws_page: RetrievalPage, config: SessionConfig
) -> RetrievalPage:
    """Scope-sized blend: the common images first, then the best remaining
    of each list, the segment-based one getting the floor half."""
    wos, ws = list(wos_page.images), list(ws_page.images)
    common = set(wos) & set(ws)
    inter = [i for i in wos if i in common]
    c = len(inter)
    d1 = (config.scope - c) // 2
    d2 = config.scope - c - d1
    ws_extra = [i for i in ws if i not in common][:d1]
    wos_extra = [i for i in wos if i not in common][:d2]
    return RetrievalPage(
        iteration=1, images=tuple(inter + ws_extra + wos_extra), carried_relevant=()
    )


def init_union(wos_page: RetrievalPage, ws_page: RetrievalPage) -> RetrievalPage:
    """Set union, ordered by global-feature rank then unseen segment-based
    images in their own order; counts as two iteration slots."""
    seen = set(wos_page.images)
    merged = list(wos_page.images) + [i for i in ws_page.images if i not in seen]
    return RetrievalPage(iteration=1, images=tuple(merged), carried_relevant=(), spans=2)


class Session:
    """One interactive query session over an immutable index."""

    def __init__(
        self,
        index: FeatureIndex,
        query_id: int,
        scheme: str,
        config: SessionConfig | None = None,
    ):
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        if not 0 <= query_id < len(index):
            raise ValueError(f"query id {query_id} not in index")
        self.index = index
        self.scheme = scheme
        self.config = config or SessionConfig()
        feats = index.features_matrix
        self.state = RfState(
            query_id=query_id,
            query_features=feats[query_id],
            weights=np.full(feats.shape[1], 1.0 / feats.shape[1]),
        )
        self.status = "created"
        self._iterations_used = 0
        self._current_page: RetrievalPage | None = None
        self._pending_wos: list[int] | None = None  # second combination display
        self._comb_lists: tuple[list[int], list[int]] | None = None  # (ws, wos)
        # combination scheme: images whose marks never feed the reweighting
        # statistics (the initial list that attracted fewer relevant marks)
        self._stats_excluded: set[int] = set()
        self._marks: dict[int, bool] = {}
        self._records: list[PageRecord] = []
        self._weight_history: list[np.ndarray] = [self.state.weights.copy()]

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> RetrievalPage:
        if self.status != "created":
            raise RuntimeError("session already started")
        q = self.state.query_id
        if self.scheme == SCHEME_WOS:
            page = initial_wos(self.state.query_features, self.index, self.config)
        elif self.scheme == SCHEME_WS_INTER:
            wos = initial_wos(self.state.query_features, self.index, self.config)
            ws = initial_ws(self.index.segment_sets[q], self.index, self.config)
            page = init_intersection(wos, ws, self.config)
        elif self.scheme == SCHEME_WS_UNION:
            wos = initial_wos(self.state.query_features, self.index, self.config)
            ws = initial_ws(self.index.segment_sets[q], self.index, self.config)
            page = init_union(wos, ws)
        else:  # combination: segment page now, global page next
            wos = initial_wos(self.state.query_features, self.index, self.config)
            ws = initial_ws(self.index.segment_sets[q], self.index, self.config)
            page = replace(ws, iteration=1)
            self._pending_wos = list(wos.images)
            self._comb_lists = (list(ws.images), list(wos.images))
        return self._display(page)

    def submit(self, marks: dict[int, bool]) -> RetrievalPage | None:
        """Fold feedback for the current page; returns the next page, or
        None once the session has converged or exhausted its budget."""
        if self.status != STATUS_AWAITING:
            raise RuntimeError(f"session is not awaiting feedback ({self.status})")
        page = self._current_page
        assert page is not None
        self._fold_marks(page, marks)

        if self._pending_wos is not None:
            second = [i for i in self._pending_wos if i not in self.state.shown]
            self._pending_wos = None
            if second:
                return self._display(
                    RetrievalPage(
                        iteration=self._iterations_used + 1,
                        images=tuple(second),
                        carried_relevant=tuple(sorted(self.state.relevant)),
                    )
                )
            # both lists coincide: the slot is still consumed
            self._iterations_used += 1
            self._choose_comb_stats()
            return self._advance()
        if self._comb_lists is not None and len(self._records) == 2:
            self._choose_comb_stats()
        return self._advance()

    # -- internals ---------------------------------------------------------

    def _display(self, page: RetrievalPage) -> RetrievalPage:
        self.state.shown.extend(page.images)
        self._iterations_used += page.spans
        self._current_page = page
        self.status = STATUS_AWAITING
        return page

    def _fold_marks(self, page: RetrievalPage, marks: dict[int, bool]) -> None:
        if set(marks) != set(page.images):
            missing = set(page.images) - set(marks)
            extra = set(marks) - set(page.images)
            raise ValueError(
                f"marks must cover the current page exactly "
                f"(missing {sorted(missing)}, unknown {sorted(extra)})"
            )
        self._marks.update({int(k): bool(v) for k, v in marks.items()})
        for image_id, relevant in marks.items():
            if relevant:
                self.state.relevant.add(int(image_id))
            else:
                self.state.nonrelevant.add(int(image_id))
        # the query is relevant by definition, whatever the marks said
        if self.state.query_id in set(self.state.shown):
            self.state.relevant.add(self.state.query_id)
            self.state.nonrelevant.discard(self.state.query_id)
        self.state.iteration = self._iterations_used
        self._records.append(
            PageRecord(
                page=page,
                marks={int(k): bool(v) for k, v in marks.items()},
                relevant_after=frozenset(self.state.relevant),
                nonrelevant_after=frozenset(self.state.nonrelevant),
            )
        )

    def _choose_comb_stats(self) -> None:
        assert self._comb_lists is not None
        ws_ids, wos_ids = self._comb_lists
        rel_ws = sum(1 for i in ws_ids if self._marks.get(i) or i == self.state.query_id)
        rel_wos = sum(1 for i in wos_ids if self._marks.get(i) or i == self.state.query_id)
        chosen = set(ws_ids if rel_ws >= rel_wos else wos_ids)
        self._stats_excluded = set(self.state.shown) - chosen
        self._stats_excluded.discard(self.state.query_id)
        self._comb_lists = None

    def _advance(self) -> RetrievalPage | None:
        state = self.state
        if len(state.relevant) >= self.config.scope:
            self.status = STATUS_CONVERGED
            self._current_page = None
            return None
        if self._iterations_used >= self.config.total_iterations:
            self.status = STATUS_EXHAUSTED
            self._current_page = None
            return None

        stats_state = state
        if self._stats_excluded:
            rel = state.relevant - self._stats_excluded
            if not rel:
                rel = {state.query_id}
            stats_state = replace_sets(
                state, rel, state.nonrelevant - self._stats_excluded
            )
        stats = compute_stats(stats_state, self.index.features_matrix)
        state.weights = reweight(stats, SCHEME_DELTA_TIMES_RATIO, self.config.eps)
        self._weight_history.append(state.weights.copy())

        shown = set(state.shown)
        if self.config.ranking == RANK_RW_IBCD:
            ranked = rank_candidates(
                state, self.index.features_matrix, shown, SCORE_CLUSTER_DENSITY
            )
            ordered = [i for i, _ in ranked]
        else:
            ordered = self._rank_by_query_distance(shown)
        want = self.config.scope - len(state.relevant)
        images = ordered[:want]
        if not images:
            self.status = STATUS_EXHAUSTED
            self._current_page = None
            return None
        return self._display(
            RetrievalPage(
                iteration=self._iterations_used + 1,
                images=tuple(images),
                carried_relevant=tuple(sorted(state.relevant)),
            )
        )

    def _rank_by_query_distance(self, exclude: set[int]) -> list[int]:
        feats = self.index.features_matrix
        ids = np.array([i for i in range(len(feats)) if i not in exclude])
        if len(ids) == 0:
            return []
        dists = np.sqrt(
            weighted_sq_distances(
                self.state.query_features[None, :], feats[ids], self.state.weights
            )
        ).ravel()
        order = np.lexsort((ids, dists))
        return [int(ids[i]) for i in order]

    # -- results -----------------------------------------------------------

    @property
    def current_page(self) -> RetrievalPage | None:
        return self._current_page

    @property
    def iterations_used(self) -> int:
        return self._iterations_used

    def transcript(self) -> SessionTranscript:
        return SessionTranscript(
            query_id=self.state.query_id,
            scheme=self.scheme,
            config=self.config,
            pages=list(self._records),
            weight_history=list(self._weight_history),
            status=self.status,
        )


def replace_sets(state: RfState, relevant: set[int], nonrelevant: set[int]) -> RfState:
    """Copy of a feedback state with substituted relevant/non-relevant sets
    (used when statistics come from a designated subset of the feedback)."""
    return RfState(
        query_id=state.query_id,
        query_features=state.query_features,
        weights=state.weights,
        relevant=set(relevant),
        nonrelevant=set(nonrelevant),
        shown=list(state.shown),
        iteration=state.iteration,
    )


def run_session(
    index: FeatureIndex,
    query_id: int,
    scheme: str,
    config: SessionConfig,
    feedback_source: FeedbackSource,
) -> SessionTranscript:
    """Drive a full session with a feedback callback; returns the transcript."""
    session = Session(index, query_id, scheme, config)
    page = session.start()
    while page is not None:
        marks = feedback_source(page.images)
        page = session.submit(marks)
    return session.transcript()
