"""Category-oracle feedback, retrieval metrics, and batch experiments.

Ground truth is category membership: an image is relevant to a query from
the same category.  Sessions are scored per iteration with cumulative
precision, recall, retrieval efficiency (relevant found over scope) and
false discovery (the exact complement of precision).  The experiment
runner replays many oracle-driven sessions and aggregates per-scheme,
per-iteration means.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .engine import (
    RetrievalPage,
    SessionConfig,
    SessionTranscript,
    rank_by_global_distance,
    run_session,
)
from .index_store import FeatureIndex
from .similarity import greedy_min_match, match_depth, segment_distance_matrix

METRIC_FIELDS = ("iteration", "shown", "relevant", "precision", "recall", "re", "fd")


@dataclass(frozen=True)
class CategoryOracle:
    """Total mapping of image id to category id."""

    labels: np.ndarray

    @classmethod
    def from_index(cls, index: FeatureIndex) -> "CategoryOracle":
        return cls(labels=index.categories.copy())

    def category(self, image_id: int) -> int:
        if not 0 <= image_id < len(self.labels):
            raise KeyError(f"image id {image_id} has no label")
        return int(self.labels[image_id])

    def category_size(self, category: int) -> int:
        return int((self.labels == category).sum())

    def marks(self, image_ids: Sequence[int], query_category: int) -> dict[int, bool]:
        return {int(i): self.category(i) == query_category for i in image_ids}

    def feedback_source(self, query_id: int):
        cat = self.category(query_id)
        return lambda image_ids: self.marks(image_ids, cat)


def oracle_feedback(
    page: RetrievalPage, oracle: CategoryOracle, query_category: int
) -> dict[int, bool]:
    """Relevant iff the image's category equals the query's."""
    return oracle.marks(page.images, query_category)


def session_metrics(
    transcript: SessionTranscript, category_size: int
) -> list[dict[str, float | int]]:
    """Per-iteration cumulative metrics of one finished session.

    A display spanning two iteration slots yields two identical rows; after
    the session terminates early the last row is carried forward, so every
    session reports exactly ``config.total_iterations`` rows.
    """
    scope = transcript.config.scope
    rows: list[dict[str, float | int]] = []
    shown = 0
    relevant = 0
    for record in transcript.pages:
        shown += len(record.page.images)
        relevant += sum(1 for i in record.page.images if record.marks[i])
        precision = 100.0 * relevant / shown
        row = {
            "shown": shown,
            "relevant": relevant,
            "precision": precision,
            "recall": 100.0 * relevant / category_size,
            "re": min(100.0, 100.0 * relevant / scope),
            "fd": 100.0 - precision,
        }
        for _ in range(record.page.spans):
            rows.append(dict(row))
    while len(rows) < transcript.config.total_iterations:
        rows.append(dict(rows[-1]))
    for t, row in enumerate(rows, start=1):
        row["iteration"] = t
    return rows[: transcript.config.total_iterations]


@dataclass
class EvalReport:
    """Per-session records plus aggregated means."""

    records: list[dict]
    schemes: list[str]
    query_count: int
    config: SessionConfig

    def mean(self, scheme: str, iteration: int, metric: str) -> float:
        vals = [
            r[metric]
            for r in self.records
            if r["scheme"] == scheme and r["iteration"] == iteration
        ]
        if not vals:
            raise ValueError(f"no records for {scheme} at iteration {iteration}")
        return float(np.mean(vals))

    def summary_rows(self) -> list[dict]:
        rows = []
        for scheme in self.schemes:
            for t in range(1, self.config.total_iterations + 1):
                rows.append(
                    {
                        "scheme": scheme,
                        "iteration": t,
                        **{
                            m: self.mean(scheme, t, m)
                            for m in ("precision", "recall", "re", "fd")
                        },
                    }
                )
        return rows


def run_experiment(
    index: FeatureIndex,
    oracle: CategoryOracle,
    config: SessionConfig,
    schemes: Sequence[str],
    queries: Sequence[int],
) -> EvalReport:
    """Replay oracle-driven sessions for every (query, scheme) pair."""
    if not schemes:
        raise ValueError("no schemes requested")
    if not queries:
        raise ValueError("no queries requested")
    records = []
    for query_id in queries:
        category = oracle.category(query_id)
        size = oracle.category_size(category)
        for scheme in schemes:
            transcript = run_session(
                index, query_id, scheme, config, oracle.feedback_source(query_id)
            )
            for row in session_metrics(transcript, size):
                records.append(
                    {
                        "query_id": int(query_id),
                        "category": category,
                        "scheme": scheme,
                        **row,
                    }
                )
    return EvalReport(
        records=records,
        schemes=list(schemes),
        query_count=len(queries),
        config=config,
    )


def ws_efficiency_by_depth(
    index: FeatureIndex,
    oracle: CategoryOracle,
    queries: Sequence[int],
    scope: int,
    depths: Sequence[int] = (1, 2, 3, 4),
) -> dict[int, float]:
    """Mean first-pass retrieval efficiency of segment matching per depth.

    The greedy match distances are computed once at the largest feasible
    depth; shallower scores reuse rank prefixes of the same distances.
    """
    segment_sets = index.segment_sets
    weights = np.full(index.features_matrix.shape[1], 1.0 / index.features_matrix.shape[1])
    max_depth = max(depths)
    totals = {r: 0.0 for r in depths}
    for query_id in queries:
        query = segment_sets[query_id]
        depth = min(match_depth(query, segment_sets, max_depth), max_depth)
        dist = np.empty((len(segment_sets), depth))
        for j, entry in enumerate(segment_sets):
            dmat = segment_distance_matrix(query.segments, entry.segments, weights)
            dist[j] = greedy_min_match(dmat, depth).distances
        ranks = rankdata(dist, method="average", axis=0)
        category = oracle.category(query_id)
        ids = np.arange(len(segment_sets))
        for r in depths:
            scores = ranks[:, : min(r, depth)].sum(axis=1)
            top = ids[np.lexsort((ids, scores))][:scope]
            hits = sum(1 for i in top if oracle.category(int(i)) == category)
            totals[r] += min(100.0, 100.0 * hits / scope)
    return {r: totals[r] / len(queries) for r in depths}


def wos_first_page_efficiency(
    index: FeatureIndex, oracle: CategoryOracle, queries: Sequence[int], scope: int
) -> float:
    """Mean first-pass retrieval efficiency of plain global retrieval."""
    total = 0.0
    for query_id in queries:
        order, _ = rank_by_global_distance(index, index.features_matrix[query_id])
        category = oracle.category(query_id)
        hits = sum(1 for i in order[:scope] if oracle.category(int(i)) == category)
        total += min(100.0, 100.0 * hits / scope)
    return total / len(queries)


def stratified_sample(index: FeatureIndex, k: int, seed: int) -> list[int]:
    """Seeded sample of k query ids, spread across categories round-robin."""
    rng = np.random.default_rng(seed)
    by_category: dict[int, list[int]] = {}
    for img in index.images:
        by_category.setdefault(img.category, []).append(img.image_id)
    pools = [list(rng.permutation(ids)) for _, ids in sorted(by_category.items())]
    picked: list[int] = []
    round_idx = 0
    while len(picked) < min(k, len(index)):
        pool = pools[round_idx % len(pools)]
        if pool:
            picked.append(int(pool.pop()))
        round_idx += 1
    return picked


def write_records_jsonl(records: Iterable[dict], path: str | Path) -> None:
    """One JSON record per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def render_summary(report: EvalReport) -> str:
    """Human-readable tables: efficiency per iteration, then final metrics."""
    out = []
    schemes = report.schemes
    header = "iter  " + "".join(f"{s:>12}" for s in schemes)
    out.append("Retrieval Efficiency (%) by iteration")
    out.append(header)
    for t in range(1, report.config.total_iterations + 1):
        cells = "".join(f"{report.mean(s, t, 're'):>12.2f}" for s in schemes)
        out.append(f"{t:>4}  {cells}")
    out.append("")
    out.append(f"Final iteration ({report.config.total_iterations}) metrics (%)")
    out.append("metric" + "".join(f"{s:>12}" for s in schemes))
    last = report.config.total_iterations
    for metric, label in (
        ("re", "RE"),
        ("fd", "FD"),
        ("precision", "P"),
        ("recall", "R"),
    ):
        cells = "".join(f"{report.mean(s, last, metric):>12.2f}" for s in schemes)
        out.append(f"{label:<6}{cells}")
    return "\n".join(out)
