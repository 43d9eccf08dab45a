"""One relevance-feedback session, iteration by iteration.

Runs a combination-initialized session against the category oracle and
plots the four metrics per iteration.  Precision and recall both rise
under the no-reshow protocol; retrieval efficiency climbs toward 100 as
the relevant set fills the scope, and false discovery mirrors precision.
"""
import pathlib
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from segsearch.engine import SessionConfig, run_session
from segsearch.evaluation import CategoryOracle, session_metrics
from segsearch.index_store import build_index
from segsearch.synthetic import generate_dataset

out = pathlib.Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

with tempfile.TemporaryDirectory() as tmp:
    generate_dataset(tmp, categories=6, per_category=20, size=128, seed=9)
    index = build_index(tmp, seed=9, workers=2)
    oracle = CategoryOracle.from_index(index)

    query = 0
    config = SessionConfig(scope=10)
    transcript = run_session(index, query, "ws-comb", config, oracle.feedback_source(query))
    rows = session_metrics(transcript, oracle.category_size(oracle.category(query)))

    print(f"session status: {transcript.status}, {len(transcript.pages)} pages")
    for record in transcript.pages:
        hits = sum(record.marks[i] for i in record.page.images)
        print(f"  iteration {record.page.iteration}: showed "
              f"{len(record.page.images)} images, {hits} relevant")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    iterations = [r["iteration"] for r in rows]
    for metric, style in (("re", "o-"), ("fd", "s--"), ("precision", "^-"), ("recall", "v:")):
        ax.plot(iterations, [r[metric] for r in rows], style, label=metric)
    ax.set_xlabel("iteration")
    ax.set_ylabel("percent")
    ax.set_title("feedback session metrics")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out / "04_session_metrics.png", dpi=110)
    print(f"wrote {out / '04_session_metrics.png'}")
