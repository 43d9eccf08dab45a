"""Desk-scale benchmark: match depth, reweighting modes, init schemes.

A shrunken version of the acceptance benchmark (6 categories x 20 images
at 128x128) showing the three headline comparisons:

  1. first-pass efficiency of segment matching grows with match depth;
  2. the combined instance-based scoring beats plain query-anchored
     reweighting after the full feedback budget;
  3. segment-seeded initializations compare favorably with the plain
     start, with the union's extra display paying in false discovery.
"""
import tempfile

from segsearch.engine import SCHEMES, SessionConfig
from segsearch.evaluation import (
    CategoryOracle,
    render_summary,
    run_experiment,
    stratified_sample,
    ws_efficiency_by_depth,
)
from segsearch.index_store import build_index
from segsearch.synthetic import generate_dataset

with tempfile.TemporaryDirectory() as tmp:
    generate_dataset(tmp, categories=6, per_category=20, size=128, seed=14)
    index = build_index(tmp, seed=14, workers=2)
    oracle = CategoryOracle.from_index(index)
    queries = stratified_sample(index, 60, seed=2)
    scope = 10

    sweep = ws_efficiency_by_depth(index, oracle, queries, scope)
    print("first-pass efficiency by match depth:")
    print("  " + "  ".join(f"r={r}: {sweep[r]:.1f}" for r in sorted(sweep)))

    print("\nreweighting after the full budget (plain vs with cluster density):")
    for ranking in ("rw", "rw-ibcd"):
        report = run_experiment(
            index, oracle, SessionConfig(scope=scope, ranking=ranking), ["wos"], queries
        )
        print(f"  {ranking:8s} RE {report.mean('wos', 7, 're'):6.2f}  "
              f"FD {report.mean('wos', 7, 'fd'):6.2f}")

    print("\ninitialization schemes:")
    report = run_experiment(
        index, oracle, SessionConfig(scope=scope), list(SCHEMES), queries
    )
    print(render_summary(report))
