"""Global-feature search vs segment rank-sum search, side by side.

Builds a small index, runs both one-shot retrievals for the same query,
and prints the two top-10 lists with category labels.  Proportion-skewed
images of the right palette tend to surface only in the segment-based
list: greedy matching pairs segments one-to-one, so region sizes stop
mattering.
"""
import pathlib
import tempfile

import numpy as np

from segsearch.engine import SessionConfig, initial_wos, initial_ws
from segsearch.index_store import build_index
from segsearch.synthetic import generate_dataset

with tempfile.TemporaryDirectory() as tmp:
    root = pathlib.Path(tmp)
    generate_dataset(root, categories=6, per_category=12, size=128, seed=33)
    index = build_index(root, seed=33, workers=2)

    query = 5
    config = SessionConfig(scope=10)
    wos = initial_wos(index.features_matrix[query], index, config)
    ws = initial_ws(index.segment_sets[query], index, config)

    category_of = {img.image_id: img.category for img in index.images}
    query_cat = category_of[query]
    print(f"query id {query} (category {query_cat})\n")
    print(f"{'rank':>4}  {'global features':<22}  {'segment matching':<22}")
    for rank, (a, b) in enumerate(zip(wos.images, ws.images), start=1):
        mark_a = "*" if category_of[a] == query_cat else " "
        mark_b = "*" if category_of[b] == query_cat else " "
        print(f"{rank:>4}  id {a:>3} cat {category_of[a]}{mark_a:<14}  "
              f"id {b:>3} cat {category_of[b]}{mark_b}")

    hits_wos = sum(category_of[i] == query_cat for i in wos.images)
    hits_ws = sum(category_of[i] == query_cat for i in ws.images)
    overlap = len(set(wos.images) & set(ws.images))
    print(f"\nsame-category hits: global {hits_wos}/10, segments {hits_ws}/10, "
          f"lists share {overlap} images")
