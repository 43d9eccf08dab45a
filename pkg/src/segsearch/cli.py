"""Command-line entry points: index, query, eval, serve.

Machine-readable results go to stdout, diagnostics to stderr.  Exit codes:
0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .color_features import HsvImage, extract_features
from .engine import (
    RANKINGS,
    SCHEMES,
    SessionConfig,
    rank_by_global_distance,
    rank_by_segment_match,
)
from .evaluation import (
    CategoryOracle,
    render_summary,
    run_experiment,
    stratified_sample,
    write_records_jsonl,
)
from .index_store import build_index, load_index, save_index
from .segmentation import segment_image

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segsearch",
        description="Color co-occurrence CBIR with segment matching and relevance feedback",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build a feature index from an image tree")
    p_index.add_argument("root", help="directory with one subdirectory per category")
    p_index.add_argument("--out", required=True, help="index file to write")
    p_index.add_argument("--seed", type=int, default=0)
    p_index.add_argument("--block-rows", type=int, default=4)
    p_index.add_argument("--block-cols", type=int, default=4)
    p_index.add_argument("--clusters", type=int, default=8)
    p_index.add_argument("--workers", type=int, default=1)

    p_query = sub.add_parser("query", help="one-shot retrieval, no feedback")
    p_query.add_argument("--index", required=True)
    group = p_query.add_mutually_exclusive_group(required=True)
    group.add_argument("--id", type=int, help="query by indexed image id")
    group.add_argument("--image", help="query by image file")
    p_query.add_argument("--scheme", choices=["wos", "ws"], default="wos")
    p_query.add_argument("--scope", type=int, default=20)
    p_query.add_argument("--rmax", type=int, default=4)

    p_eval = sub.add_parser("eval", help="batch oracle-driven evaluation")
    p_eval.add_argument("--index", required=True)
    p_eval.add_argument(
        "--scheme",
        action="append",
        choices=list(SCHEMES),
        help="repeatable; defaults to all four schemes",
    )
    p_eval.add_argument("--reweight", choices=list(RANKINGS), default="rw-ibcd")
    p_eval.add_argument("--scope", type=int, default=20)
    p_eval.add_argument("--rmax", type=int, default=4)
    p_eval.add_argument("--iterations", type=int, default=7)
    p_eval.add_argument("--eps", type=float, default=1e-6)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--queries", default="all", help="'all' or 'sample:K'")
    p_eval.add_argument("--out", help="directory for records.jsonl and summary.txt")

    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("--index", required=True)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)

    return parser


def _cmd_index(args: argparse.Namespace) -> int:
    index = build_index(
        args.root,
        seed=args.seed,
        block_rows=args.block_rows,
        block_cols=args.block_cols,
        clusters=args.clusters,
        workers=args.workers,
    )
    for warning in index.build_warnings:
        print(warning, file=sys.stderr)
    save_index(index, args.out)
    print(f"indexed {len(index)} images in {len(index.category_names)} categories")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_query(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    if args.id is not None:
        if not 0 <= args.id < len(index):
            raise ValueError(f"image id {args.id} not in index (size {len(index)})")
        query_vec = index.features_matrix[args.id]
        query_segments = index.segment_sets[args.id]
    else:
        from PIL import Image

        with Image.open(args.image) as img:
            rgb = np.asarray(img.convert("RGB"))
        hsv = HsvImage.from_rgb(rgb)
        query_vec = index.normalize(extract_features(hsv))
        raw = segment_image(
            hsv,
            n1=index.block_rows,
            n2=index.block_cols,
            k=index.clusters,
            seed=index.seed,
        )
        query_segments = type(raw)(
            image_id=raw.image_id,
            segments=index.normalize(raw.segments),
            member_counts=raw.member_counts,
        )
    if args.scheme == "wos":
        order, scores = rank_by_global_distance(index, query_vec)
    else:
        order, scores = rank_by_segment_match(index, query_segments, args.rmax)
    for rank, (image_id, score) in enumerate(
        zip(order[: args.scope], scores[: args.scope]), start=1
    ):
        path = index.images[int(image_id)].path
        print(f"{rank}\t{int(image_id)}\t{path}\t{score:.6g}")
    return EXIT_OK


def _parse_queries(spec: str, index, seed: int) -> list[int]:
    if spec == "all":
        return [img.image_id for img in index.images]
    if spec.startswith("sample:"):
        k = int(spec.split(":", 1)[1])
        if k < 1:
            raise ValueError("sample size must be >= 1")
        return stratified_sample(index, k, seed)
    raise ValueError(f"bad --queries value {spec!r} (use 'all' or 'sample:K')")


def _cmd_eval(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    schemes = args.scheme or list(SCHEMES)
    config = SessionConfig(
        scope=args.scope,
        r_max=args.rmax,
        total_iterations=args.iterations,
        eps=args.eps,
        seed=args.seed,
        ranking=args.reweight,
    )
    oracle = CategoryOracle.from_index(index)
    queries = _parse_queries(args.queries, index, args.seed)
    report = run_experiment(index, oracle, config, schemes, queries)
    summary = render_summary(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_records_jsonl(report.records, out / "records.jsonl")
        (out / "summary.txt").write_text(summary + "\n", encoding="utf-8")
        print(f"wrote {out / 'records.jsonl'}", file=sys.stderr)
    print(summary)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(load_index(args.index))
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "index": _cmd_index,
        "query": _cmd_query,
        "eval": _cmd_eval,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
