"""Color co-occurrence CBIR with segment matching and relevance feedback."""

__version__ = "0.1.0"

from .color_features import (
    FEATURE_DIM,
    HsvImage,
    NoPixelPairsError,
    compute_ccm,
    extract_features,
    offdiag_summary,
    quantize,
    rgb_to_hsv,
)
from .engine import (
    RetrievalPage,
    Session,
    SessionConfig,
    SessionTranscript,
    run_session,
)
from .feedback import RfState, compute_stats, rank_candidates, relevance_score, reweight
from .index_store import FeatureIndex, build_index, load_index, save_index
from .segmentation import Block, SegmentSet, kmeans_segment, segment_image, split_blocks
from .similarity import (
    GreedyMatchResult,
    greedy_min_match,
    segment_rank_distance,
    weighted_distance,
)

__all__ = [
    "FEATURE_DIM",
    "HsvImage",
    "NoPixelPairsError",
    "compute_ccm",
    "extract_features",
    "offdiag_summary",
    "quantize",
    "rgb_to_hsv",
    "RetrievalPage",
    "Session",
    "SessionConfig",
    "SessionTranscript",
    "run_session",
    "RfState",
    "compute_stats",
    "rank_candidates",
    "relevance_score",
    "reweight",
    "FeatureIndex",
    "build_index",
    "load_index",
    "save_index",
    "Block",
    "SegmentSet",
    "kmeans_segment",
    "segment_image",
    "split_blocks",
    "GreedyMatchResult",
    "greedy_min_match",
    "segment_rank_distance",
    "weighted_distance",
    "__version__",
]
