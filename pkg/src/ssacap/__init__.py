"""Grounded semantic-graph caption augmentation and evaluation toolkit."""

from .amr import AmrGraph, Edge, Node, Triple, parse_penman, serialize_penman, to_triples
from .grounding import Box, GroundedCaptionRecord, VgAmr, build_vgamr
from .smatch import SmatchResult, distance_matrix, smatch_brute_force, smatch_score
from .merge import MergeParams, build_meta_vgamr, find_common_nodes, merge_pair, upgma_order
from .sampler import SampledSubgraph, find_predicates, sample_event_subgraphs
from .augment import (
    ControlCaptionPair,
    ControlSignal,
    MixSpec,
    compute_coverage,
    extract_control,
    filter_by_quality,
    length_level,
    mix_datasets,
    realize_caption,
)
from .embeddings import EmbeddingStore, load_embeddings
from .metrics import (
    MetricReport,
    best5_diversity,
    content_iou,
    coverage_band_report,
    distinct_ngram_diversity,
    harmonic_mean,
    hungarian_match,
    length_metrics,
    self_cider,
)

__all__ = [name for name in dir() if not name.startswith("_")]
