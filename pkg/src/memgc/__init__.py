"""Memory-graph compression and time-decay retrieval for long-term agent memory."""

from .baselines import (
    BaselineParams,
    BaselinePolicy,
    adjacent_fifo_select,
    capacity_evict_select,
    cluster_center_select,
    dart_select,
    random_select,
)
from .benchkit import BenchReport, GenConfig, generate, run_bench, sample_queries
from .compressor import CompressionConfig, CompressionReport, compress, compress_with, run_method
from .em_sampling import EMConfig, em_select, minmax_sample
from .ew_pruning import EWConfig, diversity_score, entity_importance, ew_select, fusion_score
from .graph import (
    Edge,
    EntityKind,
    EntityNode,
    GraphError,
    GraphFormatError,
    GraphValidationError,
    MemoryGraph,
    TextNode,
    load,
    partition_connectivity,
    remove_text_nodes,
    save,
    validate,
)
from .kernels import BACKEND
from .retrieval import (
    DecayKind,
    RetrievalConfig,
    RetrievalMode,
    SegmentScore,
    character_topk,
    decay_factor,
    semantic_segments,
    tmr_retrieve,
)
from .vecmath import ClusterAssignment, cosine, normalize, pairwise_similarity, spherical_kmeans

__version__ = "0.1.0"
