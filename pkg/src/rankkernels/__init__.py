"""Submodular kernels for ranked data.

Rankings become ordered partitions; each gets an n-dimensional feature map
by weighted isotonic regression against a graph cut function, and the
kernel is the inner product of feature maps.  Kendall and Mallows kernels
are included as baselines, plus a synthetic preference dataset, kernel
ridge classification, and a CLI for the end-to-end experiments.
"""

from .classify import FactorizationError, KrrModel, f1_score, predict, split, train_krr
from .datasets import (
    FoodModel,
    LabeledRankingDataset,
    censor,
    food_scores,
    food_universe,
    generate_dataset,
    load_rankings,
    noise_free_preferences,
    sample_food_ranking,
    save_rankings,
)
from .estimators import RankingKernelClassifier, SubmodularFeatureMap
from .isotonic import (
    BlockTargets,
    basic_partition,
    block_targets,
    feature_map,
    isotonic_bruteforce,
    mean_feature_map,
    pava,
)
from .kernels import (
    GramMatrix,
    gram_baseline,
    gram_submodular,
    k_c,
    k_s,
    kendall_tau,
    mallows,
    psd_check,
)
from .rankings import (
    ExtensionBudgetError,
    OrderedPartition,
    ParseError,
    Universe,
    coherent_extensions,
    format_ranking,
    from_permutation,
    from_topk,
    is_exhaustive,
    parse_ranking,
    sample_extension,
)
from .submodular import (
    CutFunction,
    InformationGraph,
    SetFunction,
    build_graph,
    cut_eval,
    greedy_vertex,
    in_base_polytope,
    in_tangent_cone,
    is_compatible,
    is_submodular,
    lovasz_extension,
)

__version__ = "0.1.0"

__all__ = [
    "BlockTargets",
    "CutFunction",
    "ExtensionBudgetError",
    "FactorizationError",
    "FoodModel",
    "GramMatrix",
    "InformationGraph",
    "KrrModel",
    "LabeledRankingDataset",
    "OrderedPartition",
    "ParseError",
    "RankingKernelClassifier",
    "SetFunction",
    "SubmodularFeatureMap",
    "Universe",
    "basic_partition",
    "block_targets",
    "build_graph",
    "censor",
    "coherent_extensions",
    "cut_eval",
    "f1_score",
    "feature_map",
    "food_scores",
    "food_universe",
    "format_ranking",
    "from_permutation",
    "from_topk",
    "generate_dataset",
    "gram_baseline",
    "gram_submodular",
    "greedy_vertex",
    "in_base_polytope",
    "in_tangent_cone",
    "is_compatible",
    "is_exhaustive",
    "is_submodular",
    "isotonic_bruteforce",
    "k_c",
    "k_s",
    "kendall_tau",
    "load_rankings",
    "lovasz_extension",
    "mallows",
    "mean_feature_map",
    "noise_free_preferences",
    "parse_ranking",
    "pava",
    "predict",
    "psd_check",
    "sample_extension",
    "sample_food_ranking",
    "save_rankings",
    "split",
    "train_krr",
]
