"""patlab: lattice pattern engine, synthetic digits, heatmap metrics."""

from .core import (
    Configuration,
    GeneratorInstance,
    GeneratorSpace,
    Topology,
    build_generator_space,
    four_neighbor,
    moore8,
)
from .growth import Environment, GrowthRule, compenv, develop, growth_step, max_rule_step
from .dataset import (
    ClassTemplate,
    SampleRecord,
    default_templates,
    reconstruct,
    render,
    sample,
    spatial_distribution,
    stroke_space,
)
from .metrics import (
    CentroidScorer,
    Heatmap,
    MorfOrdering,
    Scorer,
    aopc,
    aopc_curve,
    build_centroid_scorer,
    cascade_src,
    morf_ordering,
    normalize_heatmap,
    segmentation_error_metrics,
    spearman_rank_correlation,
    to_abs,
)

__version__ = "0.1.0"

__all__ = [
    "Configuration", "GeneratorInstance", "GeneratorSpace", "Topology",
    "build_generator_space", "four_neighbor", "moore8",
    "Environment", "GrowthRule", "compenv", "develop", "growth_step",
    "max_rule_step",
    "ClassTemplate", "SampleRecord", "default_templates", "reconstruct",
    "render", "sample", "spatial_distribution", "stroke_space",
    "CentroidScorer", "Heatmap", "MorfOrdering", "Scorer", "aopc",
    "aopc_curve", "build_centroid_scorer", "cascade_src", "morf_ordering",
    "normalize_heatmap", "segmentation_error_metrics",
    "spearman_rank_correlation", "to_abs",
]
