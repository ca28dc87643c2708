"""Mutual-information band selection and evaluation for hyperspectral images.

The pipeline: rank bands by MI against a ground-truth label map, cut the
uninformative ones at a relevance threshold, greedily discard bands that
are redundant under a normalized-MI measure, then score the surviving
subset with a simple deterministic classifier.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataFormatError
from .cube import (
    CubeHeader,
    GroundTruth,
    HsiCube,
    PixelVector,
    all_positions,
    band_at,
    labeled_mask,
    read_cube,
    read_ground_truth,
    write_cube,
    write_ground_truth,
    write_label_map,
)
from .infotheory import (
    DiscreteDistribution,
    FanoBounds,
    QuantizationSpec,
    band_gt_mi_curve,
    conditional_entropy,
    entropy,
    fano_bounds,
    joint_histogram,
    marginal_histogram,
    mutual_information,
    normalized_mi_as,
    normalized_mi_u,
    quantize_band,
)
from .selection import (
    RedundancyMatrix,
    SelectionConfig,
    SelectionResult,
    SweepCell,
    SweepResult,
    TraceStep,
    ZoneCell,
    build_redundancy_matrix,
    select_bands,
    select_relevant,
    threshold_sweep,
    zone_report,
)
from .synth import (
    SceneRecipe,
    SyntheticBandSpec,
    default_scene_recipe,
    demo_ground_truth,
    generate_scene,
    recipe_from_json,
    recipe_to_json,
)
from .classify import (
    ClassifierConfig,
    EvalReport,
    SplitSpec,
    evaluate,
    fit_predict,
    reconstruct_map,
    split,
)
