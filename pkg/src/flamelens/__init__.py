"""Colour-based fire pixel detection with PSO-trained conversion matrices."""
from .clustering import Assignment, align_labels, brute_force_two, kmedoids_two, l1_distance
from .evaluation import ConfusionCounts, ScoreReport, batch_evaluate, confusion, metrics
from .imaging import clamp_to_gray, decode_image, encode_mask, overlay, read_image, read_mask
from .matrices import STAGE1_MATRIX, DETECTION_MATRIX, convert_pixels, load_matrix, preset, save_matrix
from .pipeline import (
    PipelineConfig,
    contrast_enhance,
    convert_image,
    detect_linear,
    detect_nonlinear,
    morph_close,
    otsu_threshold,
    white_rescue,
)
from .training import (
    FeatureMatrix,
    Particle,
    PsoConfig,
    build_feature_matrix,
    conversion_cost,
    pso_search,
    update_particle,
)

__version__ = "0.1.0"
