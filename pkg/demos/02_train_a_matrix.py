"""
Training a conversion matrix with a particle swarm
==================================================

Training samples 800 fire and 800 background pixels into a 40x40 grid,
clusters the grid into two classes, and searches for a 3x3 matrix after
which the same clustering still separates the same pixels.
"""
import numpy as np

from flamelens import fixtures
from flamelens.matrices import DETECTION_MATRIX, save_matrix
from flamelens.pipeline import PipelineConfig, detect_linear
from flamelens.evaluation import confusion, metrics
from flamelens.training import (
    PsoConfig,
    build_feature_matrix,
    conversion_cost,
    pso_search,
    reference_assignment,
    stride_sample,
)

image, truth, fire_rect, bg_rect = fixtures.flame_over_brick()


def region(rect):
    x, y, w, h = rect
    return image[y : y + h, x : x + w].reshape(-1, 3)


feature = build_feature_matrix(stride_sample(region(fire_rect)), stride_sample(region(bg_rect)))
reference = reference_assignment(feature)
print("reference cluster sizes:", reference.sizes)

# how many grid pixels change cluster under a few fixed matrices
for name, w in [("identity", np.eye(3)), ("zero", np.zeros((3, 3))), ("published", DETECTION_MATRIX)]:
    print(f"cost of {name:>9} matrix: {conversion_cost(w, feature, reference)}")

# a noisier grid makes the swarm work for its answer
hard = fixtures.noisy_halves_feature(0.3, seed=0)
result = pso_search(hard, PsoConfig(seed=42))
print("noisy grid: best cost per round", result.cost_trace[:12], "...")
print("noisy grid: final cost", result.cost, "after", result.iterations, "rounds")

# train on the brick scene and plug the matrix into the linear detector
trained = pso_search(feature, PsoConfig(seed=42))
print("brick grid: final cost", trained.cost, "after", trained.iterations, "rounds")
save_matrix(trained.matrix, "demo_trained_matrix.json")

# The cost only asks that the two clusters survive conversion. It does not
# ask that fire becomes the bright side, which is what the Otsu step relies
# on, so a cost-0 matrix from an easy grid can still make a poor detector.
# Compare it with the published matrix on the same scene.
for name, w in [("trained", trained.matrix), ("published", DETECTION_MATRIX)]:
    mask = detect_linear(image, PipelineConfig(stage2_matrix=w))
    print(f"F-score with {name} matrix: {metrics(confusion(mask, truth))[2]:.3f}")
