"""Synthetic scenes and training grids used by the tests, demos and docs.

None of these reproduce real footage; they are small, deterministic stand-ins
with known ground truth.
"""
from __future__ import annotations

import numpy as np

from .training import HALF, FeatureMatrix, build_feature_matrix

ORANGE = (1.0, 0.5, 0.0)
DARK_RED = (0.5, 0.1, 0.1)
FLAME = (1.0, 0.55, 0.1)
DARK_GRAY = (0.2, 0.2, 0.2)


def constant_halves_feature(fire=ORANGE, background=DARK_RED) -> FeatureMatrix:
    """800 copies of one fire colour over 800 copies of one background colour."""
    return build_feature_matrix(np.tile(fire, (HALF, 1)), np.tile(background, (HALF, 1)))


def noisy_halves_feature(jitter: float = 0.05, seed: int = 0) -> FeatureMatrix:
    """Constant halves with every channel jittered uniformly by up to ``jitter``."""
    rng = np.random.default_rng(seed)
    fire = np.clip(np.tile(ORANGE, (HALF, 1)) + rng.uniform(-jitter, jitter, (HALF, 3)), 0, 1)
    background = np.clip(np.tile(DARK_RED, (HALF, 1)) + rng.uniform(-jitter, jitter, (HALF, 3)), 0, 1)
    return build_feature_matrix(fire, background)


def block_scene(size=64, block=16, colour=FLAME, field=DARK_GRAY, origin=None):
    """A square ``colour`` block on a uniform ``field``.

    Returns ``(image, truth)`` where ``truth`` marks the block. The block is
    centred unless ``origin`` gives its top-left ``(row, col)``.
    """
    image = np.empty((size, size, 3))
    image[:] = field
    r0, c0 = origin if origin is not None else ((size - block) // 2,) * 2
    truth = np.zeros((size, size), dtype=bool)
    truth[r0 : r0 + block, c0 : c0 + block] = True
    image[truth] = colour
    return image, truth


def uniform_scene(size=64, colour=DARK_GRAY) -> np.ndarray:
    image = np.empty((size, size, 3))
    image[:] = colour
    return image


def halves_image(width=40, height=40, top=ORANGE, bottom=DARK_RED) -> np.ndarray:
    """Image whose top half is ``top`` and bottom half ``bottom``."""
    image = np.empty((height, width, 3))
    image[: height // 2] = top
    image[height // 2 :] = bottom
    return image


def flame_over_brick(width=96, height=96, seed=0):
    """A flame-coloured blob in front of a reddish brick wall.

    Returns ``(image, truth, fire_rect, background_rect)``; rects are
    ``(x, y, w, h)`` regions usable for training (each holds at least 800
    pixels and lies entirely inside its class).
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width]

    # running-bond brick courses with mortar lines
    brick_h, brick_w = 8, 16
    course = yy // brick_h
    shifted = xx + (course % 2) * (brick_w // 2)
    mortar = (yy % brick_h == 0) | (shifted % brick_w == 0)
    shade = rng.uniform(-0.06, 0.06, size=(height // brick_h + 1, width // brick_w + 2))
    tone = shade[course, shifted // brick_w]
    image = np.empty((height, width, 3))
    image[..., 0] = 0.62 + tone
    image[..., 1] = 0.26 + tone / 2
    image[..., 2] = 0.18 + tone / 2
    image[mortar] = (0.55, 0.5, 0.45)

    # teardrop flame occupying the upper-middle of the frame
    cx, cy = width / 2, height * 0.42
    rx, ry = width * 0.26, height * 0.36
    r = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2
    truth = r < 1.0
    heat = np.clip(1.0 - r, 0.0, 1.0)
    flame = np.stack([np.ones_like(heat), 0.45 + 0.5 * heat, 0.05 + 0.55 * heat**2], axis=-1)
    image[truth] = flame[truth]
    image += rng.uniform(-0.02, 0.02, size=image.shape)
    image = np.clip(image, 0.0, 1.0)

    fire_rect = (int(cx - 20), int(cy - 15), 40, 25)
    background_rect = (0, height - 20, width, 20)
    return image, truth, fire_rect, background_rect


# converts to near-white under the stage-one matrix but stays dim under stage two
DIM_AMBER = (0.6, 0.4, 0.0)


def rescue_scene(size=64, patch=16):
    """Flame block plus a dim amber patch that only the white-pixel rescue keeps.

    Returns ``(image, flame_truth, amber_truth)``.
    """
    image, flame = block_scene(size, 16, origin=(4, 4))
    amber = np.zeros_like(flame)
    amber[size - patch - 8 : size - 8, size - patch - 8 : size - 8] = True
    image[amber] = DIM_AMBER
    return image, flame, amber
