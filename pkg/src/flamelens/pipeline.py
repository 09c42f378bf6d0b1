"""Fire colour detectors built from gamma enhancement, matrix conversion and Otsu.

``detect_linear`` enhances, converts with a single matrix and thresholds.
``detect_nonlinear`` runs two enhance/convert/threshold stages, the second on
the survivors of the first, and keeps stage-one pixels that convert to
near-white regardless of what stage two decides.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import ndimage

from .imaging import as_rgb, clamp_to_gray
from .matrices import STAGE1_MATRIX, DETECTION_MATRIX, as_matrix, dumps_matrix, loads_matrix

BINS = 256


@dataclass
class PipelineConfig:
    """Detector settings; defaults are the published matrices and exponents."""

    stage1_matrix: np.ndarray = field(default_factory=lambda: STAGE1_MATRIX.copy())
    stage2_matrix: np.ndarray = field(default_factory=lambda: DETECTION_MATRIX.copy())
    stage1_gamma: tuple[float, float, float] = (1.5, 0.7, 0.9)
    stage2_gamma: tuple[float, float, float] = (4.0, 0.9, 2.0)
    white_threshold: float = 0.8
    morph_close: int | None = None

    def __post_init__(self):
        self.stage1_matrix = as_matrix(self.stage1_matrix)
        self.stage2_matrix = as_matrix(self.stage2_matrix)
        for name in ("stage1_gamma", "stage2_gamma"):
            g = tuple(float(v) for v in getattr(self, name))
            if len(g) != 3 or min(g) <= 0:
                raise ValueError(f"{name} must be three positive exponents")
            setattr(self, name, g)
        if not 0.0 < self.white_threshold <= 1.0:
            raise ValueError("white_threshold must lie in (0, 1]")
        if self.morph_close is not None and self.morph_close < 1:
            raise ValueError("morph_close radius must be at least 1")

    def to_dict(self) -> dict:
        return {
            "stage1_matrix": self.stage1_matrix.tolist(),
            "stage2_matrix": self.stage2_matrix.tolist(),
            "stage1_gamma": list(self.stage1_gamma),
            "stage2_gamma": list(self.stage2_gamma),
            "white_threshold": self.white_threshold,
            "morph_close": self.morph_close,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown pipeline settings: {sorted(unknown)}")
        d = dict(d)
        for key in ("stage1_matrix", "stage2_matrix"):
            if isinstance(d.get(key), dict):  # also accept the matrix-file layout
                d[key] = loads_matrix(dumps_matrix(d[key]["rows"]))
        return cls(**d)


def contrast_enhance(img, gamma) -> np.ndarray:
    """Raise each channel to its own exponent: (r, g, b) -> (r**gr, g**gg, b**gb)."""
    g = np.asarray(gamma, dtype=np.float64)
    if g.shape != (3,) or g.min() <= 0:
        raise ValueError("gamma must be three positive exponents")
    return np.power(np.asarray(img, dtype=np.float64), g)


def convert_image(img, w) -> np.ndarray:
    return np.asarray(img, dtype=np.float64) @ as_matrix(w)


def _rowwise(fn, img: np.ndarray, jobs: int) -> np.ndarray:
    # per-pixel work only, so splitting rows cannot change any value
    if jobs <= 1 or len(img) < 2:
        return fn(img)
    chunks = np.array_split(img, min(jobs, len(img)))
    with ThreadPoolExecutor(jobs) as pool:
        return np.concatenate(list(pool.map(fn, chunks)))


def _gray_after(img, gamma, w, jobs=1):
    def fn(block):
        converted = convert_image(contrast_enhance(block, gamma), w)
        return converted, clamp_to_gray(converted)

    if jobs <= 1:
        return fn(img)
    converted = _rowwise(lambda b: fn(b)[0], img, jobs)
    return converted, clamp_to_gray(converted)


def gray_histogram(gray) -> np.ndarray:
    """Counts of ``gray`` in 256 equal-width bins over [0, 1]; 1.0 falls in the last bin."""
    g = np.asarray(gray, dtype=np.float64)
    bins = np.minimum((g * BINS).astype(np.int64), BINS - 1)
    return np.bincount(bins.ravel(), minlength=BINS)


def otsu_threshold(gray) -> tuple[float, np.ndarray]:
    """Otsu binarisation on a 256-bin histogram.

    The split after bin ``k`` (k = 0..254) maximising between-class variance
    wins, ties going to the lowest ``k``. Scores are compared as exact
    rationals. Returns ``(threshold, mask)`` with ``threshold = (k + 1) / 256``
    and ``mask`` true for pixels in bins above ``k``, i.e. ``gray >=
    threshold``. When every pixel shares one bin the mask is empty and the
    threshold is 1.0.
    """
    g = np.asarray(gray, dtype=np.float64)
    hist = [int(v) for v in gray_histogram(g)]
    n = sum(hist)
    s = sum(i * h for i, h in enumerate(hist))

    # between-class variance after bin k is (n*s0 - s*n0)**2 / (n**2 * n0 * n1)
    best_k, best = None, None
    n0 = s0 = 0
    for k in range(BINS - 1):
        n0 += hist[k]
        s0 += k * hist[k]
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            continue
        score = Fraction((n * s0 - s * n0) ** 2, n0 * n1)
        if best is None or score > best:
            best_k, best = k, score
    if best_k is None:
        return 1.0, np.zeros(g.shape, dtype=bool)
    bins = np.minimum((g * BINS).astype(np.int64), BINS - 1)
    return (best_k + 1) / BINS, bins > best_k


def white_rescue(converted, tau: float = 0.8) -> np.ndarray:
    """Pixels whose three converted channels, clamped to [0, 1], all reach ``tau``."""
    if not 0.0 < tau <= 1.0:
        raise ValueError("tau must lie in (0, 1]")
    return (np.clip(np.asarray(converted, dtype=np.float64), 0.0, 1.0) >= tau).all(axis=-1)


def morph_close(mask, radius: int) -> np.ndarray:
    """Binary closing with a (2*radius+1) square; the frame edge does not erode the result."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    m = np.asarray(mask, dtype=bool)
    square = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    grown = ndimage.binary_dilation(m, structure=square, border_value=0)
    return ndimage.binary_erosion(grown, structure=square, border_value=1)


def _finish(mask, cfg: PipelineConfig):
    return morph_close(mask, cfg.morph_close) if cfg.morph_close else mask


def detect_linear(img, cfg: PipelineConfig | None = None, jobs: int = 1) -> np.ndarray:
    cfg = cfg or PipelineConfig()
    _, gray = _gray_after(as_rgb(img), cfg.stage2_gamma, cfg.stage2_matrix, jobs)
    return _finish(otsu_threshold(gray)[1], cfg)


@dataclass
class NonlinearStages:
    """Intermediate masks of the two-stage detector.

    ``stage1``: Otsu mask after the first conversion. ``rescue``: stage-one
    pixels that converted to near-white. ``stage2``: second-stage Otsu mask,
    already limited to ``stage1``. ``final``: ``stage2 | rescue``, closed if
    configured.
    """

    stage1: np.ndarray
    rescue: np.ndarray
    stage2: np.ndarray
    final: np.ndarray
    stage1_converted: np.ndarray = field(repr=False)
    stage2_converted: np.ndarray = field(repr=False)


def nonlinear_stages(img, cfg: PipelineConfig | None = None, jobs: int = 1) -> NonlinearStages:
    cfg = cfg or PipelineConfig()
    img = as_rgb(img)

    c1, gray1 = _gray_after(img, cfg.stage1_gamma, cfg.stage1_matrix, jobs)
    m1 = otsu_threshold(gray1)[1]
    rescue = white_rescue(c1, cfg.white_threshold) & m1

    survivors = np.where(m1[..., None], img, 0.0)
    c2, gray2 = _gray_after(survivors, cfg.stage2_gamma, cfg.stage2_matrix, jobs)
    m2 = otsu_threshold(gray2)[1] & m1

    return NonlinearStages(m1, rescue, m2, _finish(m2 | rescue, cfg), c1, c2)


def detect_nonlinear(img, cfg: PipelineConfig | None = None, jobs: int = 1) -> np.ndarray:
    return nonlinear_stages(img, cfg, jobs).final


DETECTORS = {"linear": detect_linear, "nonlinear": detect_nonlinear}
