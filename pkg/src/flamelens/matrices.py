"""3x3 colour conversion matrices: presets, pixel conversion and JSON files.

A matrix is a float64 ``(3, 3)`` array whose rows index the input channels
(R, G, B) and whose columns index the output channels, so a pixel row vector
``x`` converts to ``x @ w``.
"""
from __future__ import annotations

import json
import os

import numpy as np

from .errors import ParseError

# Stage-one matrix of the two-stage detector, taken from earlier
# K-medoids/PSO flame colour work.
STAGE1_MATRIX = np.array(
    [
        [3.2753, 1.9701, 1.8017],
        [-0.0269, -0.0774, 0.2938],
        [-3.0439, -1.9676, -2.3011],
    ]
)

# Colour-differentiating matrix trained on a fire sample with a
# fire-coloured background. Used by the linear detector and by stage two.
DETECTION_MATRIX = np.array(
    [
        [1.7673, 2.9860, -0.9186],
        [0.1479, -0.9451, -1.2610],
        [-3.2330, -2.8938, -1.3918],
    ]
)

PRESETS = {"eq8": STAGE1_MATRIX, "eq10": DETECTION_MATRIX}


def preset(name: str) -> np.ndarray:
    try:
        return PRESETS[name.lower()].copy()
    except KeyError:
        raise KeyError(f"unknown matrix preset {name!r}; choose from {sorted(PRESETS)}") from None


def as_matrix(w) -> np.ndarray:
    arr = np.asarray(w, dtype=np.float64)
    if arr.shape != (3, 3):
        raise ValueError(f"conversion matrix must be 3x3, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("conversion matrix entries must be finite")
    return arr


def convert_pixels(pixels, w) -> np.ndarray:
    """Multiply each RGB row vector by ``w``; works on any ``(..., 3)`` array."""
    x = np.asarray(pixels, dtype=np.float64)
    if x.shape[-1] != 3:
        raise ValueError(f"expected a trailing channel axis of 3, got shape {x.shape}")
    return x @ as_matrix(w)


def dumps_matrix(w) -> str:
    # json writes floats with repr, which round-trips exactly
    rows = [json.dumps([float(v) for v in row]) for row in as_matrix(w)]
    return '{"rows": [\n  ' + ",\n  ".join(rows) + "\n]}\n"


def loads_matrix(text: str) -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"matrix file is not valid JSON: {exc}") from exc
    rows = doc.get("rows") if isinstance(doc, dict) else None
    if (
        not isinstance(rows, list)
        or len(rows) != 3
        or any(not isinstance(r, list) or len(r) != 3 for r in rows)
    ):
        raise ParseError('matrix file must hold {"rows": [[a, b, c], [d, e, f], [g, h, i]]}')
    try:
        return as_matrix([[float(v) for v in r] for r in rows])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad matrix entry: {exc}") from exc


def save_matrix(w, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_matrix(w))


def load_matrix(path: str | os.PathLike) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return loads_matrix(fh.read())
