"""Pixel-level scoring of detected fire masks against ground truth."""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, FlamelensError, ParseError
from .imaging import as_mask, read_image, read_mask
from .pipeline import DETECTORS, PipelineConfig

NA = "n/a"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(pred, truth) -> ConfusionCounts:
    p, t = as_mask(pred), as_mask(truth)
    if p.shape != t.shape:
        raise DimensionMismatch(f"prediction {p.shape} vs truth {t.shape}")
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    return ConfusionCounts(tp, fp, p.size - tp - fp - fn, fn)


def _ratio(num, den):
    return num / den if den else None


def metrics(c: ConfusionCounts) -> tuple[float | None, float | None, float | None]:
    """Return ``(fpr, fnr, fscore)``; a metric with a zero denominator is ``None``.

    fpr = fp / (fp + tn), fnr = fn / (fn + tp), fscore = 2tp / (2tp + fp + fn).
    """
    return (
        _ratio(c.fp, c.fp + c.tn),
        _ratio(c.fn, c.fn + c.tp),
        _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn),
    )


def _metric_dict(c: ConfusionCounts) -> dict:
    fpr, fnr, fscore = metrics(c)
    return {"fpr": fpr, "fnr": fnr, "fscore": fscore}


@dataclass
class PairResult:
    image: str
    mask: str
    counts: ConfusionCounts | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        d = {"image": self.image, "mask": self.mask}
        if self.error is not None:
            d["error"] = self.error
        else:
            d["counts"] = self.counts.as_dict()
            d["metrics"] = _metric_dict(self.counts)
        return d


@dataclass
class ScoreReport:
    """Per-pair results plus counts pooled over every successful pair."""

    detector: str
    pairs: list[PairResult] = field(default_factory=list)

    @property
    def succeeded(self) -> list[PairResult]:
        return [p for p in self.pairs if p.error is None]

    @property
    def failed(self) -> list[PairResult]:
        return [p for p in self.pairs if p.error is not None]

    @property
    def aggregate(self) -> ConfusionCounts:
        total = ConfusionCounts()
        for p in self.succeeded:
            total = total + p.counts
        return total

    def metrics(self):
        return metrics(self.aggregate)

    def as_dict(self) -> dict:
        """Canonical report body: depends only on inputs, never on time or scheduling."""
        return {
            "detector": self.detector,
            "pairs": [p.as_dict() for p in self.pairs],
            "succeeded": len(self.succeeded),
            "failed": len(self.failed),
            "aggregate": {"counts": self.aggregate.as_dict(), "metrics": _metric_dict(self.aggregate)},
        }

    def to_json(self, timestamp: bool = True) -> str:
        doc = {"report": self.as_dict()}
        if timestamp:
            doc["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        def fmt(v):
            return NA if v is None else f"{v:.3f}"

        rows = [("image", "tp", "fp", "tn", "fn", "fpr", "fnr", "fscore")]
        for p in self.pairs:
            name = Path(p.image).name
            if p.error is not None:
                rows.append((name, "error: " + p.error, "", "", "", "", "", ""))
                continue
            c = p.counts
            rows.append((name, c.tp, c.fp, c.tn, c.fn, *map(fmt, metrics(c))))
        a = self.aggregate
        rows.append(("aggregate", a.tp, a.fp, a.tn, a.fn, *map(fmt, metrics(a))))
        rows = [[str(v) for v in r] for r in rows]
        # error messages span the numeric columns, so keep them out of the width calculation
        widths = [
            max(len(r[i]) for r in rows if not (i == 1 and r[1].startswith("error:")))
            for i in range(len(rows[0]))
        ]
        lines = []
        for r in rows:
            if r[1].startswith("error:"):
                lines.append(f"{r[0]:<{widths[0]}}  {r[1]}")
            else:
                lines.append(
                    "  ".join(
                        v.ljust(w) if i == 0 else v.rjust(w) for i, (v, w) in enumerate(zip(r, widths))
                    )
                )
        return "\n".join(lines) + "\n"


def read_manifest(path: str | os.PathLike) -> list[tuple[str, str]]:
    """Load ``(image, mask)`` pairs.

    ``path`` is either a text file of ``image<TAB>mask`` lines (relative paths
    resolve against the file's directory; blank lines and ``#`` comments are
    skipped) or a directory holding ``frames/NAME.png`` and ``masks/NAME.png``.
    """
    path = Path(path)
    if path.is_dir():
        frames = sorted((path / "frames").glob("*.png"))
        if not frames:
            raise ParseError(f"{path} has no frames/*.png")
        return [(str(f), str(path / "masks" / f.name)) for f in frames]
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected image<TAB>mask")
            pairs.append(tuple(str(path.parent / p.strip()) for p in parts))
    return pairs


def _evaluate_pair(pair, detect, cfg) -> PairResult:
    image_path, mask_path = (str(p) for p in pair)
    result = PairResult(image_path, mask_path)
    try:
        image = read_image(image_path)
        truth = read_mask(mask_path)
        if image.shape[:2] != truth.shape:
            raise DimensionMismatch(f"image {image.shape[:2]} vs mask {truth.shape}")
        result.counts = confusion(detect(image, cfg), truth)
    except FileNotFoundError as exc:
        result.error = f"missing file: {exc.filename}"
    except (FlamelensError, OSError) as exc:
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def batch_evaluate(pairs, detector: str = "linear", cfg: PipelineConfig | None = None, jobs: int = 1) -> ScoreReport:
    """Run ``detector`` over every pair and pool the confusion counts.

    Pairs that fail to load or mismatch in size are recorded with an error
    and skipped in the aggregate. Results keep the input order for any
    ``jobs``.
    """
    detect = DETECTORS[detector]
    cfg = cfg or PipelineConfig()
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(lambda p: _evaluate_pair(p, detect, cfg), pairs))
    else:
        results = [_evaluate_pair(p, detect, cfg) for p in pairs]
    return ScoreReport(detector, results)
