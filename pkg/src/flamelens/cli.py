"""Command line entry point: ``flamelens train|detect|eval|overlay``.

Exit status is 0 on success, 1 on runtime failure and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from . import imaging
from .errors import FlamelensError, WrongCount
from .evaluation import batch_evaluate, read_manifest
from .matrices import PRESETS, load_matrix, preset, save_matrix
from .pipeline import DETECTORS, PipelineConfig
from .training import HALF, PsoConfig, build_feature_matrix, pso_search, stride_sample

RECT = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*$")


class UsageError(Exception):
    pass


class RuntimeFailure(Exception):
    pass


def _default_jobs() -> int:
    raw = os.environ.get("FLAMELENS_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _floats(text, n, name):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{name} must be {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{name} must be {n} comma-separated numbers, got {text!r}")
    return vals


def _colour(text):
    rgb = _floats(text, 3, "--colour")
    if min(rgb) < 0 or max(rgb) > 1:
        raise UsageError("--colour channels must lie in [0, 1]")
    return rgb


def _region(text):
    """Return ("rect", (x, y, w, h)) or ("mask", path)."""
    m = RECT.match(text)
    if m:
        x, y, w, h = (int(v) for v in m.groups())
        if w * h < HALF:
            raise UsageError(f"region too small: {w}x{h} holds fewer than {HALF} pixels")
        return "rect", (x, y, w, h)
    return "mask", text


def _region_pixels(image, region, name):
    kind, spec = region
    if kind == "rect":
        x, y, w, h = spec
        height, width = image.shape[:2]
        if x + w > width or y + h > height:
            raise UsageError(f"{name} region {x},{y},{w},{h} exceeds the {width}x{height} image")
        pixels = image[y : y + h, x : x + w].reshape(-1, 3)
    else:
        mask = imaging.read_mask(spec)
        if mask.shape != image.shape[:2]:
            raise UsageError(f"{name} mask {mask.shape} does not match image {image.shape[:2]}")
        pixels = image[mask]
    try:
        return stride_sample(pixels)
    except WrongCount as exc:
        raise UsageError(f"region too small: {name} {exc}") from None


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict) or set(doc) - {"pso", "pipeline"}:
        raise UsageError('config must be an object with optional "pso" and "pipeline" sections')
    return doc


def _pso_config(args, doc) -> PsoConfig:
    settings = dict(doc.get("pso", {}))
    overrides = {
        "swarm_size": args.swarm_size,
        "max_iterations": args.max_iterations,
        "omega": args.omega,
        "c1": args.c1,
        "c2": args.c2,
        "velocity_clamp": args.velocity_clamp,
        "seed": args.seed,
        "init_range": _floats(args.init_range, 2, "--init-range") if args.init_range else None,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return PsoConfig.from_dict(settings)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad PSO settings: {exc}") from None


def _pipeline_config(args, doc) -> PipelineConfig:
    settings = dict(doc.get("pipeline", {}))
    if args.preset is not None:
        settings["stage2_matrix"] = preset(args.preset)
    if getattr(args, "morph_close", None) is not None:
        settings["morph_close"] = args.morph_close
    try:
        cfg = PipelineConfig.from_dict(settings)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad pipeline settings: {exc}") from None
    if args.matrix is not None:
        try:
            cfg.stage2_matrix = load_matrix(args.matrix)
        except (OSError, FlamelensError) as exc:
            raise RuntimeFailure(f"cannot load matrix {args.matrix}: {exc}") from None
    return cfg


def cmd_train(args) -> int:
    fire_region = _region(args.fire_region)
    background_region = _region(args.background_region)
    cfg = _pso_config(args, _load_config(args.config))
    image = _read_image(args.sample)
    fire = _region_pixels(image, fire_region, "fire")
    background = _region_pixels(image, background_region, "background")
    result = pso_search(build_feature_matrix(fire, background), cfg, jobs=args.jobs)
    save_matrix(result.matrix, args.out)
    print(f"cost {result.cost} / {2 * HALF}  iterations {result.iterations}")
    print(f"matrix written to {args.out}")
    return 0


def _read_image(path):
    try:
        return imaging.read_image(path)
    except (OSError, FlamelensError) as exc:
        raise RuntimeFailure(f"cannot read image {path}: {exc}") from None


def cmd_detect(args) -> int:
    highlight = _colour(args.colour)
    cfg = _pipeline_config(args, _load_config(args.config))
    image = _read_image(args.image)
    mask = DETECTORS[args.method](image, cfg, jobs=args.jobs)
    imaging.write_mask(args.out, mask)
    if args.overlay:
        imaging.write_rgb(args.overlay, imaging.overlay(image, mask, highlight))
    count = int(mask.sum())
    print(f"fire pixels {count} / {mask.size}  fraction {count / mask.size:.4f}")
    return 0


def cmd_eval(args) -> int:
    cfg = _pipeline_config(args, _load_config(args.config))
    try:
        pairs = read_manifest(args.manifest)
    except (OSError, FlamelensError) as exc:
        raise RuntimeFailure(f"cannot read manifest {args.manifest}: {exc}") from None
    report = batch_evaluate(pairs, args.method, cfg, jobs=args.jobs)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    sys.stdout.write(report.to_text())
    if not report.succeeded:
        print("error: no pair could be evaluated", file=sys.stderr)
        return 1
    return 0


def cmd_overlay(args) -> int:
    highlight = _colour(args.colour)
    image = _read_image(args.image)
    try:
        mask = imaging.read_mask(args.mask)
        out = imaging.overlay(image, mask, highlight)
    except (OSError, FlamelensError) as exc:
        raise RuntimeFailure(str(exc)) from None
    imaging.write_rgb(args.out, out)
    print(f"overlay written to {args.out} ({int(np.count_nonzero(mask))} pixels highlighted)")
    return 0


def _add_matrix_flags(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--matrix", help="trained matrix JSON to use as the detection matrix")
    group.add_argument("--preset", choices=sorted(PRESETS), help="built-in detection matrix")
    p.add_argument("--method", choices=sorted(DETECTORS), default="nonlinear")
    p.add_argument("--config", help="JSON config with a 'pipeline' section")
    p.add_argument("--jobs", type=int, default=_default_jobs())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flamelens", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a conversion matrix on a sample image")
    p.add_argument("sample", help="training image (PNG or JPEG)")
    p.add_argument("--fire-region", required=True, help="x,y,w,h rectangle or mask PNG")
    p.add_argument("--background-region", required=True, help="x,y,w,h rectangle or mask PNG")
    p.add_argument("--out", required=True, help="where to write the matrix JSON")
    p.add_argument("--config", help="JSON config with a 'pso' section")
    p.add_argument("--swarm-size", type=int)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--omega", type=float)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--init-range", help="low,high")
    p.add_argument("--velocity-clamp", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=_default_jobs())
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="detect fire pixels in one image")
    p.add_argument("image")
    p.add_argument("--out", required=True, help="mask PNG to write")
    p.add_argument("--overlay", help="also write an overlay PNG here")
    p.add_argument("--colour", default="1,0,0", help="overlay colour r,g,b in [0,1]")
    p.add_argument("--morph-close", type=int, metavar="RADIUS")
    _add_matrix_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score a detector over a manifest of image/mask pairs")
    p.add_argument("manifest", help="image<TAB>mask list, or a directory with frames/ and masks/")
    p.add_argument("--report", help="JSON report path")
    _add_matrix_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("overlay", help="paint a mask over an image")
    p.add_argument("image")
    p.add_argument("mask")
    p.add_argument("--out", required=True)
    p.add_argument("--colour", default="1,0,0", help="r,g,b in [0,1]")
    p.set_defaults(func=cmd_overlay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"flamelens {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeFailure, FlamelensError, OSError) as exc:
        print(f"flamelens {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
