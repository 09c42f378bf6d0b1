"""Search for a colour-differentiating conversion matrix with particle swarm optimisation.

Training works on a 40x40 feature grid whose top 20 rows hold fire pixels
and bottom 20 rows hold background pixels. A candidate matrix is scored by
how many grid pixels change their two-class K-medoids cluster after the
grid is converted by it; the swarm minimises that count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .clustering import Assignment, align_labels, kmedoids_two, mismatches
from .errors import OutOfRangeChannel, WrongCount
from .matrices import as_matrix, convert_pixels

GRID_SIDE = 40
HALF = GRID_SIDE * GRID_SIDE // 2  # 800 pixels per class
# canonical K-medoids init: first fire pixel and first background pixel
CANONICAL_INIT = (0, HALF)


@dataclass(frozen=True)
class FeatureMatrix:
    """Labelled 40x40 training grid.

    ``grid`` has shape (40, 40, 3); rows 0-19 are fire and rows 20-39 are
    background.
    """

    grid: np.ndarray

    @property
    def pixels(self) -> np.ndarray:
        """The grid flattened row-major to (1600, 3); fire pixels come first."""
        return self.grid.reshape(-1, 3)

    @property
    def labels(self) -> np.ndarray:
        """Ground-truth label grid, True for fire."""
        out = np.zeros((GRID_SIDE, GRID_SIDE), dtype=bool)
        out[: GRID_SIDE // 2] = True
        return out


def _check_class(name, pixels) -> np.ndarray:
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"{name} pixels must have shape (n, 3), got {arr.shape}")
    if len(arr) != HALF:
        raise WrongCount(f"need exactly {HALF} {name} pixels, got {len(arr)}")
    if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
        raise OutOfRangeChannel(f"{name} pixel channels must lie in [0, 1]")
    return arr


def build_feature_matrix(fire_pixels, background_pixels) -> FeatureMatrix:
    """Stack 800 fire and 800 background RGB triples into the training grid, in order."""
    fire = _check_class("fire", fire_pixels)
    background = _check_class("background", background_pixels)
    grid = np.concatenate([fire, background]).reshape(GRID_SIDE, GRID_SIDE, 3)
    grid.setflags(write=False)
    return FeatureMatrix(grid)


def stride_sample(pixels, count: int = HALF) -> np.ndarray:
    """Pick exactly ``count`` rows of ``pixels`` at evenly spaced indices."""
    arr = np.asarray(pixels)
    n = len(arr)
    if n < count:
        raise WrongCount(f"region holds {n} pixels, need at least {count}")
    return arr[(np.arange(count) * n) // count]


def reference_assignment(feature: FeatureMatrix) -> Assignment:
    return kmedoids_two(feature.pixels, CANONICAL_INIT)


def conversion_cost(w, feature: FeatureMatrix, reference: Assignment | None = None) -> int:
    """Count feature pixels whose cluster differs before and after conversion by ``w``.

    ``reference`` is the clustering of the unconverted grid; pass it in to
    avoid recomputing it for every candidate.
    """
    if reference is None:
        reference = reference_assignment(feature)
    converted = kmedoids_two(convert_pixels(feature.pixels, w), CANONICAL_INIT)
    return mismatches(reference, align_labels(reference, converted))


@dataclass
class PsoConfig:
    """Swarm settings. ``omega`` defaults to the usual constriction factor."""

    swarm_size: int = 50
    max_iterations: int = 200
    omega: float = 0.7298
    c1: float = 1.4962
    c2: float = 1.4962
    init_range: tuple[float, float] = (-5.0, 5.0)
    velocity_clamp: float = 2.0
    seed: int = 0

    def __post_init__(self):
        self.init_range = tuple(float(v) for v in self.init_range)
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be at least 2")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.velocity_clamp > 0:
            raise ValueError("velocity_clamp must be positive")
        if len(self.init_range) != 2 or self.init_range[0] > self.init_range[1]:
            raise ValueError("init_range must be (low, high) with low <= high")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["init_range"] = list(self.init_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PsoConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown PSO settings: {sorted(unknown)}")
        return cls(**d)


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_cost: int


def _step(pos, vel, pbest, gbest, cfg: PsoConfig, r1, r2):
    vel = cfg.omega * vel + cfg.c1 * r1 * (pbest - pos) + cfg.c2 * r2 * (gbest - pos)
    if math.isfinite(cfg.velocity_clamp):
        vel = np.clip(vel, -cfg.velocity_clamp, cfg.velocity_clamp)
    return pos + vel, vel


def update_particle(p: Particle, global_best, cfg: PsoConfig, r1, r2) -> Particle:
    """Apply one velocity and position update; personal-best fields are carried over unchanged.

    ``r1`` and ``r2`` are 3x3 arrays of U[0, 1) draws, one per matrix entry.
    """
    pos, vel = _step(
        np.asarray(p.position, dtype=np.float64),
        np.asarray(p.velocity, dtype=np.float64),
        np.asarray(p.best_position, dtype=np.float64),
        np.asarray(global_best, dtype=np.float64),
        cfg,
        np.asarray(r1, dtype=np.float64),
        np.asarray(r2, dtype=np.float64),
    )
    return Particle(pos, vel, p.best_position, p.best_cost)


@dataclass
class PsoResult:
    matrix: np.ndarray
    cost: int
    iterations: int
    cost_trace: list[int] = field(default_factory=list)


def pso_search(feature: FeatureMatrix, cfg: PsoConfig | None = None, jobs: int = 1) -> PsoResult:
    """Run the swarm and return the best matrix found.

    Stops as soon as the global best reaches cost 0 or after
    ``cfg.max_iterations`` update rounds. ``cost_trace[t]`` is the global best
    cost after round ``t`` (index 0 is the initial swarm). All random draws
    come from one generator seeded with ``cfg.seed`` and are taken per round
    before any evaluation, so ``jobs`` does not change the result.
    """
    cfg = cfg or PsoConfig()
    rng = np.random.default_rng(cfg.seed)
    reference = reference_assignment(feature)
    shape = (cfg.swarm_size, 3, 3)

    lo, hi = cfg.init_range
    pos = rng.uniform(lo, hi, size=shape)
    vel = np.zeros(shape)

    pool = ThreadPoolExecutor(jobs) if jobs > 1 else None

    def evaluate(positions):
        fn = lambda w: conversion_cost(w, feature, reference)  # noqa: E731
        if pool is None:
            return np.array([fn(w) for w in positions])
        return np.array(list(pool.map(fn, positions)))

    try:
        cost = evaluate(pos)
        pbest, pbest_cost = pos.copy(), cost.copy()
        g = int(np.argmin(pbest_cost))
        gbest, gbest_cost = pbest[g].copy(), int(pbest_cost[g])
        trace = [gbest_cost]

        it = 0
        while gbest_cost > 0 and it < cfg.max_iterations:
            it += 1
            r1, r2 = rng.random(size=(2, *shape))
            pos, vel = _step(pos, vel, pbest, gbest, cfg, r1, r2)
            cost = evaluate(pos)
            better = cost < pbest_cost
            pbest[better] = pos[better]
            pbest_cost[better] = cost[better]
            g = int(np.argmin(pbest_cost))
            if pbest_cost[g] < gbest_cost:
                gbest, gbest_cost = pbest[g].copy(), int(pbest_cost[g])
            trace.append(gbest_cost)
    finally:
        if pool is not None:
            pool.shutdown()

    return PsoResult(as_matrix(gbest), gbest_cost, it, trace)
