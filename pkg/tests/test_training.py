import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flamelens import fixtures
from flamelens.errors import OutOfRangeChannel, ParseError, WrongCount
from flamelens.matrices import STAGE1_MATRIX, DETECTION_MATRIX, convert_pixels, load_matrix, preset, save_matrix
from flamelens.training import (
    HALF,
    Particle,
    PsoConfig,
    build_feature_matrix,
    conversion_cost,
    pso_search,
    reference_assignment,
    stride_sample,
    update_particle,
)


# --- conversion -------------------------------------------------------------


def test_basis_vector_selects_row():
    np.testing.assert_array_equal(convert_pixels([1, 0, 0], DETECTION_MATRIX), [1.7673, 2.9860, -0.9186])


def test_zero_pixel():
    np.testing.assert_array_equal(convert_pixels([[0, 0, 0]], np.random.default_rng(0).random((3, 3))), [[0, 0, 0]])


def test_ones_gives_column_sums():
    # column sums of the printed matrix, added exactly with fractions
    np.testing.assert_allclose(convert_pixels([1, 1, 1], DETECTION_MATRIX), [-1.3178, -0.8529, -3.5714], atol=1e-12)


def test_convert_matches_explicit_sum():
    rng = np.random.default_rng(4)
    x, w = rng.random((10, 3)), rng.normal(size=(3, 3))
    expected = [[sum(p[j] * w[j][k] for j in range(3)) for k in range(3)] for p in x]
    np.testing.assert_allclose(convert_pixels(x, w), expected, rtol=1e-12)


def test_presets_are_copies():
    m = preset("EQ8")
    m[0, 0] = 0
    assert STAGE1_MATRIX[0, 0] == 3.2753
    with pytest.raises(KeyError):
        preset("eq9")


# --- matrix files -----------------------------------------------------------


def test_save_load_round_trip(tmp_path):
    path = tmp_path / "m.json"
    save_matrix(DETECTION_MATRIX, path)
    np.testing.assert_array_equal(load_matrix(path), DETECTION_MATRIX)
    w = np.random.default_rng(9).normal(size=(3, 3)) * 1e3
    save_matrix(w, path)
    np.testing.assert_array_equal(load_matrix(path), w)
    assert json.loads(path.read_text())["rows"][0] == list(w[0])


@pytest.mark.parametrize(
    "text",
    ["{not json", '{"rows": [[1, 2], [3, 4]]}', '{"rows": [[1, 2, 3], [4, 5, 6]]}', '[1, 2, 3]', '{"rows": [[1,2,"x"],[1,2,3],[1,2,3]]}'],
)
def test_load_rejects_bad_files(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ParseError):
        load_matrix(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_matrix(tmp_path / "missing.json")


# --- feature matrix ---------------------------------------------------------


def test_constant_fill():
    f = fixtures.constant_halves_feature((1, 0.5, 0), (0.5, 0.1, 0.1))
    assert f.grid.shape == (40, 40, 3)
    np.testing.assert_array_equal(f.grid[:20], np.broadcast_to([1, 0.5, 0], (20, 40, 3)))
    np.testing.assert_array_equal(f.grid[20:], np.broadcast_to([0.5, 0.1, 0.1], (20, 40, 3)))
    assert f.labels.sum() == HALF and f.labels[:20].all()


def test_feature_preconditions():
    good = np.zeros((HALF, 3))
    with pytest.raises(WrongCount):
        build_feature_matrix(np.zeros((799, 3)), good)
    with pytest.raises(OutOfRangeChannel):
        build_feature_matrix(good, np.full((HALF, 3), 1.2))


def test_feature_positions_follow_source_regions():
    image, truth, fire_rect, bg_rect = fixtures.flame_over_brick()

    def region(rect):
        x, y, w, h = rect
        coords = np.argwhere(np.ones((h, w), bool)) + (y, x)
        return coords[stride_sample(np.arange(w * h))]

    fire_xy, bg_xy = region(fire_rect), region(bg_rect)
    f = build_feature_matrix(image[tuple(fire_xy.T)], image[tuple(bg_xy.T)])
    src = np.concatenate([fire_xy, bg_xy]).reshape(40, 40, 2)
    for r in range(40):
        for c in range(40):
            y, x = src[r, c]
            np.testing.assert_array_equal(f.grid[r, c], image[y, x])
            assert truth[y, x] == f.labels[r, c]


def test_stride_sample():
    np.testing.assert_array_equal(stride_sample(np.arange(10), 5), [0, 2, 4, 6, 8])
    assert len(stride_sample(np.arange(801))) == HALF
    with pytest.raises(WrongCount):
        stride_sample(np.arange(100))


# --- transformation error ---------------------------------------------------


@pytest.fixture(scope="module")
def noisy():
    f = fixtures.noisy_halves_feature(0.05, seed=0)
    return f, reference_assignment(f)


def test_identity_and_scaled_identity_cost_nothing(noisy):
    f, ref = noisy
    assert conversion_cost(np.eye(3), f, ref) == 0
    assert conversion_cost(2 * np.eye(3), f, ref) == 0
    assert conversion_cost(np.eye(3), f) == 0


def test_zero_matrix_costs_smaller_reference_class(noisy):
    f, ref = noisy
    # oracle: every converted pixel coincides, so all of them share one class
    sizes = np.bincount(ref.labels, minlength=2)
    assert conversion_cost(np.zeros((3, 3)), f, ref) == sizes.min()


def test_zero_matrix_on_unbalanced_reference():
    f = fixtures.noisy_halves_feature(0.3, seed=0)
    ref = reference_assignment(f)
    sizes = np.bincount(ref.labels, minlength=2)
    assert sizes[0] != sizes[1]
    assert conversion_cost(np.zeros((3, 3)), f, ref) == sizes.min()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.25, 0.5, 2.0, 8.0]))
def test_cost_invariant_under_positive_scaling(seed, s):
    f = fixtures.noisy_halves_feature(0.3, seed=1)
    ref = reference_assignment(f)
    w = np.random.default_rng(seed).uniform(-5, 5, (3, 3))
    assert conversion_cost(s * w, f, ref) == conversion_cost(w, f, ref)


def test_cost_bounds(noisy):
    f, ref = noisy
    for seed in range(20):
        c = conversion_cost(np.random.default_rng(seed).normal(size=(3, 3)), f, ref)
        assert 0 <= c <= 2 * HALF


# --- particle update --------------------------------------------------------


def particle(pos=0.0, vel=0.0, pbest=0.0):
    full = lambda v: np.full((3, 3), float(v))  # noqa: E731
    return Particle(full(pos), full(vel), full(pbest), 7)


def test_inertia_only():
    cfg = PsoConfig(omega=1.0, c1=0.0, c2=0.0, velocity_clamp=10.0)
    v = np.arange(9.0).reshape(3, 3) / 10
    p = Particle(np.ones((3, 3)), v, np.zeros((3, 3)), 3)
    r = np.full((3, 3), 0.5)
    q = update_particle(p, np.zeros((3, 3)), cfg, r, r)
    np.testing.assert_array_equal(q.velocity, v)
    np.testing.assert_array_equal(q.position, 1 + v)
    assert q.best_cost == 3 and q.best_position is p.best_position


def test_fixed_point():
    p = particle(pos=1.5, vel=0.0, pbest=1.5)
    q = update_particle(p, np.full((3, 3), 1.5), PsoConfig(), np.ones((3, 3)), np.ones((3, 3)))
    np.testing.assert_array_equal(q.position, p.position)
    np.testing.assert_array_equal(q.velocity, 0)


def test_hand_evaluated_step():
    cfg = PsoConfig(omega=0.5, c1=1.0, c2=1.0, velocity_clamp=10.0)
    r = np.full((3, 3), 0.5)
    q = update_particle(particle(0, 0, 1), np.full((3, 3), 2.0), cfg, r, r)
    np.testing.assert_allclose(q.velocity, 1.5)
    np.testing.assert_allclose(q.position, 1.5)


def test_velocity_clamp():
    cfg = PsoConfig(omega=1.0, c1=0.0, c2=0.0, velocity_clamp=0.25)
    q = update_particle(particle(0, 3.0, 0), np.zeros((3, 3)), cfg, np.ones((3, 3)), np.ones((3, 3)))
    np.testing.assert_array_equal(q.velocity, 0.25)


def test_no_forces_no_motion():
    cfg = PsoConfig(omega=0.0, c1=0.0, c2=0.0, velocity_clamp=float("inf"))
    rng = np.random.default_rng(0)
    p = Particle(rng.normal(size=(3, 3)), rng.normal(size=(3, 3)), rng.normal(size=(3, 3)), 1)
    q = update_particle(p, rng.normal(size=(3, 3)), cfg, rng.random((3, 3)), rng.random((3, 3)))
    np.testing.assert_array_equal(q.position, p.position)


def test_random_draws_are_per_component():
    cfg = PsoConfig(omega=0.0, c1=1.0, c2=0.0, velocity_clamp=10.0)
    r1 = np.arange(9.0).reshape(3, 3) / 9
    q = update_particle(particle(0, 0, 1), np.zeros((3, 3)), cfg, r1, np.zeros((3, 3)))
    np.testing.assert_allclose(q.velocity, r1)


@pytest.mark.parametrize(
    "kwargs", [{"swarm_size": 1}, {"max_iterations": 0}, {"velocity_clamp": 0.0}, {"init_range": (1, -1)}]
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PsoConfig(**kwargs)


def test_config_dict_round_trip():
    cfg = PsoConfig(seed=5, init_range=(-2, 3))
    assert PsoConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        PsoConfig.from_dict({"swarm": 3})


# --- search -----------------------------------------------------------------


def test_search_on_constant_halves():
    result = pso_search(fixtures.constant_halves_feature(), PsoConfig(seed=42))
    assert result.cost == 0
    assert result.cost_trace[-1] == 0
    assert result.iterations <= 200


def test_search_actually_moves_the_swarm():
    # heavy jitter: the initial swarm is not already perfect
    f = fixtures.noisy_halves_feature(0.3, seed=0)
    result = pso_search(f, PsoConfig(seed=42))
    assert result.cost_trace[0] > 0
    assert result.iterations > 0
    assert result.cost < result.cost_trace[0]
    assert all(b <= a for a, b in zip(result.cost_trace, result.cost_trace[1:]))
    assert conversion_cost(result.matrix, f) == result.cost


def test_single_iteration_budget():
    f = fixtures.noisy_halves_feature(0.3, seed=0)
    result = pso_search(f, PsoConfig(seed=42, max_iterations=1))
    assert result.iterations == 1
    assert len(result.cost_trace) == 2


def test_search_is_deterministic_and_jobs_independent():
    f = fixtures.noisy_halves_feature(0.3, seed=0)
    cfg = PsoConfig(seed=7, max_iterations=5, swarm_size=10)
    a = pso_search(f, cfg)
    b = pso_search(f, cfg)
    c = pso_search(f, cfg, jobs=3)
    np.testing.assert_array_equal(a.matrix, b.matrix)
    np.testing.assert_array_equal(a.matrix, c.matrix)
    assert a.cost_trace == b.cost_trace == c.cost_trace


def test_different_seeds_differ():
    f = fixtures.noisy_halves_feature(0.3, seed=0)
    a = pso_search(f, PsoConfig(seed=1, max_iterations=2, swarm_size=5))
    b = pso_search(f, PsoConfig(seed=2, max_iterations=2, swarm_size=5))
    assert not np.array_equal(a.matrix, b.matrix)
