import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flamelens import fixtures, imaging
from flamelens.errors import DimensionMismatch, ParseError
from flamelens.evaluation import ConfusionCounts, batch_evaluate, confusion, metrics, read_manifest
from flamelens.pipeline import detect_linear


def test_confusion_cases():
    t = np.ones((2, 2), bool)
    assert confusion(t, t) == ConfusionCounts(tp=4)
    assert confusion(~t, t) == ConfusionCounts(fn=4)
    pred = np.array([[True, True], [False, False]])
    truth = np.array([[True, False], [True, False]])
    assert confusion(pred, truth) == ConfusionCounts(1, 1, 1, 1)


def test_confusion_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        confusion(np.zeros((2, 2), bool), np.zeros((2, 3), bool))


def test_metrics_cases():
    assert metrics(ConfusionCounts(tp=4)) == (None, 0.0, 1.0)
    assert metrics(ConfusionCounts(tn=4)) == (0.0, None, None)
    assert metrics(ConfusionCounts(1, 1, 1, 1)) == (0.5, 0.5, 0.5)
    assert metrics(ConfusionCounts()) == (None, None, None)


masks = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s).random((2, 7, 9)) > 0.5)


@settings(max_examples=100)
@given(masks, st.integers(0, 2**32 - 1))
def test_counts_total_and_permutation_invariance(pair, seed):
    pred, truth = pair
    c = confusion(pred, truth)
    assert c.total == pred.size
    perm = np.random.default_rng(seed).permutation(pred.size)
    assert confusion(pred.ravel()[perm].reshape(7, 9), truth.ravel()[perm].reshape(7, 9)) == c


@settings(max_examples=100)
@given(masks)
def test_swap_exchanges_fp_and_fn(pair):
    pred, truth = pair
    a, b = confusion(pred, truth), confusion(truth, pred)
    assert (a.tp, a.fp, a.tn, a.fn) == (b.tp, b.fn, b.tn, b.fp)
    assert metrics(a)[2] == metrics(b)[2]


@settings(max_examples=200)
@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_fscore_range_and_perfect_case(tp, fp, tn, fn):
    f = metrics(ConfusionCounts(tp, fp, tn, fn))[2]
    if f is not None:
        assert 0.0 <= f <= 1.0
        assert (f == 1.0) == (fp == 0 and fn == 0 and tp > 0)


@pytest.fixture
def dataset(tmp_path):
    """Two block scenes and a gray scene, with ground truth, plus a manifest."""
    frames, gts = tmp_path / "frames", tmp_path / "masks"
    frames.mkdir(), gts.mkdir()
    scenes = {
        "a.png": fixtures.block_scene(48, 12),
        "b.png": fixtures.block_scene(48, 16, origin=(2, 30)),
        "gray.png": (fixtures.uniform_scene(48), np.zeros((48, 48), bool)),
    }
    for name, (img, truth) in scenes.items():
        imaging.write_rgb(frames / name, img)
        imaging.write_mask(gts / name, truth)
    manifest = tmp_path / "list.tsv"
    manifest.write_text("".join(f"frames/{n}\tmasks/{n}\n" for n in scenes))
    return tmp_path, manifest


def test_read_manifest_both_layouts(dataset):
    root, manifest = dataset
    from_file = read_manifest(manifest)
    from_dir = read_manifest(root)
    assert len(from_file) == 3
    assert sorted(from_file) == sorted(from_dir)


def test_read_manifest_rejects_bad_lines(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("# comment\n\nonly-one-column\n")
    with pytest.raises(ParseError):
        read_manifest(bad)
    (tmp_path / "empty").mkdir()
    with pytest.raises(ParseError):
        read_manifest(tmp_path / "empty")


def test_empty_batch():
    report = batch_evaluate([], "linear")
    assert report.aggregate == ConfusionCounts()
    assert report.metrics() == (None, None, None)
    assert "n/a" in report.to_text()


def test_batch_scores_fixture(dataset):
    _, manifest = dataset
    report = batch_evaluate(read_manifest(manifest), "linear")
    assert not report.failed
    assert report.metrics() == (0.0, 0.0, 1.0)
    gray = report.pairs[2]
    assert metrics(gray.counts)[0] == 0.0 and metrics(gray.counts)[2] is None


def test_self_consistency(tmp_path):
    img, _ = fixtures.block_scene()
    imaging.write_rgb(tmp_path / "i.png", img)
    imaging.write_mask(tmp_path / "m.png", detect_linear(img))
    report = batch_evaluate([(tmp_path / "i.png", tmp_path / "m.png")], "nonlinear")
    assert report.metrics()[2] == 1.0


def test_counts_are_additive(dataset):
    _, manifest = dataset
    pairs = read_manifest(manifest)
    one = batch_evaluate(pairs[:1], "nonlinear").aggregate
    two = batch_evaluate(pairs[:1] * 2, "nonlinear").aggregate
    assert two == one + one
    full = batch_evaluate(pairs, "nonlinear")
    assert full.aggregate == sum((p.counts for p in full.pairs), ConfusionCounts())


def test_order_does_not_change_aggregate(dataset):
    _, manifest = dataset
    pairs = read_manifest(manifest)
    assert batch_evaluate(pairs, "linear").aggregate == batch_evaluate(pairs[::-1], "linear").aggregate


def test_partial_failures_are_reported(dataset):
    root, manifest = dataset
    pairs = read_manifest(manifest)
    pairs[1] = (pairs[1][0], str(root / "masks" / "missing.png"))
    imaging.write_mask(root / "small.png", np.zeros((5, 5), bool))
    pairs.append((pairs[0][0], str(root / "small.png")))
    report = batch_evaluate(pairs, "linear", jobs=2)
    assert [p.error is None for p in report.pairs] == [True, False, True, False]
    assert "missing" in report.pairs[1].error
    assert "DimensionMismatch" in report.pairs[3].error
    assert report.aggregate.total == 2 * 48 * 48


def test_json_report_is_canonical(dataset):
    _, manifest = dataset
    pairs = read_manifest(manifest)
    a = batch_evaluate(pairs, "nonlinear", jobs=1)
    b = batch_evaluate(pairs, "nonlinear", jobs=3)
    assert a.to_json(timestamp=False) == b.to_json(timestamp=False)
    doc = json.loads(a.to_json())
    assert "generated_at" in doc and doc["report"]["succeeded"] == 3
    assert doc["report"]["pairs"][2]["metrics"]["fscore"] is None
