import math

import numpy as np
import pytest

import helpers
from convseg import training
from convseg.errors import TrainingError
from convseg.segmenters import FEATURE_NAMES, ClassifierSegmenter, EveryNSegmenter
from convseg.training import (
    TrainConfig,
    batch_gradient,
    batch_loss,
    binary_prf,
    cross_entropy,
    load_model,
    save_model,
    train,
    train_on_documents,
)


class TestCrossEntropy:
    def test_known_values(self):
        assert cross_entropy(1.0, 0.5) == pytest.approx(math.log(2))
        assert cross_entropy(0.0, 0.5) == pytest.approx(math.log(2))
        assert cross_entropy(1.0, 1.0) == pytest.approx(0.0, abs=1e-10)
        assert cross_entropy(0.0, 0.25) == pytest.approx(-math.log(0.75))

    def test_clamped_at_zero(self):
        assert np.isfinite(cross_entropy(1.0, 0.0))
        assert np.isfinite(cross_entropy(0.0, 1.0))

    def test_elementwise(self):
        y = np.array([1.0, 0.0])
        p = np.array([0.5, 0.5])
        np.testing.assert_allclose(cross_entropy(y, p), [math.log(2)] * 2)


class TestBinaryPrf:
    def test_perfect(self):
        assert binary_prf([1, 0, 1], [1, 0, 1]) == (1.0, 1.0, 1.0)

    def test_half(self):
        p, r, f = binary_prf([1, 1, 0, 0], [1, 0, 1, 0])
        assert (p, r, f) == (0.5, 0.5, 0.5)

    def test_empty_prediction(self):
        p, r, f = binary_prf([1, 0], [0, 0])
        assert p == 0.0 and r == 0.0 and f == 0.0

    def test_both_empty(self):
        assert binary_prf([0, 0], [0, 0]) == (1.0, 1.0, 1.0)


def numeric_gradient(weights, bias, X, y, l2, pos_weight, h=1e-6):
    grad_w = np.zeros_like(weights)
    for i in range(len(weights)):
        wp, wm = weights.copy(), weights.copy()
        wp[i] += h
        wm[i] -= h
        grad_w[i] = (
            batch_loss(wp, bias, X, y, l2, pos_weight)
            - batch_loss(wm, bias, X, y, l2, pos_weight)
        ) / (2 * h)
    grad_b = (
        batch_loss(weights, bias + h, X, y, l2, pos_weight)
        - batch_loss(weights, bias - h, X, y, l2, pos_weight)
    ) / (2 * h)
    return grad_w, grad_b


class TestGradient:
    @pytest.mark.parametrize("l2,pos_weight", [(0.0, 1.0), (0.01, 1.0), (0.0, 2.5), (0.1, 3.0)])
    def test_matches_finite_differences(self, l2, pos_weight):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(2, 12))
            X = rng.normal(size=(n, len(FEATURE_NAMES)))
            y = rng.integers(0, 2, size=n).astype(float)
            w = rng.normal(scale=0.5, size=len(FEATURE_NAMES))
            b = float(rng.normal())
            gw, gb = batch_gradient(w, b, X, y, l2, pos_weight)
            nw, nb = numeric_gradient(w, b, X, y, l2, pos_weight)
            np.testing.assert_allclose(gw, nw, rtol=1e-4, atol=1e-6)
            assert gb == pytest.approx(nb, rel=1e-4, abs=1e-6)


def separable_dataset(n=200, seed=0):
    """One informative feature fully determines the label."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, len(FEATURE_NAMES)))
    y = (X[:, 0] > 0).astype(float)
    X[:, 0] = np.where(y == 1, X[:, 0] + 1.0, X[:, 0] - 1.0)
    return X, y


class TestTrain:
    def test_deterministic(self):
        X, y = separable_dataset()
        cfg = TrainConfig(epochs=5, seed=9)
        a = train(X, y, X, y, cfg)
        b = train(X, y, X, y, cfg)
        np.testing.assert_array_equal(a.model.weights, b.model.weights)
        assert a.model.bias == b.model.bias
        assert a.to_dict() == b.to_dict()

    def test_zero_learning_rate_keeps_zero_weights(self):
        X, y = separable_dataset()
        report = train(X, y, X, y, TrainConfig(epochs=3, learning_rate=0.0))
        np.testing.assert_array_equal(report.model.weights, np.zeros(len(FEATURE_NAMES)))
        assert report.model.bias == 0.0

    def test_separable_reaches_perfect_f1(self):
        X, y = separable_dataset()
        report = train(X, y, X, y, TrainConfig(epochs=30, learning_rate=0.5))
        assert max(e.val_f1 for e in report.epochs) == 1.0
        assert report.epochs[report.best_epoch].val_f1 == 1.0

    def test_single_class_raises(self):
        X, _ = separable_dataset()
        with pytest.raises(TrainingError, match="single class"):
            train(X, np.ones(len(X)), X, np.ones(len(X)))

    def test_empty_raises(self):
        with pytest.raises(TrainingError):
            train(np.zeros((0, len(FEATURE_NAMES))), np.zeros(0), np.zeros((1, len(FEATURE_NAMES))), np.zeros(1))

    def test_full_batch_small_lr_loss_monotone(self):
        X, y = separable_dataset(n=64)
        cfg = TrainConfig(epochs=15, batch_size=64, learning_rate=1e-3)
        report = train(X, y, X, y, cfg)
        losses = [e.train_loss for e in report.epochs]
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_best_checkpoint_is_f1_argmax_earliest(self):
        X, y = separable_dataset()
        report = train(X, y, X, y, TrainConfig(epochs=25, learning_rate=0.3))
        f1s = [e.val_f1 for e in report.epochs]
        assert report.best_epoch == f1s.index(max(f1s))

    def test_invalid_config(self):
        with pytest.raises(TrainingError):
            TrainConfig(epochs=0)
        with pytest.raises(TrainingError):
            TrainConfig(learning_rate=-1)
        with pytest.raises(TrainingError):
            TrainConfig(batch_size=0)

    def test_momentum_still_converges(self):
        X, y = separable_dataset()
        cfg = TrainConfig(epochs=30, learning_rate=0.2, momentum=0.9)
        report = train(X, y, X, y, cfg)
        assert max(e.val_f1 for e in report.epochs) == 1.0


class TestTrainOnDocuments:
    def test_cue_corpus_learns_boundaries(self):
        docs = helpers.make_cue_documents(71, 160, noise_doc_fraction=0.0)
        train_docs, val_docs = docs[:130], docs[130:]
        cfg = TrainConfig(epochs=25, learning_rate=0.3, seed=2)
        report = train_on_documents(train_docs, val_docs, config=cfg)
        assert report.epochs[report.best_epoch].val_f1 >= 0.95
        assert report.model.trained_on == "130 documents"

    def test_segmenter_fit_and_beats_every_one(self):
        docs = helpers.make_cue_documents(73, 160, noise_doc_fraction=0.0)
        train_docs, val_docs, test_docs = docs[:110], docs[110:130], docs[130:]
        seg = ClassifierSegmenter()
        seg.fit(train_docs, val_docs, config=TrainConfig(epochs=25, learning_rate=0.3))
        tp_cls = fp_cls = tp_e1 = fp_e1 = n_gold = 0
        every1 = EveryNSegmenter(n=1)
        for doc in test_docs:
            gold = set(doc.step_offsets)
            n_gold += len(gold)
            for br in seg.predict(doc).breaks:
                tp_cls += br in gold
                fp_cls += br not in gold
            for br in every1.predict(doc).breaks:
                tp_e1 += br in gold
                fp_e1 += br not in gold
        f1_cls = 2 * tp_cls / (2 * tp_cls + fp_cls + (n_gold - tp_cls))
        f1_e1 = 2 * tp_e1 / (2 * tp_e1 + fp_e1 + (n_gold - tp_e1))
        assert f1_cls > f1_e1


def test_model_round_trip(tmp_path):
    X, y = separable_dataset()
    report = train(X, y, X, y, TrainConfig(epochs=5, learning_rate=0.3, seed=4))
    path = tmp_path / "model.json"
    save_model(report.model, path)
    loaded = load_model(path)
    np.testing.assert_array_equal(loaded.weights, report.model.weights)
    assert loaded.bias == report.model.bias
    assert loaded.feature_names == report.model.feature_names
    assert loaded.decision_threshold == report.model.decision_threshold
    probe = np.ones(len(FEATURE_NAMES))
    assert float(loaded.predict_proba(probe)) == float(report.model.predict_proba(probe))


def test_epsilon_value():
    assert training.EPSILON == 1e-12
