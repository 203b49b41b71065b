from datetime import date

import numpy as np
import pytest

from driftlab.classifiers import (
    KNNClassifier,
    LinearSGDClassifier,
    SingleClassTrainingError,
    confidence,
    load_model,
    logistic_loss_and_grad,
    predict_dataset,
    save_model,
    score,
    score_dataset,
)
from driftlab.dataset import LabeledDataset

from conftest import blob_dataset


def tiny_dataset(features, labels, ids=None):
    n = len(labels)
    ids = ids or [f"s{i}" for i in range(n)]
    stamps = [date(2014, 1, 1)] * n
    return LabeledDataset(ids, stamps, labels, np.asarray(features, dtype=float))


class TestLinearSGD:
    def test_separable_blobs_high_accuracy(self):
        d = blob_dataset(100, 100, seed=1, pos_center=(4.0, 4.0))
        model = LinearSGDClassifier().fit(d, seed=0)
        acc = float(np.mean(predict_dataset(model, d) == d.labels))
        assert acc >= 0.95

    def test_no_signal_scores_near_half(self):
        d = tiny_dataset([[1.0, 2.0]] * 40, [0, 1] * 20)
        model = LinearSGDClassifier().fit(d, seed=0)
        s = score_dataset(model, d)
        assert np.all(np.abs(s - 0.5) < 0.05)

    def test_determinism_bit_identical(self):
        d = blob_dataset(60, 40, seed=2)
        m1 = LinearSGDClassifier().fit(d, seed=7)
        m2 = LinearSGDClassifier().fit(d, seed=7)
        assert m1.b == m2.b
        np.testing.assert_array_equal(m1.w, m2.w)

    def test_single_class_rejected(self):
        d = tiny_dataset([[0.0], [1.0]], [1, 1])
        with pytest.raises(SingleClassTrainingError):
            LinearSGDClassifier().fit(d, seed=0)

    def test_gradient_matches_finite_differences(self):
        # Central finite differences on random small instances.
        rng = np.random.default_rng(11)
        for _ in range(5):
            n, d = 12, 4
            X = rng.normal(size=(n, d))
            y = rng.integers(0, 2, size=n).astype(float)
            w = rng.normal(size=d)
            b = float(rng.normal())
            l2 = 0.01
            _, dw, db = logistic_loss_and_grad(w, b, X, y, l2)
            eps = 1e-6
            for j in range(d):
                wp, wm = w.copy(), w.copy()
                wp[j] += eps
                wm[j] -= eps
                lp, _, _ = logistic_loss_and_grad(wp, b, X, y, l2)
                lm, _, _ = logistic_loss_and_grad(wm, b, X, y, l2)
                num = (lp - lm) / (2 * eps)
                assert num == pytest.approx(dw[j], rel=1e-5, abs=1e-8)
            lp, _, _ = logistic_loss_and_grad(w, b + eps, X, y, l2)
            lm, _, _ = logistic_loss_and_grad(w, b - eps, X, y, l2)
            assert (lp - lm) / (2 * eps) == pytest.approx(db, rel=1e-5, abs=1e-8)

    def test_scores_within_unit_interval(self):
        d = blob_dataset(50, 50, seed=5, pos_center=(50.0, 50.0), spread=0.1)
        model = LinearSGDClassifier(learning_rate=1.0, epochs=100).fit(d, seed=0)
        s = model.scores(np.array([[1e6, 1e6], [-1e6, -1e6]]))
        assert np.all((s >= 0.0) & (s <= 1.0))

    def test_meta_recorded(self):
        d = blob_dataset(80, 20, seed=4)
        model = LinearSGDClassifier().fit(d, seed=9)
        assert model.meta.n_samples == 100
        assert model.meta.seed == 9
        assert model.meta.train_ratio == pytest.approx(0.2)


class TestKNN:
    def test_query_on_training_point(self):
        d = tiny_dataset([[0.0, 0.0], [5.0, 5.0]], [0, 1])
        model = KNNClassifier(k=1).fit(d, seed=0)
        assert score(model, np.array([5.0, 5.0])) == 1.0
        assert score(model, np.array([0.0, 0.0])) == 0.0

    def test_equidistant_tie_broken_by_smaller_id(self):
        d = tiny_dataset([[1.0, 0.0], [-1.0, 0.0]], [1, 0], ids=["b", "a"])
        model = KNNClassifier(k=1).fit(d, seed=0)
        # Query at the origin: both neighbours at distance 1; "a" wins.
        assert score(model, np.array([0.0, 0.0])) == 0.0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(21)
        d = tiny_dataset(rng.normal(size=(50, 3)), rng.integers(0, 2, size=50).tolist())
        model = KNNClassifier(k=3).fit(d, seed=0)
        queries = rng.normal(size=(20, 3))
        for q in queries:
            dist = np.array([float(((f - q) ** 2).sum()) for f in d.features])
            order = sorted(range(50), key=lambda i: (dist[i], d.ids[i]))
            expected = float(np.mean([d.labels[i] for i in order[:3]]))
            assert score(model, q) == pytest.approx(expected)

    def test_training_order_permutation_invariant(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(30, 2))
        y = rng.integers(0, 2, size=30).tolist()
        d = tiny_dataset(X, y)
        perm = rng.permutation(30)
        d_shuffled = d.subset(perm)
        m1 = KNNClassifier(k=3).fit(d, seed=0)
        m2 = KNNClassifier(k=3).fit(d_shuffled, seed=0)
        q = rng.normal(size=(10, 2))
        np.testing.assert_array_equal(m1.scores(q), m2.scores(q))

    def test_k_validation(self):
        d = tiny_dataset([[0.0], [1.0], [2.0]], [0, 1, 0])
        with pytest.raises(ValueError, match="odd"):
            KNNClassifier(k=2).fit(d, seed=0)
        with pytest.raises(ValueError, match="exceeds"):
            KNNClassifier(k=5).fit(d, seed=0)


class TestConfidence:
    @pytest.mark.parametrize("s,expected", [(0.5, 0.0), (0.9, 0.4), (0.15, 0.35)])
    def test_values(self, s, expected):
        class Fixed:
            def score_one(self, features):
                return s

        assert confidence(Fixed(), np.array([0.0])) == pytest.approx(expected)


class TestSerialization:
    def test_linear_round_trip(self, tmp_path):
        d = blob_dataset(40, 40, seed=8)
        model = LinearSGDClassifier().fit(d, seed=1)
        p = tmp_path / "m.json"
        save_model(model, str(p))
        back = load_model(str(p))
        np.testing.assert_array_equal(back.w, model.w)
        assert back.b == model.b
        assert back.meta == model.meta

    def test_knn_round_trip(self, tmp_path):
        d = blob_dataset(20, 10, seed=8)
        model = KNNClassifier(k=3).fit(d, seed=1)
        p = tmp_path / "m.json"
        save_model(model, str(p))
        back = load_model(str(p))
        q = np.array([[0.5, 0.5], [3.0, 3.0]])
        np.testing.assert_array_equal(back.scores(q), model.scores(q))
