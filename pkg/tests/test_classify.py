"""Splitting, kernel ridge training/prediction, and F1 scoring."""

import numpy as np
import pytest

from rankkernels.classify import (
    FactorizationError,
    f1_score,
    predict,
    split,
    train_krr,
)
from rankkernels.datasets import LabeledRankingDataset
from rankkernels.rankings import from_permutation


def make_dataset(labels):
    labels = np.asarray(labels)
    rankings = [from_permutation([0, 1, 2]) for _ in labels]
    return LabeledRankingDataset(rankings, labels)


class TestSplit:
    def test_sizes(self):
        data = make_dataset([1, -1] * 5)
        train, test = split(data, 0.2, seed=0)
        assert len(train) == 8 and len(test) == 2
        assert sorted(np.concatenate([train, test]).tolist()) == list(range(10))

    def test_deterministic(self):
        data = make_dataset([1, -1] * 20)
        a = split(data, 0.25, seed=3)
        b = split(data, 0.25, seed=3)
        assert (a[0] == b[0]).all() and (a[1] == b[1]).all()

    def test_rounds_to_zero(self):
        data = make_dataset([1, -1])
        with pytest.raises(ValueError):
            split(data, 0.2, seed=0)

    def test_degenerate_class(self):
        # 9 positives, 1 negative: some seed pushes the negative into test
        data = make_dataset([1] * 9 + [-1])
        failures = 0
        for seed in range(40):
            try:
                train, _ = split(data, 0.2, seed)
                assert len(np.unique(data.labels[train])) == 2
            except ValueError:
                failures += 1
        assert failures > 0

    def test_fraction_bounds(self):
        data = make_dataset([1, -1] * 5)
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                split(data, bad, seed=0)


class TestTrainKrr:
    def test_identity_kernel_scalar_algebra(self):
        m = 6
        y = np.array([1, -1, 1, -1, 1, -1], dtype=float)
        model = train_krr(np.eye(m), y, reg=1.0 / m)
        assert np.allclose(model.dual_coefficients, y / 2.0)

    def test_rank_one_kernel(self):
        # identical rankings with mixed labels: K = c * ones
        m, c = 4, 2.5
        k = c * np.ones((m, m))
        y = np.array([1.0, 1.0, 1.0, -1.0])
        reg = 1e-2
        model = train_krr(k, y, reg)
        # closed form: coef = (K + reg*m*I)^-1 y via Sherman-Morrison
        lam = reg * m
        ones = np.ones(m)
        expected = y / lam - (c * (ones @ y) / (lam * (lam + c * m))) * ones
        assert np.allclose(model.dual_coefficients, expected, atol=1e-10)
        # predictions on the training kernel are the constant mean-label sign
        assert (predict(model, k) == 1).all()

    def test_residual_postcondition(self):
        rng = np.random.default_rng(0)
        phi = rng.normal(size=(20, 6))
        k = phi @ phi.T
        y = np.where(rng.random(20) < 0.5, 1.0, -1.0)
        model = train_krr(k, y, reg=1e-3)
        system = k + 1e-3 * 20 * np.eye(20)
        assert np.abs(system @ model.dual_coefficients - y).max() <= 1e-8

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            train_krr(np.eye(3), np.ones(2), 1e-3)
        with pytest.raises(ValueError):
            train_krr(np.eye(3), np.ones(3), 0.0)

    def test_factorization_failure(self):
        # strongly indefinite "kernel" defeats Cholesky even with jitter
        k = np.array([[0.0, 5.0], [5.0, 0.0]])
        with pytest.raises(FactorizationError):
            train_krr(k, np.array([1.0, -1.0]), reg=1e-9)


class TestPredict:
    def test_training_set_reproduced_when_separable(self):
        rng = np.random.default_rng(1)
        centers = np.array([[3.0, 0.0], [-3.0, 0.0]])
        y = np.array([1] * 10 + [-1] * 10)
        points = np.vstack(
            [centers[0] + 0.1 * rng.normal(size=(10, 2)),
             centers[1] + 0.1 * rng.normal(size=(10, 2))]
        )
        k = points @ points.T
        model = train_krr(k, y.astype(float), reg=1e-3)
        assert (predict(model, k) == y).all()

    def test_zero_scores_tie_rule(self):
        model = train_krr(np.eye(3), np.array([1.0, -1.0, 1.0]), reg=1e-3)
        assert (predict(model, np.zeros((4, 3))) == 1).all()

    def test_global_sign_flip_invariance(self):
        rng = np.random.default_rng(2)
        phi = rng.normal(size=(12, 5))
        y = np.where(rng.random(12) < 0.5, 1.0, -1.0)
        k = phi @ phi.T
        k_flipped = (-phi) @ (-phi).T
        m1 = train_krr(k, y, reg=1e-3)
        m2 = train_krr(k_flipped, y, reg=1e-3)
        cross = phi[:4] @ phi.T
        cross_flipped = (-phi[:4]) @ (-phi).T
        assert (predict(m1, cross) == predict(m2, cross_flipped)).all()

    def test_shape_mismatch(self):
        model = train_krr(np.eye(3), np.ones(3), reg=1e-3)
        with pytest.raises(ValueError):
            predict(model, np.zeros((2, 4)))


class TestF1:
    def test_perfect(self):
        assert f1_score([1, -1, 1], [1, -1, 1]) == 1.0

    def test_all_wrong(self):
        assert f1_score([1, -1], [-1, 1]) == 0.0

    def test_arithmetic(self):
        # TP=2, FP=1, FN=1
        predicted = [1, 1, 1, -1, -1]
        actual = [1, 1, -1, 1, -1]
        assert f1_score(predicted, actual) == pytest.approx(2 / 3, abs=1e-15)

    def test_positive_class_argument(self):
        predicted = [-1, -1, 1]
        actual = [-1, 1, 1]
        assert f1_score(predicted, actual, positive_class=-1) == pytest.approx(2 / 3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            f1_score([1], [1, -1])


class TestScaleRobustness:
    def test_predictions_invariant_under_joint_scaling(self):
        rng = np.random.default_rng(3)
        phi = rng.normal(size=(15, 4))
        k = phi @ phi.T
        y = np.where(rng.random(15) < 0.5, 1.0, -1.0)
        cross = phi[:5] @ phi.T
        base = predict(train_krr(k, y, 1e-3), cross)
        for c in (0.1, 7.0, 250.0):
            scaled = predict(train_krr(c * k, y, c * 1e-3), c * cross)
            assert (scaled == base).all()
