"""Desk-scale downstream classification on precomputed Gram matrices.

Kernel ridge regression stands in for the heavier probabilistic
classifiers usually paired with ranking kernels: the comparison of
interest is between kernels, with the classifier held fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class FactorizationError(RuntimeError):
    """Kernel system could not be factorized even after jitter escalation."""


@dataclass
class KrrModel:
    """Dual coefficients of a kernel ridge fit."""

    dual_coefficients: np.ndarray
    regularization: float
    training_ids: np.ndarray


def split(dataset, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic shuffled train/test split.

    ``dataset`` needs a ``labels`` attribute; both classes must land in the
    training part.  Returns (train_ids, test_ids).
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    labels = np.asarray(dataset.labels)
    m = len(labels)
    n_test = int(m * test_fraction)
    if n_test == 0 or n_test == m:
        raise ValueError(
            f"degenerate split: test_fraction={test_fraction} leaves "
            f"{n_test} of {m} samples for testing"
        )
    order = np.random.default_rng(seed).permutation(m)
    test_ids, train_ids = order[:n_test], order[n_test:]
    if len(np.unique(labels[train_ids])) < 2:
        raise ValueError("degenerate split: a class is absent from the training set")
    return train_ids, test_ids


def train_krr(k_train: np.ndarray, y, reg: float) -> KrrModel:
    """Solve (K + reg * m * I) c = y by Cholesky factorization.

    Escalates the diagonal jitter up to 1e-6 if the factorization fails,
    and verifies the residual of the un-jittered system stays below 1e-8.
    """
    k_train = np.asarray(k_train, dtype=float)
    y = np.asarray(y, dtype=float)
    if reg <= 0:
        raise ValueError(f"regularization must be positive, got {reg}")
    m = k_train.shape[0]
    if k_train.shape != (m, m) or y.shape != (m,):
        raise ValueError("K_train must be square with one label per row")

    system = k_train + reg * m * np.eye(m)
    jitter = 0.0
    while True:
        try:
            factor = scipy.linalg.cho_factor(system + jitter * np.eye(m))
            break
        except np.linalg.LinAlgError:
            jitter = 1e-8 if jitter == 0.0 else jitter * 100.0
            if jitter > 1e-6:
                raise FactorizationError(
                    "kernel system not factorizable after jitter escalation to 1e-6"
                ) from None
    coef = scipy.linalg.cho_solve(factor, y)
    residual = np.abs(system @ coef - y).max()
    if residual > 1e-8:
        raise FactorizationError(f"solve residual {residual:.3g} exceeds 1e-8")
    return KrrModel(
        dual_coefficients=coef,
        regularization=reg,
        training_ids=np.arange(m),
    )


def predict(model: KrrModel, k_cross: np.ndarray) -> np.ndarray:
    """Hard labels sign(K_cross @ c); zero scores map to +1."""
    k_cross = np.atleast_2d(np.asarray(k_cross, dtype=float))
    if k_cross.shape[1] != len(model.dual_coefficients):
        raise ValueError(
            f"K_cross has {k_cross.shape[1]} columns but the model was "
            f"trained on {len(model.dual_coefficients)} samples"
        )
    scores = k_cross @ model.dual_coefficients
    return np.where(scores >= 0.0, 1, -1)


def f1_score(predicted, actual, positive_class=1) -> float:
    """2 * precision * recall / (precision + recall); 0 on an empty
    denominator."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError("predicted and actual must have equal length")
    tp = int(np.sum((predicted == positive_class) & (actual == positive_class)))
    fp = int(np.sum((predicted == positive_class) & (actual != positive_class)))
    fn = int(np.sum((predicted != positive_class) & (actual == positive_class)))
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)
