"""scikit-learn style wrappers around the functional core.

``SubmodularFeatureMap`` is a transformer: fit on an (n, d) object-feature
matrix (building the information graph), transform a sequence of rankings
into their (m, n) feature-map matrix.  ``RankingKernelClassifier`` wires a
full pipeline — Gram matrix of the chosen kernel plus kernel ridge
regression — behind fit/predict.  Both expose get_params/set_params and
clone cleanly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from . import classify, kernels
from .rankings import OrderedPartition
from .submodular import CutFunction, build_graph


def _check_rankings(rankings, n: int | None = None) -> list[OrderedPartition]:
    rankings = list(rankings)
    if not rankings:
        raise ValueError("need at least one ranking")
    for r in rankings:
        if not isinstance(r, OrderedPartition):
            raise TypeError(f"expected OrderedPartition, got {type(r).__name__}")
        if n is not None and r.n != n:
            raise ValueError(f"ranking over n={r.n}, expected n={n}")
    return rankings


class SubmodularFeatureMap(BaseEstimator, TransformerMixin):
    """Transform rankings into submodular-kernel feature maps.

    Parameters
    ----------
    lengthscale : float or None
        Squared-exponential lengthscale; None selects the median pairwise
        distance of the fitted object features.
    keep_fraction : float
        Fraction of strongest graph edges to retain.
    mode : {"exact", "sampled"}
        How non-exhaustive rankings are averaged over their coherent
        exhaustive extensions.
    n_samples, seed : int
        Sample count and stream seed for ``mode="sampled"``.
    budget : int
        Enumeration guard for ``mode="exact"``.
    """

    def __init__(self, lengthscale=None, keep_fraction=1.0, mode="exact",
                 n_samples=600, seed=0, budget=100_000):
        self.lengthscale = lengthscale
        self.keep_fraction = keep_fraction
        self.mode = mode
        self.n_samples = n_samples
        self.seed = seed
        self.budget = budget

    def fit(self, X, y=None):
        """Build the information graph from the (n, d) object features."""
        self.graph_ = build_graph(X, self.lengthscale, self.keep_fraction)
        self.cut_ = CutFunction(self.graph_)
        return self

    def transform(self, rankings) -> np.ndarray:
        """Feature-map matrix, one row per ranking."""
        if not hasattr(self, "cut_"):
            raise RuntimeError("transform called before fit")
        rankings = _check_rankings(rankings, self.cut_.n)
        return kernels.compute_feature_maps(
            self.cut_, rankings, self.mode, self.n_samples, self.seed, self.budget
        )


class RankingKernelClassifier(BaseEstimator, ClassifierMixin):
    """Kernel ridge classification of rankings.

    ``kernel="submodular"`` needs ``object_features`` to build the
    information graph; "kendall" and "mallows" work on the rankings alone.
    """

    def __init__(self, kernel="submodular", object_features=None, lengthscale=None,
                 keep_fraction=1.0, mallows_lambda=1.0, mode="exact",
                 n_samples=600, seed=0, budget=100_000, reg=1e-3):
        self.kernel = kernel
        self.object_features = object_features
        self.lengthscale = lengthscale
        self.keep_fraction = keep_fraction
        self.mallows_lambda = mallows_lambda
        self.mode = mode
        self.n_samples = n_samples
        self.seed = seed
        self.budget = budget
        self.reg = reg

    def _feature_maps(self, rankings) -> np.ndarray:
        return kernels.compute_feature_maps(
            self._cut, rankings, self.mode, self.n_samples, self.seed, self.budget
        )

    def fit(self, X, y):
        """Fit on a sequence of rankings and their labels in {-1, +1}."""
        rankings = _check_rankings(X)
        y = np.asarray(y, dtype=int)
        if self.kernel == "submodular":
            if self.object_features is None:
                raise ValueError("kernel='submodular' needs object_features")
            graph = build_graph(self.object_features, self.lengthscale, self.keep_fraction)
            self._cut = CutFunction(graph)
            self._train_maps = self._feature_maps(rankings)
            k_train = kernels.gram_from_feature_maps(self._train_maps)
        elif self.kernel in ("kendall", "mallows"):
            self._train_rankings = rankings
            k_train = kernels.gram_baseline(
                self.kernel, rankings, self.mallows_lambda,
                self.mode, self.n_samples, self.seed,
            ).values
        else:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        self.classes_ = np.unique(y)
        self.model_ = classify.train_krr(k_train, y, self.reg)
        self._m_train = len(rankings)
        return self

    def _cross_gram(self, rankings) -> np.ndarray:
        if self.kernel == "submodular":
            test_maps = self._feature_maps(rankings)
            return test_maps @ self._train_maps.T
        return kernels.cross_gram_baseline(
            self.kernel, rankings, self._train_rankings, self.mallows_lambda,
            self.mode, self.n_samples, self.seed,
        )

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "model_"):
            raise RuntimeError("predict called before fit")
        rankings = _check_rankings(X)
        return classify.predict(self.model_, self._cross_gram(rankings))
