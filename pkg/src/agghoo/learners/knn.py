from __future__ import annotations

import numpy as np

from ..core import Classifier, Dataset, LearningRule

_CHUNK = 512


class KnnClassifier(Classifier):
    """Majority label among the ``k`` Euclidean-nearest training rows.

    Distance ties are broken by the smaller training-row index (stable
    sort); label ties by the smallest label.
    """

    def __init__(self, k: int, data: Dataset):
        self.k = k
        self.class_count = data.class_count
        self._X = data.features
        self._y = data.labels

    def _sq_dists(self, q: np.ndarray) -> np.ndarray:
        # explicit differences, not the |a|^2 - 2ab + |b|^2 expansion,
        # so exact distance ties stay ties
        return ((q[:, None, :] - self._X[None, :, :]) ** 2).sum(axis=2)

    def neighbors(self, X) -> np.ndarray:
        """Indices of the ``k`` nearest training rows in order, shape ``(m, k)``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty((X.shape[0], self.k), dtype=np.int64)
        for start in range(0, X.shape[0], _CHUNK):
            d2 = self._sq_dists(X[start:start + _CHUNK])
            out[start:start + _CHUNK] = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        return out

    def _neighbor_mask(self, d2: np.ndarray) -> np.ndarray:
        """Boolean ``(m, n)`` mask of the k nearest rows; equal distances favour lower indices."""
        k, n = self.k, d2.shape[1]
        if k == n:
            return np.ones_like(d2, dtype=bool)
        kth = np.partition(d2, k - 1, axis=1)[:, k - 1]
        mask = d2 <= kth[:, None]
        for i in np.flatnonzero(mask.sum(axis=1) > k):
            strict = d2[i] < kth[i]
            tied = np.flatnonzero(d2[i] == kth[i])
            mask[i] = strict
            mask[i, tied[: k - int(strict.sum())]] = True
        return mask

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(X.shape[0], dtype=np.int64)
        onehot = np.zeros((self._y.shape[0], self.class_count))
        onehot[np.arange(self._y.shape[0]), self._y] = 1.0
        for start in range(0, X.shape[0], _CHUNK):
            mask = self._neighbor_mask(self._sq_dists(X[start:start + _CHUNK]))
            counts = mask.astype(np.float64) @ onehot
            # first maximum, i.e. smallest label on a tie
            out[start:start + _CHUNK] = np.argmax(counts, axis=1)
        return out

    def __repr__(self):
        return f"KnnClassifier(k={self.k}, n={self._y.shape[0]})"


class KnnRule(LearningRule):
    """k-nearest-neighbours rule, ``k`` odd."""

    def __init__(self, k: int):
        k = int(k)
        if k < 1 or k % 2 == 0:
            raise ValueError(f"k must be a positive odd integer, got {k}")
        self.k = k
        self.id = f"knn-k={k:04d}"

    def train(self, data: Dataset) -> KnnClassifier:
        return knn_train(self.k, data)


def knn_train(k: int, data: Dataset) -> KnnClassifier:
    if k < 1 or k % 2 == 0:
        raise ValueError(f"k must be a positive odd integer, got {k}")
    if k > data.n:
        raise ValueError(f"k={k} exceeds the sample size n={data.n}")
    return KnnClassifier(k, data)


def knn_family(k_max: int = 29) -> list[KnnRule]:
    """Rules for ``k = 1, 3, ..., k_max``."""
    return [KnnRule(k) for k in range(1, k_max + 1, 2)]
