"""Samples, classifiers, learning rules and 0-1 risk evaluation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable

import numpy as np


class EmptySetError(ValueError):
    """Raised when a risk is requested over an empty set of rows."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """An indexed sample of ``(feature vector, label)`` pairs.

    ``class_count`` is declared rather than inferred, so a subsample that
    misses a class still votes over the same label set.
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D array of shape (n, d)")
        y = np.asarray(self.labels)
        if y.ndim != 1:
            raise ValueError("labels must be 1-D")
        if y.size and not np.issubdtype(y.dtype, np.integer):
            if not np.all(y == np.round(y)):
                raise ValueError("labels must be integers")
        y = y.astype(np.int64)
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"features and labels differ in length ({X.shape[0]} != {y.shape[0]})"
            )
        if X.shape[0] < 1:
            raise ValueError("a dataset needs at least one row")
        M = int(self.class_count)
        if M < 2:
            raise ValueError("class_count must be at least 2")
        if y.min() < 0 or y.max() >= M:
            raise ValueError(f"labels must lie in {{0, ..., {M - 1}}}")
        object.__setattr__(self, "features", _readonly(X))
        object.__setattr__(self, "labels", _readonly(y))
        object.__setattr__(self, "class_count", M)

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return self.n

    def subset(self, index) -> "Dataset":
        """Rows selected by an :class:`IndexSet` or an integer array, in index order."""
        idx = index.indices if isinstance(index, IndexSet) else np.asarray(index, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.class_count)

    @cached_property
    def fingerprint(self) -> str:
        """SHA-256 of the class count, shape, features and labels."""
        h = hashlib.sha256()
        h.update(np.array([self.class_count, *self.features.shape], dtype=np.int64).tobytes())
        h.update(self.features.tobytes())
        h.update(self.labels.tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class IndexSet:
    """A non-empty, sorted set of row indices into a sample of size ``n``."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        if idx.size == 0:
            raise EmptySetError("index set is empty")
        srt = np.unique(idx)
        if srt.size != idx.size:
            raise ValueError("index set contains duplicates")
        if srt[0] < 0 or srt[-1] >= self.n:
            raise ValueError(f"indices must lie in [0, {self.n})")
        object.__setattr__(self, "indices", _readonly(srt))
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls(np.arange(n), n)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __iter__(self):
        return iter(self.indices.tolist())

    def __eq__(self, other):
        if not isinstance(other, IndexSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.indices, other.indices)

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def complement(self) -> "IndexSet":
        """Indices of ``{0, ..., n-1}`` not in this set; raises if that is empty."""
        mask = np.ones(self.n, dtype=bool)
        mask[self.indices] = False
        return IndexSet(np.flatnonzero(mask), self.n)

    def to_list(self) -> list[int]:
        return self.indices.tolist()


class Classifier:
    """A trained predictor. Subclasses implement :meth:`predict` on 2-D inputs.

    Instances are treated as immutable once built.
    """

    class_count: int = 2

    def predict(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict_one(self, x) -> int:
        return int(self.predict(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    def __call__(self, X) -> np.ndarray:
        return self.predict(X)


class ConstantClassifier(Classifier):
    def __init__(self, label: int, class_count: int = 2):
        self.label = int(label)
        self.class_count = class_count

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.full(X.shape[0], self.label, dtype=np.int64)

    def __repr__(self):
        return f"ConstantClassifier({self.label})"


class FunctionClassifier(Classifier):
    """Wraps a vectorised ``X -> labels`` function (Bayes classifiers, test doubles)."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], class_count: int = 2, name: str = ""):
        self._fn = fn
        self.class_count = class_count
        self.name = name

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.asarray(self._fn(X), dtype=np.int64).reshape(X.shape[0])

    def __repr__(self):
        return f"FunctionClassifier({self.name or self._fn!r})"


class LearningRule:
    """A named map from a :class:`Dataset` to a :class:`Classifier`.

    ``id`` orders rules for every argmin tie-break downstream, so families
    should use ids whose string order is meaningful (zero-padded numbers).
    ``train`` must be a deterministic function of the dataset.
    """

    id: str = ""

    def train(self, data: Dataset) -> Classifier:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.id!r})"


class FunctionRule(LearningRule):
    def __init__(self, id: str, fn: Callable[[Dataset], Classifier]):
        self.id = id
        self._fn = fn

    def train(self, data):
        return self._fn(data)


def error_count(f: Classifier, data: Dataset, B=None) -> tuple[int, int]:
    """Number of misclassified rows of ``B`` (all rows when ``None``) and ``|B|``.

    ``B`` is an :class:`IndexSet` or any integer index array.
    """
    if B is None:
        X, y = data.features, data.labels
    else:
        idx = B.indices if isinstance(B, IndexSet) else np.asarray(B, dtype=np.int64)
        X, y = data.features[idx], data.labels[idx]
    if y.shape[0] == 0:
        raise EmptySetError("empty evaluation set")
    pred = f.predict(X)
    return int(np.count_nonzero(pred != y)), int(y.shape[0])


def empirical_risk(f: Classifier, data: Dataset, B=None) -> float:
    """Misclassification fraction of ``f`` over the rows of ``B``."""
    errors, size = error_count(f, data, B)
    return errors / size


def test_risk(f: Classifier, test: Dataset) -> float:
    """Empirical risk on a held-out test sample (all of its rows)."""
    return empirical_risk(f, test)


test_risk.__test__ = False  # not a pytest test when imported into test modules


def excess_risk_estimate(f: Classifier, bayes: Classifier, test: Dataset) -> float:
    """``test_risk(f) - test_risk(bayes)``. Not clamped: sampling noise can make it negative."""
    ef, size = error_count(f, test)
    eb, _ = error_count(bayes, test)
    return (ef - eb) / size


def concat(datasets: Iterable[Dataset]) -> Dataset:
    ds = list(datasets)
    return Dataset(
        np.vstack([d.features for d in ds]),
        np.concatenate([d.labels for d in ds]),
        max(d.class_count for d in ds),
    )
