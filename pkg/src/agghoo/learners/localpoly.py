"""Local-polynomial plug-in classifiers with a Gaussian kernel.

For a query point ``x`` the regression function is estimated by the
constant term of the degree-``l`` polynomial ``Q`` minimising

    sum_i (Y_i - Q(X_i - x))^2 K((X_i - x) / h),

with ``K`` the standard Gaussian density on R^d.  Working in scaled
coordinates ``u_i = (X_i - x) / h`` leaves the constant term unchanged and
gives the normal equations ``B c = r`` with

    B[s1, s2] = 1/(n h^d) sum_i u_i^(s1+s2) K(u_i),
    r[s]      = 1/(n h^d) sum_i Y_i u_i^s K(u_i).

If the smallest singular value of ``B`` is below ``1 / log n`` the problem
is treated as ill-posed and the estimate is 0.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from ..core import Classifier, Dataset, LearningRule

_CHUNK = 256


@lru_cache(maxsize=None)
def monomial_exponents(d: int, degree: int) -> np.ndarray:
    """Exponent vectors of total degree <= ``degree``, graded lexicographic order.

    >>> monomial_exponents(2, 2).tolist()
    [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
    """
    out = []
    for total in range(degree + 1):
        block = [s for s in itertools.product(range(total + 1), repeat=d) if sum(s) == total]
        block.sort(reverse=True)
        out.extend(block)
    arr = np.array(out, dtype=np.int64).reshape(-1, d)
    arr.setflags(write=False)
    return arr


def gaussian_kernel(U: np.ndarray) -> np.ndarray:
    d = U.shape[-1]
    return np.exp(-0.5 * (U ** 2).sum(axis=-1)) / (2 * math.pi) ** (d / 2)


def guard_threshold(n: int) -> float:
    """Minimal admissible smallest singular value, ``1 / log n`` (infinite for n = 1)."""
    return math.inf if n <= 1 else 1.0 / math.log(n)


def _moments(X: np.ndarray, Y: np.ndarray, Q: np.ndarray, degree: int, h: float):
    """Batched ``B`` (q, m, m) and ``r`` (q, m) for query points ``Q``."""
    n, d = X.shape
    S = monomial_exponents(d, degree)
    U = (X[None, :, :] - Q[:, None, :]) / h  # (q, n, d)
    K = gaussian_kernel(U)  # (q, n)
    # Phi[q, i, s] = prod_k U[q, i, k] ** S[s, k]
    Phi = np.prod(U[:, :, None, :] ** S[None, None, :, :], axis=3)
    W = Phi * K[:, :, None]
    scale = 1.0 / (n * h ** d)
    B = np.einsum("qis,qit->qst", W, Phi) * scale
    r = np.einsum("qis,i->qs", W, Y) * scale
    return B, r


def localpoly_eta_batch(degree: int, h: float, data: Dataset, X) -> tuple[np.ndarray, np.ndarray]:
    """Estimated ``P(Y=1 | x)`` at every row of ``X`` and whether the guard passed."""
    if data.class_count != 2:
        raise ValueError("local-polynomial rules need binary labels")
    if h <= 0:
        raise ValueError("bandwidth must be positive")
    if degree < 0:
        raise ValueError("degree must be non-negative")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Xt = data.features
    Y = data.labels.astype(np.float64)
    thr = guard_threshold(data.n)
    eta = np.zeros(X.shape[0])
    ok = np.zeros(X.shape[0], dtype=bool)
    for start in range(0, X.shape[0], _CHUNK):
        Qpts = X[start:start + _CHUNK]
        B, r = _moments(Xt, Y, Qpts, degree, h)
        # B is symmetric PSD: its smallest singular value is its smallest eigenvalue
        smin = np.linalg.svd(B, compute_uv=False)[:, -1]
        good = smin >= thr
        if good.any():
            coef = np.einsum("qst,qt->qs", np.linalg.pinv(B[good], hermitian=True), r[good])
            eta[start:start + _CHUNK][good] = coef[:, 0]
        ok[start:start + _CHUNK] = good
    return eta, ok


def localpoly_eta(degree: int, h: float, data: Dataset, x) -> float:
    """Estimate at a single point; 0 when the guard fails."""
    eta, _ = localpoly_eta_batch(degree, h, data, np.asarray(x, dtype=np.float64).reshape(1, -1))
    return float(eta[0])


class LocalPolyClassifier(Classifier):
    """Plug-in rule ``1{eta_hat(x) >= 1/2}``."""

    class_count = 2

    def __init__(self, degree: int, h: float, data: Dataset):
        self.degree = degree
        self.h = h
        self._data = data

    def eta(self, X) -> np.ndarray:
        return localpoly_eta_batch(self.degree, self.h, self._data, X)[0]

    def predict(self, X):
        return (self.eta(X) >= 0.5).astype(np.int64)

    def __repr__(self):
        return f"LocalPolyClassifier(degree={self.degree}, h={self.h:g})"


class LocalPolyRule(LearningRule):
    def __init__(self, degree: int, h: float, k: int | None = None):
        if degree < 0:
            raise ValueError("degree must be non-negative")
        if not h > 0:
            raise ValueError("bandwidth must be positive")
        self.degree = int(degree)
        self.h = float(h)
        self.id = (
            f"lp-l={self.degree:02d}-k={k:04d}" if k is not None
            else f"lp-l={self.degree:02d}-h={self.h:018.12f}"
        )

    def train(self, data: Dataset) -> LocalPolyClassifier:
        if self.degree > data.n:
            raise ValueError(f"degree {self.degree} exceeds the sample size {data.n}")
        return LocalPolyClassifier(self.degree, self.h, data)


def localpoly_rule(degree: int, h: float) -> LocalPolyRule:
    return LocalPolyRule(degree, h)


def lp_collection(n: int | None = None, cap_degree: int = 3, cap_k: int = 20) -> list[LocalPolyRule]:
    """Rules with degree ``1..cap_degree`` and bandwidth ``1/k`` for ``k = 1..cap_k``.

    Caps are further limited by ``n`` when given, as in the full collection
    indexed by ``1 <= l, k <= n``.
    """
    if n is not None:
        cap_degree, cap_k = min(cap_degree, n), min(cap_k, n)
    if cap_degree < 1 or cap_k < 1:
        raise ValueError("empty grid")
    return [
        LocalPolyRule(degree, 1.0 / k, k=k)
        for degree in range(1, cap_degree + 1)
        for k in range(1, cap_k + 1)
    ]
