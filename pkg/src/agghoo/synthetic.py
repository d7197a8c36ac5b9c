"""Synthetic binary problems with known regression functions.

``SigmoidProblem``: X uniform on [0, 1]^2 and

    P(Y = 1 | X = x) = sigmoid((g(x) - b) / lam),
    g(u, v) = exp(-(u^2 + v)^3) + u^2 + v^2,  b = 1.18,  lam = 0.05.

``GaussMixProblem``: Y ~ Bernoulli(1/2), eps ~ Bernoulli(0.7) independent;
given (Y, eps) the d >= 6 coordinates are independent unit-variance
normals.  With eps = 1 coordinate j in {1, 2, 3} has mean j * Y; with
eps = 0 coordinate j in {4, 5, 6} has mean (j - 3) * Y; all other means
are zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import expit, logsumexp

from .core import Dataset, FunctionClassifier

__all__ = [
    "SigmoidProblem",
    "GaussMixProblem",
    "sample_sigmoid",
    "bayes_sigmoid",
    "eta_sigmoid",
    "bayes_risk_sigmoid",
    "sample_gaussmix",
    "eta_gaussmix",
    "bayes_gaussmix",
    "bayes_risk_gaussmix",
    "make_problem",
]


def _g(X: np.ndarray) -> np.ndarray:
    u, v = X[:, 0], X[:, 1]
    return np.exp(-((u ** 2 + v) ** 3)) + u ** 2 + v ** 2


@dataclass(frozen=True)
class SigmoidProblem:
    b: float = 1.18
    lam: float = 0.05
    dim: int = 2

    def g(self, X) -> np.ndarray:
        return _g(np.atleast_2d(np.asarray(X, dtype=np.float64)))

    def eta(self, X) -> np.ndarray:
        return expit((self.g(X) - self.b) / self.lam)

    def sample(self, n: int, seed) -> Dataset:
        if n < 1:
            raise ValueError("n must be at least 1")
        rng = np.random.default_rng(seed)
        X = rng.random((n, 2))
        y = (rng.random(n) < self.eta(X)).astype(np.int64)
        return Dataset(X, y, 2)

    def bayes_labels(self, X) -> np.ndarray:
        return (self.g(X) >= self.b).astype(np.int64)

    def bayes(self) -> FunctionClassifier:
        return FunctionClassifier(self.bayes_labels, 2, name="bayes-sigmoid")

    def bayes_risk(self, grid_size: int = 2000) -> float:
        """Integral of min(eta, 1 - eta) over the unit square by composite Simpson.

        ``grid_size`` is the number of intervals per axis (rounded up to even).
        """
        if grid_size < 100:
            raise ValueError("grid_size must be at least 100")
        grid_size += grid_size % 2
        t = np.linspace(0.0, 1.0, grid_size + 1)
        inner = np.empty_like(t)
        chunk = 256
        for start in range(0, t.shape[0], chunk):
            u = t[start:start + chunk]
            U, V = np.meshgrid(u, t, indexing="ij")
            eta = self.eta(np.column_stack([U.ravel(), V.ravel()])).reshape(U.shape)
            inner[start:start + chunk] = simpson(np.minimum(eta, 1.0 - eta), x=t, axis=1)
        return float(simpson(inner, x=t))


@dataclass(frozen=True)
class GaussMixProblem:
    dim: int = 7
    p_eps: float = 0.7

    def __post_init__(self):
        if self.dim < 6:
            raise ValueError("GaussMix needs d >= 6")

    def means(self, y: int, eps: int) -> np.ndarray:
        mu = np.zeros(self.dim)
        if y == 1:
            if eps == 1:
                mu[0:3] = (1.0, 2.0, 3.0)
            else:
                mu[3:6] = (1.0, 2.0, 3.0)
        return mu

    def sample(self, n: int, seed) -> Dataset:
        if n < 1:
            raise ValueError("n must be at least 1")
        rng = np.random.default_rng(seed)
        y = rng.integers(0, 2, size=n)
        eps = rng.random(n) < self.p_eps
        X = rng.standard_normal((n, self.dim))
        shift = np.array([1.0, 2.0, 3.0])
        X[:, 0:3] += (y * eps)[:, None] * shift
        X[:, 3:6] += (y * ~eps)[:, None] * shift
        return Dataset(X, y, 2)

    def log_odds(self, X) -> np.ndarray:
        """log P(Y=1 | x) - log P(Y=0 | x); only coordinates 1-6 enter."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dim:
            raise ValueError(f"expected {self.dim} features, got {X.shape[1]}")
        Z = X[:, :6]
        shift = np.array([1.0, 2.0, 3.0])
        # log N(x; mu, I) up to the shared constant; noise coordinates cancel
        base = -0.5 * (Z ** 2).sum(axis=1)
        la = -0.5 * ((Z[:, 0:3] - shift) ** 2).sum(axis=1) - 0.5 * (Z[:, 3:6] ** 2).sum(axis=1)
        lb = -0.5 * (Z[:, 0:3] ** 2).sum(axis=1) - 0.5 * ((Z[:, 3:6] - shift) ** 2).sum(axis=1)
        log1 = logsumexp(
            np.stack([la + math.log(self.p_eps), lb + math.log(1.0 - self.p_eps)]), axis=0
        )
        return log1 - base

    def eta(self, X) -> np.ndarray:
        return expit(self.log_odds(X))

    def bayes_labels(self, X) -> np.ndarray:
        return (self.log_odds(X) >= 0.0).astype(np.int64)

    def bayes(self) -> FunctionClassifier:
        return FunctionClassifier(self.bayes_labels, 2, name=f"bayes-gaussmix-d{self.dim}")

    def bayes_risk(self, mc_n: int = 1_000_000, seed=0, chunk: int = 100_000) -> tuple[float, float]:
        """Monte-Carlo estimate of E[min(eta, 1 - eta)] and its standard error."""
        if mc_n < 2:
            raise ValueError("mc_n must be at least 2")
        total = total_sq = 0.0
        done, part = 0, 0
        while done < mc_n:
            m = min(chunk, mc_n - done)
            X = self.sample(m, [int(seed), part]).features
            eta = self.eta(X)
            r = np.minimum(eta, 1.0 - eta)
            total += float(r.sum())
            total_sq += float((r ** 2).sum())
            done += m
            part += 1
        mean = total / mc_n
        var = max(total_sq / mc_n - mean ** 2, 0.0) * mc_n / (mc_n - 1)
        return mean, math.sqrt(var / mc_n)


_SIGMOID = SigmoidProblem()


def sample_sigmoid(n: int, seed) -> Dataset:
    return _SIGMOID.sample(n, seed)


def eta_sigmoid(X) -> np.ndarray:
    return _SIGMOID.eta(X)


def bayes_sigmoid() -> FunctionClassifier:
    return _SIGMOID.bayes()


def bayes_risk_sigmoid(grid_size: int = 2000) -> float:
    return _SIGMOID.bayes_risk(grid_size)


def sample_gaussmix(n: int, d: int, seed) -> Dataset:
    return GaussMixProblem(d).sample(n, seed)


def eta_gaussmix(x, d: int) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    eta = GaussMixProblem(d).eta(x)
    return float(eta[0]) if x.ndim == 1 else eta


def bayes_gaussmix(d: int) -> FunctionClassifier:
    return GaussMixProblem(d).bayes()


def bayes_risk_gaussmix(d: int = 7, mc_n: int = 1_000_000, seed=0) -> tuple[float, float]:
    return GaussMixProblem(d).bayes_risk(mc_n, seed)


def make_problem(name: str, d: int = 7):
    if name == "sigmoid":
        return SigmoidProblem()
    if name == "gaussmix":
        return GaussMixProblem(d)
    raise ValueError(f"unknown synthetic problem {name!r}")
