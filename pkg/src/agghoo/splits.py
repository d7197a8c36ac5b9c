"""Collections of training sets for hold-out, cross-validation and Agghoo.

Generators only ever see ``n``, the scheme parameters and a seed, so the
training sets are independent of the data by construction.  Each set is
drawn from its own generator keyed on ``(seed, j)``; plans with the same
seed and ``tau`` but different ``V`` therefore share their leading sets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import IndexSet

_VFOLD_STREAM = 0x5F0D  # keeps the V-fold permutation stream apart from (seed, j) streams


class DegenerateSplitError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SplitPlan:
    """``V`` training index sets over ``{0, ..., n-1}``.

    ``strict`` is False when the sets do not all have the same size
    (V-fold with ``V`` not dividing ``n``).
    """

    n: int
    scheme: str
    sets: tuple[IndexSet, ...]
    seed: int
    params: dict = field(default_factory=dict)
    strict: bool = True

    def __post_init__(self):
        if not self.sets:
            raise ValueError("a split plan needs at least one training set")
        for T in self.sets:
            if T.n != self.n:
                raise ValueError("training set built for a different sample size")
            if not 1 <= len(T) <= self.n - 1:
                raise DegenerateSplitError("degenerate split")
        sizes = {len(T) for T in self.sets}
        if self.strict and len(sizes) != 1:
            raise ValueError("strict plan with unequal training-set sizes")
        object.__setattr__(self, "sets", tuple(self.sets))

    @property
    def V(self) -> int:
        return len(self.sets)

    @property
    def train_size(self) -> int:
        """``n - p``; for a non-strict plan, the size of the smallest set."""
        return min(len(T) for T in self.sets)

    @property
    def train_sizes(self) -> list[int]:
        return [len(T) for T in self.sets]

    @property
    def p(self) -> int:
        return self.n - self.train_size

    def __iter__(self):
        return iter(self.sets)

    def __len__(self):
        return len(self.sets)

    def __getitem__(self, j):
        return self.sets[j]

    def head(self, V: int) -> "SplitPlan":
        """The plan restricted to its first ``V`` sets."""
        sets = self.sets[:V]
        return SplitPlan(
            self.n, self.scheme, sets, self.seed, dict(self.params),
            strict=len({len(T) for T in sets}) == 1,
        )

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "scheme": self.scheme,
            "params": self.params,
            "seed": self.seed,
            "strict": self.strict,
            "sets": [T.to_list() for T in self.sets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SplitPlan":
        n = int(d["n"])
        return cls(
            n=n,
            scheme=d["scheme"],
            sets=tuple(IndexSet(s, n) for s in d["sets"]),
            seed=int(d["seed"]),
            params=dict(d.get("params", {})),
            strict=bool(d.get("strict", True)),
        )

    @classmethod
    def from_json(cls, s: str) -> "SplitPlan":
        return cls.from_dict(json.loads(s))


def train_size_for(n: int, tau: float) -> int:
    # floor(tau * n), guarded against 0.7 * 10 == 6.999...
    return int(math.floor(tau * n + 1e-9))


def monte_carlo_splits(n: int, tau: float, V: int, seed: int) -> SplitPlan:
    """``V`` independent uniform subsets of size ``floor(tau * n)``.

    Examples
    --------
    >>> plan = monte_carlo_splits(10, 0.5, 3, seed=1)
    >>> plan.train_sizes
    [5, 5, 5]
    """
    if V < 1:
        raise ValueError("V must be at least 1")
    if not 0.0 < tau < 1.0:
        raise DegenerateSplitError("degenerate split")
    size = train_size_for(n, tau)
    if size < 1 or size > n - 1:
        raise DegenerateSplitError("degenerate split")
    sets = []
    for j in range(V):
        rng = np.random.default_rng([seed, j])
        sets.append(IndexSet(rng.choice(n, size=size, replace=False), n))
    return SplitPlan(n, "monte-carlo", tuple(sets), seed, {"tau": tau, "V": V})


def vfold_splits(n: int, V: int, seed: int) -> SplitPlan:
    """V-fold training sets: a random permutation cut into ``V`` near-equal folds.

    ``T_j`` is the complement of fold ``j``.  When ``V`` does not divide
    ``n`` the folds differ in size by one and the plan is non-strict.
    """
    if V < 2:
        raise ValueError("V-fold needs V >= 2")
    if V > n:
        raise ValueError(f"V={V} exceeds n={n}")
    rng = np.random.default_rng([seed, _VFOLD_STREAM])
    perm = rng.permutation(n)
    folds = np.array_split(perm, V)
    sets = []
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        sets.append(IndexSet(np.flatnonzero(mask), n))
    return SplitPlan(n, "v-fold", tuple(sets), seed, {"V": V}, strict=(n % V == 0))


def validation_folds(plan: SplitPlan) -> list[IndexSet]:
    return [T.complement() for T in plan.sets]
