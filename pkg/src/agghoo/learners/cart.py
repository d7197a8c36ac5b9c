"""CART classification trees with cost-complexity pruning.

A tree is grown greedily with the Gini criterion until no split of a node
strictly lowers impurity.  The weakest-link path then gives, for every
``alpha >= 0``, the smallest rooted subtree minimising

    training error rate + alpha * number of leaves.

Error counts are integers, so the path breakpoints are exact fractions and
the argmin can be compared exactly against brute-force enumeration.
"""

from __future__ import annotations

import bisect
import json
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..core import Classifier, Dataset, LearningRule

LEAF = -1


class CartTree(Classifier):
    """Binary tree of axis-aligned splits ``x[feature] <= threshold`` (left) / ``>`` (right).

    Nodes are stored in preorder.  A pruned subtree keeps the node numbering
    of the tree it came from; collapsed nodes simply become leaves, so two
    subtrees of the same grown tree can be compared by their leaf ids.
    """

    def __init__(self, feature, threshold, left, right, counts, n_train: int):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)
        self.class_count = self.counts.shape[1]
        self.n_train = int(n_train)
        for a in (self.feature, self.threshold, self.left, self.right, self.counts):
            a.setflags(write=False)
        # majority label per node, ties to the smallest label
        self.node_label = np.argmax(self.counts, axis=1).astype(np.int64)
        self.node_errors = self.counts.sum(axis=1) - self.counts.max(axis=1)
        self._leaves = self._reachable_leaves()

    def _reachable_leaves(self) -> tuple[int, ...]:
        out, stack = [], [0]
        while stack:
            t = stack.pop()
            if self.left[t] == LEAF:
                out.append(t)
            else:
                stack.append(self.right[t])
                stack.append(self.left[t])
        return tuple(sorted(out))

    @property
    def leaves(self) -> tuple[int, ...]:
        return self._leaves

    @property
    def n_leaves(self) -> int:
        return len(self._leaves)

    @property
    def training_errors(self) -> int:
        return int(sum(self.node_errors[t] for t in self._leaves))

    def is_leaf(self, t: int) -> bool:
        return self.left[t] == LEAF

    def apply(self, X) -> np.ndarray:
        """Leaf node id reached by each row of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.left[node] != LEAF)
        while active.size:
            t = node[active]
            go_left = X[active, self.feature[t]] <= self.threshold[t]
            node[active] = np.where(go_left, self.left[t], self.right[t])
            active = active[self.left[node[active]] != LEAF]
        return node

    def predict(self, X):
        return self.node_label[self.apply(X)]

    def collapse(self, nodes) -> "CartTree":
        """Copy of this tree with every node in ``nodes`` turned into a leaf."""
        feature, left, right = self.feature.copy(), self.left.copy(), self.right.copy()
        for t in nodes:
            feature[t] = LEAF
            left[t] = LEAF
            right[t] = LEAF
        return CartTree(feature, self.threshold, left, right, self.counts, self.n_train)

    def to_dict(self, t: int = 0) -> dict:
        node = {
            "node": int(t),
            "counts": self.counts[t].tolist(),
            "label": int(self.node_label[t]),
        }
        if self.left[t] != LEAF:
            node["feature"] = int(self.feature[t])
            node["threshold"] = float(self.threshold[t])
            node["left"] = self.to_dict(int(self.left[t]))
            node["right"] = self.to_dict(int(self.right[t]))
        return node

    def to_json(self) -> str:
        return json.dumps({
            "n_train": self.n_train,
            "n_leaves": self.n_leaves,
            "training_errors": self.training_errors,
            "root": self.to_dict(),
        })

    def __repr__(self):
        return f"CartTree(leaves={self.n_leaves}, n_train={self.n_train})"


def _best_split(X: np.ndarray, y: np.ndarray, M: int):
    """Best Gini split of the rows ``(X, y)``, or ``None`` if none strictly helps.

    Returns ``(feature, threshold, left_mask)``.  Ties go to the lowest
    feature index, then the lowest threshold.
    """
    m = y.shape[0]
    onehot = np.zeros((m, M), dtype=np.int64)
    onehot[np.arange(m), y] = 1
    total = onehot.sum(axis=0)
    parent_sq = int((total ** 2).sum())
    nl = np.arange(1, m, dtype=np.int64)
    nr = m - nl
    best_score, best = None, None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        cum = np.cumsum(onehot[order], axis=0)[:-1]
        lsq = (cum ** 2).sum(axis=1)
        rsq = ((total - cum) ** 2).sum(axis=1)
        # minimising weighted Gini  <=>  maximising lsq/nl + rsq/nr
        score = lsq / nl + rsq / nr
        score[~valid] = -np.inf
        i = int(np.argmax(score))
        if best_score is None or score[i] > best_score:
            best_score = score[i]
            best = (f, i, order, xs)
    if best is None:
        return None
    f, i, order, xs = best
    # strict decrease checked in exact integer arithmetic
    cl = onehot[order][: i + 1].sum(axis=0)
    a, b = int(nl[i]), int(nr[i])
    lsq, rsq = int((cl ** 2).sum()), int(((total - cl) ** 2).sum())
    if lsq * b * m + rsq * a * m <= parent_sq * a * b:
        return None
    threshold = (xs[i] + xs[i + 1]) / 2.0
    if not xs[i] <= threshold < xs[i + 1]:
        threshold = xs[i]
    return f, threshold, X[:, f] <= threshold


def cart_grow(data: Dataset) -> CartTree:
    """Fully grown Gini tree: a node splits while some split strictly lowers impurity."""
    X, y, M = data.features, data.labels, data.class_count
    feature, threshold, left, right, counts = [], [], [], [], []
    # (row indices, parent node, is_left)
    stack = [(np.arange(data.n), -1, False)]
    while stack:
        rows, parent, is_left = stack.pop()
        t = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = t
        yr = y[rows]
        c = np.bincount(yr, minlength=M)
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(c)
        if rows.shape[0] < 2 or np.count_nonzero(c) < 2:
            continue
        split = _best_split(X[rows], yr, M)
        if split is None:
            continue
        f, thr, mask = split
        feature[t] = f
        threshold[t] = thr
        # right pushed first so the left child gets the next preorder id
        stack.append((rows[~mask], t, False))
        stack.append((rows[mask], t, True))
    return CartTree(feature, threshold, left, right, np.array(counts), data.n)


@dataclass(frozen=True, eq=False)
class PrunePath:
    """Weakest-link path: ``subtrees[i]`` is optimal for ``breakpoints[i] <= alpha < breakpoints[i+1]``."""

    breakpoints: tuple[Fraction, ...]
    subtrees: tuple[CartTree, ...]

    def __len__(self):
        return len(self.breakpoints)

    def index_for(self, alpha) -> int:
        a = Fraction(alpha)
        if a < 0:
            raise ValueError("alpha must be non-negative")
        return bisect.bisect_right(self.breakpoints, a) - 1

    def select(self, alpha) -> CartTree:
        return self.subtrees[self.index_for(alpha)]


def _subtree_stats(tree: CartTree):
    """Leaves and training errors of every reachable node's subtree (postorder)."""
    n_nodes = tree.left.shape[0]
    leaves = np.zeros(n_nodes, dtype=np.int64)
    errs = np.zeros(n_nodes, dtype=np.int64)
    order, stack = [], [0]
    while stack:
        t = stack.pop()
        order.append(t)
        if tree.left[t] != LEAF:
            stack.append(tree.left[t])
            stack.append(tree.right[t])
    internal = []
    for t in reversed(order):
        if tree.left[t] == LEAF:
            leaves[t] = 1
            errs[t] = tree.node_errors[t]
        else:
            leaves[t] = leaves[tree.left[t]] + leaves[tree.right[t]]
            errs[t] = errs[tree.left[t]] + errs[tree.right[t]]
            internal.append(t)
    return internal, leaves, errs


def _link_strengths(tree: CartTree, n: int) -> dict[int, Fraction]:
    internal, leaves, errs = _subtree_stats(tree)
    return {
        t: Fraction(int(tree.node_errors[t] - errs[t]), n * int(leaves[t] - 1))
        for t in internal
    }


def _prune_up_to(tree: CartTree, alpha: Fraction, n: int) -> CartTree:
    while True:
        g = _link_strengths(tree, n)
        weak = [t for t, v in g.items() if v <= alpha]
        if not weak:
            return tree
        tree = tree.collapse(weak)


def cart_prune_path(tree: CartTree, data: Dataset | None = None) -> PrunePath:
    """Cost-complexity path of ``tree``; ties in the argmin go to the smaller subtree.

    ``data`` is accepted for symmetry with growth; the node class counts
    cached on the tree already hold everything needed.
    """
    n = tree.n_train if data is None else data.n
    cur = _prune_up_to(tree, Fraction(0), n)
    breakpoints, subtrees = [Fraction(0)], [cur]
    while cur.n_leaves > 1:
        alpha = min(_link_strengths(cur, n).values())
        cur = _prune_up_to(cur, alpha, n)
        breakpoints.append(alpha)
        subtrees.append(cur)
    return PrunePath(tuple(breakpoints), tuple(subtrees))


_PATH_CACHE: OrderedDict[str, PrunePath] = OrderedDict()
_PATH_CACHE_SIZE = 64


def grown_path(data: Dataset) -> PrunePath:
    """Grow and prune once per distinct dataset; all alphas share the result."""
    key = data.fingerprint
    path = _PATH_CACHE.get(key)
    if path is None:
        path = cart_prune_path(cart_grow(data), data)
        _PATH_CACHE[key] = path
        if len(_PATH_CACHE) > _PATH_CACHE_SIZE:
            _PATH_CACHE.popitem(last=False)
    else:
        _PATH_CACHE.move_to_end(key)
    return path


class CartRule(LearningRule):
    """Fully grown CART pruned at complexity ``alpha``."""

    def __init__(self, alpha: float):
        alpha = float(alpha)
        if not alpha >= 0:
            raise ValueError("alpha must be non-negative")
        self.alpha = alpha
        # fixed-point with padding so that string order is numeric order
        self.id = f"cart-alpha={alpha:021.12f}"

    def train(self, data: Dataset) -> CartTree:
        return grown_path(data).select(self.alpha)


def cart_rule(alpha: float) -> CartRule:
    return CartRule(alpha)


def alpha_grid(alpha_min: float = 1e-4, ratio: float = 1.5, size: int = 40) -> list[float]:
    if size < 1:
        raise ValueError("empty grid")
    if alpha_min <= 0 or ratio <= 1:
        raise ValueError("need alpha_min > 0 and ratio > 1")
    return [alpha_min * ratio ** g for g in range(size)]


def cart_family(alpha_min: float = 1e-4, ratio: float = 1.5, size: int = 40) -> list[CartRule]:
    return [CartRule(a) for a in alpha_grid(alpha_min, ratio, size)]

