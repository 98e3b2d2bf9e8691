"""Depth-limited CART regression tree (variance reduction splits)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class Node:
    feature_idx: int
    split_value: float
    left: int
    right: int
    leaf_value: float
    n_samples: int
    impurity: float

    @property
    def is_leaf(self) -> bool:
        return self.feature_idx == LEAF


class RegressionTree:
    """Binary regression tree stored as a flat preorder node list.

    Samples with ``x[feature_idx] <= split_value`` go left.  Every node keeps
    its mean target (``leaf_value``), sample count and variance so feature
    importances can be recomputed from a deserialized tree.
    """

    def __init__(self, nodes: list[Node] | None = None, n_features: int | None = None):
        self.nodes = nodes or []
        self.n_features = n_features
        self._arrays = None

    def fit(self, x: np.ndarray, y: np.ndarray, max_depth: int = 3) -> "RegressionTree":
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self.n_features = x.shape[1]
        self.nodes = []
        self._arrays = None
        self._grow(x, y, np.arange(len(y)), 0, max_depth)
        return self

    def _grow(self, x, y, idx, depth, max_depth) -> int:
        ys = y[idx]
        n = len(ys)
        mean = float(ys.mean())
        sse = float(((ys - mean) ** 2).sum())
        me = len(self.nodes)
        self.nodes.append(Node(LEAF, 0.0, LEAF, LEAF, mean, n, sse / n))
        if depth >= max_depth or n < 2 or sse <= 0.0:
            return me
        split = _best_split(x[idx], ys, sse)
        if split is None:
            return me
        f, thr = split
        go_left = x[idx, f] <= thr
        node = self.nodes[me]
        node.feature_idx, node.split_value = f, thr
        node.left = self._grow(x, y, idx[go_left], depth + 1, max_depth)
        node.right = self._grow(x, y, idx[~go_left], depth + 1, max_depth)
        return me

    def _compiled(self):
        if self._arrays is None:
            self._arrays = (
                np.array([n.feature_idx for n in self.nodes], dtype=np.int64),
                np.array([n.split_value for n in self.nodes], dtype=np.float64),
                np.array([n.left for n in self.nodes], dtype=np.int64),
                np.array([n.right for n in self.nodes], dtype=np.int64),
                np.array([n.leaf_value for n in self.nodes], dtype=np.float64),
            )
        return self._arrays

    def predict(self, x: np.ndarray) -> np.ndarray:
        if not self.nodes:
            raise ValueError("tree has not been fitted")
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        feat, thr, left, right, value = self._compiled()
        at = np.zeros(len(x), dtype=np.int64)
        rows = np.arange(len(x))
        active = feat[at] != LEAF
        while active.any():
            a = at[active]
            go_left = x[rows[active], feat[a]] <= thr[a]
            at[active] = np.where(go_left, left[a], right[a])
            active = feat[at] != LEAF
        return value[at]

    def raw_importances(self) -> np.ndarray:
        """Total weighted variance reduction contributed by each feature."""
        imp = np.zeros(self.n_features)
        for node in self.nodes:
            if node.is_leaf:
                continue
            l, r = self.nodes[node.left], self.nodes[node.right]
            imp[node.feature_idx] += (
                node.n_samples * node.impurity - l.n_samples * l.impurity - r.n_samples * r.impurity
            )
        return imp

    @property
    def depth(self) -> int:
        def d(i):
            n = self.nodes[i]
            return 0 if n.is_leaf else 1 + max(d(n.left), d(n.right))

        return d(0) if self.nodes else 0


def _best_split(x: np.ndarray, y: np.ndarray, sse_parent: float):
    """Lowest-SSE split; ties go to the lower feature index, then lower threshold."""
    n = len(y)
    best = None
    best_sse = sse_parent
    for f in range(x.shape[1]):
        order = np.argsort(x[:, f], kind="stable")
        xs, ys = x[order, f], y[order]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        cs = np.cumsum(ys)[:-1]
        cs2 = np.cumsum(ys * ys)[:-1]
        tot, tot2 = cs[-1] + ys[-1], cs2[-1] + ys[-1] ** 2
        nl = np.arange(1, n)
        nr = n - nl
        sse = (cs2 - cs * cs / nl) + ((tot2 - cs2) - (tot - cs) ** 2 / nr)
        sse = np.where(valid, sse, np.inf)
        i = int(np.argmin(sse))
        if sse[i] < best_sse:
            best_sse = sse[i]
            lo, hi = xs[i], xs[i + 1]
            thr = lo + (hi - lo) / 2.0
            if not lo <= thr < hi:
                thr = lo
            best = (f, float(thr))
    return best
