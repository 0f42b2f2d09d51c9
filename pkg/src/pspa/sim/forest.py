"""Small regression forest with a compiled split search.

Randomness (bootstrap rows and per-node feature keys) is drawn up front from a
numpy Generator, so the numba and numpy tree builders see identical inputs and
grow identical trees. Nodes are numbered in depth-first order, left child
first.
"""
import numpy as np

from .._accel import HAVE_NUMBA, njit

__all__ = ["RegressionForest", "build_tree_numba", "build_tree_numpy", "predict_tree"]


@njit(cache=True)
def build_tree_numba(X, y, rows, keys, mtry, min_leaf, max_depth):
    max_nodes = keys.shape[0]
    p = X.shape[1]
    feature = np.full(max_nodes, -1, dtype=np.int64)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int64)
    right = np.full(max_nodes, -1, dtype=np.int64)
    value = np.zeros(max_nodes)

    idx = rows.copy()
    scratch = np.empty_like(idx)
    st_node = np.empty(max_nodes, dtype=np.int64)
    st_lo = np.empty(max_nodes, dtype=np.int64)
    st_hi = np.empty(max_nodes, dtype=np.int64)
    st_depth = np.empty(max_nodes, dtype=np.int64)
    top = 0
    st_node[0] = 0
    st_lo[0] = 0
    st_hi[0] = idx.shape[0]
    st_depth[0] = 0
    top = 1
    n_nodes = 1
    xs = np.empty(idx.shape[0])
    ys = np.empty(idx.shape[0])

    while top > 0:
        top -= 1
        node = st_node[top]
        lo = st_lo[top]
        hi = st_hi[top]
        depth = st_depth[top]
        m = hi - lo
        total = 0.0
        for i in range(lo, hi):
            total += y[idx[i]]
        value[node] = total / m
        if m < 2 * min_leaf or depth >= max_depth:
            continue

        cand = np.argsort(keys[node], kind="mergesort")[:mtry]
        best_gain = 1e-12
        best_f = -1
        best_thr = 0.0
        base = total * total / m
        for c in range(cand.shape[0]):
            f = cand[c]
            for i in range(m):
                xs[i] = X[idx[lo + i], f]
            order = np.argsort(xs[:m], kind="mergesort")
            for i in range(m):
                ys[i] = y[idx[lo + order[i]]]
            s = 0.0
            for i in range(m - min_leaf):
                s += ys[i]
                k = i + 1
                if k < min_leaf:
                    continue
                xa = xs[order[i]]
                xb = xs[order[i + 1]]
                if not xa < xb:
                    continue
                r = total - s
                gain = s * s / k + r * r / (m - k) - base
                if gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_thr = 0.5 * (xa + xb)
        if best_f < 0:
            continue

        nl = 0
        nr = 0
        for i in range(lo, hi):
            r_ = idx[i]
            if X[r_, best_f] <= best_thr:
                idx[lo + nl] = r_
                nl += 1
            else:
                scratch[nr] = r_
                nr += 1
        for i in range(nr):
            idx[lo + nl + i] = scratch[i]

        feature[node] = best_f
        threshold[node] = best_thr
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        left[node] = lc
        right[node] = rc
        # push right first so the left subtree is expanded next
        st_node[top] = rc
        st_lo[top] = lo + nl
        st_hi[top] = hi
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = lc
        st_lo[top] = lo
        st_hi[top] = lo + nl
        st_depth[top] = depth + 1
        top += 1
    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes]


def build_tree_numpy(X, y, rows, keys, mtry, min_leaf, max_depth):
    """Same tree as :func:`build_tree_numba`, with the split search vectorised."""
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    stack = [(new_node(), rows.copy(), 0)]
    while stack:
        node, seg, depth = stack.pop()
        m = seg.shape[0]
        yseg = y[seg]
        total = 0.0
        for v in yseg:  # sequential sum, matching the compiled builder
            total += v
        value[node] = total / m
        if m < 2 * min_leaf or depth >= max_depth:
            continue
        cand = np.argsort(keys[node], kind="mergesort")[:mtry]
        base = total * total / m
        best_gain, best_f, best_thr = 1e-12, -1, 0.0
        k = np.arange(1, m - min_leaf + 1)
        for f in cand:
            xs = X[seg, f]
            order = np.argsort(xs, kind="mergesort")
            xo = xs[order]
            s = np.cumsum(yseg[order])[: m - min_leaf]
            r = total - s
            gain = s * s / k + r * r / (m - k) - base
            ok = (k >= min_leaf) & (xo[: m - min_leaf] < xo[1 : m - min_leaf + 1])
            if not ok.any():
                continue
            gain = np.where(ok, gain, -np.inf)
            i = int(np.argmax(gain))
            if gain[i] > best_gain:
                best_gain, best_f, best_thr = gain[i], int(f), 0.5 * (xo[i] + xo[i + 1])
        if best_f < 0:
            continue
        go_left = X[seg, best_f] <= best_thr
        feature[node] = best_f
        threshold[node] = best_thr
        lc = new_node()
        rc = new_node()
        left[node], right[node] = lc, rc
        stack.append((rc, seg[~go_left], depth + 1))
        stack.append((lc, seg[go_left], depth + 1))
    return (
        np.array(feature, dtype=np.int64),
        np.array(threshold),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value),
    )


def predict_tree(tree, X):
    feature, threshold, left, right, value = tree
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    while True:
        internal = feature[node] >= 0
        if not internal.any():
            return value[node]
        r = rows[internal]
        nd = node[internal]
        go_left = X[r, feature[nd]] <= threshold[nd]
        node[r] = np.where(go_left, left[nd], right[nd])


class RegressionForest:
    """Bagged CART regression trees with random feature subsets at each node.

    Defaults follow the common regression-forest settings: 100 trees,
    a third of the features per split and leaves of at least 5 rows.
    """

    def __init__(self, n_trees=100, mtry=None, min_leaf=5, max_depth=64, rng=None, backend=None):
        self.n_trees = n_trees
        self.mtry = mtry
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.rng = rng if rng is not None else np.random.default_rng(0)
        if backend is None:
            backend = "numba" if HAVE_NUMBA else "numpy"
        self.backend = backend
        self.trees = []

    def fit(self, X, y):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64)
        m, p = X.shape
        mtry = self.mtry or max(1, p // 3)
        max_nodes = 2 * (m // self.min_leaf) + 1
        build = build_tree_numba if self.backend == "numba" else build_tree_numpy
        self.trees = []
        for _ in range(self.n_trees):
            rows = self.rng.integers(0, m, size=m).astype(np.int64)
            keys = self.rng.random((max_nodes, p))
            self.trees.append(build(X, y, rows, keys, mtry, self.min_leaf, self.max_depth))
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros(X.shape[0])
        for tree in self.trees:
            out += predict_tree(tree, X)
        return out / len(self.trees)
