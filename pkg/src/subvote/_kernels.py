"""Hot numeric kernels: CART tree growth and traversal.

Two interchangeable implementations live here: numba ``@njit`` kernels
(default) and a pure-numpy path selected by setting the environment
variable ``SUBVOTE_PURE_NUMPY=1`` before import (or used automatically
when numba is unavailable). Both paths share one counter-based splitmix64
random stream and identical floating-point expressions, so they grow
bit-identical trees from the same seed; ``benchmarks/bench_kernels.py``
times them against each other.
"""

from __future__ import annotations

import os

import numpy as np

PURE_NUMPY_ENV = "SUBVOTE_PURE_NUMPY"

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _env_requests_numpy() -> bool:
    return os.environ.get(PURE_NUMPY_ENV, "").strip().lower() in {"1", "true", "yes"}


try:
    if _env_requests_numpy():
        raise ImportError("pure-numpy path requested via environment")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:
    njit = None
    _HAVE_NUMBA = False


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit word (python-int form)."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def draw(seed: int, t: int) -> int:
    """t-th output of the counter-based splitmix64 stream for ``seed``."""
    return mix64((seed + (t + 1) * _GAMMA) & _MASK64)


def draw_block(seed: int, t0: int, count: int) -> np.ndarray:
    """Vectorized draws t0..t0+count-1 as uint64 (identical to :func:`draw`)."""
    with np.errstate(over="ignore"):
        t = np.arange(count, dtype=np.uint64) + np.uint64((t0 + 1) & _MASK64)
        x = np.uint64(seed) + t * np.uint64(_GAMMA)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        return x ^ (x >> np.uint64(31))


# -- pure-numpy implementation ------------------------------------------------


def build_tree_numpy(X, samples, y, n_classes, mtry, max_depth, min_leaf, seed, counter0):
    """Grow a CART tree (Gini impurity) over ``samples``; see kernel contract
    in :func:`build_tree`."""
    m = samples.shape[0]
    k = X.shape[1]
    max_nodes = 2 * m + 1
    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    leaf = np.zeros(max_nodes, np.int64)

    counter = counter0
    n_nodes = 0
    # stack entries: (start, end, depth, parent, is_left)
    stack = [(0, m, 0, -1, 0)]
    while stack:
        start, end, depth, parent, is_left = stack.pop()
        node = n_nodes
        n_nodes += 1
        if parent >= 0:
            if is_left:
                left[parent] = node
            else:
                right[parent] = node
        idx = samples[start:end]
        size = end - start
        labs = y[idx]
        counts = np.bincount(labs, minlength=n_classes).astype(np.int64)
        leaf[node] = int(np.argmax(counts))
        if (
            size < 2 * min_leaf
            or size < 2
            or depth >= max_depth
            or counts[leaf[node]] == size
        ):
            continue
        feats = np.arange(k, dtype=np.int64)
        for j in range(mtry):
            z = draw(seed, counter)
            counter += 1
            r = j + (z % (k - j))
            feats[j], feats[r] = feats[r], feats[j]
        best_score = np.inf
        best_f = -1
        best_thr = 0.0
        counts_f = counts.astype(np.float64)
        nl = np.arange(1, size, dtype=np.float64)
        nr = size - nl
        for f in feats[:mtry]:
            v = X[idx, f]
            order = np.argsort(v, kind="mergesort")
            sv = v[order]
            valid = sv[:-1] < sv[1:]
            if min_leaf > 1:
                valid &= (nl >= min_leaf) & (nr >= min_leaf)
            if not valid.any():
                continue
            onehot = np.zeros((size, n_classes), np.float64)
            onehot[np.arange(size), labs[order]] = 1.0
            cum = np.cumsum(onehot, axis=0)
            lsq = (cum * cum).sum(axis=1)[:-1]
            rcnt = counts_f - cum[:-1]
            rsq = (rcnt * rcnt).sum(axis=1)
            score = (nl - lsq / nl) + (nr - rsq / nr)
            score = np.where(valid, score, np.inf)
            i = int(np.argmin(score))
            if score[i] < best_score:
                best_score = float(score[i])
                best_f = int(f)
                thr = (sv[i] + sv[i + 1]) * 0.5
                if thr >= sv[i + 1]:
                    thr = sv[i]
                best_thr = float(thr)
        if best_f < 0:
            continue
        feature[node] = best_f
        threshold[node] = best_thr
        go = X[idx, best_f] <= best_thr
        n_left = int(go.sum())
        samples[start:end] = np.concatenate([idx[go], idx[~go]])
        # push right first so the left child is processed (numbered) first
        stack.append((start + n_left, end, depth + 1, node, 0))
        stack.append((start, start + n_left, depth + 1, node, 1))

    out = slice(0, n_nodes)
    return (
        feature[out].copy(),
        threshold[out].copy(),
        left[out].copy(),
        right[out].copy(),
        leaf[out].copy(),
        counter,
    )


def predict_tree_numpy(feature, threshold, left, right, leaf, X):
    m = X.shape[0]
    node = np.zeros(m, np.int64)
    while True:
        f = feature[node]
        active = np.nonzero(f >= 0)[0]
        if active.size == 0:
            break
        cur = node[active]
        go_left = X[active, f[active]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
    return leaf[node].copy()


# -- numba implementation ------------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True)
    def _mix64_nb(x):
        x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
        return x ^ (x >> np.uint64(31))

    @njit(cache=True)
    def _draw_nb(seed, t):
        return _mix64_nb(seed + (t + np.uint64(1)) * np.uint64(_GAMMA))

    @njit(cache=True)
    def _build_tree_nb(X, samples, y, n_classes, mtry, max_depth, min_leaf, seed, counter0):
        m = samples.shape[0]
        k = X.shape[1]
        max_nodes = 2 * m + 1
        feature = np.full(max_nodes, -1, np.int64)
        threshold = np.zeros(max_nodes, np.float64)
        left = np.full(max_nodes, -1, np.int64)
        right = np.full(max_nodes, -1, np.int64)
        leaf = np.zeros(max_nodes, np.int64)

        st_start = np.empty(max_nodes, np.int64)
        st_end = np.empty(max_nodes, np.int64)
        st_depth = np.empty(max_nodes, np.int64)
        st_parent = np.empty(max_nodes, np.int64)
        st_isleft = np.empty(max_nodes, np.int64)
        st_start[0] = 0
        st_end[0] = m
        st_depth[0] = 0
        st_parent[0] = -1
        st_isleft[0] = 0
        sp = 1

        counts = np.zeros(n_classes, np.int64)
        lc = np.zeros(n_classes, np.int64)
        rc = np.zeros(n_classes, np.int64)
        feats = np.empty(k, np.int64)
        vals = np.empty(m, np.float64)
        buf_left = np.empty(m, np.int64)
        buf_right = np.empty(m, np.int64)

        counter = counter0
        n_nodes = 0
        while sp > 0:
            sp -= 1
            start = st_start[sp]
            end = st_end[sp]
            depth = st_depth[sp]
            parent = st_parent[sp]
            is_left = st_isleft[sp]
            node = n_nodes
            n_nodes += 1
            if parent >= 0:
                if is_left == 1:
                    left[parent] = node
                else:
                    right[parent] = node
            size = end - start
            for c in range(n_classes):
                counts[c] = 0
            for i in range(start, end):
                counts[y[samples[i]]] += 1
            best_c = 0
            for c in range(1, n_classes):
                if counts[c] > counts[best_c]:
                    best_c = c
            leaf[node] = best_c
            if (
                size < 2 * min_leaf
                or size < 2
                or depth >= max_depth
                or counts[best_c] == size
            ):
                continue
            for j in range(k):
                feats[j] = j
            for j in range(mtry):
                z = _draw_nb(seed, counter)
                counter += np.uint64(1)
                r = j + np.int64(z % np.uint64(k - j))
                tmp = feats[j]
                feats[j] = feats[r]
                feats[r] = tmp
            best_score = np.inf
            best_f = -1
            best_thr = 0.0
            for jj in range(mtry):
                f = feats[jj]
                for i in range(size):
                    vals[i] = X[samples[start + i], f]
                order = np.argsort(vals[:size], kind="mergesort")
                for c in range(n_classes):
                    lc[c] = 0
                    rc[c] = counts[c]
                lsq = 0
                rsq = 0
                for c in range(n_classes):
                    rsq += counts[c] * counts[c]
                for i in range(size - 1):
                    lab = y[samples[start + order[i]]]
                    lsq += 2 * lc[lab] + 1
                    lc[lab] += 1
                    rsq += 1 - 2 * rc[lab]
                    rc[lab] -= 1
                    v_i = vals[order[i]]
                    v_next = vals[order[i + 1]]
                    if v_i < v_next:
                        fnl = np.float64(i + 1)
                        fnr = np.float64(size - i - 1)
                        if fnl >= min_leaf and fnr >= min_leaf:
                            score = (fnl - lsq / fnl) + (fnr - rsq / fnr)
                            if score < best_score:
                                best_score = score
                                best_f = f
                                thr = (v_i + v_next) * 0.5
                                if thr >= v_next:
                                    thr = v_i
                                best_thr = thr
            if best_f < 0:
                continue
            feature[node] = best_f
            threshold[node] = best_thr
            n_left = 0
            n_right = 0
            for i in range(start, end):
                s_i = samples[i]
                if X[s_i, best_f] <= best_thr:
                    buf_left[n_left] = s_i
                    n_left += 1
                else:
                    buf_right[n_right] = s_i
                    n_right += 1
            for i in range(n_left):
                samples[start + i] = buf_left[i]
            for i in range(n_right):
                samples[start + n_left + i] = buf_right[i]
            st_start[sp] = start + n_left
            st_end[sp] = end
            st_depth[sp] = depth + 1
            st_parent[sp] = node
            st_isleft[sp] = 0
            sp += 1
            st_start[sp] = start
            st_end[sp] = start + n_left
            st_depth[sp] = depth + 1
            st_parent[sp] = node
            st_isleft[sp] = 1
            sp += 1

        return (
            feature[:n_nodes].copy(),
            threshold[:n_nodes].copy(),
            left[:n_nodes].copy(),
            right[:n_nodes].copy(),
            leaf[:n_nodes].copy(),
            counter,
        )

    @njit(cache=True)
    def _predict_tree_nb(feature, threshold, left, right, leaf, X):
        m = X.shape[0]
        out = np.empty(m, np.int64)
        for i in range(m):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = leaf[node]
        return out

    def build_tree_numba(X, samples, y, n_classes, mtry, max_depth, min_leaf, seed, counter0):
        f, t, l, r, v, counter = _build_tree_nb(
            X,
            samples,
            y,
            np.int64(n_classes),
            np.int64(mtry),
            np.int64(max_depth),
            np.int64(min_leaf),
            np.uint64(seed),
            np.uint64(counter0),
        )
        return f, t, l, r, v, int(counter)

    def predict_tree_numba(feature, threshold, left, right, leaf, X):
        return _predict_tree_nb(feature, threshold, left, right, leaf, X)

else:
    build_tree_numba = None
    predict_tree_numba = None


USING_NUMBA = _HAVE_NUMBA

if USING_NUMBA:
    build_tree = build_tree_numba
    predict_tree = predict_tree_numba
else:
    build_tree = build_tree_numpy
    predict_tree = predict_tree_numpy
