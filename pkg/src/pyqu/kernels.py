"""Hot numeric kernels used by the classifiers.

Every kernel has a loop implementation compiled with numba and a vectorised
numpy implementation. The public names bind to one of the two depending on
``pyqu._accel.USE_NUMBA``; both variants stay importable so they can be
checked against each other and benchmarked.
"""

from __future__ import annotations

import numpy as np

from pyqu._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# split search
#
# Children are scored by their summed squared error around the child mean.
# For 0/1 targets n*p*(1-p) is half the Gini impurity weighted by n, so the
# same search serves classification (Gini) and regression (least squares).
# ---------------------------------------------------------------------------


@njit
def _best_split_nb(X, y, idx, features, min_leaf):
    n = idx.shape[0]
    best_feat = -1
    best_thr = 0.0
    best_gain = -np.inf
    total = 0.0
    for i in range(n):
        total += y[idx[i]]
    vals = np.empty(n)
    ys = np.empty(n)
    for f in features:
        for i in range(n):
            vals[i] = X[idx[i], f]
        order = np.argsort(vals, kind="mergesort")
        for i in range(n):
            ys[i] = y[idx[order[i]]]
        left = 0.0
        for i in range(n - 1):
            left += ys[i]
            n_left = i + 1
            n_right = n - n_left
            if n_left < min_leaf or n_right < min_leaf:
                continue
            v = vals[order[i]]
            v_next = vals[order[i + 1]]
            if v_next <= v:
                continue
            right = total - left
            gain = left * left / n_left + right * right / n_right
            if gain > best_gain:
                best_gain = gain
                best_feat = f
                thr = 0.5 * (v + v_next)
                if thr >= v_next:
                    thr = v
                best_thr = thr
    return best_feat, best_thr, best_gain


def _best_split_np(X, y, idx, features, min_leaf):
    n = idx.shape[0]
    best_feat, best_thr, best_gain = -1, 0.0, -np.inf
    if n < 2:
        return best_feat, best_thr, best_gain
    yn = y[idx]
    total = float(np.cumsum(yn)[-1])
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left
    allowed = (n_left >= min_leaf) & (n_right >= min_leaf)
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="mergesort")
        v = vals[order]
        left = np.cumsum(yn[order])[:-1]
        right = total - left
        gain = left * left / n_left + right * right / n_right
        ok = allowed & (v[1:] > v[:-1])
        if not ok.any():
            continue
        gain = np.where(ok, gain, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            best_gain = float(gain[i])
            best_feat = int(f)
            thr = 0.5 * (v[i] + v[i + 1])
            best_thr = float(v[i] if thr >= v[i + 1] else thr)
    return best_feat, best_thr, best_gain


# ---------------------------------------------------------------------------
# tree evaluation
# ---------------------------------------------------------------------------


@njit
def _tree_apply_nb(feature, threshold, left, right, value, X):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]
    return out


def _tree_apply_np(feature, threshold, left, right, value, X):
    node = np.zeros(X.shape[0], dtype=np.int64)
    rows = np.arange(X.shape[0])
    active = feature[node] >= 0
    while active.any():
        r = rows[active]
        nd = node[active]
        go_left = X[r, feature[nd]] <= threshold[nd]
        node[r] = np.where(go_left, left[nd], right[nd])
        active = feature[node] >= 0
    return value[node].astype(np.float64)


# ---------------------------------------------------------------------------
# Mann-Whitney statistic
# ---------------------------------------------------------------------------


@njit
def _auc_nb(scores, labels):
    n = scores.shape[0]
    order = np.argsort(scores, kind="mergesort")
    rank_sum = 0.0
    n_pos = 0
    i = 0
    while i < n:
        j = i
        while j + 1 < n and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        avg_rank = 0.5 * (i + j) + 1.0
        for t in range(i, j + 1):
            if labels[order[t]] == 1:
                rank_sum += avg_rank
                n_pos += 1
        i = j + 1
    n_neg = n - n_pos
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def _auc_np(scores, labels):
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    avg_rank = upper - 0.5 * (counts - 1)
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = scores.shape[0] - n_pos
    u = float(avg_rank[inverse[pos]].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


# ---------------------------------------------------------------------------
# nearest neighbours (SMOTE)
# ---------------------------------------------------------------------------


@njit
def _knn_nb(X, k):
    m = X.shape[0]
    out = np.empty((m, k), dtype=np.int64)
    dist = np.empty(m)
    for i in range(m):
        for j in range(m):
            if i == j:
                dist[j] = np.inf
                continue
            s = 0.0
            for c in range(X.shape[1]):
                d = X[i, c] - X[j, c]
                s += d * d
            dist[j] = s
        order = np.argsort(dist, kind="mergesort")
        for t in range(k):
            out[i, t] = order[t]
    return out


def _knn_np(X, k, chunk=256):
    m = X.shape[0]
    out = np.empty((m, k), dtype=np.int64)
    for lo in range(0, m, chunk):
        hi = min(lo + chunk, m)
        diff = X[lo:hi, None, :] - X[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        dist[np.arange(hi - lo), np.arange(lo, hi)] = np.inf
        out[lo:hi] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


def best_split(X, y, idx, features, min_leaf):
    """Best axis-aligned split of ``idx`` rows as ``(feature, threshold, gain)``.

    ``gain`` is ``sum_l^2/n_l + sum_r^2/n_r``; larger is better. ``feature``
    is -1 when no split satisfies ``min_leaf``.
    """
    if USE_NUMBA:
        f, t, g = _best_split_nb(X, y, idx, features, min_leaf)
        return int(f), float(t), float(g)
    return _best_split_np(X, y, idx, features, min_leaf)


def tree_apply(feature, threshold, left, right, value, X):
    if USE_NUMBA:
        return _tree_apply_nb(feature, threshold, left, right, value, X)
    return _tree_apply_np(feature, threshold, left, right, value, X)


def auc_statistic(scores, labels):
    """Mann-Whitney U normalised by ``n_pos * n_neg``; ties count one half."""
    if USE_NUMBA:
        return float(_auc_nb(scores, labels))
    return float(_auc_np(scores, labels))


def knn_indices(X, k):
    """Indices of the ``k`` nearest other rows of ``X`` (ties by row index)."""
    if USE_NUMBA:
        return _knn_nb(X, k)
    return _knn_np(X, k)
