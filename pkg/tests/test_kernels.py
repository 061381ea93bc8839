from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pyqu import kernels
from pyqu._accel import HAS_NUMBA

needs_numba = pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")


def _data(seed, n=60, d=4):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + 0.3 * rng.normal(size=n) > 0).astype(np.float64)
    return X, y


def _brute_split(X, y, idx, features, min_leaf):
    best = (-1, 0.0, -np.inf)
    for f in features:
        vals = np.unique(X[idx, f])
        for a, b in zip(vals[:-1], vals[1:]):
            t = (a + b) / 2
            mask = X[idx, f] <= t
            nl, nr = mask.sum(), (~mask).sum()
            if nl < min_leaf or nr < min_leaf:
                continue
            g = y[idx][mask].sum() ** 2 / nl + y[idx][~mask].sum() ** 2 / nr
            if g > best[2] + 1e-12:
                best = (int(f), float(t), float(g))
    return best


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("min_leaf", [1, 7])
def test_best_split_matches_brute_force(seed, min_leaf):
    X, y = _data(seed)
    idx = np.arange(len(y), dtype=np.int64)[::2]
    feats = np.array([0, 2, 3], dtype=np.int64)
    want = _brute_split(X, y, idx, feats, min_leaf)
    for impl in (kernels._best_split_np, kernels._best_split_nb):
        f, t, g = impl(X, y, idx, feats, min_leaf)
        assert int(f) == want[0]
        assert float(t) == pytest.approx(want[1])
        assert float(g) == pytest.approx(want[2])


def test_best_split_no_valid_split():
    X = np.ones((4, 2))
    y = np.array([0.0, 1.0, 0.0, 1.0])
    idx = np.arange(4, dtype=np.int64)
    feats = np.arange(2, dtype=np.int64)
    for impl in (kernels._best_split_np, kernels._best_split_nb):
        assert int(impl(X, y, idx, feats, 1)[0]) == -1


def _tree(rng, d, depth=4):
    n_int = 2**depth - 1
    n = 2 ** (depth + 1) - 1
    feature = np.full(n, -1, dtype=np.int64)
    feature[:n_int] = rng.integers(0, d, n_int)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    left[:n_int] = 2 * np.arange(n_int) + 1
    right[:n_int] = 2 * np.arange(n_int) + 2
    return feature, rng.normal(size=n), left, right, rng.random(n)


@pytest.mark.parametrize("seed", range(3))
def test_tree_apply_equivalence(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 3))
    tree = _tree(rng, 3)
    a = kernels._tree_apply_np(*tree, X)
    b = kernels._tree_apply_nb(*tree, X)
    np.testing.assert_array_equal(a, b)
    feature, threshold, left, right, value = tree
    for row, got in zip(X, a):
        node = 0
        while feature[node] >= 0:
            node = left[node] if row[feature[node]] <= threshold[node] else right[node]
        assert got == value[node]


def _brute_auc(scores, labels):
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return total / (len(pos) * len(neg))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=2, max_size=40))
def test_auc_matches_pairwise_count(pairs):
    scores = np.array([float(s) for s, _ in pairs])
    labels = np.array([int(b) for _, b in pairs], dtype=np.int64)
    if labels.min() == labels.max():
        return
    want = _brute_auc(scores, labels)
    assert kernels._auc_np(scores, labels) == pytest.approx(want)
    assert kernels._auc_nb(scores, labels) == pytest.approx(want)


@pytest.mark.parametrize("k", [1, 3, 5])
def test_knn_equivalence(k):
    rng = np.random.default_rng(k)
    X = rng.normal(size=(300, 4))
    a = kernels._knn_np(X, k)
    b = kernels._knn_nb(X, k)
    np.testing.assert_array_equal(a, b)
    d = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
    np.fill_diagonal(d, np.inf)
    np.testing.assert_array_equal(a, np.argsort(d, axis=1, kind="stable")[:, :k])


def test_knn_ties_prefer_lower_index():
    X = np.array([[0.0], [1.0], [-1.0], [2.0]])
    for impl in (kernels._knn_np, kernels._knn_nb):
        assert list(impl(X, 2)[0]) == [1, 2]


_PROBE = """
import numpy as np
from pyqu import _accel
from pyqu.classifiers import Dataset, fit, predict_proba
rng = np.random.default_rng(0)
X = rng.normal(size=(120, 4)); y = (X[:, 0] > 0).astype(int)
m = fit("random_forest", Dataset(X, y), {"n_trees": 5}, seed=3)
print(_accel.USE_NUMBA, repr(predict_proba(m, X).round(12).tolist()))
"""


def _probe(flag):
    env = dict(os.environ, PYQU_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", _PROBE], env=env, check=True, capture_output=True, text=True)
    use, probs = out.stdout.strip().split(" ", 1)
    return use == "True", probs


@needs_numba
def test_env_flag_selects_backend_with_identical_results():
    nb_on, p_on = _probe("0")
    nb_off, p_off = _probe("1")
    assert nb_on and not nb_off
    assert p_on == p_off
