"""Binary classifiers built from scratch on top of the numeric kernels.

Four families are available: a single CART tree, a bagged random forest,
gradient-boosted trees with logistic loss and L2-regularised logistic
regression. Every model outputs the probability that a commit enhanced the
quality attribute it was trained for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from pyqu.classifiers.sampling import Dataset
from pyqu.kernels import best_split, tree_apply

DEFAULT_THRESHOLD = 0.5


class HyperparameterError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"hyperparameter {key!r}: {message}")
        self.key = key


class UnknownFamilyError(ValueError):
    pass


class FeatureDimensionError(ValueError):
    pass


class SingleClassError(ValueError):
    pass


# ---------------------------------------------------------------------------
# trees
# ---------------------------------------------------------------------------


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        return tree_apply(self.feature, self.threshold, self.left, self.right, self.value, X)

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Tree:
        tree = cls(
            np.asarray(d["feature"], dtype=np.int64),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64),
        )
        n = tree.n_nodes
        if n == 0 or not all(len(a) == n for a in (tree.threshold, tree.left, tree.right, tree.value)):
            raise ValueError("inconsistent tree arrays")
        internal = tree.feature >= 0
        kids = np.concatenate([tree.left[internal], tree.right[internal]])
        if kids.size and (kids.min() < 1 or kids.max() >= n):
            raise ValueError("tree child index out of range")
        return tree


def grow_tree(
    X: np.ndarray,
    target: np.ndarray,
    leaf_value: Callable[[np.ndarray], float],
    max_depth: int | None,
    min_leaf: int,
    max_features: int | None = None,
    rng: np.random.Generator | None = None,
) -> Tree:
    """Greedy least-squares tree on ``target`` (iterative, depth first).

    ``max_features`` draws a fresh random feature subset at every node.
    Leaves store ``leaf_value(rows)``.
    """
    n, d = X.shape
    target = np.ascontiguousarray(target, dtype=np.float64)
    all_features = np.arange(d, dtype=np.int64)
    feature, threshold, left, right, value = [], [], [], [], []
    stack = [(np.arange(n, dtype=np.int64), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(leaf_value(idx)))
        if parent >= 0:
            if is_left:
                left[parent] = node
            else:
                right[parent] = node
        if (max_depth is not None and depth >= max_depth) or len(idx) < 2 * min_leaf:
            continue
        t = target[idx]
        if t.min() == t.max():
            continue
        if max_features is not None and max_features < d:
            feats = np.sort(rng.choice(d, size=max_features, replace=False)).astype(np.int64)
        else:
            feats = all_features
        f, thr, gain = best_split(X, target, idx, feats, min_leaf)
        s = float(t.sum())
        parent_score = s * s / len(idx)
        if f < 0 or gain <= parent_score + 1e-12 * max(1.0, abs(parent_score)):
            continue
        feature[node] = f
        threshold[node] = thr
        mask = X[idx, f] <= thr
        # right pushed first so the left subtree is numbered first
        stack.append((idx[~mask], depth + 1, node, False))
        stack.append((idx[mask], depth + 1, node, True))
    return Tree(
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# hyperparameters
# ---------------------------------------------------------------------------


def _positive_int(key, v, allow_none=False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
        raise HyperparameterError(key, f"expected a positive integer{' or null' if allow_none else ''}, got {v!r}")
    return int(v)


def _positive_float(key, v, allow_zero=False):
    if isinstance(v, bool) or not isinstance(v, (int, float, np.floating, np.integer)):
        raise HyperparameterError(key, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
        raise HyperparameterError(key, f"expected a {'non-negative' if allow_zero else 'positive'} number, got {v!r}")
    return v


def _max_features(key, v):
    if v in (None, "sqrt"):
        return v
    return _positive_int(key, v)


_SCHEMAS: dict[str, dict[str, tuple[Any, Callable]]] = {
    "decision_tree": {
        "max_depth": (None, lambda k, v: _positive_int(k, v, allow_none=True)),
        "min_samples_leaf": (1, _positive_int),
    },
    "random_forest": {
        "n_trees": (100, _positive_int),
        "max_depth": (None, lambda k, v: _positive_int(k, v, allow_none=True)),
        "min_samples_leaf": (1, _positive_int),
        "max_features": ("sqrt", _max_features),
    },
    "gradient_boosting": {
        "n_stages": (100, _positive_int),
        "learning_rate": (0.1, _positive_float),
        "max_depth": (3, lambda k, v: _positive_int(k, v, allow_none=True)),
        "min_samples_leaf": (1, _positive_int),
    },
    "logistic": {
        "l2": (0.0, lambda k, v: _positive_float(k, v, allow_zero=True)),
        "learning_rate": (0.1, _positive_float),
        "n_iter": (500, _positive_int),
    },
}

FAMILIES = tuple(_SCHEMAS)


def validate_hyperparameters(family: str, hyperparameters: Mapping[str, Any] | None) -> dict[str, Any]:
    """Fill defaults and validate; errors name the offending key."""
    if family not in _SCHEMAS:
        raise UnknownFamilyError(f"unknown model family {family!r}; expected one of {', '.join(FAMILIES)}")
    schema = _SCHEMAS[family]
    hp = dict(hyperparameters or {})
    for key in hp:
        if key not in schema:
            raise HyperparameterError(key, f"not a {family} hyperparameter")
    return {key: check(key, hp.get(key, default)) for key, (default, check) in schema.items()}


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------


@dataclass
class Model:
    family: str
    hyperparameters: dict[str, Any]
    dim: int
    state: dict[str, Any] = field(default_factory=dict)
    qa: str | None = None
    threshold: float = DEFAULT_THRESHOLD


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _fit_tree(X, y, hp, rng):
    yf = y.astype(np.float64)
    tree = grow_tree(X, yf, lambda idx: yf[idx].mean(), hp["max_depth"], hp["min_samples_leaf"])
    return {"trees": [tree]}


def _fit_forest(X, y, hp, rng):
    n, d = X.shape
    mf = hp["max_features"]
    mf = max(1, int(math.sqrt(d))) if mf == "sqrt" else (d if mf is None else min(mf, d))
    trees = []
    for _ in range(hp["n_trees"]):
        boot = rng.integers(0, n, size=n)
        Xb, yb = X[boot], y[boot].astype(np.float64)
        trees.append(grow_tree(Xb, yb, lambda idx: yb[idx].mean(), hp["max_depth"], hp["min_samples_leaf"], mf, rng))
    return {"trees": trees}


def _fit_boosting(X, y, hp, rng):
    yf = y.astype(np.float64)
    p0 = min(max(yf.mean(), 1e-6), 1 - 1e-6)
    init = math.log(p0 / (1 - p0))
    lr = hp["learning_rate"]
    F = np.full(len(yf), init)
    trees = []
    for _ in range(hp["n_stages"]):
        p = _sigmoid(F)
        resid = yf - p
        hess = p * (1 - p)

        def newton(idx, resid=resid, hess=hess):
            return resid[idx].sum() / max(hess[idx].sum(), 1e-12)

        tree = grow_tree(X, resid, newton, hp["max_depth"], hp["min_samples_leaf"])
        trees.append(tree)
        F = F + lr * tree.apply(X)
    return {"init": init, "trees": trees}


def _fit_logistic(X, y, hp, rng):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale
    yf = y.astype(np.float64)
    n = len(yf)
    w = np.zeros(X.shape[1])
    b = 0.0
    lr, l2 = hp["learning_rate"], hp["l2"]
    for _ in range(hp["n_iter"]):
        err = _sigmoid(Z @ w + b) - yf
        w -= lr * (Z.T @ err / n + l2 * w)
        b -= lr * err.mean()
    return {"mean": mean, "scale": scale, "weights": w, "bias": b}


_FITTERS = {
    "decision_tree": _fit_tree,
    "random_forest": _fit_forest,
    "gradient_boosting": _fit_boosting,
    "logistic": _fit_logistic,
}


def fit(
    family: str,
    data: Dataset,
    hyperparameters: Mapping[str, Any] | None = None,
    seed: int = 0,
    qa: str | None = None,
) -> Model:
    hp = validate_hyperparameters(family, hyperparameters)
    if len(data) == 0:
        raise ValueError("cannot fit on an empty dataset")
    if np.unique(data.y).size < 2:
        raise SingleClassError("training labels are constant; both classes are required")
    rng = np.random.default_rng(seed)
    X = np.ascontiguousarray(data.X)
    state = _FITTERS[family](X, data.y, hp, rng)
    return Model(family, hp, data.dim, state, qa)


def decision_scores(model: Model, X: np.ndarray) -> np.ndarray:
    st = model.state
    if model.family == "logistic":
        return ((X - st["mean"]) / st["scale"]) @ st["weights"] + st["bias"]
    if model.family == "gradient_boosting":
        lr = model.hyperparameters["learning_rate"]
        F = np.full(X.shape[0], st["init"])
        for tree in st["trees"]:
            F += lr * tree.apply(X)
        return F
    raise ValueError(f"{model.family} has no additive score")


def predict_proba(model: Model, features):
    """Probability of the enhanced class for one vector or a matrix of rows."""
    X = np.asarray(features, dtype=np.float64)
    single = X.ndim == 1
    X = np.ascontiguousarray(X.reshape(1, -1) if single else X)
    if X.ndim != 2 or X.shape[1] != model.dim:
        raise FeatureDimensionError(f"model expects {model.dim} features, got {X.shape[-1]}")
    if model.family in ("decision_tree", "random_forest"):
        trees = model.state["trees"]
        p = sum(t.apply(X) for t in trees) / len(trees)
    else:
        p = _sigmoid(decision_scores(model, X))
    p = np.clip(p, 0.0, 1.0)
    return float(p[0]) if single else p


def predict(model: Model, features, threshold: float | None = None):
    t = model.threshold if threshold is None else threshold
    p = predict_proba(model, features)
    if isinstance(p, float):
        return int(p >= t)
    return (p >= t).astype(np.int64)
