"""Time the numba and numpy variants of each classifier kernel.

    python3 benchmarks/bench_kernels.py --rows 5000 --repeat 5
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from pyqu import kernels
from pyqu._accel import HAS_NUMBA


def _best(fn, repeat):
    fn()  # warm-up (compilation for the numba path)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=4000)
    ap.add_argument("--dim", type=int, default=9)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--skip-fit", action="store_true", help="skip the end-to-end forest fit")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    X = rng.normal(size=(args.rows, args.dim))
    y = (X[:, 0] + rng.normal(scale=0.5, size=args.rows) > 0).astype(np.float64)
    idx = np.arange(args.rows, dtype=np.int64)
    feats = np.arange(args.dim, dtype=np.int64)
    labels = y.astype(np.int64)
    scores = rng.random(args.rows)
    knn_X = X[: min(args.rows, 1500)].copy()

    # a complete depth-6 tree for tree_apply
    depth = 6
    n_int = 2**depth - 1
    n = 2 ** (depth + 1) - 1
    feature = np.full(n, -1, dtype=np.int64)
    feature[:n_int] = rng.integers(0, args.dim, n_int)
    threshold = rng.normal(size=n)
    left = np.full(n, -1, dtype=np.int64)
    right = np.full(n, -1, dtype=np.int64)
    left[:n_int] = 2 * np.arange(n_int) + 1
    right[:n_int] = 2 * np.arange(n_int) + 2
    value = rng.random(n)

    cases = {
        "best_split": (kernels._best_split_nb, kernels._best_split_np, (X, y, idx, feats, 1)),
        "split(n=32)": (kernels._best_split_nb, kernels._best_split_np, (X, y, idx[:32], feats, 1)),
        "tree_apply": (kernels._tree_apply_nb, kernels._tree_apply_np, (feature, threshold, left, right, value, X)),
        "auc": (kernels._auc_nb, kernels._auc_np, (scores, labels)),
        "knn(k=5)": (kernels._knn_nb, kernels._knn_np, (knn_X, 5)),
    }
    print(f"numba available: {HAS_NUMBA}; rows={args.rows} dim={args.dim}")
    print(f"{'kernel':<12} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for name, (nb, npy, fargs) in cases.items():
        t_np = _best(lambda: npy(*fargs), args.repeat)
        t_nb = _best(lambda: nb(*fargs), args.repeat) if HAS_NUMBA else float("nan")
        print(f"{name:<12} {t_nb * 1e3:>10.3f} {t_np * 1e3:>10.3f} {t_np / t_nb:>7.1f}x")
    if not args.skip_fit:
        t_nb = _fit_seconds("0", args)
        t_np = _fit_seconds("1", args)
        print(f"{'forest fit':<12} {t_nb * 1e3:>10.1f} {t_np * 1e3:>10.1f} {t_np / t_nb:>7.1f}x")


_FIT_SCRIPT = """
import sys, time, numpy as np
from pyqu.classifiers import Dataset, fit
rows, dim, seed = map(int, sys.argv[1:4])
rng = np.random.default_rng(seed)
X = rng.normal(size=(rows, dim))
y = (X[:, 0] + X[:, 1] > 0).astype(int)
data = Dataset(X, y)
fit("random_forest", Dataset(X[:200], y[:200]), {"n_trees": 2}, seed=seed)
t = time.perf_counter()
fit("random_forest", data, {"n_trees": 20}, seed=seed)
print(time.perf_counter() - t)
"""


def _fit_seconds(disable: str, args) -> float:
    """Forest fit timed in a fresh interpreter with the flag set."""
    env = dict(os.environ, PYQU_DISABLE_NUMBA=disable)
    out = subprocess.run(
        [sys.executable, "-c", _FIT_SCRIPT, str(min(args.rows, 2000)), str(args.dim), str(args.seed)],
        env=env,
        check=True,
        capture_output=True,
        text=True,
    )
    return float(out.stdout.strip())


if __name__ == "__main__":
    main()
