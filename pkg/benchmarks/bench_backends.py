#!/usr/bin/env python3
"""Compare the compiled kernel core against the pure-numpy fallback.

Times the three threshold-scan kernels on representative workloads and, via
subprocesses, an end-to-end AdaBoost + random-forest training run under each
backend. Run from the repository root:

    python benchmarks/bench_backends.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from rda_bench._kernels import _pykernels

try:
    from rda_bench._kernels import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_workloads(n=20_000, rng=None):
    rng = rng or np.random.default_rng(0)
    x = np.sort(rng.normal(size=n))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    w = np.full(n, 1.0 / n)
    sy = np.ascontiguousarray(w * y)
    codes = rng.integers(0, 4, n)
    r = rng.normal(size=n)
    return {
        "stump_scan": (x, sy, float(w[y < 0].sum()), 1.0),
        "gini_scan": (x, codes, 4),
        "mse_scan": (x, r),
    }


def micro_benchmarks():
    work = kernel_workloads()
    print(f"{'kernel':<12} {'pure (ms)':>12} {'compiled (ms)':>14} {'speedup':>9}")
    for name, args in work.items():
        t_pure = timeit(getattr(_pykernels, name), *args) * 1e3
        if _ckernels is None:
            print(f"{name:<12} {t_pure:>12.3f} {'n/a':>14} {'n/a':>9}")
            continue
        t_comp = timeit(getattr(_ckernels, name), *args) * 1e3
        print(f"{name:<12} {t_pure:>12.3f} {t_comp:>14.3f} {t_pure / t_comp:>8.1f}x")


_TRAIN_SNIPPET = r"""
import time
import numpy as np
from rda_bench.classifiers import AdaboostClassifier, RandomForestClassifier
from rda_bench.audio_io import CLASS_LABELS

rng = np.random.default_rng(0)
centers = np.array([[0, 0], [5, 0], [0, 5], [5, 5]], dtype=float)
codes = rng.integers(0, 4, 1500)
X = centers[codes] + rng.normal(scale=0.6, size=(1500, 2))
X = np.hstack([X, rng.normal(size=(1500, 14))])
labels = [CLASS_LABELS[c] for c in codes]

t0 = time.perf_counter()
AdaboostClassifier(seed=0, rounds=80).fit(X, labels)
ada = time.perf_counter() - t0
t0 = time.perf_counter()
RandomForestClassifier(seed=0, n_trees=60).fit(X, labels)
rf = time.perf_counter() - t0
print(f"{ada:.3f} {rf:.3f}")
"""


def end_to_end():
    rows = []
    for label, env_val in (("compiled", "0"), ("pure", "1")):
        if label == "compiled" and _ckernels is None:
            continue
        env = dict(os.environ, RDA_BENCH_PURE=env_val)
        out = subprocess.run(
            [sys.executable, "-c", _TRAIN_SNIPPET],
            env=env, capture_output=True, text=True, check=True,
        ).stdout.split()
        rows.append((label, float(out[0]), float(out[1])))
    print(f"\n{'backend':<10} {'adaboost (s)':>13} {'forest (s)':>11}")
    for label, ada, rf in rows:
        print(f"{label:<10} {ada:>13.3f} {rf:>11.3f}")
    if len(rows) == 2:
        print(f"{'speedup':<10} {rows[1][1] / rows[0][1]:>12.1f}x "
              f"{rows[1][2] / rows[0][2]:>10.1f}x")


if __name__ == "__main__":
    if _ckernels is None:
        print("compiled kernels not built; showing pure fallback only\n")
    micro_benchmarks()
    end_to_end()
