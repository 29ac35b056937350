"""Selection of the training backend at import time.

The one-pass training loop exists twice: a readable pure-Python path that
walks `learn_one` instance by instance, and a compiled Cython kernel
(`dynscale._speedups`) that runs the same arithmetic in C. The compiled
module is used when it imported successfully and the environment variable
DYNSCALE_DISABLE_SPEEDUPS is unset; both paths produce bit-identical
parameters and curves (see tests/test_backends.py).
"""

from __future__ import annotations

import os

import numpy as np

from .learners import AveragedLearner, NumericFailure

_DISABLED = os.environ.get("DYNSCALE_DISABLE_SPEEDUPS", "") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError("speedups disabled by environment")
    from . import _speedups
except ImportError:
    _speedups = None

HAVE_SPEEDUPS = _speedups is not None

#: backend names accepted by the harness
BACKENDS = ("compiled", "python")

_VARIANT_CODES = {
    "SGD": 0,
    "GN": 1,
    "FS": 2,
    "FS-1": 3,
    "FS-2": 4,
    "FS-3": 5,
    "PA": 6,
    "PA-1": 7,
    "PA-2": 8,
}

_PARAM_NAMES = {0: "w", 1: "alpha", 2: "beta", 3: "b"}


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return "compiled" if HAVE_SPEEDUPS else "python"
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r} (choose from {BACKENDS})")
    if backend == "compiled" and not HAVE_SPEEDUPS:
        raise RuntimeError("compiled backend requested but dynscale._speedups "
                           "is not available")
    return backend


def train_stream_compiled(learner, X: np.ndarray, labels: np.ndarray,
                          validate: bool = True) -> np.ndarray:
    """Run one pass over (X, labels) through the compiled kernel.

    Mutates the learner state exactly as the per-instance Python loop would
    and returns the cumulative-error curve. With `validate` off, non-finite
    parameters saturate instead of raising.
    """
    averaged = isinstance(learner, AveragedLearner)
    inner = learner.inner if averaged else learner
    h = inner.hyper

    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.int64)
    n = X.shape[0]
    curve = np.zeros(n, dtype=np.int64)

    stats_mean = np.zeros(0, dtype=np.float64)
    stats_sq = np.zeros(0, dtype=np.float64)
    stats_count = 0
    if inner.variant == "GN":
        stats_mean = inner.stats.mean
        stats_sq = inner.stats.sq_dev_sum
        stats_count = inner.stats.count

    if averaged:
        sum_w, sum_alpha, sum_beta = learner.sum_w, learner.sum_alpha, learner.sum_beta
        sum_b, snapshots = learner.sum_b, learner.snapshots
    else:
        sum_w = np.zeros(0, dtype=np.float64)
        sum_alpha = np.zeros(0, dtype=np.float64)
        sum_beta = np.zeros(0, dtype=np.float64)
        sum_b, snapshots = 0.0, 0

    result = _speedups.train_one_pass(
        _VARIANT_CODES[inner.variant],
        X, y,
        inner.w, inner.alpha, inner.beta, inner.b,
        stats_mean, stats_sq, stats_count,
        int(averaged), sum_w, sum_alpha, sum_beta, sum_b, snapshots,
        h.lam, h.mu, h.nu, h.c, h.eta0, h.passes, h.n_train,
        inner.k, int(validate), curve,
    )
    (new_b, new_stats_count, new_sum_b, new_snapshots, new_k,
     fail_param, fail_index) = result

    if fail_param >= 0:
        raise NumericFailure(_PARAM_NAMES[fail_param], fail_index)

    inner.b = new_b
    inner.k = new_k
    if inner.variant == "GN":
        inner.stats.count = new_stats_count
    if averaged:
        learner.sum_b = new_sum_b
        learner.snapshots = new_snapshots
    return curve
