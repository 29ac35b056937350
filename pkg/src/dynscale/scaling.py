"""Streaming feature statistics and the scaling transforms used by learners.

`RunningStats` folds one instance at a time and exposes the running mean
and sample standard deviation, so features can be standardized on the fly
without a second pass over the data. The module-level functions are the
pure scalar transforms shared by the supervised scaling learners.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "RunningStats",
    "sigmoid",
    "sigmoid_scale",
    "linear_scale",
]


def sigmoid(s: float) -> float:
    """Numerically stable logistic function 1 / (1 + exp(-s)).

    Total on all finite inputs: large |s| saturates to 0.0 or 1.0 instead
    of overflowing.
    """
    if s >= 0.0:
        return 1.0 / (1.0 + math.exp(-s))
    e = math.exp(s)
    return e / (1.0 + e)


def sigmoid_scale(alpha: float, beta: float, x: float) -> float:
    """Squash a raw feature value into (0, 1) with learnable slope/offset.

    Computes 1 / (1 + exp(-alpha * x + beta)).
    """
    return sigmoid(alpha * x - beta)


def linear_scale(alpha: float, beta: float, x: float) -> float:
    """Affine rescaling alpha * x + beta."""
    return alpha * x + beta


class RunningStats:
    """Per-feature running mean and sum of squared deviations.

    The update is the classic single-pass recurrence: with k instances
    seen, m_k = m_{k-1} + (x - m_{k-1}) / k and
    s_k = s_{k-1} + (x - m_{k-1}) * (x - m_k). The sample standard
    deviation is sqrt(s_k / (k - 1)).

    Mutation is single-writer; `copy()` produces an independent snapshot
    that is safe to share read-only.
    """

    __slots__ = ("count", "mean", "sq_dev_sum")

    def __init__(self, n_features: int):
        if n_features < 1:
            raise ValueError(f"n_features must be positive, got {n_features}")
        self.count = 0
        self.mean = np.zeros(n_features, dtype=np.float64)
        self.sq_dev_sum = np.zeros(n_features, dtype=np.float64)

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.mean.shape:
            raise ValueError(
                f"expected {self.n_features} features, got {x.shape}"
            )
        return x

    def update(self, x) -> None:
        """Fold one instance into the running statistics."""
        x = self._check(x)
        if not np.isfinite(x).all():
            raise ValueError("non-finite feature value in statistics update")
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.sq_dev_sum += delta * (x - self.mean)

    def std(self) -> np.ndarray:
        """Per-feature sample standard deviation with a degeneracy guard.

        Entries are 1.0 while fewer than two instances have been seen or
        where the accumulated squared deviation is zero, so standardization
        stays total (pure centering early in the stream).
        """
        if self.count < 2:
            return np.ones_like(self.mean)
        out = np.sqrt(self.sq_dev_sum / (self.count - 1))
        out[out == 0.0] = 1.0
        return out

    def standardize(self, x) -> np.ndarray:
        """Center and scale a feature vector: (x - mean) / std."""
        x = self._check(x)
        return (x - self.mean) / self.std()

    def copy(self) -> "RunningStats":
        out = RunningStats(self.n_features)
        out.count = self.count
        out.mean = self.mean.copy()
        out.sq_dev_sum = self.sq_dev_sum.copy()
        return out
