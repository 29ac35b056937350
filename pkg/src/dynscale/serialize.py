"""Model snapshot files: flat text, one value per line, lossless floats.

Layout: the method name, the feature count, then the parameter blocks in a
fixed order -- weights, bias, scale slopes/offsets where the variant has
them, averaging sums plus the snapshot count for +avg models, and the
running statistics for GN models. Floats are written with 17 significant
digits so a save/load round trip reproduces the exact float64 values.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .learners import AveragedLearner, make_learner, split_method

__all__ = ["SnapshotError", "save_model", "load_model"]

_FORMAT_HEADER = "dynscale-model 1"


class SnapshotError(Exception):
    """Unreadable or inconsistent model snapshot file."""


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def save_model(learner, path) -> None:
    """Write a learner's prediction state to a snapshot file."""
    averaged = isinstance(learner, AveragedLearner)
    inner = learner.inner if averaged else learner
    lines = [_FORMAT_HEADER, learner.method_name, str(inner.n_features)]

    lines.extend(_fmt(v) for v in inner.w)
    lines.append(_fmt(inner.b))
    if inner.has_alpha_param:
        lines.extend(_fmt(v) for v in inner.alpha)
    if inner.has_beta_param:
        lines.extend(_fmt(v) for v in inner.beta)

    if averaged:
        lines.extend(_fmt(v) for v in learner.sum_w)
        lines.append(_fmt(learner.sum_b))
        if inner.has_alpha_param:
            lines.extend(_fmt(v) for v in learner.sum_alpha)
        if inner.has_beta_param:
            lines.extend(_fmt(v) for v in learner.sum_beta)
        lines.append(str(learner.snapshots))

    if inner.variant == "GN":
        lines.append(str(inner.stats.count))
        lines.extend(_fmt(v) for v in inner.stats.mean)
        lines.extend(_fmt(v) for v in inner.stats.sq_dev_sum)

    Path(path).write_text("\n".join(lines) + "\n")


class _Reader:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def take(self) -> str:
        if self.pos >= len(self.lines):
            raise SnapshotError("snapshot truncated")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def take_float(self) -> float:
        token = self.take()
        try:
            return float(token)
        except ValueError:
            raise SnapshotError(f"expected a number, got {token!r}") from None

    def take_int(self) -> int:
        token = self.take()
        try:
            return int(token)
        except ValueError:
            raise SnapshotError(f"expected an integer, got {token!r}") from None

    def take_vector(self, n: int) -> np.ndarray:
        return np.array([self.take_float() for _ in range(n)], dtype=np.float64)

    def done(self) -> bool:
        return self.pos == len(self.lines)


def load_model(path):
    """Reconstruct a learner (prediction-ready) from a snapshot file."""
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise SnapshotError(f"cannot read snapshot: {err}") from None
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    reader = _Reader(lines)

    if reader.take() != _FORMAT_HEADER:
        raise SnapshotError("not a dynscale model snapshot")
    method = reader.take()
    try:
        split_method(method)
    except ValueError as err:
        raise SnapshotError(str(err)) from None
    n_features = reader.take_int()
    if n_features < 1:
        raise SnapshotError(f"invalid feature count {n_features}")

    learner = make_learner(method, n_features)
    averaged = isinstance(learner, AveragedLearner)
    inner = learner.inner if averaged else learner

    inner.w = reader.take_vector(n_features)
    inner.b = reader.take_float()
    if inner.has_alpha_param:
        inner.alpha = reader.take_vector(n_features)
    if inner.has_beta_param:
        inner.beta = reader.take_vector(n_features)

    if averaged:
        learner.sum_w = reader.take_vector(n_features)
        learner.sum_b = reader.take_float()
        if inner.has_alpha_param:
            learner.sum_alpha = reader.take_vector(n_features)
        if inner.has_beta_param:
            learner.sum_beta = reader.take_vector(n_features)
        learner.snapshots = reader.take_int()

    if inner.variant == "GN":
        inner.stats.count = reader.take_int()
        inner.stats.mean = reader.take_vector(n_features)
        inner.stats.sq_dev_sum = reader.take_vector(n_features)

    if not reader.done():
        raise SnapshotError("trailing data in snapshot")
    return learner
