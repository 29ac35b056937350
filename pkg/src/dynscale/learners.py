"""Online binary linear learners behind one streaming contract.

Nine base methods share the same interface: `classify(x)` / `predict(x)`
with the current parameters, and `learn_one(x, label)` which classifies
the incoming instance with the pre-update model (that prediction feeds the
cumulative-error curve), applies one update, and returns the prediction.

Methods
-------
SGD    logistic regression by per-instance gradient descent on raw features
GN     SGD on features standardized with running mean/std (updated online)
FS     sigmoid scaling 1/(1+exp(-a*x+b)) with slopes/offsets learned jointly
FS-1   FS with slopes fixed to 1; only offsets are learned
FS-2   affine scaling a*x+b learned jointly (objective convex per coordinate)
FS-3   FS-2 with the weight vector absorbed into the scaling parameters
PA     margin-based passive-aggressive updates, unclipped step
PA-1   PA with the step clipped at c
PA-2   PA with a quadratically relaxed step

Wrapping any of them in `AveragedLearner` yields the "+avg" variant, which
predicts with the running arithmetic mean of all per-instance parameter
snapshots, during training as well as at test time.

All floating-point expressions here are grouped exactly like the compiled
kernels in `_speedups.pyx`; the two paths produce bit-identical models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .scaling import RunningStats, sigmoid

__all__ = [
    "BASE_METHODS",
    "METHODS",
    "Hyperparams",
    "NumericFailure",
    "canonical_method",
    "split_method",
    "make_learner",
    "learning_rate",
    "cross_entropy_objective",
    "OnlineLearner",
    "SGDLearner",
    "GNLearner",
    "FSLearner",
    "FS1Learner",
    "FS2Learner",
    "FS3Learner",
    "PALearner",
    "AveragedLearner",
]

BASE_METHODS = ("SGD", "GN", "FS", "FS-1", "FS-2", "FS-3", "PA", "PA-1", "PA-2")
METHODS = tuple(
    name for base in BASE_METHODS for name in (base, base + "+avg")
)

_PROB_CLAMP = 1e-12


class NumericFailure(RuntimeError):
    """A parameter became non-finite during an update."""

    def __init__(self, parameter: str, step: int, context: str = ""):
        message = f"non-finite value in {parameter!r} at update {step}"
        if context:
            message += f" ({context})"
        super().__init__(message)
        self.parameter = parameter
        self.step = step
        self.context = context

    def __reduce__(self):
        # keep the exception picklable across process-pool boundaries
        return (NumericFailure, (self.parameter, self.step, self.context))


@dataclass(frozen=True)
class Hyperparams:
    """Regularization, aggressiveness, and schedule settings for a run.

    lam/mu/nu are the L2 coefficients on weights, scale slopes, and scale
    offsets; they are divided by `n_train` inside the updates so values are
    comparable across datasets. `c` bounds the passive-aggressive step.
    `passes * n_train` sets the learning-rate decay horizon (single-pass
    training uses passes=1).
    """

    lam: float = 0.0
    mu: float = 0.0
    nu: float = 0.0
    c: float = 1.0
    eta0: float = 0.1
    passes: int = 1
    n_train: int = 1

    def validate(self) -> None:
        if self.lam < 0 or self.mu < 0 or self.nu < 0:
            raise ValueError("regularization coefficients must be non-negative")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.passes < 1 or self.n_train < 1:
            raise ValueError("passes and n_train must be >= 1")

    def with_n_train(self, n_train: int) -> "Hyperparams":
        return replace(self, n_train=n_train)


def learning_rate(k: int, h: Hyperparams) -> float:
    """Linearly decaying step size eta0 / (1 + k / (passes * n_train))."""
    return h.eta0 / (1.0 + k / (h.passes * h.n_train))


def canonical_method(name: str) -> str:
    """Normalize a method name to its roster spelling (e.g. pa1 -> PA-1)."""
    cleaned = name.strip()
    base, sep, suffix = cleaned.partition("+")
    if sep and suffix.lower() != "avg":
        raise ValueError(f"unknown method {name!r}")
    key = base.replace("-", "").replace("_", "").upper()
    for known in BASE_METHODS:
        if known.replace("-", "") == key:
            return known + ("+avg" if sep else "")
    raise ValueError(f"unknown method {name!r}")


def split_method(name: str) -> tuple[str, bool]:
    """Split a roster name into (base method, averaged flag)."""
    canonical = canonical_method(name)
    if canonical.endswith("+avg"):
        return canonical[:-4], True
    return canonical, False


class OnlineLearner:
    """Shared state and the streaming step shared by all base methods."""

    variant: str = ""
    trains_w = True
    trains_alpha = False
    trains_beta = False
    has_alpha_param = False   # alpha appears in the model snapshot
    has_beta_param = False

    def __init__(self, n_features: int, hyper: Hyperparams | None = None):
        if n_features < 1:
            raise ValueError("n_features must be positive")
        hyper = hyper if hyper is not None else Hyperparams()
        hyper.validate()
        self.n_features = n_features
        self.hyper = hyper
        self.w = np.zeros(n_features, dtype=np.float64)
        self.b = 0.0
        self.alpha = np.ones(n_features, dtype=np.float64)
        self.beta = np.zeros(n_features, dtype=np.float64)
        self.k = 0
        # with validation off, overflow saturates silently (IEEE inf/NaN)
        # instead of raising; the harness uses this to keep a diverged
        # model in the protocol as the constant predictor it turns into
        self.validate_updates = True

    @property
    def method_name(self) -> str:
        return self.variant

    def _coerce(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise ValueError(
                f"expected {self.n_features} features, got shape {x.shape}"
            )
        return x

    # -- prediction ----------------------------------------------------

    def scaled_input(self, x: np.ndarray, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """Variant transform applied to the raw features before the dot product."""
        return x

    def score_with(self, x, w, b, alpha, beta) -> float:
        """Linear decision score under explicit parameters."""
        x = self._coerce(x)
        scaled = self.scaled_input(x, alpha, beta)
        s = 0.0
        for j in range(self.n_features):
            s += w[j] * scaled[j]
        return s + b

    def decision_score(self, x) -> float:
        return self.score_with(x, self.w, self.b, self.alpha, self.beta)

    def predict_proba(self, x) -> float:
        """Probability of the positive class under the current model."""
        return sigmoid(self.decision_score(x))

    def predict(self, x) -> float:
        return self.predict_proba(x)

    def classify(self, x) -> int:
        """Hard label; ties at a score of exactly zero go to +1."""
        return 1 if self.decision_score(x) >= 0.0 else -1

    # -- learning ------------------------------------------------------

    def _observe(self, x: np.ndarray) -> None:
        """Unsupervised bookkeeping done before the instance is used."""

    def _update(self, x: np.ndarray, label: int) -> None:
        raise NotImplementedError

    def learn_one(self, x, label: int) -> int:
        """One stream step: classify with the pre-update model, then update.

        Returns the pre-update prediction so callers can accumulate the
        cumulative training-error curve.
        """
        x = self._coerce(x)
        self._observe(x)
        pred = self.classify(x)
        self._update(x, label)
        self.k += 1
        return pred

    def _check_finite(self) -> None:
        if not self.validate_updates:
            return
        for name, value in (("w", self.w), ("alpha", self.alpha), ("beta", self.beta)):
            if not np.isfinite(value).all():
                raise NumericFailure(name, self.k)
        if not math.isfinite(self.b):
            raise NumericFailure("b", self.k)


class SGDLearner(OnlineLearner):
    """Logistic regression on raw features, one gradient step per instance."""

    variant = "SGD"

    def _update(self, x: np.ndarray, label: int) -> None:
        h = self.hyper
        scaled = self.scaled_input(x, self.alpha, self.beta)
        s = 0.0
        for j in range(self.n_features):
            s += self.w[j] * scaled[j]
        y = sigmoid(s + self.b)
        eta = learning_rate(self.k, h)
        t01 = 1.0 if label > 0 else 0.0
        coef = eta * (t01 - y)
        decay_w = 1.0 - 2.0 * (h.lam / h.n_train) * eta
        self.w = self.w * decay_w + coef * scaled
        self.b = self.b + coef
        self._check_finite()


class GNLearner(SGDLearner):
    """SGD on features standardized with running statistics.

    The statistics fold in each training instance before it is scaled, so
    the current instance always sees the freshest estimates. At test time
    the statistics are frozen unless evaluation explicitly adapts them.
    """

    variant = "GN"

    def __init__(self, n_features, hyper=None):
        super().__init__(n_features, hyper)
        self.stats = RunningStats(n_features)

    def scaled_input(self, x, alpha, beta):
        return self.stats.standardize(x)

    def _observe(self, x):
        self.stats.update(x)


class FSLearner(OnlineLearner):
    """Sigmoid feature scaling with slopes and offsets learned jointly."""

    variant = "FS"
    trains_alpha = True
    trains_beta = True
    has_alpha_param = True
    has_beta_param = True

    def scaled_input(self, x, alpha, beta):
        out = np.empty(self.n_features, dtype=np.float64)
        for j in range(self.n_features):
            out[j] = sigmoid(alpha[j] * x[j] - beta[j])
        return out

    def _update(self, x: np.ndarray, label: int) -> None:
        h = self.hyper
        scaled = self.scaled_input(x, self.alpha, self.beta)
        s = 0.0
        for j in range(self.n_features):
            s += self.w[j] * scaled[j]
        y = sigmoid(s + self.b)
        eta = learning_rate(self.k, h)
        t01 = 1.0 if label > 0 else 0.0
        coef = eta * (t01 - y)
        decay_w = 1.0 - 2.0 * (h.lam / h.n_train) * eta
        decay_a = 1.0 - 2.0 * (h.mu / h.n_train) * eta
        decay_b = 1.0 - 2.0 * (h.nu / h.n_train) * eta
        # gradient factor w_j * sigma_j * (1 - sigma_j), from pre-update w
        g = (self.w * scaled) * (1.0 - scaled)
        new_w = self.w * decay_w + coef * scaled
        if self.trains_alpha:
            self.alpha = self.alpha * decay_a + coef * (x * g)
        self.beta = self.beta * decay_b - coef * g
        self.w = new_w
        self.b = self.b + coef
        self._check_finite()


class FS1Learner(FSLearner):
    """Sigmoid scaling with the slope pinned to 1; only offsets adapt."""

    variant = "FS-1"
    trains_alpha = False
    has_alpha_param = False


class FS2Learner(OnlineLearner):
    """Affine feature scaling a*x + b trained jointly with the weights."""

    variant = "FS-2"
    trains_alpha = True
    trains_beta = True
    has_alpha_param = True
    has_beta_param = True

    def scaled_input(self, x, alpha, beta):
        return alpha * x + beta

    def _update(self, x: np.ndarray, label: int) -> None:
        h = self.hyper
        scaled = self.scaled_input(x, self.alpha, self.beta)
        s = 0.0
        for j in range(self.n_features):
            s += self.w[j] * scaled[j]
        y = sigmoid(s + self.b)
        eta = learning_rate(self.k, h)
        t01 = 1.0 if label > 0 else 0.0
        coef = eta * (y - t01)
        decay_w = 1.0 - 2.0 * (h.lam / h.n_train) * eta
        decay_a = 1.0 - 2.0 * (h.mu / h.n_train) * eta
        decay_b = 1.0 - 2.0 * (h.nu / h.n_train) * eta
        new_alpha = self.alpha * decay_a - coef * (self.w * x)
        new_beta = self.beta * decay_b - coef * self.w
        self.w = self.w * decay_w - coef * scaled
        self.alpha = new_alpha
        self.beta = new_beta
        self.b = self.b - coef
        self._check_finite()


class FS3Learner(OnlineLearner):
    """Affine scaling with the weight vector absorbed into the scales.

    The weights stay fixed at 1 and carry no regularizer; only the scale
    parameters and the bias are trained.
    """

    variant = "FS-3"
    trains_w = False
    trains_alpha = True
    trains_beta = True
    has_alpha_param = True
    has_beta_param = True

    def __init__(self, n_features, hyper=None):
        super().__init__(n_features, hyper)
        self.w = np.ones(n_features, dtype=np.float64)

    def scaled_input(self, x, alpha, beta):
        return alpha * x + beta

    def _update(self, x: np.ndarray, label: int) -> None:
        h = self.hyper
        scaled = self.scaled_input(x, self.alpha, self.beta)
        s = 0.0
        for j in range(self.n_features):
            s += self.w[j] * scaled[j]
        y = sigmoid(s + self.b)
        eta = learning_rate(self.k, h)
        t01 = 1.0 if label > 0 else 0.0
        coef = eta * (y - t01)
        decay_a = 1.0 - 2.0 * (h.mu / h.n_train) * eta
        decay_b = 1.0 - 2.0 * (h.nu / h.n_train) * eta
        self.alpha = self.alpha * decay_a - coef * x
        self.beta = self.beta * decay_b - coef
        self.b = self.b - coef
        self._check_finite()


class PALearner(OnlineLearner):
    """Margin-based passive-aggressive classifier (unclipped by default).

    The bias is realized by augmenting every instance with a constant 1
    component, which keeps the closed-form step size exact. Instances with
    margin >= 1 leave the parameters untouched; on a violation the step is
    loss / ||x~||^2, clipped at c for the PA-1 variant and relaxed to
    loss / (||x~||^2 + 1/(2c)) for PA-2.
    """

    variant = "PA"

    def __init__(self, n_features, hyper=None):
        super().__init__(n_features, hyper)

    def predict(self, x) -> float:
        """Signed margin score (not a probability)."""
        return self.decision_score(x)

    def _step_size(self, loss: float, sq_norm: float) -> float:
        return loss / sq_norm

    def _update(self, x: np.ndarray, label: int) -> None:
        s = 0.0
        for j in range(self.n_features):
            s += self.w[j] * x[j]
        score = s + self.b
        margin = label * score
        loss = 1.0 - margin
        if loss > 0.0:
            sq_norm = 1.0  # constant augmentation component
            for j in range(self.n_features):
                sq_norm += x[j] * x[j]
            tau = self._step_size(loss, sq_norm)
            step = tau * label
            self.w = self.w + step * x
            self.b = self.b + step
            self._check_finite()


class PA1Learner(PALearner):
    variant = "PA-1"

    def _step_size(self, loss, sq_norm):
        return min(self.hyper.c, loss / sq_norm)


class PA2Learner(PALearner):
    variant = "PA-2"

    def _step_size(self, loss, sq_norm):
        return loss / (sq_norm + 1.0 / (2.0 * self.hyper.c))


class AveragedLearner:
    """Wraps a base learner and predicts with averaged parameter snapshots.

    After every processed instance (including passive PA steps) the full
    parameter state is added to running sums; predictions at all times use
    sums / snapshot-count. Before the first snapshot it falls back to the
    inner learner's (initial) parameters.
    """

    def __init__(self, inner: OnlineLearner):
        self.inner = inner
        m = inner.n_features
        self.sum_w = np.zeros(m, dtype=np.float64)
        self.sum_b = 0.0
        self.sum_alpha = np.zeros(m, dtype=np.float64)
        self.sum_beta = np.zeros(m, dtype=np.float64)
        self.snapshots = 0

    @property
    def variant(self) -> str:
        return self.inner.variant

    @property
    def method_name(self) -> str:
        return self.inner.variant + "+avg"

    @property
    def n_features(self) -> int:
        return self.inner.n_features

    @property
    def hyper(self) -> Hyperparams:
        return self.inner.hyper

    @property
    def k(self) -> int:
        return self.inner.k

    @property
    def validate_updates(self) -> bool:
        return self.inner.validate_updates

    @validate_updates.setter
    def validate_updates(self, value: bool) -> None:
        self.inner.validate_updates = value

    def averaged_params(self):
        inner = self.inner
        if self.snapshots == 0:
            return inner.w, inner.b, inner.alpha, inner.beta
        n = float(self.snapshots)
        # untrained groups are constants; their average is the constant itself
        w = self.sum_w / n if inner.trains_w else inner.w
        alpha = self.sum_alpha / n if inner.trains_alpha else inner.alpha
        beta = self.sum_beta / n if inner.trains_beta else inner.beta
        return w, self.sum_b / n, alpha, beta

    def decision_score(self, x) -> float:
        w, b, alpha, beta = self.averaged_params()
        return self.inner.score_with(x, w, b, alpha, beta)

    def predict_proba(self, x) -> float:
        return sigmoid(self.decision_score(x))

    def predict(self, x) -> float:
        if isinstance(self.inner, PALearner):
            return self.decision_score(x)
        return self.predict_proba(x)

    def classify(self, x) -> int:
        return 1 if self.decision_score(x) >= 0.0 else -1

    def learn_one(self, x, label: int) -> int:
        inner = self.inner
        x = inner._coerce(x)
        inner._observe(x)
        pred = self.classify(x)
        inner._update(x, label)
        inner.k += 1
        self.sum_w += inner.w
        self.sum_b += inner.b
        self.sum_alpha += inner.alpha
        self.sum_beta += inner.beta
        self.snapshots += 1
        return pred


_BASE_CLASSES = {
    "SGD": SGDLearner,
    "GN": GNLearner,
    "FS": FSLearner,
    "FS-1": FS1Learner,
    "FS-2": FS2Learner,
    "FS-3": FS3Learner,
    "PA": PALearner,
    "PA-1": PA1Learner,
    "PA-2": PA2Learner,
}


def make_learner(method: str, n_features: int, hyper: Hyperparams | None = None):
    """Instantiate a fresh learner for any of the 18 roster methods."""
    base, averaged = split_method(method)
    learner = _BASE_CLASSES[base](n_features, hyper)
    if averaged:
        return AveragedLearner(learner)
    return learner


def cross_entropy_objective(learner, x, label: int) -> float:
    """Per-instance regularized cross-entropy under the learner's parameters.

    The label is mapped to {0, 1} and the probability is clamped away from
    exact 0/1 inside the logarithms. Regularizers are included only for the
    parameter groups the variant actually trains, each divided by n_train.
    Used by the gradient-check tests; not part of the hot path.
    """
    inner = learner.inner if isinstance(learner, AveragedLearner) else learner
    if isinstance(inner, PALearner):
        raise ValueError("cross-entropy objective is undefined for PA variants")
    y = inner.predict_proba(x)
    t01 = 1.0 if label > 0 else 0.0
    yc = min(max(y, _PROB_CLAMP), 1.0 - _PROB_CLAMP)
    value = -(t01 * math.log(yc) + (1.0 - t01) * math.log(1.0 - yc))
    h = inner.hyper
    if inner.trains_w:
        value += (h.lam / h.n_train) * float(np.dot(inner.w, inner.w))
    if inner.trains_alpha:
        value += (h.mu / h.n_train) * float(np.dot(inner.alpha, inner.alpha))
    if inner.trains_beta:
        value += (h.nu / h.n_train) * float(np.dot(inner.beta, inner.beta))
    return value
