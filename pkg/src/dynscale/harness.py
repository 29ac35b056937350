"""Benchmark protocol: one-pass runs, grid search, and multi-seed reports.

A full experiment for one method repeats per seed: shuffle the training
split, pick hyperparameters by exhaustive search against a held-out fifth
of it, retrain on the complete (shuffled) training split, and score train
and test accuracy. Reported accuracies are means over seeds; the
cumulative-error curve comes from the first seed's final retraining run.
"""

from __future__ import annotations

import concurrent.futures
import copy
import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .dataset import Dataset, load_benchmark, shuffle, split_train_test, validation_split
from .learners import (
    AveragedLearner,
    Hyperparams,
    NumericFailure,
    PALearner,
    canonical_method,
    make_learner,
    split_method,
)

__all__ = [
    "DEFAULT_REG_GRID",
    "DEFAULT_C_GRID",
    "VALIDATION_FRACTION",
    "CURVE_METHODS",
    "GridSpec",
    "CumulativeErrorCurve",
    "ExperimentReport",
    "method_parameters",
    "grid_combinations",
    "run_one_pass",
    "evaluate",
    "grid_search",
    "run_experiment",
    "reproduce",
]

DEFAULT_REG_GRID = (0.0, 0.01, 0.1, 1.0, 10.0, 100.0)
DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
VALIDATION_FRACTION = 0.2

#: methods whose cumulative-error curves the curves command emits by default
CURVE_METHODS = ("FS-2", "FS-2+avg", "SGD", "SGD+avg", "GN", "GN+avg")

_METHOD_PARAMS = {
    "SGD": ("lam",),
    "GN": ("lam",),
    "FS": ("lam", "mu", "nu"),
    "FS-1": ("lam", "nu"),
    "FS-2": ("lam", "mu", "nu"),
    "FS-3": ("mu", "nu"),
    "PA": ("c",),
    "PA-1": ("c",),
    "PA-2": ("c",),
}


@dataclass(frozen=True)
class GridSpec:
    """Candidate values per hyperparameter for the exhaustive search."""

    lam: tuple[float, ...] = DEFAULT_REG_GRID
    mu: tuple[float, ...] = DEFAULT_REG_GRID
    nu: tuple[float, ...] = DEFAULT_REG_GRID
    c: tuple[float, ...] = DEFAULT_C_GRID

    def validate(self) -> None:
        for name in ("lam", "mu", "nu", "c"):
            if not getattr(self, name):
                raise ValueError(f"empty grid for {name!r}")


def method_parameters(method: str) -> tuple[str, ...]:
    """Hyperparameters a method actually tunes (others are never iterated)."""
    base, _ = split_method(method)
    return _METHOD_PARAMS[base]


def grid_combinations(method: str, grids: GridSpec | None = None) -> list[dict]:
    """Cartesian product over the method's parameters, in grid order."""
    grids = grids if grids is not None else GridSpec()
    grids.validate()
    names = method_parameters(method)
    pools = [getattr(grids, name) for name in names]
    return [dict(zip(names, combo)) for combo in itertools.product(*pools)]


@dataclass(frozen=True)
class CumulativeErrorCurve:
    """Cumulative training misclassifications after each instance."""

    errors: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "errors", tuple(int(e) for e in self.errors))
        prev = 0
        for seen, err in self.points():
            if err < prev or err > seen:
                raise ValueError(
                    f"invalid curve: {err} errors after {seen} instances")
            prev = err

    def __len__(self) -> int:
        return len(self.errors)

    def points(self):
        """Pairs (instances_seen, cumulative_errors), 1-based."""
        return list(enumerate(self.errors, start=1))

    @property
    def final_errors(self) -> int:
        return self.errors[-1] if self.errors else 0


def run_one_pass(learner, train: Dataset, backend: str | None = None,
                 on_divergence: str = "raise") -> CumulativeErrorCurve:
    """Single traversal of the training stream.

    Each instance is classified with the current model (the running average
    for +avg learners) before the learner updates on it; misclassifications
    accumulate into the returned curve. Asserts that the learner consumed
    every instance exactly once.

    on_divergence picks the overflow policy: "raise" surfaces the learner's
    numeric-failure error with the offending instance index; "saturate"
    lets parameters go non-finite under IEEE semantics and finishes the
    pass (the model degenerates into a constant predictor).
    """
    if on_divergence not in ("raise", "saturate"):
        raise ValueError(f"unknown divergence policy {on_divergence!r}")
    validate = on_divergence == "raise"
    X, y = train.as_arrays()
    chosen = _backend.resolve_backend(backend)
    k_before = learner.k
    if chosen == "compiled":
        counts = _backend.train_stream_compiled(learner, X, y, validate=validate)
        curve = CumulativeErrorCurve(tuple(int(v) for v in counts))
    else:
        previous = learner.validate_updates
        learner.validate_updates = validate
        try:
            errors = 0
            counts = []
            with np.errstate(all="ignore"):
                for i in range(X.shape[0]):
                    pred = learner.learn_one(X[i], int(y[i]))
                    if pred != y[i]:
                        errors += 1
                    counts.append(errors)
        finally:
            learner.validate_updates = previous
        curve = CumulativeErrorCurve(tuple(counts))
    consumed = learner.k - k_before
    if consumed != len(train):
        raise AssertionError(
            f"one-pass discipline violated: {consumed} updates for "
            f"{len(train)} instances")
    return curve


def evaluate(learner, data: Dataset, adapt_stats: bool = False) -> float:
    """Fraction of correctly classified instances under a frozen model.

    With `adapt_stats`, a GN model keeps folding the (unlabeled) evaluation
    features into its running statistics as it scores them; the caller's
    learner is left untouched either way.
    """
    if len(data) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    X, y = data.as_arrays()
    inner = learner.inner if isinstance(learner, AveragedLearner) else learner
    if adapt_stats and hasattr(inner, "stats"):
        model = copy.deepcopy(learner)
        model_inner = model.inner if isinstance(model, AveragedLearner) else model
        correct = 0
        for i in range(X.shape[0]):
            model_inner._observe(X[i])
            if model.classify(X[i]) == y[i]:
                correct += 1
        return correct / len(data)
    scores = _batch_scores(learner, X)
    preds = np.where(scores >= 0.0, 1, -1)
    return int((preds == y).sum()) / len(data)


def _stable_sigmoid_matrix(s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _batch_scores(learner, X: np.ndarray) -> np.ndarray:
    """Vectorized decision scores; mirrors the per-instance score.

    Near-divergent models can push scores to +-inf; the sign (and hence
    the prediction) stays well-defined, so overflow warnings are silenced.
    """
    if isinstance(learner, AveragedLearner):
        w, b, alpha, beta = learner.averaged_params()
        inner = learner.inner
    else:
        w, b, alpha, beta = learner.w, learner.b, learner.alpha, learner.beta
        inner = learner
    variant = inner.variant
    with np.errstate(over="ignore", invalid="ignore"):
        if variant == "GN":
            scaled = (X - inner.stats.mean) / inner.stats.std()
        elif variant in ("FS", "FS-1"):
            scaled = _stable_sigmoid_matrix(X * alpha - beta)
        elif variant in ("FS-2", "FS-3"):
            scaled = X * alpha + beta
        else:  # SGD and the PA family use raw features
            scaled = X
        return scaled @ w + b


def grid_search(method: str, train: Dataset, grids: GridSpec | None = None,
                seed: int = 0, eta0: float = 0.1,
                fraction: float = VALIDATION_FRACTION,
                backend: str | None = None,
                on_divergence: str = "saturate",
                exclude: frozenset = frozenset()) -> Hyperparams:
    """Exhaustive hyperparameter search against a held-out validation part.

    Only the parameters the method actually uses are iterated. Ties on
    validation accuracy resolve to the earliest combination in grid order,
    i.e. the lexicographically smallest parameter values.

    Under the default "saturate" policy a combination whose run overflows
    is still scored (as the constant predictor it degenerates into); under
    "raise" such combinations are disqualified instead. `exclude` rules
    out specific combinations up front.
    """
    method = canonical_method(method)
    fit_part, val_part = validation_split(train, fraction, seed)
    best_combo = None
    best_acc = -1.0
    last_failure = None
    for combo in grid_combinations(method, grids):
        if tuple(combo.items()) in exclude:
            continue
        hyper = Hyperparams(eta0=eta0, n_train=len(fit_part), **combo)
        learner = make_learner(method, train.feature_count, hyper)
        try:
            run_one_pass(learner, fit_part, backend=backend,
                         on_divergence=on_divergence)
        except NumericFailure as err:
            # an unregularized scale/weight interaction can blow up on
            # large raw feature values; such a combination cannot win
            last_failure = err
            continue
        acc = evaluate(learner, val_part)
        if acc > best_acc:
            best_acc = acc
            best_combo = combo
    if best_combo is None:
        if last_failure is not None:
            raise NumericFailure(last_failure.parameter, last_failure.step,
                                 "every grid combination diverged")
        raise ValueError("no usable grid combination")
    return Hyperparams(eta0=eta0, n_train=len(train), **best_combo)


@dataclass(frozen=True)
class ExperimentReport:
    """Multi-seed result for one (method, dataset) pair."""

    method: str
    dataset: str
    seeds: int
    seed_base: int
    train_accuracy: float
    test_accuracy: float
    best_params: dict
    per_seed_train: tuple[float, ...]
    per_seed_test: tuple[float, ...]
    per_seed_params: tuple[dict, ...]
    curve: CumulativeErrorCurve = field(repr=False)


def _combo_mode(per_seed_params: list[dict], method: str,
                grids: GridSpec | None) -> dict:
    """Most frequently selected combination; grid order breaks ties."""
    order = {tuple(c.items()): i for i, c in enumerate(grid_combinations(method, grids))}
    counts = Counter(tuple(p.items()) for p in per_seed_params)
    best = min(counts.items(), key=lambda kv: (-kv[1], order[kv[0]]))
    return dict(best[0])


def run_experiment(method: str, dataset: str | None = None, *,
                   train: Dataset | None = None, test: Dataset | None = None,
                   seeds: int = 10, seed_base: int = 0,
                   grids: GridSpec | None = None, eta0: float = 0.1,
                   split_seed: int = 0, stratify: bool = False,
                   adapt_stats: bool = False, backend: str | None = None,
                   on_divergence: str = "saturate",
                   manifest=None) -> ExperimentReport:
    """Run the full protocol for one method and one dataset.

    Pass either a benchmark name or explicit (train, test) datasets. Every
    seed redraws the training order and the validation split; accuracies
    are averaged over seeds and the curve is taken from the first seed's
    retraining run with its selected hyperparameters. Overflowing runs
    follow `on_divergence` (see run_one_pass); the "saturate" default keeps
    a diverged configuration in the protocol as a constant predictor.
    """
    method = canonical_method(method)
    if train is None or test is None:
        if dataset is None:
            raise ValueError("need a dataset name or explicit train/test datasets")
        full, spec = load_benchmark(dataset, manifest)
        train, test = split_train_test(full, spec.train_count, split_seed,
                                       stratify=stratify)
    dataset_name = dataset if dataset is not None else train.name
    if seeds < 1:
        raise ValueError("seeds must be >= 1")

    names = method_parameters(method)
    per_seed_train, per_seed_test, per_seed_params = [], [], []
    curve = None
    for seed in range(seed_base, seed_base + seeds):
        try:
            shuffled = shuffle(train, seed)
            # a combination can survive the (smaller) validation fit yet
            # diverge on the full retrain; drop it and reselect
            excluded: set = set()
            while True:
                best = grid_search(method, shuffled, grids, seed=seed,
                                   eta0=eta0, backend=backend,
                                   on_divergence=on_divergence,
                                   exclude=frozenset(excluded))
                learner = make_learner(method, train.feature_count, best)
                try:
                    seed_curve = run_one_pass(learner, shuffled, backend=backend,
                                              on_divergence=on_divergence)
                except NumericFailure:
                    excluded.add(tuple(
                        (name, getattr(best, name)) for name in names))
                    continue
                break
            per_seed_train.append(evaluate(learner, train, adapt_stats=adapt_stats))
            per_seed_test.append(evaluate(learner, test, adapt_stats=adapt_stats))
        except NumericFailure as err:
            raise NumericFailure(
                err.parameter, err.step, f"method {method}, seed {seed}"
            ) from None
        per_seed_params.append({name: getattr(best, name) for name in names})
        if seed == seed_base:
            curve = seed_curve

    return ExperimentReport(
        method=method,
        dataset=dataset_name,
        seeds=seeds,
        seed_base=seed_base,
        train_accuracy=float(np.mean(per_seed_train)),
        test_accuracy=float(np.mean(per_seed_test)),
        best_params=_combo_mode(per_seed_params, method, grids),
        per_seed_train=tuple(per_seed_train),
        per_seed_test=tuple(per_seed_test),
        per_seed_params=tuple(per_seed_params),
        curve=curve,
    )


def _experiment_task(kwargs: dict) -> ExperimentReport:
    return run_experiment(**kwargs)


def reproduce(datasets, methods=None, *, seeds: int = 10, seed_base: int = 0,
              grids: GridSpec | None = None, eta0: float = 0.1,
              split_seed: int = 0, stratify: bool = False,
              adapt_stats: bool = False, backend: str | None = None,
              on_divergence: str = "saturate",
              manifest=None, jobs: int = 1) -> dict[str, list[ExperimentReport]]:
    """Run every (dataset, method) pair; returns reports keyed by dataset.

    Pairs are independent, so with jobs > 1 they execute in a process pool.
    Results are reassembled in input order, making the output identical for
    any job count.
    """
    from .learners import METHODS

    if isinstance(datasets, str):
        datasets = [datasets]
    if methods is None or methods == "all":
        methods = list(METHODS)
    elif isinstance(methods, str):
        methods = [methods]
    methods = [canonical_method(m) for m in methods]

    tasks = [
        dict(method=method, dataset=name, seeds=seeds, seed_base=seed_base,
             grids=grids, eta0=eta0, split_seed=split_seed, stratify=stratify,
             adapt_stats=adapt_stats, backend=backend,
             on_divergence=on_divergence, manifest=manifest)
        for name in datasets
        for method in methods
    ]
    if jobs > 1 and len(tasks) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_experiment_task, tasks))
    else:
        reports = [_experiment_task(t) for t in tasks]

    out: dict[str, list[ExperimentReport]] = {name: [] for name in datasets}
    for report in reports:
        out[report.dataset].append(report)
    return out
