"""The compiled kernel and the pure-Python loop must agree bit for bit."""

import numpy as np
import pytest

from dynscale import _backend
from dynscale.dataset import load_benchmark, split_train_test
from dynscale.harness import evaluate, run_one_pass
from dynscale.learners import (
    METHODS,
    AveragedLearner,
    Hyperparams,
    NumericFailure,
    make_learner,
)

pytestmark = pytest.mark.skipif(
    not _backend.HAVE_SPEEDUPS, reason="compiled speedups not built")


def unwrap(learner):
    return learner.inner if isinstance(learner, AveragedLearner) else learner


def assert_same_state(a, b):
    ia, ib = unwrap(a), unwrap(b)
    np.testing.assert_array_equal(ia.w, ib.w)
    np.testing.assert_array_equal(ia.alpha, ib.alpha)
    np.testing.assert_array_equal(ia.beta, ib.beta)
    assert ia.b == ib.b
    assert ia.k == ib.k
    if hasattr(ia, "stats"):
        assert ia.stats.count == ib.stats.count
        np.testing.assert_array_equal(ia.stats.mean, ib.stats.mean)
        np.testing.assert_array_equal(ia.stats.sq_dev_sum, ib.stats.sq_dev_sum)
    if isinstance(a, AveragedLearner):
        np.testing.assert_array_equal(a.sum_w, b.sum_w)
        np.testing.assert_array_equal(a.sum_alpha, b.sum_alpha)
        np.testing.assert_array_equal(a.sum_beta, b.sum_beta)
        assert a.sum_b == b.sum_b
        assert a.snapshots == b.snapshots


@pytest.fixture(scope="module")
def heart_split():
    data, spec = load_benchmark("heart")
    return split_train_test(data, spec.train_count, seed=0)


@pytest.mark.parametrize("method", METHODS)
def test_backends_are_bit_identical(method, heart_split):
    train, test = heart_split
    hyper = Hyperparams(lam=0.1, mu=0.01, nu=0.1, c=0.5, n_train=len(train))
    py = make_learner(method, train.feature_count, hyper)
    cy = make_learner(method, train.feature_count, hyper)
    curve_py = run_one_pass(py, train, backend="python")
    curve_cy = run_one_pass(cy, train, backend="compiled")
    assert curve_py.errors == curve_cy.errors
    assert_same_state(py, cy)
    assert evaluate(py, test) == evaluate(cy, test)


@pytest.mark.parametrize("method", ["GN+avg", "FS", "PA-2+avg"])
def test_backends_agree_on_random_streams(method):
    rng = np.random.default_rng(17)
    from dynscale.dataset import Dataset, Instance

    instances = [
        Instance(rng.normal(0.0, float(rng.uniform(0.1, 50.0)), size=5),
                 1 if rng.random() < 0.5 else -1)
        for _ in range(200)
    ]
    data = Dataset(tuple(instances), "random", 5)
    hyper = Hyperparams(lam=1.0, mu=0.1, nu=10.0, c=0.01, n_train=len(data))
    py = make_learner(method, 5, hyper)
    cy = make_learner(method, 5, hyper)
    curve_py = run_one_pass(py, data, backend="python")
    curve_cy = run_one_pass(cy, data, backend="compiled")
    assert curve_py.errors == curve_cy.errors
    assert_same_state(py, cy)


def test_compiled_reports_numeric_failure_like_python(heart_split):
    train, _ = heart_split
    hyper = Hyperparams(n_train=len(train))
    py = make_learner("SGD", train.feature_count, hyper)
    cy = make_learner("SGD", train.feature_count, hyper)
    py.w[0] = np.inf
    cy.w[0] = np.inf
    with pytest.raises(NumericFailure) as err_py:
        run_one_pass(py, train, backend="python")
    with pytest.raises(NumericFailure) as err_cy:
        run_one_pass(cy, train, backend="compiled")
    assert err_py.value.parameter == err_cy.value.parameter == "w"
    assert err_py.value.step == err_cy.value.step


def test_resolve_backend_rejects_unknown():
    with pytest.raises(ValueError):
        _backend.resolve_backend("fortran")


def test_auto_selects_compiled_when_available():
    assert _backend.resolve_backend(None) == "compiled"
