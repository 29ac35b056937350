import numpy as np
import pytest

from dynscale.dataset import Dataset, Instance, load_benchmark, split_train_test
from dynscale.harness import (
    CURVE_METHODS,
    CumulativeErrorCurve,
    GridSpec,
    evaluate,
    grid_combinations,
    grid_search,
    method_parameters,
    reproduce,
    run_experiment,
    run_one_pass,
)
from dynscale.learners import Hyperparams, make_learner


def toy_dataset(n=40, m=3, seed=0, separation=3.0):
    """Linearly separable-ish blobs with labels +1/-1."""
    rng = np.random.default_rng(seed)
    instances = []
    for _ in range(n):
        label = 1 if rng.random() < 0.5 else -1
        feats = rng.normal(label * separation, 1.0, size=m)
        instances.append(Instance(feats, label))
    return Dataset(tuple(instances), "toy", m)


class TestCurveType:
    def test_points_are_one_based(self):
        curve = CumulativeErrorCurve((0, 1, 1))
        assert curve.points() == [(1, 0), (2, 1), (3, 1)]
        assert curve.final_errors == 1

    def test_rejects_decreasing(self):
        with pytest.raises(ValueError):
            CumulativeErrorCurve((1, 0))

    def test_rejects_errors_above_diagonal(self):
        with pytest.raises(ValueError):
            CumulativeErrorCurve((2,))


class TestRunOnePass:
    def test_always_correct_model_has_flat_curve(self):
        data = toy_dataset(30, separation=50.0)
        learner = make_learner("PA", 3)
        learner.w = np.array([1.0, 1.0, 1.0])  # classifies blobs perfectly
        curve = run_one_pass(learner, data, backend="python")
        assert curve.final_errors == 0
        assert all(e == 0 for e in curve.errors)

    def test_never_updating_wrong_model_rides_the_diagonal(self):
        data = toy_dataset(30, separation=50.0)

        class Stubborn:
            k = 0

            def learn_one(self, x, label):
                self.k += 1
                return -label  # always wrong, never learns

        curve = run_one_pass(Stubborn(), data, backend="python")
        assert list(curve.errors) == list(range(1, 31))

    def test_counts_updates_exactly_once_per_instance(self):
        data = toy_dataset(25)
        learner = make_learner("SGD", 3, Hyperparams(n_train=len(data)))
        run_one_pass(learner, data, backend="python")
        assert learner.k == 25

    def test_curve_matches_manual_replay(self):
        data = toy_dataset(60, separation=0.5, seed=3)
        learner = make_learner("GN+avg", 3, Hyperparams(n_train=len(data)))
        replay = make_learner("GN+avg", 3, Hyperparams(n_train=len(data)))
        curve = run_one_pass(learner, data, backend="python")
        errors = 0
        expected = []
        for inst in data:
            if replay.learn_one(inst.features, inst.label) != inst.label:
                errors += 1
            expected.append(errors)
        assert list(curve.errors) == expected


class TestEvaluate:
    def test_exact_fraction(self):
        data = toy_dataset(54, separation=50.0, seed=1)
        learner = make_learner("PA", 3)
        learner.w = np.array([1.0, 1.0, 1.0])
        assert evaluate(learner, data) == 1.0

    def test_balanced_data_constant_model_scores_half(self):
        instances = []
        rng = np.random.default_rng(0)
        for i in range(40):
            instances.append(Instance(rng.normal(size=2), 1 if i < 20 else -1))
        data = Dataset(tuple(instances), "balanced", 2)
        learner = make_learner("SGD", 2)
        learner.b = 100.0  # constant +1 prediction
        assert evaluate(learner, data) == 0.5

    def test_known_ratio(self):
        # 31 of 54 correct -> 0.574074...
        assert 31 / 54 == pytest.approx(0.574074, abs=1e-6)

    def test_empty_dataset_rejected(self):
        learner = make_learner("SGD", 2)
        with pytest.raises(ValueError):
            evaluate(learner, Dataset((), "empty", 2))

    def test_batch_scores_match_per_instance_classify(self):
        data = toy_dataset(50, separation=0.8, seed=5)
        for method in ("SGD", "GN", "FS", "FS-1", "FS-2", "FS-3", "PA", "GN+avg", "FS+avg"):
            learner = make_learner(method, 3, Hyperparams(n_train=len(data)))
            run_one_pass(learner, data, backend="python")
            X, y = data.as_arrays()
            per_instance = np.array([learner.classify(X[i]) for i in range(len(data))])
            acc = evaluate(learner, data)
            assert acc == (per_instance == y).mean()

    def test_adapt_stats_leaves_model_frozen(self):
        data = toy_dataset(30, seed=7)
        learner = make_learner("GN", 3, Hyperparams(n_train=len(data)))
        run_one_pass(learner, data, backend="python")
        count_before = learner.stats.count
        evaluate(learner, data, adapt_stats=True)
        assert learner.stats.count == count_before


class TestGrids:
    def test_parameter_restriction(self):
        assert method_parameters("SGD") == ("lam",)
        assert method_parameters("GN+avg") == ("lam",)
        assert method_parameters("FS") == ("lam", "mu", "nu")
        assert method_parameters("FS-1") == ("lam", "nu")
        assert method_parameters("FS-3") == ("mu", "nu")
        assert method_parameters("PA-2+avg") == ("c",)

    def test_combination_counts(self):
        assert len(grid_combinations("SGD")) == 6
        assert len(grid_combinations("FS")) == 216
        assert len(grid_combinations("FS-1")) == 36
        assert len(grid_combinations("PA")) == 5

    def test_grid_order_is_lexicographic(self):
        combos = grid_combinations("FS-1", GridSpec(lam=(0.0, 1.0), nu=(0.0, 2.0)))
        assert combos == [
            {"lam": 0.0, "nu": 0.0},
            {"lam": 0.0, "nu": 2.0},
            {"lam": 1.0, "nu": 0.0},
            {"lam": 1.0, "nu": 2.0},
        ]

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            grid_combinations("SGD", GridSpec(lam=()))

    def test_grid_search_returns_member_of_grid(self):
        data = toy_dataset(60, seed=2)
        best = grid_search("SGD", data, seed=0, backend="python")
        assert best.lam in (0.0, 0.01, 0.1, 1.0, 10.0, 100.0)
        assert best.n_train == len(data)

    def test_grid_search_deterministic(self):
        data = toy_dataset(60, seed=2)
        a = grid_search("PA-1", data, seed=4, backend="python")
        b = grid_search("PA-1", data, seed=4, backend="python")
        assert a == b


class TestRunExperiment:
    def test_single_seed_deterministic(self):
        data = toy_dataset(50, seed=6)
        train, test = split_train_test(data, 40, seed=0)
        kwargs = dict(train=train, test=test, seeds=1, backend="python")
        a = run_experiment("SGD+avg", **kwargs)
        b = run_experiment("SGD+avg", **kwargs)
        assert a.per_seed_test == b.per_seed_test
        assert a.best_params == b.best_params
        assert a.curve.errors == b.curve.errors

    def test_mean_equals_arithmetic_mean(self):
        data = toy_dataset(60, seed=8, separation=0.5)
        train, test = split_train_test(data, 45, seed=0)
        report = run_experiment("GN", train=train, test=test, seeds=3,
                                backend="python")
        assert report.train_accuracy == np.mean(report.per_seed_train)
        assert report.test_accuracy == np.mean(report.per_seed_test)
        assert report.seeds == 3
        assert len(report.per_seed_params) == 3

    def test_report_params_only_used_ones(self):
        data = toy_dataset(40, seed=9)
        train, test = split_train_test(data, 30, seed=0)
        report = run_experiment("PA", train=train, test=test, seeds=2,
                                backend="python")
        assert set(report.best_params) == {"c"}
        for params in report.per_seed_params:
            assert set(params) == {"c"}

    def test_accuracies_in_unit_interval(self):
        data = toy_dataset(40, seed=10, separation=0.3)
        train, test = split_train_test(data, 30, seed=0)
        for method in ("SGD", "FS-3+avg"):
            report = run_experiment(method, train=train, test=test, seeds=2,
                                    backend="python")
            assert 0.0 <= report.train_accuracy <= 1.0
            assert 0.0 <= report.test_accuracy <= 1.0

    def test_benchmark_by_name(self):
        report = run_experiment("PA", dataset="heart", seeds=1,
                                grids=GridSpec(c=(0.1,)), backend="python")
        assert report.dataset == "heart"
        assert len(report.curve) == 216


class TestReproduce:
    def test_subset_roster(self):
        grids = GridSpec(lam=(0.0, 0.1), c=(0.1,))
        out = reproduce("heart", ["SGD", "PA+avg"], seeds=1, grids=grids,
                        backend="python")
        assert set(out) == {"heart"}
        assert [r.method for r in out["heart"]] == ["SGD", "PA+avg"]

    def test_parallel_jobs_give_identical_results(self):
        grids = GridSpec(lam=(0.0, 0.1), mu=(0.0,), nu=(0.0,), c=(0.1,))
        kwargs = dict(seeds=2, grids=grids, backend="python")
        serial = reproduce("heart", ["SGD", "GN", "PA"], jobs=1, **kwargs)
        parallel = reproduce("heart", ["SGD", "GN", "PA"], jobs=2, **kwargs)
        for a, b in zip(serial["heart"], parallel["heart"]):
            assert a.method == b.method
            assert a.per_seed_test == b.per_seed_test
            assert a.best_params == b.best_params

    def test_curve_methods_constant(self):
        assert CURVE_METHODS == ("FS-2", "FS-2+avg", "SGD", "SGD+avg", "GN", "GN+avg")


class TestCurveBounds:
    @pytest.mark.parametrize("method", ["SGD", "GN+avg", "FS-2", "PA-1+avg"])
    def test_curves_monotone_and_bounded(self, method):
        data, spec = load_benchmark("liver")
        train, _ = split_train_test(data, spec.train_count, seed=0)
        learner = make_learner(method, train.feature_count,
                               Hyperparams(n_train=len(train)))
        curve = run_one_pass(learner, train, backend="python")
        assert len(curve) == len(train)
        prev = 0
        for seen, err in curve.points():
            assert prev <= err <= seen
            prev = err
