import numpy as np
import pytest

from dynscale.dataset import load_benchmark, split_train_test
from dynscale.harness import evaluate, run_one_pass
from dynscale.learners import METHODS, Hyperparams, make_learner
from dynscale.serialize import SnapshotError, load_model, save_model


def trained_learner(method, seed=0):
    data, spec = load_benchmark("liver")
    train, _ = split_train_test(data, spec.train_count, seed=seed)
    learner = make_learner(method, train.feature_count,
                           Hyperparams(lam=0.1, mu=0.01, nu=0.01, c=0.5,
                                       n_train=len(train)))
    run_one_pass(learner, train, backend="python")
    return learner, train


@pytest.mark.parametrize("method", METHODS)
def test_round_trip_preserves_predictions(method, tmp_path):
    learner, train = trained_learner(method)
    path = tmp_path / "model.txt"
    save_model(learner, path)
    loaded = load_model(path)
    assert loaded.method_name == learner.method_name
    assert evaluate(loaded, train) == evaluate(learner, train)
    X, _ = train.as_arrays()
    for i in range(0, len(train), 37):
        assert loaded.decision_score(X[i]) == learner.decision_score(X[i])


@pytest.mark.parametrize("method", ["SGD", "GN+avg", "FS-2+avg", "PA-1"])
def test_round_trip_is_byte_stable(method, tmp_path):
    learner, _ = trained_learner(method)
    first = tmp_path / "a.txt"
    second = tmp_path / "b.txt"
    save_model(learner, first)
    save_model(load_model(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_floats_survive_exactly(tmp_path):
    learner = make_learner("SGD", 3)
    learner.w = np.array([1.0 / 3.0, -2.718281828459045e-10, 1e300])
    learner.b = -0.1
    path = tmp_path / "model.txt"
    save_model(learner, path)
    loaded = load_model(path)
    np.testing.assert_array_equal(loaded.w, learner.w)
    assert loaded.b == learner.b


def test_snapshot_is_flat_text(tmp_path):
    learner, _ = trained_learner("FS-1")
    path = tmp_path / "model.txt"
    save_model(learner, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "dynscale-model 1"
    assert lines[1] == "FS-1"
    assert int(lines[2]) == 6
    # FS-1 has no slope block: weights (6), bias, offsets (6)
    assert len(lines) == 3 + 6 + 1 + 6
    for line in lines[3:]:
        float(line)  # every remaining line is a single number


def test_rejects_garbage(tmp_path):
    path = tmp_path / "model.txt"
    path.write_text("not a model\n")
    with pytest.raises(SnapshotError):
        load_model(path)


def test_rejects_truncated(tmp_path):
    learner, _ = trained_learner("GN")
    path = tmp_path / "model.txt"
    save_model(learner, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-3]) + "\n")
    with pytest.raises(SnapshotError):
        load_model(path)


def test_rejects_trailing_data(tmp_path):
    learner, _ = trained_learner("SGD")
    path = tmp_path / "model.txt"
    save_model(learner, path)
    path.write_text(path.read_text() + "42\n")
    with pytest.raises(SnapshotError):
        load_model(path)


def test_missing_file():
    with pytest.raises(SnapshotError):
        load_model("/nonexistent/model.txt")
