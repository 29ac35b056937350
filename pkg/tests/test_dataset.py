import io
from collections import Counter

import numpy as np
import pytest

from dynscale.dataset import (
    Dataset,
    DatasetError,
    Instance,
    ParseError,
    load_benchmark,
    load_csv,
    load_manifest,
    shuffle,
    split_train_test,
    validation_split,
)

BENCHMARK_SHAPES = {"heart": (270, 13), "liver": (345, 6), "diabetes": (768, 8)}
TRAIN_COUNTS = {"heart": 216, "liver": 276, "diabetes": 611}


def make_dataset(n, m=2, seed=0):
    rng = np.random.default_rng(seed)
    instances = [
        Instance(rng.normal(size=m), 1 if i % 2 == 0 else -1) for i in range(n)
    ]
    return Dataset(tuple(instances), "synthetic", m)


def instance_key(inst):
    return (tuple(inst.features), inst.label)


class TestLoadCsv:
    def test_single_row_text_label(self):
        data = load_csv(io.StringIO("1.0,2.0,pos\n"), 2, "pos")
        assert len(data) == 1
        np.testing.assert_array_equal(data[0].features, [1.0, 2.0])
        assert data[0].label == 1

    def test_negative_label_mapping(self):
        data = load_csv(io.StringIO("1.0,2.0,neg\n1.5,2.5,pos\n"), 2, "pos")
        assert [inst.label for inst in data] == [-1, 1]

    def test_numeric_label_equality(self):
        # "1" in the file should match positive label "1.0" and vice versa
        data = load_csv(io.StringIO("3.0,1\n4.0,0\n"), 1, "1.0")
        assert [inst.label for inst in data] == [1, -1]

    def test_whitespace_delimited(self):
        data = load_csv(io.StringIO("1.0 2.0 2\n3.0 4.0 1\n"), 2, "2")
        assert len(data) == 2
        assert data.feature_count == 2
        assert [inst.label for inst in data] == [1, -1]

    def test_label_column_not_last(self):
        data = load_csv(io.StringIO("pos,1.0,2.0\n"), 0, "pos")
        np.testing.assert_array_equal(data[0].features, [1.0, 2.0])
        assert data[0].label == 1

    def test_non_numeric_feature_is_parse_error_with_row(self):
        stream = io.StringIO("1.0,2.0,pos\nabc,2.0,pos\n")
        with pytest.raises(ParseError) as err:
            load_csv(stream, 2, "pos")
        assert err.value.row == 2
        assert "abc" in str(err.value)

    def test_missing_label_column(self):
        with pytest.raises(ParseError) as err:
            load_csv(io.StringIO("1.0,2.0\n"), 5, "pos")
        assert err.value.row == 1

    def test_ragged_rows_rejected(self):
        with pytest.raises(ParseError) as err:
            load_csv(io.StringIO("1.0,2.0,pos\n1.0,pos\n"), 2, "pos")
        assert err.value.row == 2

    def test_empty_source(self):
        with pytest.raises(DatasetError):
            load_csv(io.StringIO(""), 0, "pos")

    def test_rejects_nan_feature(self):
        with pytest.raises(ParseError):
            load_csv(io.StringIO("nan,2.0,pos\n"), 2, "pos")


class TestBundledBenchmarks:
    @pytest.mark.parametrize("name", sorted(BENCHMARK_SHAPES))
    def test_counts_match_manifest(self, name):
        data, spec = load_benchmark(name)
        rows, features = BENCHMARK_SHAPES[name]
        assert len(data) == rows
        assert data.feature_count == features
        assert spec.train_count == TRAIN_COUNTS[name]
        assert all(inst.label in (-1, 1) for inst in data)
        labels = Counter(inst.label for inst in data)
        assert labels[1] > 0 and labels[-1] > 0

    def test_unknown_benchmark(self):
        with pytest.raises(DatasetError):
            load_benchmark("foo")

    def test_manifest_lists_three_datasets(self):
        specs = load_manifest()
        assert set(specs) == set(BENCHMARK_SHAPES)


class TestSplitTrainTest:
    def test_heart_split_sizes(self):
        data, spec = load_benchmark("heart")
        train, test = split_train_test(data, spec.train_count, seed=0)
        assert (len(train), len(test)) == (216, 54)

    def test_liver_split_sizes(self):
        data, spec = load_benchmark("liver")
        train, test = split_train_test(data, spec.train_count, seed=0)
        assert (len(train), len(test)) == (276, 69)

    def test_deterministic(self):
        data = make_dataset(50)
        a = split_train_test(data, 40, seed=123)
        b = split_train_test(data, 40, seed=123)
        assert [instance_key(i) for i in a[0]] == [instance_key(i) for i in b[0]]
        assert [instance_key(i) for i in a[1]] == [instance_key(i) for i in b[1]]

    def test_partition_is_disjoint_union(self):
        data = make_dataset(50)
        train, test = split_train_test(data, 30, seed=5)
        combined = Counter(map(instance_key, train)) + Counter(map(instance_key, test))
        assert combined == Counter(map(instance_key, data))

    def test_stratified_preserves_class_balance(self):
        data = make_dataset(100)  # alternating labels, 50/50
        train, test = split_train_test(data, 80, seed=2, stratify=True)
        train_labels = Counter(inst.label for inst in train)
        assert train_labels[1] == 40 and train_labels[-1] == 40

    def test_train_count_out_of_range(self):
        data = make_dataset(10)
        for bad in (0, 10, 11, -1):
            with pytest.raises(ValueError):
                split_train_test(data, bad, seed=0)


class TestValidationSplit:
    def test_fifth_of_heart_train(self):
        data = make_dataset(216)
        remainder, holdout = validation_split(data, 0.2, seed=0)
        assert len(holdout) == 43  # round(0.2 * 216)
        assert len(remainder) == 173

    def test_smallest_case(self):
        data = make_dataset(5)
        remainder, holdout = validation_split(data, 0.2, seed=0)
        assert len(holdout) == 1
        assert len(remainder) == 4

    def test_deterministic(self):
        data = make_dataset(40)
        a = validation_split(data, 0.25, seed=9)
        b = validation_split(data, 0.25, seed=9)
        assert [instance_key(i) for i in a[1]] == [instance_key(i) for i in b[1]]

    def test_disjoint_union(self):
        data = make_dataset(37)
        remainder, holdout = validation_split(data, 0.3, seed=1)
        combined = Counter(map(instance_key, remainder)) + Counter(map(instance_key, holdout))
        assert combined == Counter(map(instance_key, data))

    def test_fraction_bounds(self):
        data = make_dataset(10)
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                validation_split(data, bad, seed=0)


class TestShuffle:
    def test_empty_dataset(self):
        data = Dataset((), "empty", 3)
        assert len(shuffle(data, seed=0)) == 0

    def test_singleton(self):
        data = make_dataset(1)
        out = shuffle(data, seed=0)
        assert instance_key(out[0]) == instance_key(data[0])

    def test_multiset_preserved_and_orders_differ(self):
        data = make_dataset(100, seed=3)
        a = shuffle(data, seed=1)
        b = shuffle(data, seed=2)
        assert Counter(map(instance_key, a)) == Counter(map(instance_key, data))
        assert [instance_key(i) for i in a] != [instance_key(i) for i in b]

    def test_is_a_bijection(self):
        data = make_dataset(30, seed=4)
        shuffled = shuffle(data, seed=7)
        # invert the permutation by matching unique instances
        pos = {instance_key(inst): i for i, inst in enumerate(data)}
        inverse = [None] * len(data)
        for i, inst in enumerate(shuffled):
            inverse[pos[instance_key(inst)]] = i
        restored = [shuffled[i] for i in inverse]
        assert [instance_key(i) for i in restored] == [instance_key(i) for i in data]

    def test_deterministic(self):
        data = make_dataset(25)
        a = shuffle(data, seed=11)
        b = shuffle(data, seed=11)
        assert [instance_key(i) for i in a] == [instance_key(i) for i in b]


class TestDatasetType:
    def test_instances_are_immutable(self):
        data = make_dataset(3)
        with pytest.raises((ValueError, RuntimeError)):
            data[0].features[0] = 99.0

    def test_feature_count_enforced(self):
        good = Instance(np.zeros(2), 1)
        bad = Instance(np.zeros(3), 1)
        with pytest.raises(DatasetError):
            Dataset((good, bad), "broken", 2)

    def test_label_must_be_plus_minus_one(self):
        with pytest.raises(DatasetError):
            Instance(np.zeros(2), 0)

    def test_as_arrays(self):
        data = make_dataset(4, m=3)
        X, y = data.as_arrays()
        assert X.shape == (4, 3)
        assert y.tolist() == [1, -1, 1, -1]
        with pytest.raises((ValueError, RuntimeError)):
            X[0, 0] = 1.0
