"""Dataset loading, label normalization, splitting, and shuffling.

Datasets are immutable once constructed: instances are stored in a tuple
and feature arrays are marked read-only, so they can be shared freely
across concurrent readers (e.g. parallel grid-search workers).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "DatasetError",
    "ParseError",
    "Instance",
    "Dataset",
    "load_csv",
    "split_train_test",
    "validation_split",
    "shuffle",
    "DatasetSpec",
    "bundled_manifest_path",
    "load_manifest",
    "load_benchmark",
]


class DatasetError(Exception):
    """Problem constructing or splitting a dataset."""


class ParseError(DatasetError):
    """Malformed input row; carries the 1-based row number."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


@dataclass(frozen=True)
class Instance:
    """One labeled example: a dense feature vector and a label in {+1, -1}."""

    features: np.ndarray
    label: int

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        feats.flags.writeable = False
        object.__setattr__(self, "features", feats)
        if self.label not in (-1, 1):
            raise DatasetError(f"label must be +1 or -1, got {self.label}")
        if not np.isfinite(feats).all():
            raise DatasetError("non-finite feature value")


@dataclass(frozen=True)
class Dataset:
    """Ordered, immutable collection of instances with a shared width."""

    instances: tuple[Instance, ...]
    name: str
    feature_count: int
    _arrays: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        for inst in self.instances:
            if inst.features.shape[0] != self.feature_count:
                raise DatasetError(
                    f"instance has {inst.features.shape[0]} features, "
                    f"dataset {self.name!r} expects {self.feature_count}"
                )

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self) -> Iterator[Instance]:
        return iter(self.instances)

    def __getitem__(self, i) -> Instance:
        return self.instances[i]

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Feature matrix (N, M) and label vector (N,), both read-only."""
        if self._arrays is None:
            if self.instances:
                X = np.stack([inst.features for inst in self.instances])
            else:
                X = np.zeros((0, self.feature_count))
            y = np.array([inst.label for inst in self.instances], dtype=np.int64)
            X.flags.writeable = False
            y.flags.writeable = False
            object.__setattr__(self, "_arrays", (X, y))
        return self._arrays

    def replace_instances(self, instances: Sequence[Instance], name: str | None = None) -> "Dataset":
        return Dataset(tuple(instances), name or self.name, self.feature_count)


def _split_row(line: str) -> list[str]:
    if "," in line:
        return [tok.strip() for tok in line.split(",")]
    return line.split()


def _label_matches(token: str, positive: str) -> bool:
    if token == positive:
        return True
    try:
        return float(token) == float(positive)
    except ValueError:
        return False


def load_csv(source, label_column: int, positive_label_value: str, name: str = "csv") -> Dataset:
    """Parse delimiter-separated numeric text into a label-normalized Dataset.

    `source` may be a path or an open text stream. Fields are separated by
    commas or whitespace (detected per file). The label column is compared
    textually (with a numeric-equality fallback, so "1" matches "1.0")
    against `positive_label_value`; matches map to +1, everything else to
    -1. Features are kept in file order with no scaling applied.

    Raises ParseError (with the offending row number) for non-numeric
    features or missing columns, and DatasetError for an empty source.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()

    positive = str(positive_label_value).strip()
    instances: list[Instance] = []
    feature_count: int | None = None
    for row_no, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line:
            continue
        tokens = _split_row(line)
        if not 0 <= label_column < len(tokens):
            raise ParseError(row_no, f"label column {label_column} missing "
                                     f"(row has {len(tokens)} fields)")
        label_token = tokens[label_column].strip()
        feature_tokens = [t for i, t in enumerate(tokens) if i != label_column]
        feats = np.empty(len(feature_tokens), dtype=np.float64)
        for i, tok in enumerate(feature_tokens):
            try:
                feats[i] = float(tok)
            except ValueError:
                raise ParseError(row_no, f"non-numeric feature value {tok!r}") from None
        if not np.isfinite(feats).all():
            raise ParseError(row_no, "non-finite feature value")
        if feature_count is None:
            feature_count = len(feats)
        elif len(feats) != feature_count:
            raise ParseError(row_no, f"expected {feature_count} features, got {len(feats)}")
        label = 1 if _label_matches(label_token, positive) else -1
        instances.append(Instance(feats, label))

    if not instances:
        raise DatasetError(f"no instances found in {name!r}")
    return Dataset(tuple(instances), name, feature_count)


def _partition(d: Dataset, chosen: np.ndarray, names: tuple[str, str]) -> tuple[Dataset, Dataset]:
    mask = np.zeros(len(d), dtype=bool)
    mask[chosen] = True
    first = [inst for inst, m in zip(d.instances, mask) if m]
    second = [inst for inst, m in zip(d.instances, mask) if not m]
    return d.replace_instances(first, names[0]), d.replace_instances(second, names[1])


def split_train_test(d: Dataset, train_count: int, seed: int,
                     stratify: bool = False) -> tuple[Dataset, Dataset]:
    """Seeded random partition into (train, test) with an exact train size.

    With `stratify`, each class contributes proportionally (largest
    remainder rounding) so class balance carries over to both parts.
    Both parts keep the original instance order.
    """
    if not 0 < train_count < len(d):
        raise ValueError(f"train_count must be in (0, {len(d)}), got {train_count}")
    rng = np.random.default_rng(seed)
    if not stratify:
        chosen = rng.permutation(len(d))[:train_count]
    else:
        labels = np.array([inst.label for inst in d.instances])
        classes = np.unique(labels)
        exact = {c: train_count * (labels == c).sum() / len(d) for c in classes}
        alloc = {c: int(np.floor(v)) for c, v in exact.items()}
        leftover = train_count - sum(alloc.values())
        for c in sorted(classes, key=lambda c: exact[c] - alloc[c], reverse=True)[:leftover]:
            alloc[c] += 1
        parts = []
        for c in classes:
            idx = np.flatnonzero(labels == c)
            parts.append(rng.permutation(idx)[: alloc[c]])
        chosen = np.concatenate(parts)
    return _partition(d, chosen, (f"{d.name}-train", f"{d.name}-test"))


def validation_split(train: Dataset, fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Hold out round(fraction * N) instances: returns (remainder, holdout)."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n_val = int(round(fraction * len(train)))
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(len(train))[:n_val]
    holdout, remainder = _partition(
        train, chosen, (f"{train.name}-val", f"{train.name}-fit"))
    return remainder, holdout


def shuffle(d: Dataset, seed: int) -> Dataset:
    """Deterministic seeded permutation of the instance order."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(d))
    return d.replace_instances([d.instances[i] for i in perm], d.name)


# ----------------------------------------------------------------------
# Bundled benchmark manifest
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetSpec:
    """Manifest entry for one benchmark dataset."""

    name: str
    path: Path
    label_column: int
    positive_label: str
    train_count: int


def bundled_manifest_path() -> Path:
    return Path(__file__).parent / "data" / "datasets.manifest"


def load_manifest(path: str | Path | None = None) -> dict[str, DatasetSpec]:
    """Read a dataset manifest (defaults to the bundled one)."""
    manifest_path = Path(path) if path is not None else bundled_manifest_path()
    if not manifest_path.exists():
        raise DatasetError(f"manifest not found: {manifest_path}")
    parser = configparser.ConfigParser()
    parser.read(manifest_path)
    specs: dict[str, DatasetSpec] = {}
    for section in parser.sections():
        entry = parser[section]
        file_path = Path(entry["file"])
        if not file_path.is_absolute():
            file_path = manifest_path.parent / file_path
        specs[section] = DatasetSpec(
            name=section,
            path=file_path,
            label_column=entry.getint("label_column"),
            positive_label=entry["positive_label"].strip(),
            train_count=entry.getint("train_count"),
        )
    return specs


def load_benchmark(name: str, manifest: str | Path | None = None) -> tuple[Dataset, DatasetSpec]:
    """Load one bundled benchmark by manifest name."""
    specs = load_manifest(manifest)
    if name not in specs:
        known = ", ".join(sorted(specs))
        raise DatasetError(f"unknown dataset {name!r} (known: {known})")
    spec = specs[name]
    if not spec.path.exists():
        raise DatasetError(f"dataset file not found: {spec.path}")
    data = load_csv(spec.path, spec.label_column, spec.positive_label, name=name)
    return data, spec
