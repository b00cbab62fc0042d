"""Categorical dataset ingestion, synthesis, splitting, and sharding.

Datasets are tables of small-integer category codes with a binary label.
Symbolic CSV input (UCI-style: symbolic attributes, class symbol last) is
mapped to codes per column in first-appearance order, so re-loading the same
file always yields the same encoding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CategoricalDataset:
    """Rows of category codes plus binary labels.

    `feature_codes` / `label_codes` record the symbol-to-code mappings when
    the data came from a symbolic file; `label_rule` records the generating
    rule for synthetic data.  Neither affects equality of the data itself.
    """

    features: np.ndarray          # (n, d) integer codes
    labels: np.ndarray            # (n,) values in {0, 1}
    feature_arity: tuple[int, ...]
    feature_codes: list[dict[str, int]] | None = field(default=None, compare=False)
    label_codes: dict[str, int] | None = field(default=None, compare=False)
    label_rule: object | None = field(default=None, compare=False)

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.int64)
        labels = np.asarray(self.labels, dtype=np.uint8)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        if features.ndim != 2:
            raise ValueError("features must be 2-D")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must match the number of rows")
        if features.shape[1] != len(self.feature_arity):
            raise ValueError("feature_arity must match the number of columns")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be binary")
        for j, arity in enumerate(self.feature_arity):
            if features.size and (features[:, j].min() < 0 or features[:, j].max() >= arity):
                raise ValueError(f"column {j} has codes outside [0, {arity})")

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "CategoricalDataset":
        indices = np.asarray(indices, dtype=np.intp)
        return CategoricalDataset(self.features[indices], self.labels[indices],
                                  self.feature_arity, self.feature_codes,
                                  self.label_codes, self.label_rule)


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split and even sharding across sensors."""

    train_count: int
    test_count: int
    num_shards: int
    seed: int = 0

    def __post_init__(self):
        if self.num_shards < 1 or self.train_count < 1 or self.test_count < 0:
            raise ValueError("counts must be positive (test_count may be 0)")
        if self.train_count % self.num_shards != 0:
            raise ValueError(
                f"train_count {self.train_count} not divisible by {self.num_shards} shards")


def load_categorical_csv(path) -> CategoricalDataset:
    """Load a comma-separated symbolic file; the last field is the binary class.

    Symbols are coded per column in first-appearance order (first-seen class
    symbol becomes label 0).  Ragged rows, more than two class symbols, and
    empty files are rejected with line-numbered diagnostics.
    """
    with open(path, "r", encoding="utf-8") as handle:
        raw_lines = handle.read().splitlines()
    rows = [(i + 1, line.strip()) for i, line in enumerate(raw_lines) if line.strip()]
    if not rows:
        raise ValueError(f"{path}: empty file")

    width = None
    feature_codes: list[dict[str, int]] = []
    label_codes: dict[str, int] = {}
    coded_rows = []
    labels = []
    for lineno, line in rows:
        fields = line.split(",")
        if width is None:
            width = len(fields)
            if width < 2:
                raise ValueError(f"{path}:{lineno}: need at least one feature and a class")
            feature_codes = [{} for _ in range(width - 1)]
        elif len(fields) != width:
            raise ValueError(
                f"{path}:{lineno}: expected {width} fields, got {len(fields)}")
        coded = []
        for j, symbol in enumerate(fields[:-1]):
            codes = feature_codes[j]
            if symbol not in codes:
                codes[symbol] = len(codes)
            coded.append(codes[symbol])
        class_symbol = fields[-1]
        if class_symbol not in label_codes:
            if len(label_codes) == 2:
                raise ValueError(
                    f"{path}:{lineno}: third class symbol {class_symbol!r} "
                    f"(already saw {sorted(label_codes)})")
            label_codes[class_symbol] = len(label_codes)
        coded_rows.append(coded)
        labels.append(label_codes[class_symbol])

    features = np.array(coded_rows, dtype=np.int64)
    arity = tuple(len(codes) for codes in feature_codes)
    return CategoricalDataset(features, np.array(labels, dtype=np.uint8), arity,
                              feature_codes=feature_codes, label_codes=label_codes)


def write_categorical_csv(ds: CategoricalDataset, path) -> None:
    """Write rows back in the comma-separated symbolic format.

    Uses the recorded symbol mappings when present, otherwise the codes'
    decimal representations.
    """
    if ds.feature_codes is not None:
        inverse = [{code: sym for sym, code in codes.items()} for codes in ds.feature_codes]
    else:
        inverse = [{c: str(c) for c in range(a)} for a in ds.feature_arity]
    if ds.label_codes is not None:
        label_inverse = {code: sym for sym, code in ds.label_codes.items()}
    else:
        label_inverse = {0: "0", 1: "1"}
    with open(path, "w", encoding="utf-8") as handle:
        for row, label in zip(ds.features, ds.labels):
            symbols = [inverse[j][int(code)] for j, code in enumerate(row)]
            symbols.append(label_inverse[int(label)])
            handle.write(",".join(symbols) + "\n")


def split_and_shard(ds: CategoricalDataset,
                    spec: SplitSpec) -> tuple[list[CategoricalDataset], CategoricalDataset]:
    """Seeded permutation, then equal train shards and a held-out test set."""
    n = len(ds)
    if spec.train_count + spec.test_count > n:
        raise ValueError(
            f"split needs {spec.train_count + spec.test_count} rows, dataset has {n}")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(n)
    train_idx = order[:spec.train_count]
    test_idx = order[spec.train_count:spec.train_count + spec.test_count]
    per_shard = spec.train_count // spec.num_shards
    shards = [ds.subset(train_idx[i * per_shard:(i + 1) * per_shard])
              for i in range(spec.num_shards)]
    return shards, ds.subset(test_idx)


# A generating rule is nested tuples:
#   ("leaf", label) | ("split", feature, frozenset(left codes), left, right)
LabelRule = tuple


def rule_label(rule: LabelRule, row) -> int:
    node = rule
    while node[0] == "split":
        _, feature, left_set, left, right = node
        node = left if int(row[feature]) in left_set else right
    return node[1]


def _random_rule(depth: int, num_features: int, arity: int, rng) -> LabelRule:
    if depth == 0:
        return ("leaf", int(rng.integers(2)))
    feature = int(rng.integers(num_features))
    cut = int(rng.integers(1, arity)) if arity > 1 else 1
    codes = rng.permutation(arity)
    left_set = frozenset(int(c) for c in codes[:cut])
    left = _random_rule(depth - 1, num_features, arity, rng)
    right = _random_rule(depth - 1, num_features, arity, rng)
    return ("split", feature, left_set, left, right)


def synthetic_categorical(rows: int, features: int, arity: int, rule_depth: int,
                          noise_rate: float, seed) -> CategoricalDataset:
    """Random categorical data labeled by a random depth-bounded rule plus label noise.

    The generating rule is kept on the returned dataset (`label_rule`) so the
    irreducible error rate is known: it equals `noise_rate`.
    """
    if rows < 1 or features < 1 or arity < 2 or rule_depth < 1:
        raise ValueError("rows, features, rule_depth must be >= 1 and arity >= 2")
    if not (0.0 <= noise_rate < 0.5):
        raise ValueError("noise_rate must be in [0, 0.5)")
    rng = np.random.default_rng(seed)
    rule = _random_rule(rule_depth, features, arity, rng)
    X = rng.integers(0, arity, size=(rows, features), dtype=np.int64)
    clean = np.array([rule_label(rule, row) for row in X], dtype=np.uint8)
    flips = rng.random(rows) < noise_rate
    labels = np.where(flips, 1 - clean, clean).astype(np.uint8)
    return CategoricalDataset(X, labels, (arity,) * features, label_rule=rule)
