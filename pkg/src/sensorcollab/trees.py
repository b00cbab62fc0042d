"""Binary decision trees over categorical features, built from scratch.

Induction is greedy top-down: each internal node picks the (feature, binary
category partition) with minimal weighted Gini impurity, stopping at depth,
leaf-size, or purity limits.  A feature is tested at most once per path.
Determinism is total: split ties break on lowest feature index, then on the
lexicographically smallest left category tuple; leaf label ties predict 0.

Category codes never seen at a node during training route to the branch that
held the majority of the node's training mass, so prediction is defined for
every row of compatible width.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from sensorcollab.dataset import CategoricalDataset


@dataclass(frozen=True)
class Leaf:
    label: int
    purity: float          # majority fraction of the training rows at this leaf


@dataclass(frozen=True)
class Split:
    feature: int
    left_categories: tuple[int, ...]    # sorted codes routed left
    seen_categories: tuple[int, ...]    # sorted codes observed here in training
    majority_side: str                  # 'L' or 'R': route for unseen codes
    left: "Leaf | Split"
    right: "Leaf | Split"


@dataclass(frozen=True)
class DecisionTree:
    root: Leaf | Split
    num_features: int


def _gini(counts: np.ndarray) -> float:
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p * p).sum())


def _left_sets(present: np.ndarray):
    """Proper binary partitions of the present categories, lowest code fixed left.

    Yielded in lexicographic order of the left tuple, which is also the split
    tie-break order.
    """
    rest = [int(c) for c in present[1:]]
    lowest = int(present[0])
    for size in range(0, len(rest)):
        for extra in combinations(rest, size):
            yield (lowest,) + extra


def train_tree(data: CategoricalDataset, max_depth: int = 10,
               min_leaf: int = 1) -> DecisionTree:
    """Grow a tree on `data`; deterministic for identical inputs."""
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if max_depth < 0 or min_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_leaf >= 1")
    X, y = data.features, data.labels

    def leaf_for(idx: np.ndarray) -> Leaf:
        ones = int(y[idx].sum())
        zeros = len(idx) - ones
        label = 1 if ones > zeros else 0
        return Leaf(label, max(ones, zeros) / len(idx))

    def grow(idx: np.ndarray, depth: int, used: frozenset[int]):
        labels = y[idx]
        ones = int(labels.sum())
        if depth >= max_depth or ones == 0 or ones == len(idx):
            return leaf_for(idx)
        best = None  # (gini, feature, left_tuple, mask)
        for feature in range(data.num_features):
            if feature in used:
                continue
            column = X[idx, feature]
            present = np.unique(column)
            if len(present) < 2:
                continue
            for left_tuple in _left_sets(present):
                mask = np.isin(column, left_tuple)
                n_left = int(mask.sum())
                n_right = len(idx) - n_left
                if n_left < min_leaf or n_right < min_leaf:
                    continue
                left_ones = int(labels[mask].sum())
                left_counts = np.array([n_left - left_ones, left_ones])
                right_counts = np.array([n_right - (ones - left_ones), ones - left_ones])
                gini = (n_left * _gini(left_counts) + n_right * _gini(right_counts)) / len(idx)
                key = (gini, feature, left_tuple)
                if best is None or key < best[:3]:
                    best = (gini, feature, left_tuple, mask)
        if best is None:
            return leaf_for(idx)
        _, feature, left_tuple, mask = best
        column = X[idx, feature]
        n_left = int(mask.sum())
        majority_side = "L" if n_left >= len(idx) - n_left else "R"
        child_used = used | {feature}
        left = grow(idx[mask], depth + 1, child_used)
        right = grow(idx[~mask], depth + 1, child_used)
        return Split(feature, left_tuple, tuple(int(c) for c in np.unique(column)),
                     majority_side, left, right)

    root = grow(np.arange(len(data)), 0, frozenset())
    return DecisionTree(root, data.num_features)


def predict(tree: DecisionTree, data: CategoricalDataset) -> np.ndarray:
    """Predicted labels for every row, as a 0/1 vector aligned with `data`."""
    if data.num_features != tree.num_features:
        raise ValueError(
            f"tree expects {tree.num_features} features, data has {data.num_features}")
    out = np.empty(len(data), dtype=np.uint8)
    if len(data) == 0:
        return out

    def route(node, idx: np.ndarray):
        if isinstance(node, Leaf):
            out[idx] = node.label
            return
        column = data.features[idx, node.feature]
        goes_left = np.isin(column, node.left_categories)
        unseen = ~np.isin(column, node.seen_categories)
        if node.majority_side == "L":
            goes_left = goes_left | unseen
        else:
            goes_left = goes_left & ~unseen
        if goes_left.any():
            route(node.left, idx[goes_left])
        if (~goes_left).any():
            route(node.right, idx[~goes_left])

    route(tree.root, np.arange(len(data)))
    return out


def predict_row(tree: DecisionTree, row) -> int:
    """Single-row traversal; the vectorized path is `predict`."""
    node = tree.root
    while isinstance(node, Split):
        code = int(row[node.feature])
        if code in node.seen_categories:
            go_left = code in node.left_categories
        else:
            go_left = node.majority_side == "L"
        node = node.left if go_left else node.right
    return node.label


def training_error(tree: DecisionTree, data: CategoricalDataset) -> float:
    return float(np.mean(predict(tree, data) != data.labels))


def tree_to_text(tree: DecisionTree) -> str:
    """Nested debug serialization; round-trips through `tree_from_text`.

    Format: header line 'tree features=<d>', then one node per line,
    indented two spaces per depth:
      split f=<i> left=<c,c,..> seen=<c,c,..> miss=<L|R>
      leaf label=<0|1> purity=<float>
    """
    lines = [f"tree features={tree.num_features}"]

    def emit(node, depth: int):
        pad = "  " * (depth + 1)
        if isinstance(node, Leaf):
            lines.append(f"{pad}leaf label={node.label} purity={node.purity!r}")
            return
        left = ",".join(str(c) for c in node.left_categories)
        seen = ",".join(str(c) for c in node.seen_categories)
        lines.append(f"{pad}split f={node.feature} left={left} seen={seen} "
                     f"miss={node.majority_side}")
        emit(node.left, depth + 1)
        emit(node.right, depth + 1)

    emit(tree.root, 0)
    return "\n".join(lines) + "\n"


def tree_from_text(text: str) -> DecisionTree:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = lines[0].split()
    if header[0] != "tree":
        raise ValueError("not a tree serialization")
    num_features = int(header[1].split("=")[1])
    pos = 1

    def parse() -> Leaf | Split:
        nonlocal pos
        fields = lines[pos].split()
        pos += 1
        if fields[0] == "leaf":
            label = int(fields[1].split("=")[1])
            purity = float(fields[2].split("=")[1])
            return Leaf(label, purity)
        feature = int(fields[1].split("=")[1])
        left = tuple(int(c) for c in fields[2].split("=")[1].split(","))
        seen = tuple(int(c) for c in fields[3].split("=")[1].split(","))
        miss = fields[4].split("=")[1]
        left_child = parse()
        right_child = parse()
        return Split(feature, left, seen, miss, left_child, right_child)

    root = parse()
    if pos != len(lines):
        raise ValueError("trailing content after tree")
    return DecisionTree(root, num_features)
