"""Classifier particles: prediction-vector kernels and bootstrap ensembles.

Classifiers are compared through their prediction vectors on a fixed row
set, never through their structure.  The kernel between two prediction
vectors of length n with Hamming distance h is (1 - h/n)**4; the edge
similarity used between neighboring sensors is the kernel cubed, a peakier
variant of the same measure.  Both exponents are exposed for experiments.

Inside distributed algorithms every kernel is evaluated on the acting
sensor's own rows only; pooled-row evaluation exists solely for centralized
reference computations and is labeled as such where it appears.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sensorcollab.dataset import CategoricalDataset
from sensorcollab.trees import DecisionTree, predict, train_tree

KERNEL_EXPONENT = 4
SIMILARITY_EXPONENT = 3


def kernel(f_a: np.ndarray, f_b: np.ndarray, exponent: int = KERNEL_EXPONENT) -> float:
    """(1 - hamming/n) ** exponent for two equal-length binary prediction vectors."""
    f_a = np.asarray(f_a)
    f_b = np.asarray(f_b)
    if f_a.shape != f_b.shape or f_a.ndim != 1:
        raise ValueError(f"prediction vectors differ in shape: {f_a.shape} vs {f_b.shape}")
    n = f_a.shape[0]
    if n < 1:
        raise ValueError("prediction vectors must be nonempty")
    hamming = int(np.count_nonzero(f_a != f_b))
    return (1.0 - hamming / n) ** exponent


def edge_similarity(f_a: np.ndarray, f_b: np.ndarray,
                    kernel_exponent: int = KERNEL_EXPONENT,
                    similarity_exponent: int = SIMILARITY_EXPONENT) -> float:
    """Kernel raised to `similarity_exponent`; the agreement factor between neighbors."""
    return kernel(f_a, f_b, kernel_exponent) ** similarity_exponent


@dataclass(frozen=True)
class ParticleSet:
    """One sensor's bootstrapped classifiers plus its private rows.

    `local_predictions[j]` caches particle j's prediction vector on
    `local_data`; `resample_indices[j]` records the bootstrap draw that
    trained it.
    """

    owner: int
    particles: tuple[DecisionTree, ...]
    local_data: CategoricalDataset
    local_predictions: np.ndarray          # (n_particles, len(local_data))
    resample_indices: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.particles) < 1:
            raise ValueError("a particle set needs at least one particle")
        if self.local_predictions.shape != (len(self.particles), len(self.local_data)):
            raise ValueError("prediction cache shape mismatch")

    @property
    def num_particles(self) -> int:
        return len(self.particles)


def bootstrap_particles(shard: CategoricalDataset, n_particles: int, seed,
                        max_depth: int = 10, min_leaf: int = 1,
                        owner: int = 0) -> ParticleSet:
    """Train `n_particles` trees on with-replacement resamples of `shard`.

    All resample index arrays are drawn up front from the seeded stream, so
    individual particles could be trained in parallel without changing the
    result.
    """
    if len(shard) == 0:
        raise ValueError("cannot bootstrap an empty shard")
    if n_particles < 1:
        raise ValueError("need at least one particle")
    rng = np.random.default_rng(seed)
    n = len(shard)
    draws = tuple(rng.integers(0, n, size=n) for _ in range(n_particles))
    particles = tuple(train_tree(shard.subset(idx), max_depth, min_leaf) for idx in draws)
    cache = np.stack([predict(tree, shard) for tree in particles])
    return ParticleSet(owner, particles, shard, cache, draws)


def local_rho(ps: ParticleSet, f_vector: np.ndarray,
              exponent: int = KERNEL_EXPONENT) -> float:
    """Sum over the set's particles of kernel(particle, f), on the owner's rows."""
    f_vector = np.asarray(f_vector)
    if f_vector.shape != (len(ps.local_data),):
        raise ValueError("prediction vector was not evaluated on this sensor's rows")
    return float(sum(kernel(cached, f_vector, exponent)
                     for cached in ps.local_predictions))


def majority_vote(trees: list[DecisionTree], data: CategoricalDataset) -> np.ndarray:
    """Per-row majority ballot over all trees; exact ties predict 0."""
    if not trees:
        raise ValueError("need at least one tree")
    votes = np.zeros(len(data), dtype=np.int64)
    for tree in trees:
        votes += predict(tree, data)
    return (2 * votes > len(trees)).astype(np.uint8)


def classification_error(tree: DecisionTree, data: CategoricalDataset) -> float:
    """Fraction of rows the tree mislabels."""
    return float(np.mean(predict(tree, data) != data.labels))
