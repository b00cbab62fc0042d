import numpy as np
import pytest

from sensorcollab.dataset import CategoricalDataset, synthetic_categorical
from sensorcollab.oracles import kernel_naive, local_rho_naive
from sensorcollab.particles import (
    bootstrap_particles,
    edge_similarity,
    kernel,
    local_rho,
    majority_vote,
)
from sensorcollab.trees import Leaf, predict, train_tree, tree_to_text


def _pure_dataset(n_rows, label, arity=2):
    rng = np.random.default_rng(0)
    X = rng.integers(0, arity, size=(n_rows, 3), dtype=np.int64)
    return CategoricalDataset(X, np.full(n_rows, label, dtype=np.uint8), (arity,) * 3)


class TestKernel:
    def test_identical_vectors(self):
        v = np.array([0, 1, 1, 0], dtype=np.uint8)
        assert kernel(v, v) == 1.0

    def test_complementary_vectors(self):
        a = np.array([0, 1, 0, 1], dtype=np.uint8)
        assert kernel(a, 1 - a) == 0.0

    def test_half_disagreement(self):
        a = np.array([0, 0, 1, 1], dtype=np.uint8)
        b = np.array([0, 0, 0, 0], dtype=np.uint8)
        assert kernel(a, b) == pytest.approx(0.0625)

    def test_symmetry_bounds_and_monotonicity(self):
        rng = np.random.default_rng(1)
        n = 40
        base = rng.integers(0, 2, n).astype(np.uint8)
        previous = 1.1
        for hamming in range(0, n + 1, 5):
            other = base.copy()
            other[:hamming] = 1 - other[:hamming]
            value = kernel(base, other)
            assert 0.0 <= value <= 1.0
            assert kernel(other, base) == value
            assert value <= previous
            previous = value
        assert kernel(base, base.copy()) == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            kernel(np.zeros(3, dtype=np.uint8), np.zeros(4, dtype=np.uint8))


class TestEdgeSimilarity:
    def test_extremes(self):
        a = np.array([0, 1, 0, 1], dtype=np.uint8)
        assert edge_similarity(a, a.copy()) == 1.0
        assert edge_similarity(a, 1 - a) == 0.0

    def test_cube_of_kernel(self):
        a = np.array([0, 0, 1, 1], dtype=np.uint8)
        b = np.array([0, 0, 0, 0], dtype=np.uint8)
        assert edge_similarity(a, b) == pytest.approx(0.0625 ** 3)

    def test_never_exceeds_kernel(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            a = rng.integers(0, 2, 25).astype(np.uint8)
            b = rng.integers(0, 2, 25).astype(np.uint8)
            assert edge_similarity(a, b) <= kernel(a, b) + 1e-15


class TestBootstrapParticles:
    def test_single_row_shard_reproduces_plain_training(self):
        shard = _pure_dataset(1, 1)
        ps = bootstrap_particles(shard, 1, seed=0)
        assert tree_to_text(ps.particles[0]) == tree_to_text(train_tree(shard))

    def test_pure_shard_gives_identical_single_leaf_particles(self):
        shard = _pure_dataset(30, 1)
        ps = bootstrap_particles(shard, 4, seed=3)
        for tree in ps.particles:
            assert isinstance(tree.root, Leaf)
        for j in range(4):
            for k in range(4):
                assert kernel(ps.local_predictions[j], ps.local_predictions[k]) == 1.0

    def test_resamples_differ_across_particles(self):
        shard = synthetic_categorical(100, 5, 2, 3, 0.2, seed=5)
        ps = bootstrap_particles(shard, 4, seed=7)
        sorted_draws = [tuple(sorted(idx.tolist())) for idx in ps.resample_indices]
        assert len(set(sorted_draws)) == 4

    def test_prediction_cache_consistent(self):
        shard = synthetic_categorical(60, 4, 2, 3, 0.1, seed=9)
        ps = bootstrap_particles(shard, 3, seed=11)
        for j, tree in enumerate(ps.particles):
            assert np.array_equal(ps.local_predictions[j], predict(tree, shard))

    def test_deterministic_per_seed(self):
        shard = synthetic_categorical(50, 4, 2, 3, 0.1, seed=4)
        a = bootstrap_particles(shard, 3, seed=21)
        b = bootstrap_particles(shard, 3, seed=21)
        assert all(tree_to_text(x) == tree_to_text(y)
                   for x, y in zip(a.particles, b.particles))


class TestLocalRho:
    def test_identical_particles_give_count(self):
        shard = _pure_dataset(20, 0)
        ps = bootstrap_particles(shard, 4, seed=1)
        assert local_rho(ps, ps.local_predictions[0]) == pytest.approx(4.0)

    def test_complementary_vector_gives_zero(self):
        shard = _pure_dataset(20, 0)
        ps = bootstrap_particles(shard, 3, seed=1)
        complement = (1 - ps.local_predictions[0]).astype(np.uint8)
        assert local_rho(ps, complement) == 0.0

    def test_matches_cache_free_oracle(self):
        shard = synthetic_categorical(40, 4, 2, 3, 0.25, seed=14)
        ps = bootstrap_particles(shard, 3, seed=15)
        rng = np.random.default_rng(16)
        for _ in range(5):
            f = rng.integers(0, 2, len(shard)).astype(np.uint8)
            assert local_rho(ps, f) == pytest.approx(local_rho_naive(ps, f), abs=1e-12)

    def test_wrong_length_rejected(self):
        shard = _pure_dataset(10, 0)
        ps = bootstrap_particles(shard, 2, seed=0)
        with pytest.raises(ValueError):
            local_rho(ps, np.zeros(9, dtype=np.uint8))


class TestMajorityVote:
    def test_single_tree_is_identity(self):
        ds = synthetic_categorical(80, 4, 2, 3, 0.1, seed=2)
        tree = train_tree(ds, max_depth=4)
        assert np.array_equal(majority_vote([tree], ds), predict(tree, ds))

    def test_two_of_three_wins(self):
        ones = train_tree(_pure_dataset(10, 1))
        zeros = train_tree(_pure_dataset(10, 0))
        ds = _pure_dataset(6, 0)
        assert majority_vote([ones, ones, zeros], ds).tolist() == [1] * 6

    def test_exact_tie_predicts_zero(self):
        ones = train_tree(_pure_dataset(10, 1))
        zeros = train_tree(_pure_dataset(10, 0))
        ds = _pure_dataset(5, 0)
        assert majority_vote([ones, zeros], ds).tolist() == [0] * 5

    def test_duplicating_trees_changes_nothing(self):
        ds = synthetic_categorical(70, 4, 2, 3, 0.2, seed=6)
        trees = [train_tree(ds.subset(np.random.default_rng(k).integers(0, 70, 70)))
                 for k in range(3)]
        assert np.array_equal(majority_vote(trees, ds), majority_vote(trees * 2, ds))


class TestKernelNaiveAgreement:
    def test_oracles_match_primary_kernel(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a = rng.integers(0, 2, 17).astype(np.uint8)
            b = rng.integers(0, 2, 17).astype(np.uint8)
            assert kernel(a, b) == pytest.approx(kernel_naive(a, b), abs=1e-15)
