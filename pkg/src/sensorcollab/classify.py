"""End-to-end distributed classifier training experiment.

Rows are split into equal private shards plus a held-out test set, each
sensor bootstraps a handful of decision trees from its shard, and the
single-site sampler runs over a random communication graph.  The summary
compares, on the same test set: a centralized tree trained on all training
rows, the exhaustive optimizer of the product objective, the per-sensor
non-collaborative baselines, the sampler's final per-sensor classifiers,
and a majority ballot over every bootstrapped tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sensorcollab.dataset import CategoricalDataset, SplitSpec, split_and_shard
from sensorcollab.particles import bootstrap_particles, classification_error, majority_vote
from sensorcollab.sampler import (
    LocalEvaluator,
    SamplerConfig,
    SamplerRun,
    brute_force_map,
    noncollaborative_baseline,
    run_sampler,
)
from sensorcollab.seeding import derive_int_seed, derive_rng
from sensorcollab.topology import random_expected_degree
from sensorcollab.trees import train_tree


@dataclass(frozen=True)
class ClassifyConfig:
    num_sensors: int = 20
    expected_degree: float = 4.0
    particles_per_sensor: int = 4
    rounds: int = 4000
    mode: str = "greedy"
    sweep: str = "random-sensor"
    train_count: int = 2000
    test_count: int = 1196
    max_depth: int = 10
    min_leaf: int = 1
    trace_every: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.num_sensors < 1 or self.particles_per_sensor < 1:
            raise ValueError("need at least one sensor and one particle per sensor")
        if self.train_count % self.num_sensors != 0:
            raise ValueError(
                f"train_count {self.train_count} not divisible by {self.num_sensors} sensors")


@dataclass
class ClassifySummary:
    centralized_error: float
    bruteforce_error: float
    bruteforce_objective: float
    noncollab_errors: np.ndarray
    final_errors: np.ndarray
    majority_error: float
    sampler_run: SamplerRun = field(repr=False, default=None)

    @property
    def noncollab_median(self) -> float:
        return float(np.median(self.noncollab_errors))

    @property
    def sampler_median(self) -> float:
        return float(np.median(self.final_errors))


def run_classification_experiment(dataset: CategoricalDataset,
                                  cfg: ClassifyConfig) -> ClassifySummary:
    """Shard, bootstrap, sample, and score every reference method."""
    spec = SplitSpec(cfg.train_count, cfg.test_count, cfg.num_sensors,
                     seed=derive_int_seed(cfg.seed, "split"))
    shards, test_data = split_and_shard(dataset, spec)
    topo = random_expected_degree(cfg.num_sensors, cfg.expected_degree,
                                  derive_rng(cfg.seed, "topology"))
    particle_sets = [
        bootstrap_particles(shards[s], cfg.particles_per_sensor,
                            derive_rng(cfg.seed, "particles", s),
                            max_depth=cfg.max_depth, min_leaf=cfg.min_leaf, owner=s)
        for s in range(cfg.num_sensors)]
    evaluator = LocalEvaluator(particle_sets)

    noncollab = noncollaborative_baseline(particle_sets, test_data)

    sampler_cfg = SamplerConfig(rounds=cfg.rounds, mode=cfg.mode, seed=cfg.seed,
                                sweep=cfg.sweep, trace_every=cfg.trace_every)
    run = run_sampler(sampler_cfg, topo, particle_sets, test_data, evaluator=evaluator)

    _, best_tree, best_obj = brute_force_map(particle_sets, policy="local",
                                             evaluator=evaluator)
    bruteforce_error = classification_error(best_tree, test_data)

    train_features = np.concatenate([shard.features for shard in shards])
    train_labels = np.concatenate([shard.labels for shard in shards])
    pooled_train = CategoricalDataset(train_features, train_labels, dataset.feature_arity)
    central_tree = train_tree(pooled_train, cfg.max_depth, cfg.min_leaf)
    centralized_error = classification_error(central_tree, test_data)

    all_trees = [tree for ps in particle_sets for tree in ps.particles]
    majority_error = float(np.mean(majority_vote(all_trees, test_data) != test_data.labels))

    return ClassifySummary(
        centralized_error=centralized_error,
        bruteforce_error=bruteforce_error,
        bruteforce_objective=best_obj,
        noncollab_errors=noncollab,
        final_errors=run.final_errors,
        majority_error=majority_error,
        sampler_run=run,
    )
