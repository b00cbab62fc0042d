"""Collaborative training for sensor networks.

Sensors train estimators on private local data and reach a network-wide
estimate by exchanging summaries only: Gaussian message passing for scalar
parametrized estimators, and Gibbs/greedy sampling over bootstrapped
classifier particles for non-parametrized ones.
"""

from sensorcollab.topology import Topology, random_geometric, random_expected_degree
from sensorcollab.gaussian_bp import (
    BpConfig,
    EdgeSmoothness,
    GaussianMarginal,
    GaussianMessage,
    GaussianPotential,
    NumericalFailure,
    gaussian_message_update,
    map_estimate,
    precision_weighted_average,
    run_gaussian_bp,
)
from sensorcollab.discrete_bp import DiscretePotential, discrete_bp_map
from sensorcollab.dataset import (
    CategoricalDataset,
    SplitSpec,
    load_categorical_csv,
    split_and_shard,
    synthetic_categorical,
)
from sensorcollab.trees import DecisionTree, predict, train_tree, tree_from_text, tree_to_text
from sensorcollab.particles import (
    ParticleSet,
    bootstrap_particles,
    edge_similarity,
    kernel,
    local_rho,
    majority_vote,
)
from sensorcollab.sampler import (
    LocalEvaluator,
    SamplerConfig,
    SamplerState,
    brute_force_map,
    conditional_weights,
    gibbs_step,
    greedy_step,
    local_init,
    map_objective,
    noncollaborative_baseline,
    run_sampler,
)
from sensorcollab.regression import (
    FieldObservation,
    RegressionConfig,
    RoundMetrics,
    accessible_data,
    bootstrap_slope_potential,
    centralized_baseline,
    generate_field,
    run_regression_experiment,
)

__version__ = "0.1.0"
