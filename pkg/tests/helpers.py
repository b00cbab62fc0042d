"""Shared instance builders for the test suite."""

import numpy as np

from sensorcollab.topology import Topology


def random_tree(m: int, rng: np.random.Generator) -> Topology:
    """Random connected tree: each node attaches to a uniform earlier node."""
    return Topology(m, [(int(rng.integers(0, i)), i) for i in range(1, m)])


def random_potentials(m: int, rng: np.random.Generator,
                      mean_range=(-5.0, 5.0), var_range=(0.1, 10.0)):
    from sensorcollab.gaussian_bp import GaussianPotential
    return [GaussianPotential(float(rng.uniform(*mean_range)),
                              float(rng.uniform(*var_range))) for _ in range(m)]
