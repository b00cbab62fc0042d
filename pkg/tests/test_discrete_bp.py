import numpy as np
import pytest

from sensorcollab.discrete_bp import (
    H0,
    H1,
    DiscretePotential,
    LoopyTopologyError,
    discrete_bp_map,
)
from sensorcollab.oracles import centralized_likelihood_decision
from sensorcollab.topology import Topology

from helpers import random_tree


class TestDecisions:
    def test_single_sensor(self):
        decisions = discrete_bp_map(Topology(1, []), [DiscretePotential(0.3, 0.7)])
        assert decisions == [H1]

    def test_three_sensor_path(self):
        # Oracle: centralized products 2*1*2 = 4 for H0 vs 1*2*1 = 2 for H1.
        topo = Topology(3, [(0, 1), (1, 2)])
        pots = [DiscretePotential(2, 1), DiscretePotential(1, 2), DiscretePotential(2, 1)]
        decisions = discrete_bp_map(topo, pots)
        assert decisions == [H0, H0, H0]
        assert centralized_likelihood_decision(pots) == H0

    def test_tie_breaks_toward_h0(self):
        assert discrete_bp_map(Topology(1, []), [DiscretePotential(1, 1)]) == [H0]
        topo = Topology(2, [(0, 1)])
        pots = [DiscretePotential(2, 1), DiscretePotential(1, 2)]
        assert discrete_bp_map(topo, pots) == [H0, H0]

    def test_matches_centralized_likelihood_on_random_trees(self):
        rng = np.random.default_rng(606)
        for _ in range(100):
            m = int(rng.integers(1, 16))
            topo = random_tree(m, rng) if m > 1 else Topology(1, [])
            pots = [DiscretePotential(float(rng.uniform(0.05, 5)),
                                      float(rng.uniform(0.05, 5))) for _ in range(m)]
            expected = centralized_likelihood_decision(pots)
            assert discrete_bp_map(topo, pots) == [expected] * m

    def test_forest_decides_per_component(self):
        topo = Topology(4, [(0, 1), (2, 3)])
        pots = [DiscretePotential(3, 1), DiscretePotential(3, 1),
                DiscretePotential(1, 3), DiscretePotential(1, 3)]
        assert discrete_bp_map(topo, pots) == [H0, H0, H1, H1]


class TestRelaxation:
    def test_fully_relaxed_edges_reduce_to_local_decisions(self):
        # delta=1 makes the edge factor constant, so every sensor just takes
        # the argmax of its own weights.
        topo = Topology(2, [(0, 1)])
        pots = [DiscretePotential(5, 1), DiscretePotential(1, 5)]
        decisions = discrete_bp_map(topo, pots, dirac_similarity=False, delta=1.0)
        assert decisions == [H0, H1]

    def test_small_relaxation_keeps_clear_majorities(self):
        topo = Topology(3, [(0, 1), (1, 2)])
        pots = [DiscretePotential(4, 1), DiscretePotential(4, 1), DiscretePotential(1, 2)]
        assert discrete_bp_map(topo, pots, dirac_similarity=False, delta=0.05) == [H0] * 3

    def test_delta_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            discrete_bp_map(Topology(1, []), [DiscretePotential(1, 2)],
                            dirac_similarity=False, delta=1.5)


class TestValidation:
    def test_loopy_topology_rejected(self):
        topo = Topology(3, [(0, 1), (1, 2), (0, 2)])
        pots = [DiscretePotential(1, 2)] * 3
        with pytest.raises(LoopyTopologyError):
            discrete_bp_map(topo, pots)

    def test_weights_must_not_both_be_zero(self):
        with pytest.raises(ValueError):
            DiscretePotential(0.0, 0.0)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            DiscretePotential(-0.1, 1.0)
