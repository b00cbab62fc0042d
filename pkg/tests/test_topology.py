import numpy as np
import pytest

from sensorcollab.topology import (
    Topology,
    is_tree,
    neighbors,
    random_expected_degree,
    random_geometric,
)


class TestRandomGeometric:
    def test_single_node_has_no_edges(self):
        topo = random_geometric(1, 0.2, seed=0)
        assert topo.num_edges == 0

    def test_forced_positions_within_radius(self):
        topo = Topology.from_positions(np.array([[0.0, 0.0], [0.0, 0.1]]), 0.2)
        assert topo.sorted_edges() == [(0, 1)]

    def test_distance_equal_to_radius_is_an_edge(self):
        topo = Topology.from_positions(np.array([[0.0, 0.0], [0.2, 0.0]]), 0.2)
        assert topo.num_edges == 1

    def test_radius_zero_yields_edgeless_graph(self):
        assert random_geometric(10, 0.0, seed=3).num_edges == 0

    def test_edge_count_matches_pairwise_scan(self):
        # Oracle: independent O(m^2) scan over the generated positions.
        topo = random_geometric(50, 0.2, seed=7)
        pos = topo.positions
        expected = 0
        for s in range(50):
            for t in range(s + 1, 50):
                if np.hypot(*(pos[s] - pos[t])) <= 0.2:
                    expected += 1
        assert topo.num_edges == expected

    def test_edges_determined_by_positions_alone(self):
        topo = random_geometric(30, 0.25, seed=11)
        rebuilt = Topology.from_positions(topo.positions, 0.25)
        assert rebuilt.edges == topo.edges

    def test_deterministic_per_seed(self):
        a = random_geometric(25, 0.2, seed=5)
        b = random_geometric(25, 0.2, seed=5)
        assert a.edges == b.edges
        assert np.array_equal(a.positions, b.positions)

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            random_geometric(5, -0.1, seed=0)


class TestRandomExpectedDegree:
    def test_zero_degree_gives_empty_graph(self):
        assert random_expected_degree(20, 0.0, seed=1).num_edges == 0

    def test_full_degree_gives_complete_graph(self):
        topo = random_expected_degree(5, 4, seed=1)
        assert topo.num_edges == 10

    def test_excessive_degree_rejected(self):
        with pytest.raises(ValueError):
            random_expected_degree(20, 19.5, seed=0)

    def test_mean_degree_monte_carlo(self):
        # Oracle: per-pair edges are Bernoulli(4/19), so the per-graph mean
        # degree has variance 4 * C(20,2) * p(1-p) / 20^2; check the Monte
        # Carlo mean over 10000 seeds lands within 3 standard errors of 4.
        m, target, trials = 20, 4.0, 10_000
        p = target / (m - 1)
        pairs = m * (m - 1) // 2
        per_graph_var = 4.0 * pairs * p * (1 - p) / m**2
        se = np.sqrt(per_graph_var / trials)
        degrees = np.empty(trials)
        for seed in range(trials):
            degrees[seed] = 2.0 * random_expected_degree(m, target, seed).num_edges / m
        assert abs(degrees.mean() - target) <= 3 * se


class TestNeighbors:
    def test_triangle(self):
        topo = Topology(3, [(0, 1), (1, 2), (0, 2)])
        assert neighbors(topo, 0) == [1, 2]

    def test_empty_graph(self):
        assert neighbors(Topology(1, []), 0) == []

    def test_path_middle(self):
        topo = Topology(3, [(0, 1), (1, 2)])
        assert neighbors(topo, 1) == [0, 2]

    def test_out_of_range_rejected(self):
        topo = Topology(3, [(0, 1)])
        with pytest.raises(IndexError):
            neighbors(topo, 3)

    def test_adjacency_symmetry(self):
        for seed in range(10):
            topo = random_geometric(30, 0.3, seed)
            for s in range(30):
                for t in topo.neighbors(s):
                    assert s in topo.neighbors(t)


def _union_find_has_cycle(m, edges):
    parent = list(range(m))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s, t in edges:
        rs, rt = find(s), find(t)
        if rs == rt:
            return True
        parent[rs] = rt
    return False


class TestIsTree:
    def test_path_is_tree(self):
        assert is_tree(Topology(5, [(i, i + 1) for i in range(4)]))

    def test_triangle_is_not(self):
        assert not is_tree(Topology(3, [(0, 1), (1, 2), (0, 2)]))

    def test_forest_counts_as_acyclic(self):
        assert is_tree(Topology(4, [(0, 1), (2, 3)]))

    def test_agrees_with_union_find_oracle(self):
        for seed in range(40):
            topo = random_geometric(20, 0.25, seed)
            expected = not _union_find_has_cycle(20, topo.sorted_edges())
            assert is_tree(topo) == expected


class TestEdgeListFormat:
    def test_round_trip(self):
        topo = random_geometric(12, 0.4, seed=9)
        text = topo.to_edge_list_text()
        parsed = Topology.from_edge_list_text(text)
        assert parsed.num_sensors == topo.num_sensors
        assert parsed.edges == topo.edges

    def test_format_shape(self):
        topo = Topology(3, [(2, 1), (0, 2)])
        assert topo.to_edge_list_text() == "m 3\n0 2\n1 2\n"

    def test_rejects_missing_header(self):
        with pytest.raises(ValueError):
            Topology.from_edge_list_text("0 1\n")


class TestValidation:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            Topology(3, [(1, 1)])

    def test_duplicate_orientation_collapses(self):
        topo = Topology(3, [(0, 1), (1, 0)])
        assert topo.num_edges == 1
