"""Two-state sum-product on trees for distributed hypothesis testing.

Each sensor carries unnormalized likelihood weights for two hypotheses.
With a hard agreement factor on every edge (1 when endpoints match, 0
otherwise), running sum-product on a tree and taking each sensor's argmax
reproduces the centralized decision made from the product of all local
weights.  A relaxation parameter softens the agreement factor to
[[1, delta], [delta, 1]] when a strictly peaky factor is too brittle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sensorcollab.topology import Topology

H0, H1 = 0, 1


@dataclass(frozen=True)
class DiscretePotential:
    """Unnormalized likelihoods of the two hypotheses at one sensor."""

    weight0: float
    weight1: float

    def __post_init__(self):
        if not (math.isfinite(self.weight0) and math.isfinite(self.weight1)):
            raise ValueError("weights must be finite")
        if self.weight0 < 0 or self.weight1 < 0:
            raise ValueError("weights must be non-negative")
        if self.weight0 + self.weight1 <= 0:
            raise ValueError("weights must not both be zero")


class LoopyTopologyError(ValueError):
    """Raised when exact two-state inference is requested on a cyclic graph."""


def discrete_bp_map(topo: Topology, potentials: list[DiscretePotential],
                    dirac_similarity: bool = True, delta: float = 0.0) -> list[int]:
    """Per-sensor argmax decisions from exact two-state sum-product on a tree.

    `dirac_similarity` selects the hard agreement edge factor; `delta` relaxes
    it to [[1, delta], [delta, 1]] (ignored unless dirac_similarity is False,
    in which case delta may be positive).  Ties break toward hypothesis 0.
    Cyclic topologies are rejected because exactness requires a tree.
    """
    if len(potentials) != topo.num_sensors:
        raise ValueError("need one potential per sensor")
    if not topo.is_tree():
        raise LoopyTopologyError("exact two-state inference requires an acyclic topology")
    if dirac_similarity:
        delta = 0.0
    if not (0.0 <= delta <= 1.0):
        raise ValueError("delta must be in [0, 1]")

    edge_matrix = np.array([[1.0, delta], [delta, 1.0]])
    local = np.array([[p.weight0, p.weight1] for p in potentials])

    # Exact two-pass sum-product per component: messages flow leaves-to-root,
    # then root-to-leaves.  Messages are normalized to sum 1; normalization
    # rescales marginals by positive constants and cannot change the argmax.
    messages: dict[tuple[int, int], np.ndarray] = {}

    def send(t: int, s: int):
        table = local[t].copy()
        for u in topo.neighbors(t):
            if u != s:
                table = table * messages[(u, t)]
        out = edge_matrix @ table
        total = out.sum()
        messages[(t, s)] = out / total if total > 0 else out

    for comp in topo.connected_components():
        root = comp[0]
        order = []
        stack = [(root, -1)]
        while stack:
            node, parent = stack.pop()
            order.append((node, parent))
            for child in topo.neighbors(node):
                if child != parent:
                    stack.append((child, node))
        for node, parent in reversed(order):
            if parent >= 0:
                send(node, parent)
        for node, parent in order:
            if parent >= 0:
                send(parent, node)

    decisions = []
    for s in range(topo.num_sensors):
        marginal = local[s].copy()
        for u in topo.neighbors(s):
            marginal = marginal * messages[(u, s)]
        decisions.append(H1 if marginal[1] > marginal[0] else H0)
    return decisions
