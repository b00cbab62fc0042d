"""Sensor communication topologies.

The undirected communication graph doubles as the graphical model over
which inference runs: nodes are sensors, edges are communication links.
Topologies are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np


class Topology:
    """Undirected graph over sensors 0..m-1, optionally with unit-square positions.

    Edges are stored once as (s, t) with s < t; neighbor lookup is symmetric.
    Generated graphs may be disconnected; callers are expected to work per
    connected component rather than reject.
    """

    def __init__(self, num_sensors: int, edges: Iterable[tuple[int, int]],
                 positions: np.ndarray | None = None):
        if num_sensors < 1:
            raise ValueError("need at least one sensor")
        self.num_sensors = int(num_sensors)
        normalized = set()
        for s, t in edges:
            s, t = int(s), int(t)
            if s == t:
                raise ValueError(f"self-loop at sensor {s}")
            if not (0 <= s < num_sensors and 0 <= t < num_sensors):
                raise ValueError(f"edge ({s},{t}) out of range for m={num_sensors}")
            normalized.add((min(s, t), max(s, t)))
        self.edges = frozenset(normalized)
        if positions is not None:
            positions = np.asarray(positions, dtype=float)
            if positions.shape != (num_sensors, 2):
                raise ValueError("positions must be (m, 2)")
        self.positions = positions
        self._adjacency: list[list[int]] = [[] for _ in range(num_sensors)]
        for s, t in self.edges:
            self._adjacency[s].append(t)
            self._adjacency[t].append(s)
        for nbrs in self._adjacency:
            nbrs.sort()

    def neighbors(self, s: int) -> list[int]:
        """Sorted neighbor ids of sensor s (excludes s itself)."""
        if not (0 <= s < self.num_sensors):
            raise IndexError(f"sensor {s} out of range for m={self.num_sensors}")
        return list(self._adjacency[s])

    def degree(self, s: int) -> int:
        if not (0 <= s < self.num_sensors):
            raise IndexError(f"sensor {s} out of range for m={self.num_sensors}")
        return len(self._adjacency[s])

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def connected_components(self) -> list[list[int]]:
        """Components as sorted node lists, ordered by smallest member."""
        seen = [False] * self.num_sensors
        components = []
        for start in range(self.num_sensors):
            if seen[start]:
                continue
            queue = deque([start])
            seen[start] = True
            comp = []
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in self._adjacency[u]:
                    if not seen[v]:
                        seen[v] = True
                        queue.append(v)
            components.append(sorted(comp))
        return components

    def is_tree(self) -> bool:
        """True iff the graph is acyclic (each component has edges = nodes - 1)."""
        for comp in self.connected_components():
            members = set(comp)
            internal = sum(1 for s, t in self.edges if s in members)
            if internal != len(comp) - 1:
                return False
        return True

    def diameter(self) -> int:
        """Longest shortest path over all components (0 for edgeless graphs)."""
        best = 0
        for start in range(self.num_sensors):
            dist = {start: 0}
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for v in self._adjacency[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        queue.append(v)
            best = max(best, max(dist.values()))
        return best

    def to_edge_list_text(self) -> str:
        """Serialize as 'm <count>' followed by one ascending 's t' pair per line."""
        lines = [f"m {self.num_sensors}"]
        lines.extend(f"{s} {t}" for s, t in self.sorted_edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list_text(cls, text: str) -> "Topology":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("m "):
            raise ValueError("edge list must start with 'm <count>'")
        m = int(lines[0].split()[1])
        edges = []
        for ln in lines[1:]:
            s, t = ln.split()
            edges.append((int(s), int(t)))
        return cls(m, edges)

    @classmethod
    def from_positions(cls, positions: np.ndarray, radius: float) -> "Topology":
        """Geometric graph on given positions: edge iff distance <= radius (closed ball)."""
        positions = np.asarray(positions, dtype=float)
        m = positions.shape[0]
        if radius < 0:
            raise ValueError("radius must be non-negative")
        edges = []
        for s in range(m):
            d = np.hypot(positions[s + 1:, 0] - positions[s, 0],
                         positions[s + 1:, 1] - positions[s, 1])
            for off in np.nonzero(d <= radius)[0]:
                edges.append((s, s + 1 + int(off)))
        return cls(m, edges, positions)


def random_geometric(m: int, radius: float, seed) -> Topology:
    """Random geometric graph: m uniform positions in [0,1]^2, edges within radius.

    The draw is deterministic given the seed; edges depend on the seed only
    through the positions.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0.0, 1.0, size=(m, 2))
    return Topology.from_positions(positions, radius)


def random_expected_degree(m: int, expected_degree: float, seed) -> Topology:
    """Random graph where each pair is an edge with probability expected_degree/(m-1)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if expected_degree < 0:
        raise ValueError("expected_degree must be non-negative")
    if m > 1 and expected_degree > m - 1:
        raise ValueError(f"expected_degree {expected_degree} exceeds m-1 = {m - 1}")
    if m == 1:
        if expected_degree > 0:
            raise ValueError("expected_degree must be 0 when m=1")
        return Topology(1, [])
    p = expected_degree / (m - 1)
    rng = np.random.default_rng(seed)
    pairs = [(s, t) for s in range(m) for t in range(s + 1, m)]
    draws = rng.random(len(pairs))
    edges = [pair for pair, u in zip(pairs, draws) if u < p]
    return Topology(m, edges)


def neighbors(topo: Topology, s: int) -> list[int]:
    """Module-level alias for Topology.neighbors."""
    return topo.neighbors(s)


def is_tree(topo: Topology) -> bool:
    """Module-level alias for Topology.is_tree."""
    return topo.is_tree()
