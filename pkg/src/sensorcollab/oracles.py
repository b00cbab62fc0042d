"""Independent small-instance oracles for the inference algorithms.

Everything here recomputes quantities the main modules produce, through a
deliberately different route: row-by-row tree traversal instead of the
vectorized predictor, explicit loops instead of cached tables, and exact
finite-Markov-chain algebra instead of simulation.  The point is agreement
checks, so none of this shares caches with the code under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from sensorcollab.dataset import CategoricalDataset, synthetic_categorical
from sensorcollab.discrete_bp import H0, H1, DiscretePotential, discrete_bp_map
from sensorcollab.particles import ParticleSet, bootstrap_particles
from sensorcollab.sampler import (
    LocalEvaluator,
    SamplerState,
    conditional_weights,
    gibbs_step,
    greedy_step,
    initialize_state,
)
from sensorcollab.seeding import derive_int_seed, derive_rng
from sensorcollab.topology import Topology, random_expected_degree
from sensorcollab.trees import DecisionTree, predict_row


def predictions_naive(tree: DecisionTree, data: CategoricalDataset) -> np.ndarray:
    """Row-by-row traversal; the oracle counterpart of the vectorized predict."""
    return np.array([predict_row(tree, row) for row in data.features], dtype=np.uint8)


def kernel_naive(f_a, f_b, exponent: int = 4) -> float:
    disagreements = 0
    for a, b in zip(f_a, f_b, strict=True):
        if int(a) != int(b):
            disagreements += 1
    return (1.0 - disagreements / len(f_a)) ** exponent


def local_rho_naive(ps: ParticleSet, f_vector, exponent: int = 4) -> float:
    """Re-evaluates every particle on the shard instead of using the cache."""
    total = 0.0
    for tree in ps.particles:
        h_vec = predictions_naive(tree, ps.local_data)
        total += kernel_naive(h_vec, f_vector, exponent)
    return total


def site_weights_naive(sensor: int, currents, particle_sets: list[ParticleSet],
                       topo: Topology, kernel_exponent: int = 4,
                       similarity_exponent: int = 3) -> tuple[list[int], list[float]]:
    """Candidates and weights for one site, computed without any caching.

    Mirrors the documented candidate rule (own particles then neighbor
    samples, deduplicated by behavior on the sensor's rows) but evaluates
    every prediction vector and kernel from scratch.
    """
    offsets = []
    trees = []
    for ps in particle_sets:
        offsets.append(len(trees))
        trees.extend(ps.particles)
    shard = particle_sets[sensor].local_data

    def vector(gid: int):
        return predictions_naive(trees[gid], shard)

    own = list(range(offsets[sensor], offsets[sensor] + particle_sets[sensor].num_particles))
    raw = own + [int(currents[t]) for t in topo.neighbors(sensor)]
    candidates: list[int] = []
    vectors: list[np.ndarray] = []
    for gid in raw:
        vec = vector(gid)
        if any(np.array_equal(vec, seen) for seen in vectors):
            continue
        candidates.append(gid)
        vectors.append(vec)
    own_vectors = [vector(gid) for gid in own]
    neighbor_vectors = [vector(int(currents[t])) for t in topo.neighbors(sensor)]
    weights = []
    for vec in vectors:
        rho = sum(kernel_naive(h_vec, vec, kernel_exponent) for h_vec in own_vectors)
        product = 1.0
        for n_vec in neighbor_vectors:
            product *= kernel_naive(n_vec, vec, kernel_exponent) ** similarity_exponent
        weights.append(product * rho)
    return candidates, weights


def site_argmax_naive(sensor: int, currents, particle_sets, topo,
                      kernel_exponent: int = 4, similarity_exponent: int = 3) -> int:
    candidates, weights = site_weights_naive(sensor, currents, particle_sets, topo,
                                             kernel_exponent, similarity_exponent)
    best_gid, best_w = candidates[0], weights[0]
    for gid, w in zip(candidates[1:], weights[1:]):
        if w > best_w:
            best_gid, best_w = gid, w
    return best_gid


def brute_force_map_naive(particle_sets: list[ParticleSet], policy: str = "local",
                          kernel_exponent: int = 4) -> tuple[int, float]:
    """Double-loop exhaustive argmax of the product objective, no caches."""
    trees = []
    for ps in particle_sets:
        trees.extend(ps.particles)
    if policy == "pooled":
        features = np.concatenate([ps.local_data.features for ps in particle_sets])
        labels = np.concatenate([ps.local_data.labels for ps in particle_sets])
        pooled = CategoricalDataset(features, labels,
                                    particle_sets[0].local_data.feature_arity)
    best_gid, best_obj = 0, -1.0
    for gid, candidate in enumerate(trees):
        obj = 1.0
        for ps in particle_sets:
            rows = pooled if policy == "pooled" else ps.local_data
            f_vec = predictions_naive(candidate, rows)
            factor = 0.0
            for particle in ps.particles:
                factor += kernel_naive(predictions_naive(particle, rows), f_vec,
                                       kernel_exponent)
            obj *= factor
        if obj > best_obj:
            best_gid, best_obj = gid, obj
    return best_gid, best_obj


def centralized_likelihood_decision(potentials: list[DiscretePotential]) -> int:
    """Decision from the product of all local weights; ties favor hypothesis 0."""
    log0 = 0.0
    log1 = 0.0
    for p in potentials:
        if p.weight1 == 0.0:
            return H0
        if p.weight0 == 0.0:
            log0 = -math.inf
            log1 = 0.0
            break
        log0 += math.log(p.weight0)
        log1 += math.log(p.weight1)
    else:
        return H1 if log1 > log0 else H0
    # Some weight0 is exactly zero while all weight1 are positive.
    return H1


def chain_limit_distribution(initial, transition) -> dict:
    """Long-run visit distribution of a finite Markov chain from a fixed start.

    `transition(state) -> list[(next_state, probability)]`.  States reachable
    from `initial` are enumerated, recurrent classes are identified, and the
    limit combines absorption probabilities with each class's stationary
    distribution.  This equals the almost-sure limit of the empirical visit
    distribution regardless of periodicity.
    """
    states = [initial]
    index = {initial: 0}
    rows: list[list[tuple[int, float]]] = []
    pos = 0
    while pos < len(states):
        row = []
        for nxt, prob in transition(states[pos]):
            if prob <= 0.0:
                continue
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
            row.append((index[nxt], prob))
        rows.append(row)
        pos += 1
    n = len(states)
    if n > 20000:
        raise ValueError(f"state space too large to enumerate ({n} states)")
    T = np.zeros((n, n))
    for i, row in enumerate(rows):
        for j, p in row:
            T[i, j] += p

    # Strongly connected components; closed classes are the recurrent ones.
    n_comp, labels = connected_components(sp.csr_matrix(T > 0), directed=True,
                                          connection="strong")
    closed = []
    for c in range(n_comp):
        members = np.nonzero(labels == c)[0]
        leaving = T[members][:, ~np.isin(np.arange(n), members)].sum()
        if leaving == 0.0:
            closed.append(members)
    recurrent = np.zeros(n, dtype=bool)
    for members in closed:
        recurrent[members] = True

    # Absorption probabilities from the start into each closed class.
    start = index[initial]
    absorb = {}
    transient = np.nonzero(~recurrent)[0]
    if start in set(transient):
        t_index = {s: i for i, s in enumerate(transient)}
        Q = T[np.ix_(transient, transient)]
        for k, members in enumerate(closed):
            r = T[np.ix_(transient, members)].sum(axis=1)
            h = np.linalg.solve(np.eye(len(transient)) - Q, r)
            absorb[k] = h[t_index[start]]
    else:
        for k, members in enumerate(closed):
            absorb[k] = 1.0 if labels[start] == labels[members[0]] else 0.0

    limit = np.zeros(n)
    for k, members in enumerate(closed):
        if absorb[k] == 0.0:
            continue
        P = T[np.ix_(members, members)]
        # Stationary distribution: left null vector of (P - I), normalized.
        A = np.vstack([P.T - np.eye(len(members)), np.ones(len(members))])
        b = np.concatenate([np.zeros(len(members)), [1.0]])
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
        limit[members] += absorb[k] * pi
    return {states[i]: float(limit[i]) for i in range(n) if limit[i] > 0.0}


def gibbs_limit_distribution(topo: Topology, particle_sets: list[ParticleSet],
                             evaluator: LocalEvaluator, init_state) -> dict:
    """Exact long-run joint-state distribution of the uniform-site Gibbs chain."""
    m = topo.num_sensors

    def transition(state):
        out: dict[tuple, float] = {}
        carrier = SamplerState(np.array(state, dtype=np.intp), 0,
                               np.random.default_rng(0))
        for s in range(m):
            candidates, weights = conditional_weights(s, carrier, evaluator, topo)
            total = float(np.sum(weights))
            if total <= 0.0:
                out[state] = out.get(state, 0.0) + 1.0 / m
                continue
            for gid, w in zip(candidates, weights):
                nxt = state[:s] + (gid,) + state[s + 1:]
                out[nxt] = out.get(nxt, 0.0) + (w / total) / m
        return list(out.items())

    return chain_limit_distribution(tuple(int(g) for g in init_state), transition)


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


@dataclass
class OracleCheckReport:
    name: str
    passed: bool
    detail: str


def random_sampler_instance(num_sensors: int, particles_per_sensor: int, seed,
                            rows_per_shard: int = 12, features: int = 4,
                            ensure_edge: bool = True):
    """Small random classification instance for sampler verification."""
    base = synthetic_categorical(rows_per_shard * num_sensors, features, arity=2,
                                 rule_depth=2, noise_rate=0.25,
                                 seed=derive_rng(seed, "instance-data"))
    shards = [base.subset(np.arange(s * rows_per_shard, (s + 1) * rows_per_shard))
              for s in range(num_sensors)]
    topo = random_expected_degree(num_sensors, min(2.0, num_sensors - 1),
                                  derive_rng(seed, "instance-topo"))
    if ensure_edge and num_sensors > 1 and topo.num_edges == 0:
        topo = Topology(num_sensors, [(0, 1)])
    particle_sets = [
        bootstrap_particles(shards[s], particles_per_sensor,
                            derive_rng(seed, "instance-boot", s), max_depth=3, owner=s)
        for s in range(num_sensors)]
    return topo, particle_sets


def check_gibbs_vs_enumeration(instances: int = 10, steps: int = 100_000,
                               tolerance: float = 0.05, seed: int = 2024,
                               num_sensors: int = 2, particles_per_sensor: int = 2,
                               ) -> list[OracleCheckReport]:
    """Empirical Gibbs visit distribution vs the enumerated chain limit."""
    reports = []
    for i in range(instances):
        topo, particle_sets = random_sampler_instance(
            num_sensors, particles_per_sensor, derive_int_seed(seed, "gibbs", i))
        evaluator = LocalEvaluator(particle_sets)
        rng = derive_rng(seed, "gibbs-run", i)
        state = initialize_state(particle_sets, evaluator, rng)
        exact = gibbs_limit_distribution(topo, particle_sets, evaluator,
                                         tuple(int(g) for g in state.current))
        counts: dict[tuple, int] = {}
        for _ in range(steps):
            gibbs_step(state, topo, evaluator)
            key = tuple(int(g) for g in state.current)
            counts[key] = counts.get(key, 0) + 1
        empirical = {k: c / steps for k, c in counts.items()}
        tv = total_variation(empirical, exact)
        reports.append(OracleCheckReport(
            f"gibbs-vs-enumeration[{i}]", tv <= tolerance,
            f"TV={tv:.4f} over {len(exact)} limit states"))
    return reports


def check_greedy_vs_argmax(instances: int = 50, seed: int = 2024,
                           max_sensors: int = 4, max_particles: int = 3,
                           ) -> list[OracleCheckReport]:
    """Every greedy site update must match the cache-free exhaustive argmax."""
    reports = []
    rng = derive_rng(seed, "greedy-sizes")
    for i in range(instances):
        m = int(rng.integers(2, max_sensors + 1))
        n_particles = int(rng.integers(1, max_particles + 1))
        topo, particle_sets = random_sampler_instance(
            m, n_particles, derive_int_seed(seed, "greedy", i))
        evaluator = LocalEvaluator(particle_sets)
        state = initialize_state(particle_sets, evaluator, derive_rng(seed, "greedy-run", i))
        ok = True
        detail = "all site updates agree"
        for step_index in range(2 * m):
            sensor = step_index % m
            expected = site_argmax_naive(sensor, state.current, particle_sets, topo)
            greedy_step(state, topo, evaluator, sensor=sensor)
            if int(state.current[sensor]) != expected:
                ok = False
                detail = (f"step {step_index} sensor {sensor}: "
                          f"greedy={int(state.current[sensor])} oracle={expected}")
                break
        reports.append(OracleCheckReport(f"greedy-vs-argmax[{i}]", ok, detail))
    return reports


def check_discrete_equivalence(instances: int = 100, seed: int = 2024,
                               max_sensors: int = 12) -> list[OracleCheckReport]:
    """Tree-exact two-state decisions vs the centralized likelihood ratio."""
    reports = []
    rng = derive_rng(seed, "discrete")
    for i in range(instances):
        m = int(rng.integers(1, max_sensors + 1))
        edges = [(int(rng.integers(0, node)), node) for node in range(1, m)]
        topo = Topology(m, edges)
        potentials = [DiscretePotential(float(rng.uniform(0.05, 4.0)),
                                        float(rng.uniform(0.05, 4.0)))
                      for _ in range(m)]
        decisions = discrete_bp_map(topo, potentials)
        expected = centralized_likelihood_decision(potentials)
        ok = all(d == expected for d in decisions)
        reports.append(OracleCheckReport(
            f"discrete-vs-likelihood-ratio[{i}]", ok,
            f"m={m} decision={'H1' if expected == H1 else 'H0'}"))
    return reports
