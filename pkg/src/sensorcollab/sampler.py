"""Global inference over classifier particles by single-site sampling.

Sensors hold one current classifier each and update one sensor at a time.
The update at sensor s scores every candidate f (its own particles plus the
classifiers its neighbors currently hold) by

    weight(f) = prod_{t in N(s)} similarity_s(f_t, f) * sum_j kernel_s(h_sj, f)

where every kernel and similarity is evaluated on sensor s's own rows; the
subscript matters, it is the locality constraint of the whole scheme.  Gibbs
mode draws the new classifier from the normalized weights; greedy mode takes
the argmax, which converges faster but can stick in a local optimum.

Classifiers travel between sensors by value (the trees themselves), never
the training rows.  Candidates that behave identically on the acting
sensor's rows are deduplicated, keeping the earliest in candidate order
(own particles by index, then neighbor samples by neighbor id), which is
also the greedy tie-break order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sensorcollab.dataset import CategoricalDataset
from sensorcollab.particles import (
    KERNEL_EXPONENT,
    SIMILARITY_EXPONENT,
    ParticleSet,
    classification_error,
)
from sensorcollab.topology import Topology
from sensorcollab.trees import DecisionTree, predict


class LocalEvaluator:
    """Caches per-sensor prediction vectors, kernel sums, and similarities.

    Classifiers are addressed by global particle id (gid): particle j of
    sensor s has gid = offset(s) + j, so gid order equals (sensor, particle)
    order.  `prediction(sensor, gid)` is the single point where a classifier
    meets a sensor's rows; everything else derives from it, which keeps the
    locality constraint auditable.
    """

    def __init__(self, particle_sets: list[ParticleSet],
                 kernel_exponent: int = KERNEL_EXPONENT,
                 similarity_exponent: int = SIMILARITY_EXPONENT):
        self.particle_sets = particle_sets
        self.kernel_exponent = kernel_exponent
        self.similarity_exponent = similarity_exponent
        self.offsets = []
        self.trees: list[DecisionTree] = []
        self.gid_owner: list[tuple[int, int]] = []
        for s, ps in enumerate(particle_sets):
            self.offsets.append(len(self.trees))
            for j, tree in enumerate(ps.particles):
                self.trees.append(tree)
                self.gid_owner.append((s, j))
        self.num_particles = len(self.trees)
        self._pred: dict[tuple[int, int], np.ndarray] = {}
        self._behavior: dict[tuple[int, int], bytes] = {}
        self._ksum: dict[tuple[int, int], float] = {}
        self._sim: dict[tuple[int, int, int], float] = {}
        for s, ps in enumerate(particle_sets):
            base = self.offsets[s]
            for j in range(ps.num_particles):
                self._pred[(s, base + j)] = ps.local_predictions[j]

    def own_gids(self, sensor: int) -> list[int]:
        base = self.offsets[sensor]
        return list(range(base, base + self.particle_sets[sensor].num_particles))

    def prediction(self, sensor: int, gid: int) -> np.ndarray:
        """Prediction vector of classifier `gid` on `sensor`'s own rows."""
        key = (sensor, gid)
        cached = self._pred.get(key)
        if cached is None:
            cached = predict(self.trees[gid], self.particle_sets[sensor].local_data)
            self._pred[key] = cached
        return cached

    def behavior_key(self, sensor: int, gid: int) -> bytes:
        key = (sensor, gid)
        cached = self._behavior.get(key)
        if cached is None:
            cached = self.prediction(sensor, gid).tobytes()
            self._behavior[key] = cached
        return cached

    def kernel(self, sensor: int, gid_a: int, gid_b: int) -> float:
        a = self.prediction(sensor, gid_a)
        b = self.prediction(sensor, gid_b)
        n = a.shape[0]
        hamming = int(np.count_nonzero(a != b))
        return (1.0 - hamming / n) ** self.kernel_exponent

    def kernel_sum(self, sensor: int, gid: int) -> float:
        """Sum of kernels between the sensor's own particles and classifier `gid`."""
        key = (sensor, gid)
        cached = self._ksum.get(key)
        if cached is None:
            cached = sum(self.kernel(sensor, own, gid) for own in self.own_gids(sensor))
            self._ksum[key] = cached
        return cached

    def similarity(self, sensor: int, gid_a: int, gid_b: int) -> float:
        """Edge agreement factor between two classifiers, on `sensor`'s rows."""
        if gid_a > gid_b:
            gid_a, gid_b = gid_b, gid_a
        key = (sensor, gid_a, gid_b)
        cached = self._sim.get(key)
        if cached is None:
            cached = self.kernel(sensor, gid_a, gid_b) ** self.similarity_exponent
            self._sim[key] = cached
        return cached


@dataclass
class SamplerState:
    current: np.ndarray                  # gid held by each sensor
    round: int
    rng: np.random.Generator

    def copy(self) -> "SamplerState":
        bitgen = type(self.rng.bit_generator)()
        bitgen.state = self.rng.bit_generator.state
        return SamplerState(self.current.copy(), self.round, np.random.Generator(bitgen))


@dataclass(frozen=True)
class SamplerConfig:
    rounds: int = 4000                   # one round = one single-site update
    mode: str = "greedy"                 # or "gibbs"
    seed: int = 0
    sweep: str = "random-sensor"         # or "fixed-permutation"
    trace_every: int = 0                 # 0 disables the test-error trace

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if self.mode not in ("greedy", "gibbs"):
            raise ValueError("mode must be 'greedy' or 'gibbs'")
        if self.sweep not in ("random-sensor", "fixed-permutation"):
            raise ValueError("sweep must be 'random-sensor' or 'fixed-permutation'")


def local_init(ps: ParticleSet, kernel_exponent: int = KERNEL_EXPONENT) -> int:
    """Index of the particle maximizing the sum of kernels to its set-mates.

    This is the no-neighbors special case of the site update: the sensor
    optimizes only its own particle density.  Ties pick the lowest index.
    """
    n = ps.num_particles
    rows = len(ps.local_data)
    best_j, best_score = 0, -1.0
    for j in range(n):
        score = 0.0
        for other in range(n):
            hamming = int(np.count_nonzero(ps.local_predictions[j]
                                           != ps.local_predictions[other]))
            score += (1.0 - hamming / rows) ** kernel_exponent
        if score > best_score:
            best_j, best_score = j, score
    return best_j


def initialize_state(particle_sets: list[ParticleSet], evaluator: LocalEvaluator,
                     rng: np.random.Generator) -> SamplerState:
    current = np.array(
        [evaluator.offsets[s] + local_init(ps, evaluator.kernel_exponent)
         for s, ps in enumerate(particle_sets)], dtype=np.intp)
    return SamplerState(current, 0, rng)


def conditional_weights(sensor: int, state: SamplerState, evaluator: LocalEvaluator,
                        topo: Topology) -> tuple[list[int], np.ndarray]:
    """Candidate gids and their unnormalized site weights for `sensor`.

    Candidates are the sensor's own particles followed by its neighbors'
    current samples, deduplicated by prediction equality on the sensor's own
    rows (first occurrence kept).  Weights follow the site update rule; every
    factor is evaluated on the sensor's rows.
    """
    neighbors = topo.neighbors(sensor)
    candidates: list[int] = []
    seen: set[bytes] = set()
    for gid in evaluator.own_gids(sensor):
        key = evaluator.behavior_key(sensor, gid)
        if key not in seen:
            seen.add(key)
            candidates.append(gid)
    for t in neighbors:
        gid = int(state.current[t])
        key = evaluator.behavior_key(sensor, gid)
        if key not in seen:
            seen.add(key)
            candidates.append(gid)
    weights = np.empty(len(candidates))
    for i, gid in enumerate(candidates):
        w = evaluator.kernel_sum(sensor, gid)
        for t in neighbors:
            w *= evaluator.similarity(sensor, int(state.current[t]), gid)
        weights[i] = w
    return candidates, weights


def _pick_sensor(state: SamplerState, num_sensors: int, sensor: int | None) -> int:
    if sensor is not None:
        return sensor
    return int(state.rng.integers(num_sensors))


def gibbs_step(state: SamplerState, topo: Topology, evaluator: LocalEvaluator,
               sensor: int | None = None) -> SamplerState:
    """One site resample drawn from the normalized conditional weights.

    The sensor is drawn uniformly from the state's generator unless given.
    If every weight is zero (possible only with degenerate similarities) the
    current sample is kept.  The state is updated in place and returned.
    """
    s = _pick_sensor(state, topo.num_sensors, sensor)
    candidates, weights = conditional_weights(s, state, evaluator, topo)
    total = float(weights.sum())
    if total > 0.0:
        u = state.rng.random() * total
        acc = 0.0
        chosen = candidates[-1]
        for gid, w in zip(candidates, weights):
            acc += w
            if u < acc:
                chosen = gid
                break
        state.current[s] = chosen
    state.round += 1
    return state


def greedy_step(state: SamplerState, topo: Topology, evaluator: LocalEvaluator,
                sensor: int | None = None) -> SamplerState:
    """One site update to the maximal-weight candidate.

    Ties resolve to the earliest candidate, i.e. own particles before
    neighbor samples, then lowest index.  No escape mechanism: this is plain
    coordinate ascent and may stop in a local optimum.
    """
    s = _pick_sensor(state, topo.num_sensors, sensor)
    candidates, weights = conditional_weights(s, state, evaluator, topo)
    best = int(np.argmax(weights))  # first maximum wins
    if weights[best] > 0.0:
        state.current[s] = candidates[best]
    state.round += 1
    return state


@dataclass
class SamplerRun:
    state: SamplerState
    trace: list[tuple[int, int, float]] = field(default_factory=list)
    final_errors: np.ndarray | None = None


def run_sampler(cfg: SamplerConfig, topo: Topology, particle_sets: list[ParticleSet],
                test_data: CategoricalDataset | None = None,
                evaluator: LocalEvaluator | None = None) -> SamplerRun:
    """Initialize every sensor locally, then run cfg.rounds single-site updates.

    With `trace_every` > 0 and test data given, each sensor's current test
    error is recorded at round 0, every `trace_every` rounds, and at the end.
    The whole trajectory is reproducible from cfg.seed.
    """
    if evaluator is None:
        evaluator = LocalEvaluator(particle_sets)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed & 0xFFFFFFFF, 0x53414D50]))
    state = initialize_state(particle_sets, evaluator, rng)
    step = greedy_step if cfg.mode == "greedy" else gibbs_step

    if cfg.sweep == "fixed-permutation":
        order = rng.permutation(topo.num_sensors)
    else:
        order = None

    run = SamplerRun(state)
    test_cache: dict[int, float] = {}

    def gid_error(gid: int) -> float:
        err = test_cache.get(gid)
        if err is None:
            err = classification_error(evaluator.trees[gid], test_data)
            test_cache[gid] = err
        return err

    def record(round_index: int):
        for s in range(topo.num_sensors):
            run.trace.append((round_index, s, gid_error(int(state.current[s]))))

    tracing = cfg.trace_every > 0 and test_data is not None
    if tracing:
        record(0)
    for i in range(cfg.rounds):
        sensor = int(order[i % topo.num_sensors]) if order is not None else None
        step(state, topo, evaluator, sensor)
        if tracing and state.round % cfg.trace_every == 0:
            record(state.round)
    if tracing and cfg.rounds % cfg.trace_every != 0:
        record(state.round)
    if test_data is not None:
        run.final_errors = np.array(
            [gid_error(int(state.current[s])) for s in range(topo.num_sensors)])
    return run


def _pooled_data(particle_sets: list[ParticleSet]) -> CategoricalDataset:
    features = np.concatenate([ps.local_data.features for ps in particle_sets])
    labels = np.concatenate([ps.local_data.labels for ps in particle_sets])
    return CategoricalDataset(features, labels, particle_sets[0].local_data.feature_arity)


def map_objective(tree: DecisionTree, particle_sets: list[ParticleSet],
                  policy: str = "local",
                  kernel_exponent: int = KERNEL_EXPONENT) -> float:
    """Product over sensors of the kernel sum between their particles and `tree`.

    Under the `local` policy each sensor's factor is computed on its own rows
    (the objective the distributed sampler targets); under `pooled` all
    kernels use the union of every sensor's rows, a centralized reference
    that no individual sensor could compute.
    """
    if policy not in ("local", "pooled"):
        raise ValueError("policy must be 'local' or 'pooled'")
    objective = 1.0
    if policy == "local":
        for ps in particle_sets:
            f_vec = predict(tree, ps.local_data)
            rows = len(ps.local_data)
            factor = 0.0
            for cached in ps.local_predictions:
                hamming = int(np.count_nonzero(cached != f_vec))
                factor += (1.0 - hamming / rows) ** kernel_exponent
            objective *= factor
    else:
        pooled = _pooled_data(particle_sets)
        rows = len(pooled)
        f_vec = predict(tree, pooled)
        for ps in particle_sets:
            factor = 0.0
            for particle in ps.particles:
                h_vec = predict(particle, pooled)
                hamming = int(np.count_nonzero(h_vec != f_vec))
                factor += (1.0 - hamming / rows) ** kernel_exponent
            objective *= factor
    return objective


def brute_force_map(particle_sets: list[ParticleSet], policy: str = "local",
                    evaluator: LocalEvaluator | None = None,
                    ) -> tuple[int, DecisionTree, float]:
    """Exhaustive argmax of the product objective over every sensor's particles.

    Returns (gid, tree, objective); ties go to the lowest gid, which is the
    lowest (sensor, particle) pair.
    """
    if evaluator is None:
        evaluator = LocalEvaluator(particle_sets)
    best_gid, best_obj = 0, -1.0
    if policy == "local":
        for gid in range(evaluator.num_particles):
            obj = 1.0
            for s in range(len(particle_sets)):
                obj *= evaluator.kernel_sum(s, gid)
            if obj > best_obj:
                best_gid, best_obj = gid, obj
    elif policy == "pooled":
        pooled = _pooled_data(particle_sets)
        rows = len(pooled)
        pool_pred = [predict(tree, pooled) for tree in evaluator.trees]
        for gid in range(evaluator.num_particles):
            obj = 1.0
            cursor = 0
            for ps in particle_sets:
                factor = 0.0
                for j in range(ps.num_particles):
                    hamming = int(np.count_nonzero(pool_pred[cursor + j] != pool_pred[gid]))
                    factor += (1.0 - hamming / rows) ** evaluator.kernel_exponent
                obj *= factor
                cursor += ps.num_particles
            if obj > best_obj:
                best_gid, best_obj = gid, obj
    else:
        raise ValueError("policy must be 'local' or 'pooled'")
    return best_gid, evaluator.trees[best_gid], best_obj


def noncollaborative_baseline(particle_sets: list[ParticleSet],
                              test_data: CategoricalDataset) -> np.ndarray:
    """Per-sensor test error of each sensor's locally initialized classifier."""
    errors = np.empty(len(particle_sets))
    for s, ps in enumerate(particle_sets):
        j = local_init(ps)
        errors[s] = classification_error(ps.particles[j], test_data)
    return errors
