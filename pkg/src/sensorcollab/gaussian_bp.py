"""Gaussian sum-product message passing for scalar consensus estimation.

Each sensor holds a Gaussian potential over a shared scalar parameter; each
edge carries a Gaussian similarity factor whose variance controls how
strongly neighbors are pulled to agree.  Because all factors are Gaussian,
messages stay Gaussian and a message is just a (mean, variance) pair:

    mean(t->s) = (mu_t/var_t + sum_u wmean(u->t)) / (1/var_t + sum_u prec(u->t))
    var(t->s)  = smoothness_variance + 1 / (1/var_t + sum_u prec(u->t))

with u ranging over neighbors of t other than s.  On a tree the fixed point
is reached exactly after diameter-many synchronous rounds and marginals are
exact; on loopy graphs the same recursion runs as an approximation and
non-convergence is reported rather than raised.  As the edge smoothness
variance goes to zero on a connected tree, every marginal mean approaches
the precision-weighted average of the node potentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from sensorcollab.topology import Topology


class NumericalFailure(RuntimeError):
    """A message update produced a non-finite parameter; carries the edge."""

    def __init__(self, edge: tuple[int, int], detail: str):
        super().__init__(f"numerical failure on message {edge[0]}->{edge[1]}: {detail}")
        self.edge = edge


@dataclass(frozen=True)
class GaussianPotential:
    """Node factor exp(-(x - mean)^2 / (2 variance))."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ValueError("potential parameters must be finite")
        if self.variance <= 0:
            raise ValueError("potential variance must be positive")


@dataclass(frozen=True)
class EdgeSmoothness:
    """Edge factor exp(-(x - y)^2 / (2 variance)); smaller variance forces consensus.

    variance = 0 is allowed (the message recursion stays proper); consensus
    results are stated as the variance -> 0 limit and experiments use a small
    positive value.
    """

    variance: float

    def __post_init__(self):
        if not math.isfinite(self.variance) or self.variance < 0:
            raise ValueError("edge smoothness variance must be finite and >= 0")


@dataclass(frozen=True)
class GaussianMessage:
    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ValueError("message parameters must be finite")
        if self.variance <= 0:
            raise ValueError("message variance must be positive")


@dataclass(frozen=True)
class GaussianMarginal:
    mean: float
    variance: float


@dataclass(frozen=True)
class BpConfig:
    """Iteration controls.

    Convergence is declared when the max over directed edges of
    |delta mean| + |delta variance| falls below `convergence_tol`.
    """

    max_rounds: int = 1000
    convergence_tol: float = 1e-10
    schedule: str = "synchronous"  # or "sequential" (fixed directed-edge order)

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.convergence_tol <= 0:
            raise ValueError("convergence_tol must be positive")
        if self.schedule not in ("synchronous", "sequential"):
            raise ValueError("schedule must be 'synchronous' or 'sequential'")


@dataclass
class BpReport:
    rounds_used: int
    converged: bool
    delta_trace: list[float] = field(default_factory=list)
    messages: dict[tuple[int, int], GaussianMessage] = field(default_factory=dict)

    def delta_trace_csv(self) -> str:
        """Convergence trace as 'round,max_message_delta' CSV text."""
        lines = ["round,max_message_delta"]
        lines.extend(f"{i + 1},{d!r}" for i, d in enumerate(self.delta_trace))
        return "\n".join(lines) + "\n"


INIT_MESSAGE = GaussianMessage(0.0, 1.0)


def gaussian_message_update(potential: GaussianPotential,
                            incoming: list[GaussianMessage],
                            edge: EdgeSmoothness,
                            edge_id: tuple[int, int] = (-1, -1)) -> GaussianMessage:
    """One message update from the sender's potential and its other incoming messages.

    `incoming` holds the messages into the sender from all its neighbors
    except the recipient; an empty list reduces the update to the local
    potential (plus the edge smoothness on the variance).
    """
    num = potential.mean / potential.variance
    den = 1.0 / potential.variance
    for msg in incoming:
        num += msg.mean / msg.variance
        den += 1.0 / msg.variance
    mean = num / den
    variance = edge.variance + 1.0 / den
    if not (math.isfinite(mean) and math.isfinite(variance)) or variance <= 0:
        raise NumericalFailure(edge_id, f"mean={mean}, variance={variance}")
    return GaussianMessage(mean, variance)


def precision_weighted_average(potentials: list[GaussianPotential]) -> float:
    """sum(mean/variance) / sum(1/variance): optimal fusion of independent estimates."""
    if not potentials:
        raise ValueError("need at least one potential")
    num = sum(p.mean / p.variance for p in potentials)
    den = sum(1.0 / p.variance for p in potentials)
    return num / den


def map_estimate(marginal: GaussianMarginal) -> float:
    """Mode of a Gaussian marginal, i.e. its mean."""
    return marginal.mean


class _EdgeTables:
    """Directed-edge index tables for vectorized synchronous updates.

    Exclude-one sums are materialized as explicit index lists (no
    subtract-the-reverse trick) so no precision is lost to cancellation when
    message precisions dwarf node precisions.
    """

    def __init__(self, topo: Topology):
        directed = []
        for s, t in topo.sorted_edges():
            directed.append((s, t))
            directed.append((t, s))
        directed.sort()
        self.directed = directed
        index = {e: i for i, e in enumerate(directed)}
        self.src = np.array([t for t, _ in directed], dtype=np.intp)
        self.dst = np.array([s for _, s in directed], dtype=np.intp)
        contrib_edge = []   # which directed edge each contribution feeds
        contrib_from = []   # the contributing directed edge
        for i, (t, s) in enumerate(directed):
            for u in topo.neighbors(t):
                if u == s:
                    continue
                contrib_edge.append(i)
                contrib_from.append(index[(u, t)])
        self.contrib_edge = np.array(contrib_edge, dtype=np.intp)
        self.contrib_from = np.array(contrib_from, dtype=np.intp)
        node_in = [[] for _ in range(topo.num_sensors)]
        for i, (t, s) in enumerate(directed):
            node_in[s].append(i)   # already sorted by source since directed is sorted
        self.node_in = node_in


def _resolve_smoothness(topo: Topology, smoothness) -> dict[tuple[int, int], float]:
    if isinstance(smoothness, EdgeSmoothness):
        return {e: smoothness.variance for e in topo.sorted_edges()}
    resolved = {}
    for e in topo.sorted_edges():
        try:
            value = smoothness[e]
        except KeyError:
            raise KeyError(f"missing smoothness for edge {e}") from None
        resolved[e] = value.variance if isinstance(value, EdgeSmoothness) else float(value)
    for variance in resolved.values():
        if not math.isfinite(variance) or variance < 0:
            raise ValueError("edge smoothness variance must be finite and >= 0")
    return resolved


def run_gaussian_bp(topo: Topology,
                    potentials: list[GaussianPotential],
                    smoothness: EdgeSmoothness | Mapping[tuple[int, int], EdgeSmoothness],
                    cfg: BpConfig = BpConfig(),
                    round_hook: Callable[[int, np.ndarray, np.ndarray], None] | None = None,
                    ) -> tuple[list[GaussianMarginal], BpReport]:
    """Run sum-product to (attempted) convergence and return per-sensor marginals.

    Messages start at (mean 0, variance 1).  The synchronous schedule updates
    every directed edge from the previous round's table, so within-round
    evaluations are order-independent; the sequential schedule sweeps directed
    edges in sorted order using the freshest values.  Non-convergence within
    max_rounds is reported via the BpReport, not raised.

    `round_hook(round_index, means, variances)` is called after each round
    with the interim marginals; it is a measurement device and does not
    affect message evolution.
    """
    m = topo.num_sensors
    if len(potentials) != m:
        raise ValueError("need one potential per sensor")
    lam_by_edge = _resolve_smoothness(topo, smoothness)

    pot_mean = np.array([p.mean for p in potentials])
    pot_prec = np.array([1.0 / p.variance for p in potentials])
    pot_wmean = pot_mean * pot_prec

    tables = _EdgeTables(topo)
    n_dir = len(tables.directed)
    report = BpReport(rounds_used=0, converged=True)

    if n_dir == 0:
        marginals = [GaussianMarginal(p.mean, p.variance) for p in potentials]
        return marginals, report

    lam = np.array([lam_by_edge[(min(t, s), max(t, s))] for t, s in tables.directed])
    msg_mean = np.zeros(n_dir)
    msg_var = np.ones(n_dir)

    def marginal_arrays():
        means = np.empty(m)
        variances = np.empty(m)
        prec = 1.0 / msg_var
        wmean = msg_mean * prec
        for s in range(m):
            num = pot_wmean[s]
            den = pot_prec[s]
            for i in tables.node_in[s]:
                num += wmean[i]
                den += prec[i]
            means[s] = num / den
            variances[s] = 1.0 / den
        return means, variances

    converged = False
    for round_index in range(1, cfg.max_rounds + 1):
        if cfg.schedule == "synchronous":
            prec = 1.0 / msg_var
            wmean = msg_mean * prec
            num = pot_wmean[tables.src].copy()
            den = pot_prec[tables.src].copy()
            np.add.at(num, tables.contrib_edge, wmean[tables.contrib_from])
            np.add.at(den, tables.contrib_edge, prec[tables.contrib_from])
            new_mean = num / den
            new_var = lam + 1.0 / den
            bad = ~(np.isfinite(new_mean) & np.isfinite(new_var) & (new_var > 0))
            if bad.any():
                offender = tables.directed[int(np.argmax(bad))]
                raise NumericalFailure(offender, "non-finite message parameters")
            delta = float(np.max(np.abs(new_mean - msg_mean) + np.abs(new_var - msg_var)))
            msg_mean, msg_var = new_mean, new_var
        else:
            delta = _sequential_sweep(tables, pot_wmean, pot_prec, lam, msg_mean, msg_var)

        report.delta_trace.append(delta)
        report.rounds_used = round_index
        if round_hook is not None:
            means, variances = marginal_arrays()
            round_hook(round_index, means, variances)
        if delta < cfg.convergence_tol:
            converged = True
            break

    report.converged = converged
    means, variances = marginal_arrays()
    marginals = [GaussianMarginal(float(means[s]), float(variances[s])) for s in range(m)]
    report.messages = {
        edge: GaussianMessage(float(msg_mean[i]), float(msg_var[i]))
        for i, edge in enumerate(tables.directed)
    }
    return marginals, report


def _sequential_sweep(tables: _EdgeTables, pot_wmean, pot_prec, lam,
                      msg_mean, msg_var) -> float:
    """One in-place fixed-order sweep over directed edges; returns the max delta."""
    if not hasattr(tables, "_per_edge_contrib"):
        per_edge = [[] for _ in range(len(tables.directed))]
        for pos in range(len(tables.contrib_edge)):
            per_edge[tables.contrib_edge[pos]].append(int(tables.contrib_from[pos]))
        tables._per_edge_contrib = per_edge
    delta = 0.0
    for i, (t, s) in enumerate(tables.directed):
        num = pot_wmean[t]
        den = pot_prec[t]
        for j in tables._per_edge_contrib[i]:
            num += msg_mean[j] / msg_var[j]
            den += 1.0 / msg_var[j]
        new_mean = num / den
        new_var = lam[i] + 1.0 / den
        if not (math.isfinite(new_mean) and math.isfinite(new_var)) or new_var <= 0:
            raise NumericalFailure((t, s), "non-finite message parameters")
        delta = max(delta, abs(new_mean - msg_mean[i]) + abs(new_var - msg_var[i]))
        msg_mean[i] = new_mean
        msg_var[i] = new_var
    return delta
