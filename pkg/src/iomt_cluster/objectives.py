"""Cluster-head selection objectives and the weighted fitness.

Per-node quantities are evaluated over a *candidate pool* (the alive nodes of
one snapshot). In ``"residual"`` mode each of the five terms is min-max
normalized over the pool and oriented so larger is better; ``"literal"`` mode
evaluates the raw weighted expression.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, DomainError
from .network import (
    BaseStation,
    CommunicationGraph,
    Network,
    RadioEnergyModel,
    SensorNode,
    amplifier_energy,
    distance,
)

MODES = ("residual", "literal")

# Floor applied before inverting a zero communication cost (all neighbours co-located).
COMM_COST_FLOOR = 1e-9
DEGENERATE_TERM = 0.5


@dataclass(frozen=True)
class FitnessWeights:
    """Coefficients for (energy, communication cost, queuing delay, link
    quality, centrality). Must lie in [0, 1] and sum to 1."""

    w1: float = 0.2
    w2: float = 0.2
    w3: float = 0.2
    w4: float = 0.2
    w5: float = 0.2

    def __post_init__(self):
        ws = self.as_array()
        if np.any(ws < 0) or np.any(ws > 1) or not np.all(np.isfinite(ws)):
            raise ConfigError(f"fitness weights must lie in [0, 1], got {ws.tolist()}")
        if abs(ws.sum() - 1.0) > 1e-9:
            raise ConfigError(f"fitness weights must sum to 1, got {ws.sum()!r}")

    @classmethod
    def of(cls, values) -> "FitnessWeights":
        if isinstance(values, FitnessWeights):
            return values
        if isinstance(values, dict):
            return cls(**values)
        values = list(values)
        if len(values) != 5:
            raise ConfigError(f"expected five fitness weights, got {len(values)}")
        return cls(*values)

    def as_array(self) -> np.ndarray:
        return np.array([self.w1, self.w2, self.w3, self.w4, self.w5], dtype=np.float64)


@dataclass(frozen=True)
class ObjectiveVector:
    cluster_energy: float
    comm_cost: float
    queuing_delay: float
    link_quality: float
    centrality: float


def _node_id(node) -> int:
    return node.id if isinstance(node, SensorNode) else int(node)


def _require_alive(*nodes: SensorNode):
    for node in nodes:
        if not node.alive:
            raise DomainError(f"node {node.id} is dead")


def _amp_term(d, radio: RadioEnergyModel):
    if radio.literal_distance:
        return radio.fs_amp * np.asarray(d, dtype=np.float64)
    return amplifier_energy(d, radio)


def energy_ch_gather(ch: SensorNode, member: SensorNode, bits: int, radio: RadioEnergyModel) -> float:
    """CH-side energy for gathering one ``bits``-sized packet from ``member``."""
    _require_alive(ch, member)
    if bits < 0:
        raise DomainError("bits must be >= 0")
    d = distance(ch.pos, member.pos)
    return float(bits * (radio.electronics_energy + _amp_term(d, radio)))


def energy_ch_to_bs(ch: SensorNode, bs: BaseStation, bits: int, n_total: float, per_cluster: float,
                    radio: RadioEnergyModel) -> float:
    """Receive from members, aggregate ``N/Y`` signals and forward to the BS."""
    if per_cluster <= 0:
        raise DomainError("nodes per cluster (Y) must be > 0")
    if n_total < per_cluster:
        raise DomainError("total nodes N must be >= nodes per cluster Y")
    if bits < 0:
        raise DomainError("bits must be >= 0")
    ratio = n_total / per_cluster
    e_d = radio.electronics_energy
    d = distance(ch.pos, bs.pos)
    return float(bits * (e_d * (ratio - 1) + radio.aggregation_energy * ratio + e_d + _amp_term(d, radio)))


def cluster_energy(ch: SensorNode, members, bs: BaseStation, bits: int, n_total: float,
                   per_cluster: float, radio: RadioEnergyModel) -> float:
    """``E_BS + (N/Y - 1) * mean member gather cost`` (no members: gather term 0)."""
    total = energy_ch_to_bs(ch, bs, bits, n_total, per_cluster, radio)
    members = list(members)
    if members:
        gather = sum(energy_ch_gather(ch, m, bits, radio) for m in members) / len(members)
        total += (n_total / per_cluster - 1) * gather
    return total


def communication_cost(node, graph: CommunicationGraph) -> float:
    """Squared mean neighbour distance over squared forwarding radius.

    An isolated node gets the worst possible cost, ``(diagonal / radius)**2``.
    """
    i = _node_id(node)
    d = graph.neighbor_distances(i)
    if len(d) == 0:
        return isolated_comm_cost(graph)
    return float(np.mean(d) ** 2 / graph.radius ** 2)


def isolated_comm_cost(graph: CommunicationGraph) -> float:
    if graph.radius <= 0:
        return float("inf")
    return (graph.diagonal / graph.radius) ** 2


def queuing_delay(node: SensorNode) -> float:
    if node.queue_length <= 0:
        raise DomainError(f"queue length of node {node.id} must be >= 1")
    return (node.arrival_rate + node.forwarding_capacity) / node.queue_length


def link_cost_sums(graph: CommunicationGraph) -> np.ndarray:
    """Total retransmission cost over each node's incident edges (0 if isolated)."""
    owner = np.repeat(np.arange(graph.n), graph.degree())
    return np.bincount(owner, weights=graph.costs, minlength=graph.n).astype(np.float64)


def minmax(values: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant vector maps to 0.5 everywhere."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        return values.copy()
    lo, hi = values.min(), values.max()
    if not hi > lo:
        return np.full(len(values), DEGENERATE_TERM)
    return np.clip((values - lo) / (hi - lo), 0.0, 1.0)


def link_quality(node, graph: CommunicationGraph, pool=None) -> float:
    i = _node_id(node)
    pool = np.flatnonzero(graph.alive) if pool is None else np.asarray([_node_id(p) for p in pool])
    sums = link_cost_sums(graph)
    scaled = minmax(sums[pool])
    where = np.flatnonzero(pool == i)
    if len(where) == 0:
        raise DomainError(f"node {i} is not in the candidate pool")
    return float(scaled[where[0]])


def centrality_all(graph: CommunicationGraph) -> np.ndarray:
    """Betweenness of every node, normalized by ``(n-1)(n-2)/2`` over the
    ``n`` alive nodes; unreachable pairs contribute nothing."""
    n_alive = int(np.count_nonzero(graph.alive))
    raw = kernels.betweenness(graph.indptr, graph.indices)
    if n_alive < 3:
        return np.zeros(graph.n)
    return raw / ((n_alive - 1) * (n_alive - 2))


def node_centrality(node, graph: CommunicationGraph) -> float:
    return float(centrality_all(graph)[_node_id(node)])


def combine(terms, weights: FitnessWeights) -> np.ndarray | float:
    """Weighted sum of the five terms (last axis)."""
    terms = np.asarray(terms, dtype=np.float64)
    w = weights.as_array()
    out = terms[..., 0] * w[0]
    for j in range(1, 5):
        out = out + terms[..., j] * w[j]
    return float(out) if out.ndim == 0 else out


@dataclass
class ObjectiveTable:
    """All objectives and fitness values for one candidate pool.

    Arrays are indexed by pool position; ``ids`` maps positions to node ids
    (ascending). ``cluster_energy`` treats a node's graph neighbours as the
    members it would serve.
    """

    ids: np.ndarray
    residual_energy: np.ndarray
    cluster_energy: np.ndarray
    comm_cost: np.ndarray
    queuing_delay: np.ndarray
    link_cost: np.ndarray
    link_quality: np.ndarray
    centrality: np.ndarray
    terms: np.ndarray
    fitness: np.ndarray
    weights: FitnessWeights
    mode: str

    def __len__(self) -> int:
        return len(self.ids)

    def position_of(self, node_id: int) -> int:
        k = int(np.searchsorted(self.ids, node_id))
        if k >= len(self.ids) or self.ids[k] != node_id:
            raise DomainError(f"node {node_id} is not in the candidate pool")
        return k

    def fitness_of(self, node_id: int) -> float:
        return float(self.fitness[self.position_of(node_id)])

    def vector(self, node_id: int) -> ObjectiveVector:
        k = self.position_of(node_id)
        return ObjectiveVector(
            float(self.cluster_energy[k]),
            float(self.comm_cost[k]),
            float(self.queuing_delay[k]),
            float(self.link_quality[k]),
            float(self.centrality[k]),
        )

    def set_fitness(self, node_ids) -> float:
        """Sum of member fitness, accumulated in ascending id order."""
        total = 0.0
        for i in sorted(int(v) for v in node_ids):
            total += float(self.fitness[self.position_of(i)])
        return total


def evaluate_pool(network: Network, graph: CommunicationGraph, weights: FitnessWeights | None = None,
                  mode: str = "residual", cluster_count: int | None = None,
                  centrality: np.ndarray | None = None) -> ObjectiveTable:
    """Compute every objective and the fitness for the alive nodes."""
    if mode not in MODES:
        raise ConfigError(f"fitness mode must be one of {MODES}, got {mode!r}")
    weights = FitnessWeights() if weights is None else FitnessWeights.of(weights)
    cfg = network.config
    ids = network.alive_ids()
    n = len(ids)
    k = min(cluster_count or cfg.cluster_count, max(n, 1))
    bits = cfg.packet_size_bits
    radio = cfg.radio

    residual = network.energy[ids].astype(np.float64)
    qlen = network.queue_length[ids]
    if np.any(qlen <= 0):
        raise DomainError("queue length must be >= 1 for alive nodes")
    d_que = (network.arrival_rate[ids] + network.forwarding_capacity[ids]) / qlen

    ratio = k  # N / Y with Y = N / k
    deg = graph.degree()[ids]
    owner = np.repeat(np.arange(graph.n), graph.degree())
    size = graph.n
    dist_sum = np.bincount(owner, weights=graph.distances, minlength=size)[ids]
    gather_each = bits * (radio.electronics_energy + np.asarray(_amp_term(graph.distances, radio), dtype=np.float64))
    gather_sum = np.bincount(owner, weights=gather_each, minlength=size)[ids]
    has = deg > 0
    safe_deg = np.where(has, deg, 1)
    comm = np.where(has, (dist_sum / safe_deg) ** 2 / graph.radius ** 2 if graph.radius > 0 else 0.0,
                    isolated_comm_cost(graph))
    bs = network.bs.pos
    d_bs = np.hypot(network.positions[ids, 0] - bs.x, network.positions[ids, 1] - bs.y)
    e_c = bits * (radio.electronics_energy * (ratio - 1) + radio.aggregation_energy * ratio
                  + radio.electronics_energy + np.asarray(_amp_term(d_bs, radio), dtype=np.float64))
    e_c = e_c + np.where(has, (ratio - 1) * gather_sum / safe_deg, 0.0)

    sums = link_cost_sums(graph)[ids]
    lq = minmax(sums)
    nc = (centrality if centrality is not None else centrality_all(graph))[ids]

    inv_comm = 1.0 / np.maximum(comm, COMM_COST_FLOOR)
    inv_delay = 1.0 / d_que
    if mode == "residual":
        terms = np.column_stack([minmax(residual), minmax(inv_comm), minmax(inv_delay), lq, nc])
        fitness = np.clip(combine(terms, weights), 0.0, 1.0) if n else np.zeros(0)
    else:
        terms = np.column_stack([e_c, inv_comm, inv_delay, lq, nc])
        fitness = combine(terms, weights) if n else np.zeros(0)

    return ObjectiveTable(
        ids=ids,
        residual_energy=residual,
        cluster_energy=e_c,
        comm_cost=comm,
        queuing_delay=d_que,
        link_cost=sums,
        link_quality=lq,
        centrality=nc,
        terms=terms.reshape(n, 5),
        fitness=np.asarray(fitness, dtype=np.float64).reshape(n),
        weights=weights,
        mode=mode,
    )


def fitness_final(node, table: ObjectiveTable) -> float:
    return table.fitness_of(_node_id(node))


__all__ = [
    "FitnessWeights",
    "ObjectiveVector",
    "ObjectiveTable",
    "energy_ch_gather",
    "energy_ch_to_bs",
    "cluster_energy",
    "communication_cost",
    "queuing_delay",
    "link_quality",
    "node_centrality",
    "centrality_all",
    "combine",
    "minmax",
    "evaluate_pool",
    "fitness_final",
]
