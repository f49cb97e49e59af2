"""Sensor-network domain objects, deployment, the communication graph and the
first-order radio energy model."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import ConfigError, DomainError


class NodeState(IntEnum):
    ACTIVE = 0
    SLEEP = 1
    DEAD = 2


class Role(IntEnum):
    UNASSIGNED = 0
    MEMBER = 1
    CLUSTER_HEAD = 2


@dataclass(frozen=True)
class Position:
    x: float
    y: float


@dataclass
class SensorNode:
    id: int
    pos: Position
    residual_energy: float
    state: NodeState = NodeState.ACTIVE
    role: Role = Role.UNASSIGNED
    arrival_rate: float = 1.0
    forwarding_capacity: float = 20.0
    queue_length: int = 1

    @property
    def alive(self) -> bool:
        return self.state != NodeState.DEAD and self.residual_energy > 0


@dataclass(frozen=True)
class BaseStation:
    pos: Position


@dataclass(frozen=True)
class RadioEnergyModel:
    """First-order radio constants (SI units: J/bit, J/bit/m^2, J/bit/m^4).

    ``literal_distance`` switches the per-cluster energy terms to a linear
    distance amplifier (``fs_amp * d``); transmission costs in the simulator
    always use the two-regime model.
    """

    electronics_energy: float = 30e-9
    fs_amp: float = 10e-12
    mp_amp: float = 0.0013e-12
    aggregation_energy: float = 3e-9
    alpha_near: int = 2
    alpha_far: int = 4
    literal_distance: bool = False

    def __post_init__(self):
        for name in ("electronics_energy", "fs_amp", "mp_amp", "aggregation_energy"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"radio.{name} must be > 0")
        if not 2 <= self.alpha_near <= self.alpha_far <= 4:
            raise ConfigError("path-loss exponents must satisfy 2 <= alpha_near <= alpha_far <= 4")

    @property
    def threshold_distance(self) -> float:
        return math.sqrt(self.fs_amp / self.mp_amp)

    def scaled(self, factor: float) -> "RadioEnergyModel":
        return dataclasses.replace(self, fs_amp=self.fs_amp * factor, mp_amp=self.mp_amp * factor)


@dataclass
class NetworkConfig:
    """Deployment and radio parameters. Defaults are the full-scale table of
    network parameters (1000 nodes, 500 x 500 m, 500 rounds)."""

    node_count: int = 1000
    area: tuple[float, float] = (500.0, 500.0)
    bs_position: tuple[float, float] = (500.0, 500.0)
    packet_size_bits: int = 1500
    initial_energy: float = 2.0
    cluster_count: int = 5
    radio: RadioEnergyModel = field(default_factory=RadioEnergyModel)
    forwarding_radius: float | None = None  # None -> radio threshold distance
    max_rounds: int = 500
    rng_seed: int = 0
    arrival_rate_range: tuple[float, float] = (1.0, 20.0)
    forwarding_capacity_range: tuple[float, float] = (20.0, 100.0)
    queue_length_range: tuple[int, int] = (1, 10)
    retransmission_noise: float = 0.5
    signal_speed: float = 3e8
    transmit_power_mw: float = 9.0
    link_rate_bps: float = 1e6

    def __post_init__(self):
        self.area = tuple(float(v) for v in self.area)
        self.bs_position = tuple(float(v) for v in self.bs_position)
        self.arrival_rate_range = tuple(float(v) for v in self.arrival_rate_range)
        self.forwarding_capacity_range = tuple(float(v) for v in self.forwarding_capacity_range)
        self.queue_length_range = tuple(int(v) for v in self.queue_length_range)

    @property
    def radius(self) -> float:
        if self.forwarding_radius is None:
            return self.radio.threshold_distance
        return float(self.forwarding_radius)

    @property
    def diagonal(self) -> float:
        return math.hypot(*self.area)

    def validate(self) -> None:
        if self.node_count < 1:
            raise ConfigError("node_count must be >= 1")
        if len(self.area) != 2 or min(self.area) <= 0:
            raise ConfigError(f"area must be positive, got {self.area}")
        if not 1 <= self.cluster_count <= self.node_count:
            raise ConfigError("need node_count >= cluster_count >= 1")
        if self.packet_size_bits < 1:
            raise ConfigError("packet_size_bits must be >= 1")
        if self.max_rounds < 1:
            raise ConfigError("max_rounds must be >= 1")
        if self.initial_energy < 0:
            raise ConfigError("initial_energy must be >= 0")
        if self.radius < 0:
            raise ConfigError("forwarding_radius must be >= 0")
        lo, hi = self.arrival_rate_range
        if lo < 0 or hi < lo:
            raise ConfigError("arrival_rate_range must satisfy 0 <= lo <= hi")
        lo, hi = self.forwarding_capacity_range
        if lo <= 0 or hi < lo:
            raise ConfigError("forwarding_capacity_range must satisfy 0 < lo <= hi")
        lo, hi = self.queue_length_range
        if lo < 1 or hi < lo:
            raise ConfigError("queue_length_range must satisfy 1 <= lo <= hi")
        if self.signal_speed <= 0 or self.link_rate_bps <= 0:
            raise ConfigError("signal_speed and link_rate_bps must be > 0")
        if not 0 <= int(self.rng_seed) < 2**64:
            raise ConfigError(f"rng_seed must be an unsigned 64-bit integer, got {self.rng_seed}")


@dataclass
class Network:
    """Struct-of-arrays view of a deployment; index ``i`` is node id ``i``.

    ``link_noise`` is fixed at deployment and shared between copies.
    """

    config: NetworkConfig
    positions: np.ndarray
    energy: np.ndarray
    state: np.ndarray
    role: np.ndarray
    arrival_rate: np.ndarray
    forwarding_capacity: np.ndarray
    queue_length: np.ndarray
    base_queue_length: np.ndarray
    link_noise: np.ndarray
    bs: BaseStation

    @property
    def size(self) -> int:
        return len(self.energy)

    def alive_mask(self) -> np.ndarray:
        return (self.state != NodeState.DEAD) & (self.energy > 0)

    def alive_ids(self) -> np.ndarray:
        return np.flatnonzero(self.alive_mask())

    def node(self, i: int) -> SensorNode:
        return SensorNode(
            id=int(i),
            pos=Position(float(self.positions[i, 0]), float(self.positions[i, 1])),
            residual_energy=float(self.energy[i]),
            state=NodeState(int(self.state[i])),
            role=Role(int(self.role[i])),
            arrival_rate=float(self.arrival_rate[i]),
            forwarding_capacity=float(self.forwarding_capacity[i]),
            queue_length=int(self.queue_length[i]),
        )

    @property
    def nodes(self) -> list[SensorNode]:
        return [self.node(i) for i in range(self.size)]

    def copy(self) -> "Network":
        return dataclasses.replace(
            self,
            positions=self.positions.copy(),
            energy=self.energy.copy(),
            state=self.state.copy(),
            role=self.role.copy(),
            arrival_rate=self.arrival_rate.copy(),
            forwarding_capacity=self.forwarding_capacity.copy(),
            queue_length=self.queue_length.copy(),
        )

    @classmethod
    def from_positions(cls, positions, config: NetworkConfig | None = None, *, energy=None,
                       arrival_rate=None, forwarding_capacity=None, queue_length=None,
                       link_noise=None) -> "Network":
        """Hand-built network for tests and fixtures; unspecified traffic
        parameters take the low end of their configured ranges."""
        positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
        n = len(positions)
        if config is None:
            config = NetworkConfig(node_count=max(n, 1), cluster_count=1)

        def arr(value, default, dtype=np.float64):
            if value is None:
                return np.full(n, default, dtype=dtype)
            return np.asarray(value, dtype=dtype).copy()

        return cls(
            config=config,
            positions=positions.copy(),
            energy=arr(energy, config.initial_energy),
            state=np.zeros(n, dtype=np.int8),
            role=np.zeros(n, dtype=np.int8),
            arrival_rate=arr(arrival_rate, config.arrival_rate_range[0]),
            forwarding_capacity=arr(forwarding_capacity, config.forwarding_capacity_range[0]),
            queue_length=arr(queue_length, config.queue_length_range[0], np.int64),
            base_queue_length=arr(queue_length, config.queue_length_range[0], np.int64),
            link_noise=np.zeros((n, n)) if link_noise is None else np.asarray(link_noise, dtype=np.float64),
            bs=BaseStation(Position(*config.bs_position)),
        )


def deploy(config: NetworkConfig) -> Network:
    """Uniform random deployment, reproducible from ``config.rng_seed``."""
    config.validate()
    n = config.node_count
    place_ss, traffic_ss, link_ss = np.random.SeedSequence(config.rng_seed).spawn(3)
    place = np.random.default_rng(place_ss)
    traffic = np.random.default_rng(traffic_ss)
    links = np.random.default_rng(link_ss)

    width, height = config.area
    positions = np.column_stack([place.uniform(0.0, width, n), place.uniform(0.0, height, n)])
    arrival = traffic.uniform(*config.arrival_rate_range, size=n)
    capacity = traffic.uniform(*config.forwarding_capacity_range, size=n)
    qlo, qhi = config.queue_length_range
    queue = traffic.integers(qlo, qhi + 1, size=n)

    noise = np.triu(links.uniform(0.0, config.retransmission_noise, size=(n, n)), 1)
    noise = noise + noise.T
    noise.setflags(write=False)

    return Network(
        config=config,
        positions=positions,
        energy=np.full(n, float(config.initial_energy)),
        state=np.zeros(n, dtype=np.int8),
        role=np.zeros(n, dtype=np.int8),
        arrival_rate=arrival,
        forwarding_capacity=capacity,
        queue_length=queue.astype(np.int64),
        base_queue_length=queue.astype(np.int64),
        link_noise=noise,
        bs=BaseStation(Position(*config.bs_position)),
    )


def distance(p: Position, q: Position) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def _check_nonneg(**values):
    for name, v in values.items():
        if np.any(np.asarray(v) < 0):
            raise DomainError(f"{name} must be >= 0")


def _scalar_or_array(out):
    return float(out) if np.ndim(out) == 0 else out


def amplifier_energy(d, radio: RadioEnergyModel):
    """Per-bit amplifier term ``amp * d**alpha`` with the regime split at the
    threshold distance (free space at exactly ``d == d0``)."""
    d = np.asarray(d, dtype=np.float64)
    near = radio.fs_amp * d ** radio.alpha_near
    far = radio.mp_amp * d ** radio.alpha_far
    return _scalar_or_array(np.where(d <= radio.threshold_distance, near, far))


def tx_energy(bits, d, radio: RadioEnergyModel):
    """Energy to transmit ``bits`` over ``d`` metres. Accepts arrays."""
    _check_nonneg(bits=bits, d=d)
    bits = np.asarray(bits, dtype=np.float64)
    return _scalar_or_array((np.asarray(amplifier_energy(d, radio)) + radio.electronics_energy) * bits)


def rx_energy(bits, radio: RadioEnergyModel):
    _check_nonneg(bits=bits)
    return _scalar_or_array(np.asarray(bits, dtype=np.float64) * radio.electronics_energy)


def cumulative_energy(bits, d, radio: RadioEnergyModel):
    """Send-plus-receive energy, ``(amp * d**alpha + 2 E_D) * bits``."""
    _check_nonneg(bits=bits, d=d)
    bits = np.asarray(bits, dtype=np.float64)
    amp = np.asarray(amplifier_energy(d, radio))
    return _scalar_or_array((amp + 2 * radio.electronics_energy) * bits)


def pairwise_distances(positions: np.ndarray) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


@dataclass
class CommunicationGraph:
    """Undirected radius graph in CSR form over all node ids.

    Dead nodes are present as isolated vertices. Neighbour lists are sorted.
    """

    indptr: np.ndarray
    indices: np.ndarray
    distances: np.ndarray
    costs: np.ndarray
    alive: np.ndarray
    radius: float
    diagonal: float

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def neighbor_distances(self, i: int) -> np.ndarray:
        return self.distances[self.indptr[i]:self.indptr[i + 1]]

    def incident_costs(self, i: int) -> np.ndarray:
        return self.costs[self.indptr[i]:self.indptr[i + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges(self) -> set[tuple[int, int]]:
        out = set()
        for i in range(self.n):
            for j in self.neighbors(i):
                out.add((i, int(j)))
        return out

    def adjacency(self) -> dict[int, list[int]]:
        return {i: [int(j) for j in self.neighbors(i)] for i in range(self.n)}


def build_graph(network: Network, forwarding_radius: float | None = None) -> CommunicationGraph:
    """Edge (i, j) iff both alive and ``distance <= radius``. Each edge gets a
    retransmission cost ``1 + (d / radius)**2 + noise_ij``."""
    radius = network.config.radius if forwarding_radius is None else float(forwarding_radius)
    alive = network.alive_mask()
    dist = pairwise_distances(network.positions)
    if radius > 0:
        adj = (dist <= radius) & alive[:, None] & alive[None, :]
        np.fill_diagonal(adj, False)
    else:
        adj = np.zeros_like(dist, dtype=bool)
    rows, cols = np.nonzero(adj)
    indptr = np.zeros(network.size + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=network.size), out=indptr[1:])
    d = dist[rows, cols]
    costs = 1.0 + (d / radius) ** 2 + network.link_noise[rows, cols] if len(d) else np.zeros(0)
    return CommunicationGraph(
        indptr=indptr,
        indices=cols.astype(np.int64),
        distances=d,
        costs=costs,
        alive=alive,
        radius=radius,
        diagonal=network.config.diagonal,
    )
