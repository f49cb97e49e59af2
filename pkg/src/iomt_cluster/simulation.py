"""Round-based network lifetime simulation.

Each round: elect cluster heads over the alive nodes, attach every other
alive node to its nearest head, let awake members send their packets in
TDMA order, and have each head aggregate and forward to the base station.
"""

from __future__ import annotations

import dataclasses
import math
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig
from .errors import ConfigError, SimulationError
from .network import Network, NodeState, RadioEnergyModel, Role, build_graph, deploy, tx_energy
from .objectives import evaluate_pool
from .selection import make_selector

# 9 mW expressed in dBm.
REFERENCE_DBM = 10.0 * math.log10(9.0)
TX_POWER_RANGE_DBM = (-40.0, 20.0)

_SELECT_STREAM = 1
_SLEEP_STREAM = 2


@dataclass
class RoundMetrics:
    round_index: int
    energy_consumed: float
    alive_count: int
    bits_delivered_to_bs: int
    mean_propagation_delay: float  # ms
    cluster_formation_time: float  # ms, wall clock
    ch_ids: tuple
    ch_fitness: float = 0.0
    shadow_fitness: dict = field(default_factory=dict)
    round_duration: float = 0.0  # s, TDMA frame time
    delay_samples: int = 0
    delay_sum: float = 0.0  # ms


@dataclass
class RunSummary:
    rounds_executed: int
    first_node_death_round: int
    half_nodes_death_round: int
    last_node_death_round: int
    total_energy: float
    total_bits: int
    mean_throughput: float  # Mb/s
    mean_delay: float  # ms
    mean_formation_time: float  # ms
    trace: list = field(default_factory=list, repr=False)

    @property
    def lifetime(self) -> int:
        return self.first_node_death_round

    @property
    def mean_energy_per_round(self) -> float:
        return self.total_energy / self.rounds_executed if self.rounds_executed else 0.0

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("trace")
        d["mean_energy_per_round"] = self.mean_energy_per_round
        return d


@dataclass
class SimState:
    network: Network
    round_index: int = 0
    ch_ids: tuple = ()


def derived_seed(master: int, *keys: int) -> int:
    """Stable 64-bit seed for a (master, purpose, ...) key."""
    words = np.random.SeedSequence([int(master), *[int(k) for k in keys]]).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def selector_key(name: str) -> int:
    return zlib.crc32(name.encode())


def scale_radio_for_tx_power(radio: RadioEnergyModel, tx_power_dbm: float,
                             reference_dbm: float = REFERENCE_DBM) -> RadioEnergyModel:
    """Scale both amplifier coefficients by ``10**((dbm - reference)/10)``."""
    lo, hi = TX_POWER_RANGE_DBM
    if not lo <= tx_power_dbm <= hi:
        raise ConfigError(f"tx_power_dbm {tx_power_dbm} outside [{lo}, {hi}]")
    return radio.scaled(10.0 ** ((tx_power_dbm - reference_dbm) / 10.0))


def propagation_delay_ms(d_member_ch: float, d_ch_bs: float, signal_speed: float) -> float:
    return (d_member_ch + d_ch_bs) / signal_speed * 1000.0


def form_clusters(ch_ids, alive_nodes, positions) -> dict[int, int]:
    """Attach each alive non-head node to its nearest head (ties: lower head id)."""
    heads = np.array(sorted(int(c) for c in ch_ids), dtype=np.int64)
    if len(heads) == 0:
        raise SimulationError("cannot form clusters without cluster heads")
    head_set = set(heads.tolist())
    members = np.array([int(i) for i in alive_nodes if int(i) not in head_set], dtype=np.int64)
    if len(members) == 0:
        return {}
    positions = np.asarray(positions, dtype=np.float64)
    diff = positions[members][:, None, :] - positions[heads][None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    nearest = heads[np.argmin(d, axis=1)]
    return dict(zip(members.tolist(), nearest.tolist()))


def apply_sleep_policy(network: Network, probability: float, rng: np.random.Generator,
                       members=None) -> Network:
    """Copy of ``network`` where each alive member sleeps with ``probability``.
    Cluster heads (``members`` excludes them) never sleep."""
    out = network.copy()
    if members is None:
        members = [i for i in network.alive_ids() if network.role[i] != Role.CLUSTER_HEAD]
    members = np.asarray(sorted(int(m) for m in members), dtype=np.int64)
    if probability <= 0 or len(members) == 0:
        return out
    asleep = members[rng.random(len(members)) < probability]
    out.state[asleep] = NodeState.SLEEP
    return out


def prepare_network(config: SimulationConfig) -> Network:
    config.validate()
    net_cfg = config.network
    if config.tx_power_dbm is not None:
        net_cfg = dataclasses.replace(net_cfg, radio=scale_radio_for_tx_power(net_cfg.radio, config.tx_power_dbm))
    return deploy(net_cfg)


def initial_state(config: SimulationConfig) -> SimState:
    return SimState(network=prepare_network(config))


def _resolve(selector, config: SimulationConfig):
    if selector is None:
        selector = config.selector
    if isinstance(selector, str):
        return make_selector(selector, config.swarm, config.pso, config.rank_order)
    return selector


def run_round(state: SimState, selector, config: SimulationConfig, shadows=()) -> tuple[SimState, RoundMetrics]:
    """Execute one round on a copy of ``state``.

    ``shadows`` are extra selectors evaluated on the same snapshot; only
    their elected-set fitness is recorded.
    """
    selector = _resolve(selector, config)
    net = state.network.copy()
    cfg = net.config
    radio = cfg.radio
    t = state.round_index + 1
    seed = cfg.rng_seed

    alive = net.alive_ids()
    if len(alive) == 0:
        raise SimulationError("no alive nodes at the start of the round")
    net.state[alive] = NodeState.ACTIVE
    net.role[:] = Role.UNASSIGNED
    k = min(cfg.cluster_count, len(alive))

    started = time.perf_counter()
    graph = build_graph(net)
    table = evaluate_pool(net, graph, config.fitness.weights, config.fitness.mode, k)
    previous = tuple(state.ch_ids)
    reuse = (config.election_period > 1 and (t - 1) % config.election_period != 0
             and len(previous) == k and all(net.energy[c] > 0 for c in previous))
    name = getattr(selector, "name", "custom")
    if reuse:
        ch_ids, ch_fit = previous, table.set_fitness(previous)
    else:
        sel = selector(table, k, derived_seed(seed, _SELECT_STREAM, selector_key(name), t))
        ch_ids, ch_fit = tuple(sorted(sel.ch_ids)), sel.fitness
    assignment = form_clusters(ch_ids, alive, net.positions)
    formation_ms = (time.perf_counter() - started) * 1000.0

    shadow_fitness = {}
    for shadow in shadows:
        sname = getattr(shadow, "name", "custom")
        shadow_fitness[sname] = shadow(table, k, derived_seed(seed, _SELECT_STREAM, selector_key(sname), t)).fitness

    net.role[list(ch_ids)] = Role.CLUSTER_HEAD
    members = sorted(assignment)
    net.role[members] = Role.MEMBER
    sleep_rng = np.random.default_rng(derived_seed(seed, _SLEEP_STREAM, t))
    net = apply_sleep_policy(net, config.sleep_probability, sleep_rng, members)

    energy = net.energy.tolist()
    consumed = 0.0

    def pay(i, cost):
        nonlocal consumed
        amount = cost if cost < energy[i] else energy[i]
        energy[i] -= amount
        consumed += amount

    bits = cfg.packet_size_bits
    rx_cost = float(bits * radio.electronics_energy)
    agg_per_bit = radio.aggregation_energy
    bs = np.array([net.bs.pos.x, net.bs.pos.y])
    clusters = {c: [] for c in ch_ids}
    for m in members:
        clusters[assignment[m]].append(m)
    speed = cfg.signal_speed
    m_idx = np.asarray(members, dtype=np.int64)
    h_idx = np.asarray([assignment[m] for m in members], dtype=np.int64)
    m_dist = np.hypot(*(net.positions[m_idx] - net.positions[h_idx]).T) if len(m_idx) else np.zeros(0)
    member_d = dict(zip(members, m_dist.tolist()))
    member_tx = dict(zip(members, np.asarray(tx_energy(bits, m_dist, radio), dtype=float).reshape(-1).tolist()))
    c_idx = np.asarray(ch_ids, dtype=np.int64)
    c_dist = np.hypot(*(net.positions[c_idx] - bs).T)
    head_d = dict(zip(ch_ids, c_dist.tolist()))
    # transmit cost is linear in bits: keep the per-bit price of each head's uplink
    head_per_bit = dict(zip(ch_ids, np.asarray(tx_energy(1, c_dist, radio), dtype=float).reshape(-1).tolist()))
    head_delay = {c: propagation_delay_ms(0.0, head_d[c], speed) for c in ch_ids}
    member_delay = {m: propagation_delay_ms(member_d[m], head_d[assignment[m]], speed) for m in members}
    asleep = (net.state == NodeState.SLEEP).tolist()

    delivered = 0
    delay_sum = 0.0
    delay_n = 0
    for _frame in range(config.packets_per_round):
        for c in ch_ids:
            received = 0
            senders = []
            for m in clusters[c]:
                if asleep[m] or energy[m] <= 0:
                    continue
                pay(m, member_tx[m])
                if energy[c] > 0:
                    pay(c, rx_cost)
                    received += bits
                    senders.append(m)
            net.queue_length[c] += len(senders)
            if received and energy[c] > 0:
                pay(c, agg_per_bit * received)
            if energy[c] > 0:
                out_bits = bits if config.aggregate_output == "single" else received + bits
                pay(c, out_bits * head_per_bit[c])
                delivered += out_bits
                delay_sum += head_delay[c]
                for m in senders:
                    delay_sum += member_delay[m]
                delay_n += 1 + len(senders)

    net.energy = np.asarray(energy, dtype=np.float64)
    dead = net.energy <= 0
    net.energy[dead] = 0.0
    net.state[dead] = NodeState.DEAD
    net.queue_length[:] = net.base_queue_length

    biggest = max((len(v) for v in clusters.values()), default=0)
    duration = (biggest + 1) * config.packets_per_round * bits / cfg.link_rate_bps
    metrics = RoundMetrics(
        round_index=t,
        energy_consumed=consumed,
        alive_count=int(np.count_nonzero(net.alive_mask())),
        bits_delivered_to_bs=int(delivered),
        mean_propagation_delay=delay_sum / delay_n if delay_n else 0.0,
        cluster_formation_time=formation_ms,
        ch_ids=ch_ids,
        ch_fitness=float(ch_fit),
        shadow_fitness=shadow_fitness,
        round_duration=duration,
        delay_samples=delay_n,
        delay_sum=delay_sum,
    )
    return SimState(network=net, round_index=t, ch_ids=ch_ids), metrics


def summarize(trace: list[RoundMetrics], node_count: int, max_rounds: int) -> RunSummary:
    fnd = hnd = lnd = None
    for m in trace:
        dead = node_count - m.alive_count
        if fnd is None and dead >= 1:
            fnd = m.round_index
        if hnd is None and 2 * dead >= node_count:
            hnd = m.round_index
        if lnd is None and m.alive_count == 0:
            lnd = m.round_index
    total_energy = 0.0
    for m in trace:
        total_energy += m.energy_consumed
    total_bits = sum(m.bits_delivered_to_bs for m in trace)
    duration = sum(m.round_duration for m in trace)
    samples = sum(m.delay_samples for m in trace)
    return RunSummary(
        rounds_executed=len(trace),
        first_node_death_round=fnd if fnd is not None else max_rounds,
        half_nodes_death_round=hnd if hnd is not None else max_rounds,
        last_node_death_round=lnd if lnd is not None else max_rounds,
        total_energy=total_energy,
        total_bits=total_bits,
        mean_throughput=total_bits / duration / 1e6 if duration > 0 else 0.0,
        mean_delay=sum(m.delay_sum for m in trace) / samples if samples else 0.0,
        mean_formation_time=float(np.mean([m.cluster_formation_time for m in trace])) if trace else 0.0,
        trace=trace,
    )


def run(config: SimulationConfig, selector=None, shadows=(), state: SimState | None = None) -> RunSummary:
    """Run until ``max_rounds`` or until every node is dead."""
    selector = _resolve(selector, config)
    shadows = [_resolve(s, config) for s in shadows]
    state = initial_state(config) if state is None else state
    trace = []
    for _ in range(config.network.max_rounds):
        if not state.network.alive_mask().any():
            break
        state, metrics = run_round(state, selector, config, shadows)
        trace.append(metrics)
    return summarize(trace, config.network.node_count, config.network.max_rounds)


def residual_deltas(before: Network, after: Network) -> float:
    total = 0.0
    for b, a in zip(before.energy.tolist(), after.energy.tolist()):
        total += b - a
    return total


__all__ = [
    "RoundMetrics",
    "RunSummary",
    "SimState",
    "form_clusters",
    "run_round",
    "run",
    "apply_sleep_policy",
    "scale_radio_for_tx_power",
    "propagation_delay_ms",
    "initial_state",
]
