"""Chicken swarm optimization (maximization) and the swarm-to-cluster-head
encoding.

Moves within one iteration are synchronous: every chicken moves from the
positions held at the start of the iteration, then each move is kept only if
it strictly improves that chicken's fitness.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import kernels
from .errors import ConfigError

# exp() arguments are capped here; any larger factor already throws the move
# past the bounds, where it is clamped.
EXP_CAP = 50.0


class ChickenRole(IntEnum):
    ROOSTER = 0
    HEN = 1
    CHICK = 2


@dataclass
class SwarmConfig:
    population: int = 100
    rooster_count: int = 3
    hen_count: int = 5
    mother_count: int | None = None  # None -> every hen is a mother
    reorder_period: int = 10
    max_iterations: int = 150
    epsilon: float = 1e-9
    fl_range: tuple[float, float] = (0.0, 2.0)
    bounds: list | None = None
    rng_seed: int = 0
    # Proportional role sizes of the original algorithm; override the counts when set.
    rooster_fraction: float | None = None
    hen_fraction: float | None = None
    mother_fraction: float | None = None

    def __post_init__(self):
        self.fl_range = tuple(float(v) for v in self.fl_range)

    def counts(self) -> tuple[int, int, int, int]:
        """Return ``(roosters, hens, mothers, chicks)``."""
        roosters, hens = self.rooster_count, self.hen_count
        if self.rooster_fraction is not None:
            roosters = max(1, int(round(self.population * self.rooster_fraction)))
        if self.hen_fraction is not None:
            hens = int(round(self.population * self.hen_fraction))
        mothers = hens if self.mother_count is None else self.mother_count
        if self.mother_fraction is not None:
            mothers = int(round(hens * self.mother_fraction))
        return roosters, hens, mothers, self.population - roosters - hens

    @property
    def chick_count(self) -> int:
        return self.counts()[3]

    def validate(self) -> None:
        roosters, hens, mothers, chicks = self.counts()
        if roosters < 1 or hens < 0:
            raise ConfigError("need at least one rooster and a non-negative hen count")
        if self.population < roosters + hens:
            raise ConfigError(f"population {self.population} < roosters + hens ({roosters + hens})")
        if not 0 <= mothers <= hens:
            raise ConfigError("mother_count must lie in [0, hen_count]")
        if chicks > 0 and mothers == 0:
            raise ConfigError("chicks need at least one mother hen")
        if self.reorder_period < 1 or self.max_iterations < 0:
            raise ConfigError("reorder_period must be >= 1 and max_iterations >= 0")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be > 0")
        if self.fl_range[0] > self.fl_range[1]:
            raise ConfigError("fl_range must be [lo, hi] with lo <= hi")

    def resolve_bounds(self, dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        return resolve_bounds(self.bounds, dim)


def resolve_bounds(bounds, dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``bounds`` is one ``(lo, hi)`` pair (broadcast to ``dim``) or one pair per dimension."""
    if bounds is None:
        raise ConfigError("search bounds are required")
    b = np.asarray(bounds, dtype=np.float64)
    if b.ndim == 1:
        if dim is None:
            raise ConfigError("dimension needed to broadcast a single bounds pair")
        b = np.tile(b, (dim, 1))
    if b.ndim != 2 or b.shape[1] != 2 or (dim is not None and len(b) != dim):
        raise ConfigError(f"bounds shape {b.shape} does not match dimension {dim}")
    if np.any(b[:, 0] > b[:, 1]):
        raise ConfigError("bounds need lo <= hi in every dimension")
    return b[:, 0].copy(), b[:, 1].copy()


class SwarmRandom:
    """Independent, seeded random streams, one per purpose."""

    PURPOSES = ("init", "rooster_peer", "gauss", "mate", "hen_peer", "rand", "mother", "fl")

    def __init__(self, seed: int):
        children = np.random.SeedSequence(seed).spawn(len(self.PURPOSES))
        self.streams = {name: np.random.default_rng(ss) for name, ss in zip(self.PURPOSES, children)}

    def __getitem__(self, name) -> np.random.Generator:
        return self.streams[name]

    def normal(self, shape):
        return self.streams["gauss"].standard_normal(shape)

    def uniform(self, shape):
        return self.streams["rand"].random(shape)

    def fl(self, size, lo, hi):
        return self.streams["fl"].uniform(lo, hi, size)


class FrozenRandom(SwarmRandom):
    """All perturbation draws are zero; index choices stay random."""

    def normal(self, shape):
        return np.zeros(shape)

    def uniform(self, shape):
        return np.zeros(shape)

    def fl(self, size, lo, hi):
        return np.zeros(size)


@dataclass
class Chicken:
    position: np.ndarray
    fitness: float
    role: ChickenRole
    mate_index: int | None = None
    mother_index: int | None = None


@dataclass
class Swarm:
    positions: np.ndarray
    fitness: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    roles: np.ndarray = None
    mates: np.ndarray = None
    mothers: np.ndarray = None
    mother_hens: np.ndarray = None
    order: np.ndarray = None
    reorders: int = 0
    _by_role: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.fitness)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def members(self, role: ChickenRole) -> np.ndarray:
        """Indices holding ``role``, best fitness first (fixed between reorders)."""
        cached = self._by_role.get(int(role))
        if cached is None:
            cached = self.order[self.roles[self.order] == role]
            self._by_role[int(role)] = cached
        return cached

    def chicken(self, i: int) -> Chicken:
        role = ChickenRole(int(self.roles[i]))
        return Chicken(
            position=self.positions[i].copy(),
            fitness=float(self.fitness[i]),
            role=role,
            mate_index=int(self.mates[i]) if role == ChickenRole.HEN else None,
            mother_index=int(self.mothers[i]) if role == ChickenRole.CHICK else None,
        )

    @property
    def chickens(self) -> list[Chicken]:
        return [self.chicken(i) for i in range(self.size)]


@dataclass
class Solution:
    position: np.ndarray
    fitness: float
    decoded: tuple = ()
    iterations_used: int = 0
    fitness_trace: list = field(default_factory=list)
    reorders: int = 0


def batch_evaluator(objective):
    """Objectives may expose ``batch(X) -> values``; otherwise rows are
    evaluated one by one."""
    batch = getattr(objective, "batch", None)
    if batch is not None:
        return lambda X: np.asarray(batch(X), dtype=np.float64)
    return lambda X: np.array([float(objective(x)) for x in X], dtype=np.float64)


def init_swarm(config: SwarmConfig, objective_dim: int, objective=None, rnd: SwarmRandom | None = None) -> Swarm:
    config.validate()
    rnd = SwarmRandom(config.rng_seed) if rnd is None else rnd
    lo, hi = config.resolve_bounds(objective_dim)
    positions = lo + (hi - lo) * rnd["init"].random((config.population, objective_dim))
    if objective is None:
        fitness = np.zeros(config.population)
    else:
        fitness = batch_evaluator(objective)(positions)
    swarm = Swarm(positions=positions, fitness=fitness, lo=lo, hi=hi)
    rank_and_partition(swarm, config, rnd)
    return swarm


def rank_and_partition(swarm: Swarm, config: SwarmConfig, rnd: SwarmRandom) -> Swarm:
    """Sort by fitness (best first, ties by index) and reassign roles,
    mother hens, chick mothers and hen mates."""
    roosters, hens, n_mothers, chicks = config.counts()
    pop = swarm.size
    order = np.argsort(-swarm.fitness, kind="stable")
    roles = np.full(pop, ChickenRole.CHICK, dtype=np.int8)
    roles[order[:roosters]] = ChickenRole.ROOSTER
    hen_idx = order[roosters:roosters + hens]
    roles[hen_idx] = ChickenRole.HEN
    chick_idx = order[roosters + hens:]

    mother_hens = rnd["mother"].choice(hen_idx, size=n_mothers, replace=False) if n_mothers else np.zeros(0, int)
    mothers = np.full(pop, -1, dtype=np.int64)
    if len(chick_idx):
        mothers[chick_idx] = mother_hens[rnd["mother"].integers(0, n_mothers, size=len(chick_idx))]

    mates = np.full(pop, -1, dtype=np.int64)
    if len(hen_idx) and pop > 1:
        picks = rnd["mate"].integers(0, pop - 1, size=len(hen_idx))
        mates[hen_idx] = picks + (picks >= hen_idx)

    swarm.order = order
    swarm.roles = roles
    swarm.mother_hens = np.asarray(mother_hens, dtype=np.int64)
    swarm.mothers = mothers
    swarm.mates = mates
    swarm._by_role = {}
    swarm.reorders += 1
    return swarm


def rooster_spread(f_i: float, f_k: float, epsilon: float) -> float:
    """Perturbation scale of a rooster against a randomly picked rival."""
    if f_i <= f_k:
        return 1.0
    return math.exp(min((f_k - f_i) / (abs(f_i) + epsilon), EXP_CAP))


def hen_factors(f_i: float, f_r1: float, f_r2: float, epsilon: float) -> tuple[float, float]:
    s1 = math.exp(min((f_i - f_r1) / (abs(f_i) + epsilon), EXP_CAP))
    s2 = math.exp(min(f_r2 - f_i, EXP_CAP))
    return s1, s2


def _clip(x, lo, hi):
    return np.minimum(np.maximum(x, lo), hi)


def _candidate_table(pool: np.ndarray, exclude: list) -> tuple[np.ndarray, np.ndarray]:
    """Per row: ``pool`` minus that row's excluded indices, left-packed into
    a padded matrix, plus the count of valid entries."""
    rows = len(exclude[0]) if exclude else 0
    keep = np.ones((rows, len(pool)), dtype=bool)
    for ex in exclude:
        keep &= pool[None, :] != np.asarray(ex)[:, None]
    counts = keep.sum(axis=1)
    table = np.full((rows, max(len(pool), 1)), -1, dtype=np.int64)
    for r in range(rows):
        table[r, :counts[r]] = pool[keep[r]]
    return table, counts


def _pick(table: np.ndarray, counts: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Uniform pick per row from a candidate table; -1 where a row is empty."""
    col = np.minimum((u * counts).astype(np.int64), np.maximum(counts - 1, 0))
    return np.where(counts > 0, table[np.arange(len(counts)), col], -1)


def _pick_excluding(pool: np.ndarray, exclude: list, u: np.ndarray) -> np.ndarray:
    return _pick(*_candidate_table(pool, exclude), u)


def _cached_candidates(swarm: "Swarm", key: str, idx: np.ndarray, build):
    """Candidate tables depend only on the partition, so they are built once
    per reorder (and per distinct ``idx``)."""
    ck = (key, idx.tobytes())
    hit = swarm._by_role.get(ck)
    if hit is None:
        hit = build()
        swarm._by_role[ck] = hit
    return hit


def move_roosters(swarm: Swarm, idx, rnd: SwarmRandom, config: SwarmConfig) -> np.ndarray:
    """Gaussian self-perturbation ``c * (1 + spread * z)`` for each rooster in ``idx``."""
    idx = np.asarray(idx, dtype=np.int64)
    f = swarm.fitness
    table = _cached_candidates(swarm, "rooster", idx,
                               lambda: _candidate_table(swarm.members(ChickenRole.ROOSTER), [idx]))
    rivals = _pick(*table, rnd["rooster_peer"].random(len(idx)))
    has = rivals >= 0
    f_i, f_k = f[idx], f[np.where(has, rivals, idx)]
    exponent = np.minimum((f_k - f_i) / (np.abs(f_i) + config.epsilon), EXP_CAP)
    spread = np.where(has & (f_i > f_k), np.exp(np.minimum(exponent, 0.0)), 1.0)
    z = rnd.normal((len(idx), swarm.dim))
    c = swarm.positions[idx]
    return _clip(c * (1.0 + spread[:, None] * z), swarm.lo, swarm.hi)


def move_hens(swarm: Swarm, idx, rnd: SwarmRandom, config: SwarmConfig) -> np.ndarray:
    """Follow the mate ``r1`` and a random rooster-or-hen ``r2``."""
    idx = np.asarray(idx, dtype=np.int64)
    f = swarm.fitness
    r1 = swarm.mates[idx]

    def build():
        pool = np.concatenate([swarm.members(ChickenRole.ROOSTER), swarm.members(ChickenRole.HEN)])
        return _candidate_table(pool, [idx, r1])

    r2 = _pick(*_cached_candidates(swarm, "hen", idx, build), rnd["hen_peer"].random(len(idx)))
    r2 = np.where(r2 >= 0, r2, idx)
    f_i = f[idx]
    s1 = np.exp(np.minimum((f_i - f[r1]) / (np.abs(f_i) + config.epsilon), EXP_CAP))
    s2 = np.exp(np.minimum(f[r2] - f_i, EXP_CAP))
    c = swarm.positions[idx]
    rand1 = rnd.uniform((len(idx), swarm.dim))
    rand2 = rnd.uniform((len(idx), swarm.dim))
    new = (c + s1[:, None] * rand1 * (swarm.positions[r1] - c)
           + s2[:, None] * rand2 * (swarm.positions[r2] - c))
    return _clip(new, swarm.lo, swarm.hi)


def move_chicks(swarm: Swarm, idx, rnd: SwarmRandom, config: SwarmConfig) -> np.ndarray:
    """``c + FL * (c_mother - c)`` with one FL draw per chick."""
    idx = np.asarray(idx, dtype=np.int64)
    c = swarm.positions[idx]
    fl = rnd.fl(len(idx), *config.fl_range)
    new = c + fl[:, None] * (swarm.positions[swarm.mothers[idx]] - c)
    return _clip(new, swarm.lo, swarm.hi)


def move_rooster(swarm, i, rnd, config):
    return move_roosters(swarm, [i], rnd, config)[0]


def move_hen(swarm, i, rnd, config):
    return move_hens(swarm, [i], rnd, config)[0]


def move_chick(swarm, i, rnd, config):
    return move_chicks(swarm, [i], rnd, config)[0]


def step(swarm: Swarm, evaluate, rnd: SwarmRandom, config: SwarmConfig) -> int:
    """One synchronous iteration with greedy acceptance; returns the number
    of accepted moves."""
    new = swarm.positions.copy()
    for role, mover in ((ChickenRole.ROOSTER, move_roosters), (ChickenRole.HEN, move_hens),
                        (ChickenRole.CHICK, move_chicks)):
        idx = swarm.members(role)
        if len(idx):
            new[idx] = mover(swarm, idx, rnd, config)
    new_fit = evaluate(new)
    better = new_fit > swarm.fitness
    swarm.positions[better] = new[better]
    swarm.fitness[better] = new_fit[better]
    return int(np.count_nonzero(better))


def _fused_epoch(swarm, objective, rnd, config, span, best_pos, best_fit, trace) -> float:
    """``span`` iterations of :func:`step` in one kernel call.

    Each purpose has its own stream, so drawing a whole epoch up front
    yields exactly the numbers the per-iteration path would consume."""
    dim = swarm.dim
    r_idx = swarm.members(ChickenRole.ROOSTER)
    h_idx = swarm.members(ChickenRole.HEN)
    c_idx = swarm.members(ChickenRole.CHICK)
    r_tab, r_cnt = _cached_candidates(swarm, "rooster", r_idx, lambda: _candidate_table(r_idx, [r_idx]))
    h_mate = swarm.mates[h_idx]
    h_tab, h_cnt = _cached_candidates(
        swarm, "hen", h_idx, lambda: _candidate_table(np.concatenate([r_idx, h_idx]), [h_idx, h_mate]))
    u_r = rnd["rooster_peer"].random((span, len(r_idx)))
    z = rnd.normal((span, len(r_idx), dim))
    u_h = rnd["hen_peer"].random((span, len(h_idx)))
    rand = rnd.uniform((span, 2, len(h_idx), dim))
    fl = rnd.fl((span, len(c_idx)), *config.fl_range)
    out = np.empty(span)
    c64 = lambda a: np.ascontiguousarray(a, dtype=np.int64)
    f64 = lambda a: np.ascontiguousarray(a, dtype=np.float64)
    best_fit = kernels.cso_epoch(
        swarm.positions, swarm.fitness, swarm.lo, swarm.hi,
        c64(r_idx), c64(r_tab), c64(r_cnt), c64(h_idx), c64(h_mate), c64(h_tab), c64(h_cnt),
        c64(c_idx), c64(swarm.mothers[c_idx]),
        f64(u_r), f64(z), f64(u_h), f64(rand), f64(fl), objective.scores,
        float(config.epsilon), EXP_CAP, best_pos, float(best_fit), out,
    )
    trace.extend(out.tolist())
    return float(best_fit)


def optimize(objective, config: SwarmConfig, dim: int | None = None, rnd: SwarmRandom | None = None) -> Solution:
    """Maximize ``objective`` over ``config.bounds``.

    ``rnd`` replaces the seeded streams (e.g. :class:`FrozenRandom`).
    """
    config.validate()
    if dim is None:
        dim = len(config.resolve_bounds()[0])
    rnd = SwarmRandom(config.rng_seed) if rnd is None else rnd
    evaluate = batch_evaluator(objective)
    swarm = init_swarm(config, dim, objective, rnd)
    best = int(np.argmax(swarm.fitness))
    best_pos, best_fit = swarm.positions[best].copy(), float(swarm.fitness[best])
    trace = []
    fused = isinstance(objective, SetObjective)
    t = 0
    while t < config.max_iterations:
        if t > 0:
            rank_and_partition(swarm, config, rnd)
        span = min(config.reorder_period, config.max_iterations - t)
        if fused:
            best_fit = _fused_epoch(swarm, objective, rnd, config, span, best_pos, best_fit, trace)
        else:
            for _ in range(span):
                step(swarm, evaluate, rnd, config)
                cand = int(np.argmax(swarm.fitness))
                if swarm.fitness[cand] > best_fit:
                    best_pos, best_fit = swarm.positions[cand].copy(), float(swarm.fitness[cand])
                trace.append(best_fit)
        t += span
    return Solution(
        position=best_pos,
        fitness=best_fit,
        iterations_used=config.max_iterations,
        fitness_trace=trace,
        reorders=swarm.reorders,
    )


def decode(position, alive_nodes) -> tuple[int, ...]:
    """Map a continuous position to distinct node ids.

    Coordinates are clamped to ``[0, n-1]`` and rounded to the nearest rank
    of the (ascending) alive ids; a rank already taken advances cyclically to
    the next free one. Fewer alive nodes than coordinates shrinks the set.
    """
    alive = np.sort(np.asarray(alive_nodes, dtype=np.int64))
    if len(alive) == 0:
        return ()
    pos = np.asarray(position, dtype=np.float64).reshape(1, -1)
    ranks = kernels.decode_batch(pos, len(alive))[0]
    return tuple(int(v) for v in alive[ranks])


class SetObjective:
    """Total fitness of the decoded node set; ``scores`` is indexed by rank."""

    def __init__(self, scores):
        self.scores = np.ascontiguousarray(scores, dtype=np.float64)
        self.n = len(self.scores)

    def batch(self, X):
        return kernels.set_scores(kernels.decode_batch(X, self.n), self.scores)

    def __call__(self, x):
        return float(self.batch(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def with_seed(config, seed: int, bounds=None):
    changes = {"rng_seed": int(seed)}
    if bounds is not None:
        changes["bounds"] = bounds
    return dataclasses.replace(config, **changes)
