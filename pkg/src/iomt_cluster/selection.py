"""Cluster-head selectors behind one call signature:
``selector(table, k, seed) -> Selection``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .baselines import PsoConfig, brute_force_select, pso_optimize, random_select
from .cso import Solution, SetObjective, SwarmConfig, optimize, with_seed
from .errors import ConfigError
from .objectives import ObjectiveTable

SELECTORS = ("cso", "pso", "random", "oracle")
RANK_ORDERS = ("id", "fitness")


@dataclass
class Selection:
    ch_ids: tuple
    fitness: float
    solution: Solution | None = field(default=None, repr=False)


def _empty() -> Selection:
    return Selection((), 0.0)


def pool_order(table: ObjectiveTable, rank_order: str = "id") -> np.ndarray:
    """Pool positions listed in rank order.

    ``"id"`` keeps ascending node ids, so neighbouring ranks are unrelated
    nodes. ``"fitness"`` lists the best node first, which turns the set
    objective into a monotone staircase whose optimum is the origin corner.
    """
    if rank_order == "id":
        return np.arange(len(table))
    if rank_order == "fitness":
        return np.argsort(-table.fitness, kind="stable")
    raise ConfigError(f"rank_order must be one of {RANK_ORDERS}, got {rank_order!r}")


class SwarmSelector:
    """Runs a continuous optimizer over ``[0, n-1]^k`` and decodes the best
    position into ``k`` cluster heads."""

    def __init__(self, name: str, config, rank_order: str = "id"):
        if rank_order not in RANK_ORDERS:
            raise ConfigError(f"rank_order must be one of {RANK_ORDERS}, got {rank_order!r}")
        self.name = name
        self.config = config
        self.rank_order = rank_order

    def _optimize(self, objective, config, dim):
        if self.name == "cso":
            return optimize(objective, config, dim)
        return pso_optimize(objective, config, dim)

    def __call__(self, table: ObjectiveTable, k: int, seed: int) -> Selection:
        n = len(table)
        k = min(int(k), n)
        if k <= 0:
            return _empty()
        cfg = with_seed(self.config, seed, bounds=[(0.0, float(n - 1))] * k)
        order = pool_order(table, self.rank_order)
        solution = self._optimize(SetObjective(table.fitness[order]), cfg, k)
        ranks = kernels.decode_batch(np.asarray(solution.position, dtype=np.float64).reshape(1, -1), n)[0]
        ids = tuple(sorted(int(table.ids[order[r]]) for r in ranks))
        solution.decoded = ids
        return Selection(ids, table.set_fitness(ids), solution)


class RandomSelector:
    name = "random"

    def __call__(self, table: ObjectiveTable, k: int, seed: int) -> Selection:
        ids = random_select(table.ids, k, np.random.default_rng(seed))
        return Selection(ids, table.set_fitness(ids))


class OracleSelector:
    name = "oracle"

    def __call__(self, table: ObjectiveTable, k: int, seed: int) -> Selection:
        ids, fit = brute_force_select(table, k)
        return Selection(ids, fit)


def make_selector(name: str, swarm: SwarmConfig | None = None, pso: PsoConfig | None = None,
                  rank_order: str = "id"):
    if name == "cso":
        return SwarmSelector("cso", swarm or SwarmConfig(), rank_order)
    if name == "pso":
        return SwarmSelector("pso", pso or PsoConfig(), rank_order)
    if name == "random":
        return RandomSelector()
    if name == "oracle":
        return OracleSelector()
    raise ConfigError(f"unknown selector {name!r}; choose from {SELECTORS}")
