"""Comparison selectors sharing the CSO encoding: gbest PSO, uniform random
choice and an exhaustive oracle."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .cso import Solution, batch_evaluator, resolve_bounds
from .errors import ConfigError, OracleLimitError
from .objectives import ObjectiveTable

ORACLE_LIMIT = 10**6


@dataclass
class PsoConfig:
    population: int = 30
    max_iterations: int = 150
    inertia: float = 0.7
    c1: float = 1.5
    c2: float = 1.5
    velocity_clamp: float = 0.2  # fraction of each dimension's range
    bounds: list | None = None
    rng_seed: int = 0

    def validate(self) -> None:
        if self.population < 2:
            raise ConfigError("PSO population must be >= 2")
        if not 0 < self.inertia < 1.5:
            raise ConfigError("PSO inertia must lie in (0, 1.5)")
        if self.c1 < 0 or self.c2 < 0 or self.velocity_clamp < 0 or self.max_iterations < 0:
            raise ConfigError("PSO coefficients must be non-negative")


def pso_step(x, v, pbest, gbest, inertia, c1, c2, r1, r2, vmax, lo, hi):
    """Velocity and position update; returns ``(x, v)``."""
    v = inertia * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
    v = np.minimum(np.maximum(v, -vmax), vmax)
    return np.minimum(np.maximum(x + v, lo), hi), v


def pso_optimize(objective, config: PsoConfig, dim: int | None = None) -> Solution:
    config.validate()
    lo, hi = resolve_bounds(config.bounds, dim)
    dim = len(lo)
    init_ss, r1_ss, r2_ss = np.random.SeedSequence(config.rng_seed).spawn(3)
    init, s1, s2 = (np.random.default_rng(s) for s in (init_ss, r1_ss, r2_ss))
    evaluate = batch_evaluator(objective)

    vmax = config.velocity_clamp * (hi - lo)
    x = lo + (hi - lo) * init.random((config.population, dim))
    v = init.uniform(-1.0, 1.0, (config.population, dim)) * vmax
    fit = evaluate(x)
    pbest, pfit = x.copy(), fit.copy()
    g = int(np.argmax(pfit))
    gbest, gfit = pbest[g].copy(), float(pfit[g])

    trace = []
    # one stream per coefficient, so drawing every iteration at once is
    # the same sequence as drawing per iteration
    shape = (config.max_iterations, config.population, dim)
    r1_all, r2_all = s1.random(shape), s2.random(shape)
    for r1, r2 in zip(r1_all, r2_all):
        x, v = pso_step(x, v, pbest, gbest, config.inertia, config.c1, config.c2, r1, r2, vmax, lo, hi)
        fit = evaluate(x)
        better = fit > pfit
        pbest[better] = x[better]
        pfit[better] = fit[better]
        g = int(np.argmax(pfit))
        if pfit[g] > gfit:
            gbest, gfit = pbest[g].copy(), float(pfit[g])
        trace.append(gfit)
    return Solution(position=gbest, fitness=gfit, iterations_used=config.max_iterations, fitness_trace=trace)


def random_select(alive_nodes, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    """``k`` distinct ids drawn uniformly without replacement (``k`` shrinks
    to the alive count)."""
    alive = np.sort(np.asarray(alive_nodes, dtype=np.int64))
    k = min(max(int(k), 0), len(alive))
    if k == 0:
        return ()
    return tuple(sorted(int(i) for i in rng.choice(alive, size=k, replace=False)))


def brute_force_select(table: ObjectiveTable, k: int, limit: int = ORACLE_LIMIT) -> tuple[tuple[int, ...], float]:
    """Exhaustive argmax of total set fitness over all ``k``-subsets of the
    pool. Ties go to the lexicographically smallest id set."""
    ids = [int(i) for i in table.ids]
    k = min(int(k), len(ids))
    count = math.comb(len(ids), k)
    if count > limit:
        raise OracleLimitError(f"C({len(ids)}, {k}) = {count} subsets exceeds the limit of {limit}")
    values = [float(v) for v in table.fitness]
    best_set, best_fit = (), -math.inf
    for combo in itertools.combinations(range(len(ids)), k):
        total = 0.0
        for j in combo:
            total += values[j]
        if total > best_fit:
            best_fit, best_set = total, combo
    if k == 0:
        best_fit = 0.0
    return tuple(ids[j] for j in best_set), best_fit
