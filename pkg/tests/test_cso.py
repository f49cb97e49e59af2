import math

import numpy as np
import pytest

from iomt_cluster.cso import (
    ChickenRole,
    FrozenRandom,
    SetObjective,
    SwarmConfig,
    SwarmRandom,
    _pick_excluding,
    decode,
    hen_factors,
    init_swarm,
    move_chick,
    move_hen,
    move_rooster,
    optimize,
    rank_and_partition,
    rooster_spread,
    step,
    batch_evaluator,
)
from iomt_cluster.errors import ConfigError


def sphere(x):
    return -float(np.dot(x, x))


sphere.batch = lambda X: -np.einsum("ij,ij->i", X, X)


def cfg(**kw):
    base = dict(population=20, rooster_count=3, hen_count=5, max_iterations=30, bounds=[(-5.0, 5.0)] * 3)
    base.update(kw)
    return SwarmConfig(**base)


def test_table_defaults():
    c = SwarmConfig()
    assert (c.population, c.rooster_count, c.hen_count, c.reorder_period, c.max_iterations) == (100, 3, 5, 10, 150)
    assert c.counts() == (3, 5, 5, 92)
    assert c.fl_range == (0.0, 2.0)


def test_proportional_counts():
    c = SwarmConfig(rooster_fraction=0.15, hen_fraction=0.7, mother_fraction=0.5)
    r, h, m, ch = c.counts()
    assert (r, h, m, ch) == (15, 70, 35, 15)


@pytest.mark.parametrize("kw", [
    dict(population=7),
    dict(mother_count=6),
    dict(reorder_period=0),
    dict(epsilon=0.0),
    dict(hen_count=5, mother_count=0),
])
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        init_swarm(cfg(**kw), 3)


def test_init_deterministic_and_in_bounds():
    a = init_swarm(cfg(), 3, sphere)
    b = init_swarm(cfg(), 3, sphere)
    assert np.array_equal(a.positions, b.positions)
    assert np.all(np.abs(a.positions) <= 5)
    assert np.array_equal(a.fitness, sphere.batch(a.positions))


def test_zero_width_bounds():
    s = init_swarm(cfg(bounds=[(0.0, 0.0)] * 4), 4, sphere)
    assert np.all(s.positions == 0)


def test_partition_sizes_and_order():
    c = SwarmConfig(bounds=[(-1, 1)] * 2)
    s = init_swarm(c, 2, sphere)
    roles = s.roles
    assert [(roles == r).sum() for r in ChickenRole] == [3, 5, 92]
    order = np.argsort(-s.fitness, kind="stable")
    assert set(np.flatnonzero(roles == ChickenRole.ROOSTER)) == set(order[:3])
    assert set(np.flatnonzero(roles == ChickenRole.CHICK)) == set(order[8:])
    chicks = s.members(ChickenRole.CHICK)
    assert set(s.mothers[chicks]) <= set(s.mother_hens)
    hens = s.members(ChickenRole.HEN)
    assert np.all(s.mates[hens] != hens) and np.all(s.mates[hens] >= 0)
    assert all(ch.mother_index is None for ch in s.chickens if ch.role != ChickenRole.CHICK)


def test_all_equal_fitness_uses_index_order():
    c = cfg()
    s = init_swarm(c, 3, lambda x: 1.0)
    assert np.flatnonzero(s.roles == ChickenRole.ROOSTER).tolist() == [0, 1, 2]
    assert np.flatnonzero(s.roles == ChickenRole.HEN).tolist() == [3, 4, 5, 6, 7]


def test_reorder_count():
    sol = optimize(sphere, SwarmConfig(bounds=[(-5, 5)] * 2, population=20, max_iterations=150), 2)
    assert sol.reorders == 15
    assert sol.iterations_used == 150 and len(sol.fitness_trace) == 150


def test_rooster_spread():
    assert rooster_spread(1.0, 2.0, 1e-9) == 1.0
    assert rooster_spread(1.0, 1.0, 1e-9) == 1.0
    assert rooster_spread(2.0, 1.0, 1e-9) == pytest.approx(math.exp(-0.5))
    assert rooster_spread(2.0, 1.0, 1e-9) == pytest.approx(0.6065, abs=1e-4)


def test_hen_factors():
    s1, s2 = hen_factors(1.5, 1.5, 2.5, 1e-9)
    assert s1 == 1.0
    assert s2 == pytest.approx(math.e)
    # exponent is capped, never overflows
    s1, s2 = hen_factors(1e-12, -1e6, 1e6, 1e-9)
    assert math.isfinite(s1) and math.isfinite(s2)


def test_frozen_moves_are_identity():
    c = cfg()
    s = init_swarm(c, 3, sphere)
    rnd = FrozenRandom(0)
    for i in range(s.size):
        role = s.roles[i]
        mover = {ChickenRole.ROOSTER: move_rooster, ChickenRole.HEN: move_hen, ChickenRole.CHICK: move_chick}[role]
        assert np.array_equal(mover(s, i, rnd, c), s.positions[i])


def test_frozen_swarm_is_fixed_point():
    c = cfg()
    sol_pos = init_swarm(c, 3, sphere).positions.copy()
    rnd = FrozenRandom(0)
    s = init_swarm(c, 3, sphere, rnd)
    ev = batch_evaluator(sphere)
    for _ in range(25):
        assert step(s, ev, rnd, c) == 0
    assert np.array_equal(s.positions, sol_pos)


class StubFL(SwarmRandom):
    def __init__(self, value):
        super().__init__(0)
        self.value = value

    def fl(self, size, lo, hi):
        return np.full(size, self.value)


@pytest.mark.parametrize("fl,expected", [(0.0, (0, 0)), (1.0, (1, 3)), (2.0, (2, 6))])
def test_chick_move_examples(fl, expected):
    c = SwarmConfig(population=3, rooster_count=1, hen_count=1, bounds=[(-10, 10)] * 2)
    s = init_swarm(c, 2, lambda x: 0.0)
    chick = int(s.members(ChickenRole.CHICK)[0])
    mother = int(s.mothers[chick])
    s.positions[chick] = (0.0, 0.0)
    s.positions[mother] = (1.0, 3.0)
    assert move_chick(s, chick, StubFL(fl), c).tolist() == list(expected)


def test_hen_move_formula():
    c = cfg()
    s = init_swarm(c, 3, sphere)
    i = int(s.members(ChickenRole.HEN)[0])
    r1 = int(s.mates[i])

    class Fixed(SwarmRandom):
        def uniform(self, shape):
            return np.full(shape, 0.5)

    rnd = Fixed(3)
    probe = Fixed(3)  # identical stream, used to recover r2
    pool = np.concatenate([s.members(ChickenRole.ROOSTER), s.members(ChickenRole.HEN)])
    cands = pool[(pool != i) & (pool != r1)]
    r2 = int(cands[int(probe["hen_peer"].random(1)[0] * len(cands))])
    s1, s2 = hen_factors(s.fitness[i], s.fitness[r1], s.fitness[r2], c.epsilon)
    x = s.positions
    expected = np.clip(x[i] + s1 * 0.5 * (x[r1] - x[i]) + s2 * 0.5 * (x[r2] - x[i]), -5, 5)
    assert np.allclose(move_hen(s, i, rnd, c), expected, rtol=0, atol=1e-12)


def test_peer_pick_is_uniform_and_excludes():
    pool = np.arange(8)
    rng = np.random.default_rng(1)
    u = rng.random(40000)
    me = np.full(40000, 3)
    mate = np.full(40000, 5)
    picks = _pick_excluding(pool, [me, mate], u)
    counts = np.bincount(picks, minlength=8)
    assert counts[3] == counts[5] == 0
    assert np.allclose(counts[[0, 1, 2, 4, 6, 7]] / 40000, 1 / 6, atol=0.01)
    assert _pick_excluding(np.array([2]), [np.array([2])], np.array([0.3])).tolist() == [-1]


def test_positions_stay_in_bounds():
    c = cfg(max_iterations=1)
    rnd = SwarmRandom(5)
    s = init_swarm(c, 3, sphere, rnd)
    ev = batch_evaluator(sphere)
    for t in range(60):
        if t % 10 == 0:
            rank_and_partition(s, c, rnd)
        step(s, ev, rnd, c)
        assert np.all(s.positions >= -5) and np.all(s.positions <= 5)


def test_constant_objective():
    sol = optimize(lambda x: 3.25, cfg(), 3)
    assert sol.fitness == 3.25


def test_trace_monotone_and_fitness_reevaluates():
    sol = optimize(sphere, cfg(max_iterations=60), 3)
    assert np.all(np.diff(sol.fitness_trace) >= 0)
    assert sol.fitness == sphere(sol.position)


def test_same_seed_same_solution():
    a = optimize(sphere, cfg(rng_seed=9), 3)
    b = optimize(sphere, cfg(rng_seed=9), 3)
    assert np.array_equal(a.position, b.position) and a.fitness_trace == b.fitness_trace
    c = optimize(sphere, cfg(rng_seed=10), 3)
    assert c.fitness_trace != a.fitness_trace


def test_sphere_calibration():
    hits = 0
    for seed in range(20):
        c = SwarmConfig(population=50, max_iterations=150, bounds=[(-5, 5)] * 5, rng_seed=seed)
        hits += optimize(sphere, c, 5).fitness >= -1e-2
    assert hits >= 18


def test_decode_examples():
    assert decode((3.2, 7.8), range(10)) == (3, 8)
    assert decode((2.0, 2.4), range(10)) == (2, 3)
    assert decode((4.4,), range(10)) == (4,)
    assert decode((1.0, 2.0), [10, 30, 20]) == (20, 30)


def test_decode_shrinks_k():
    assert decode((0.0, 1.0, 2.0), [5, 6]) == (5, 6)
    assert decode((0.0,), []) == ()


def test_set_objective_matches_decode():
    scores = np.random.default_rng(0).random(12)
    obj = SetObjective(scores)
    x = np.array([1.4, 1.6, 11.2])
    ids = decode(x, range(12))
    assert obj(x) == sum(scores[list(ids)])
