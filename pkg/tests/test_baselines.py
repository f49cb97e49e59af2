import itertools

import numpy as np
import pytest

from iomt_cluster.baselines import PsoConfig, brute_force_select, pso_optimize, pso_step, random_select
from iomt_cluster.errors import ConfigError, OracleLimitError
from iomt_cluster.network import NetworkConfig, build_graph, deploy
from iomt_cluster.objectives import FitnessWeights, evaluate_pool
from iomt_cluster.selection import SELECTORS, Selection, make_selector, pool_order


def sphere(x):
    return -float(np.dot(x, x))


def snapshot(n, seed, k=2):
    net = deploy(NetworkConfig(node_count=n, cluster_count=k, rng_seed=seed))
    return evaluate_pool(net, build_graph(net), FitnessWeights(), "residual", k)


def test_pso_defaults():
    c = PsoConfig()
    assert (c.population, c.inertia, c.c1, c.c2, c.velocity_clamp) == (30, 0.7, 1.5, 1.5, 0.2)


@pytest.mark.parametrize("kw", [dict(population=1), dict(inertia=0.0), dict(inertia=1.5), dict(c1=-1.0)])
def test_pso_invalid(kw):
    with pytest.raises(ConfigError):
        pso_optimize(sphere, PsoConfig(bounds=[(-1, 1)], **kw), 1)


def test_pso_constant_objective():
    assert pso_optimize(lambda x: -4.0, PsoConfig(bounds=[(-1, 1)] * 2, max_iterations=10), 2).fitness == -4.0


def test_pso_frozen_step():
    x = np.array([[1.0, 2.0]])
    v = np.zeros_like(x)
    new_x, new_v = pso_step(x, v, x + 5, x - 5, 0.0, 0.0, 0.0, np.ones_like(x), np.ones_like(x),
                            np.array([1.0, 1.0]), np.array([-9.0, -9.0]), np.array([9.0, 9.0]))
    assert np.array_equal(new_x, x) and np.array_equal(new_v, v)


def test_pso_sphere_calibration():
    hits = 0
    for seed in range(20):
        sol = pso_optimize(sphere, PsoConfig(bounds=[(-5, 5)] * 2, max_iterations=100, rng_seed=seed), 2)
        hits += sol.fitness >= -1e-3
    assert hits >= 18


def test_pso_deterministic_and_monotone():
    c = PsoConfig(bounds=[(-5, 5)] * 3, max_iterations=40, rng_seed=4)
    a, b = pso_optimize(sphere, c, 3), pso_optimize(sphere, c, 3)
    assert a.fitness_trace == b.fitness_trace and np.array_equal(a.position, b.position)
    assert np.all(np.diff(a.fitness_trace) >= 0)


def test_random_select():
    rng = np.random.default_rng(0)
    assert random_select([4, 2, 9], 3, rng) == (2, 4, 9)
    assert random_select([4, 2, 9], 0, rng) == ()
    assert random_select([4, 2, 9], 7, rng) == (2, 4, 9)
    a = random_select(range(100), 5, np.random.default_rng(3))
    assert a == random_select(range(100), 5, np.random.default_rng(3))
    assert len(set(a)) == 5


def test_brute_force_matches_enumeration():
    t = snapshot(12, 0)
    ids, fit = brute_force_select(t, 2)
    best = max(itertools.combinations(t.ids.tolist(), 2), key=lambda c: (t.set_fitness(c), [-v for v in c]))
    assert fit == pytest.approx(t.set_fitness(best))
    assert ids == tuple(best)


def test_brute_force_single():
    t = snapshot(5, 1, k=1)
    ids, fit = brute_force_select(t, 1)
    assert fit == t.fitness.max()
    assert ids == (int(t.ids[np.argmax(t.fitness)]),)


def test_brute_force_tie_break():
    t = snapshot(6, 2)
    t.fitness[:] = 1.0
    ids, fit = brute_force_select(t, 2)
    assert ids == (0, 1) and fit == 2.0


def test_brute_force_guard():
    t = snapshot(100, 0, k=5)
    with pytest.raises(OracleLimitError):
        brute_force_select(t, 5)


@pytest.mark.parametrize("seed", range(8))
def test_oracle_dominates_every_selector(seed):
    n = 8 + seed % 7
    t = snapshot(n, seed, k=3)
    _, best = brute_force_select(t, 3)
    for name in SELECTORS:
        sel = make_selector(name)(t, 3, seed)
        assert isinstance(sel, Selection)
        assert len(set(sel.ch_ids)) == 3 and set(sel.ch_ids) <= set(t.ids.tolist())
        assert sel.fitness <= best + 1e-12
        assert sel.fitness == pytest.approx(t.set_fitness(sel.ch_ids), abs=1e-12)


def test_selectors_shrink_k():
    t = snapshot(3, 0, k=2)
    for name in SELECTORS:
        assert sorted(make_selector(name)(t, 5, 0).ch_ids) == [0, 1, 2]


def test_swarm_selectors_share_contract():
    t = snapshot(30, 5, k=4)
    for name in ("cso", "pso"):
        sel = make_selector(name)(t, 4, 11)
        assert sel.solution is not None and sel.solution.decoded == sel.ch_ids
        assert len(sel.solution.fitness_trace) == sel.solution.iterations_used


def test_fitness_rank_order():
    t = snapshot(30, 5, k=4)
    order = pool_order(t, "fitness")
    assert np.all(np.diff(t.fitness[order]) <= 0)
    sel = make_selector("cso", rank_order="fitness")(t, 4, 0)
    assert sel.fitness == pytest.approx(np.sort(t.fitness)[-4:].sum())
    with pytest.raises(ConfigError):
        make_selector("pso", rank_order="spiral")


def test_unknown_selector():
    with pytest.raises(ConfigError):
        make_selector("aco")
