"""One test per acceptance criterion. Each prints a PASS/FAIL line with the
measured value, which is repeated in the pytest terminal summary."""

import csv
import dataclasses
import io

import numpy as np
import pytest

from acceptance_log import Timer, report
from oracles import enumerated_centrality

from iomt_cluster.baselines import brute_force_select
from iomt_cluster.cli import main
from iomt_cluster.config import desk
from iomt_cluster.cso import SwarmConfig, optimize
from iomt_cluster.network import NetworkConfig, RadioEnergyModel, build_graph, cumulative_energy, deploy, rx_energy, tx_energy
from iomt_cluster.objectives import FitnessWeights, evaluate_pool, node_centrality
from iomt_cluster.reporting import SweepSpec, compare_selectors, run_sweep
from iomt_cluster.selection import make_selector
from iomt_cluster.simulation import initial_state, residual_deltas, run, run_round, summarize

SEEDS = list(range(20))


def desk_config(seed=0):
    cfg = desk()
    cfg.network = dataclasses.replace(cfg.network, rng_seed=seed)
    return cfg


def test_energy_model_identity():
    radio = RadioEnergyModel()
    rng = np.random.default_rng(2024)
    with Timer() as t:
        bits = rng.integers(0, 10**6, 1000)
        d = rng.uniform(0, 400, 1000)
        worst = 0.0
        for b, dist in zip(bits.tolist(), d.tolist()):
            lhs = tx_energy(b, dist, radio) + rx_energy(b, radio)
            rhs = cumulative_energy(b, dist, radio)
            if rhs:
                worst = max(worst, abs(lhs - rhs) / abs(rhs))
        spot = rx_energy(1500, radio)
    ok = worst <= 1e-12 and abs(spot - 4.5e-5) <= 1e-12 * 4.5e-5
    assert report("energy-model identity", ok, f"max rel err {worst:.2e}, rx(1500) = {spot:.6g} J", t.elapsed, 1)


def test_centrality_oracle():
    rng = np.random.default_rng(99)
    checked = 0
    worst = 0.0
    with Timer() as t:
        for _ in range(200):
            n = int(rng.integers(3, 9))
            net = deploy(NetworkConfig(node_count=n, cluster_count=1, area=(200.0, 200.0),
                                       rng_seed=int(rng.integers(0, 2**32))))
            g = build_graph(net, float(rng.uniform(60, 200)))
            adj = g.adjacency()
            if not _connected(adj):
                continue
            checked += 1
            oracle = enumerated_centrality(adj)
            for v in range(n):
                worst = max(worst, abs(node_centrality(v, g) - oracle[v]))
    ok = checked > 0 and worst <= 1e-12
    assert report("centrality oracle", ok, f"{checked} connected graphs, max abs err {worst:.1e}", t.elapsed, 10)


def _connected(adj):
    seen, stack = {0}, [0]
    while stack:
        for v in adj[stack.pop()]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(adj)


def test_ch_selection_oracle_gap():
    cso = make_selector("cso", SwarmConfig())
    hits = 0
    with Timer() as t:
        for seed in SEEDS:
            net = deploy(NetworkConfig(node_count=12, cluster_count=2, rng_seed=seed))
            table = evaluate_pool(net, build_graph(net), FitnessWeights(), "residual", 2)
            _, best = brute_force_select(table, 2)
            hits += cso(table, 2, seed).fitness >= 0.95 * best
    assert report("CH-selection oracle gap", hits >= 18, f"{hits}/20 seeds within 95% of optimum", t.elapsed, 60)


def test_cso_sphere():
    def sphere(x):
        return -float(np.dot(x, x))

    sphere.batch = lambda X: -np.einsum("ij,ij->i", X, X)
    hits = 0
    with Timer() as t:
        for seed in SEEDS:
            cfg = SwarmConfig(population=50, max_iterations=150, bounds=[(-5.0, 5.0)] * 5, rng_seed=seed)
            hits += optimize(sphere, cfg, 5).fitness >= -1e-2
    assert report("CSO sphere sanity", hits >= 18, f"{hits}/20 seeds reach >= -1e-2", t.elapsed, 30)


def test_conservation_suite():
    cfg = desk_config(0)
    selector = make_selector("cso", cfg.swarm, cfg.pso)
    failures = []
    with Timer() as t:
        state = initial_state(cfg)
        alive = [state.network.size]
        trace = []
        for _ in range(cfg.network.max_rounds):
            if not state.network.alive_mask().any():
                break
            before = state.network
            state, m = run_round(state, selector, cfg)
            trace.append(m)
            deltas = residual_deltas(before, state.network)
            if abs(m.energy_consumed - deltas) > 1e-9 * max(abs(deltas), 1e-300):
                failures.append(f"round {m.round_index}: {m.energy_consumed} vs {deltas}")
            alive.append(m.alive_count)
        s = summarize(trace, cfg.network.node_count, cfg.network.max_rounds)
        traces_ok = all(
            np.all(np.diff(make_selector("cso")(evaluate_pool(*_snap(cfg, seed)), 5, seed).solution.fitness_trace) >= 0)
            for seed in range(3)
        )
    monotone_alive = all(a >= b for a, b in zip(alive, alive[1:]))
    ordered = s.first_node_death_round <= s.half_nodes_death_round <= s.last_node_death_round
    ok = not failures and monotone_alive and ordered and traces_ok and len(trace) == 100
    detail = (f"{len(trace)} rounds, {len(failures)} conservation breaks, alive nonincreasing={monotone_alive}, "
              f"FND/HND/LND={s.first_node_death_round}/{s.half_nodes_death_round}/{s.last_node_death_round}, "
              f"traces nondecreasing={traces_ok}")
    assert report("conservation suite", ok, detail, t.elapsed, 30)


def _snap(cfg, seed):
    net = deploy(dataclasses.replace(cfg.network, rng_seed=seed))
    return net, build_graph(net)


def test_selector_ordering():
    cfg = desk_config()
    with Timer() as t:
        cmp = compare_selectors(cfg, ["cso", "random", "pso"], SEEDS, drivers=["cso"])
        random_fnd = [run(dataclasses.replace(cfg, network=dataclasses.replace(cfg.network, rng_seed=s)),
                          "random").first_node_death_round for s in SEEDS]
    cso_fnd = cmp.stats("cso")["mean_fnd"]
    rnd_fnd = float(np.mean(random_fnd))
    snaps = cmp.snapshots
    beats_random = float(np.mean(snaps["cso"] > snaps["random"]))
    ge_pso = cmp.pair("cso", "pso")["not_worse_rate"]
    parts = [
        (cso_fnd >= rnd_fnd, f"FND cso {cso_fnd:.2f} vs random {rnd_fnd:.2f}"),
        (beats_random >= 0.8, f"cso > random on {beats_random:.1%} of snapshots (need 80%)"),
        (ge_pso >= 0.5, f"cso >= pso on {ge_pso:.1%} of snapshots (need 50%)"),
    ]
    detail = "; ".join(("ok " if good else "MISS ") + text for good, text in parts)
    assert report("selector ordering", all(g for g, _ in parts), detail, t.elapsed, 300)


def test_monotone_load():
    cfg = desk_config()
    spec = SweepSpec("packets", [5, 25, 50, 100], selectors=["cso", "pso", "random"],
                     seeds=list(range(10)), base_config=cfg)
    with Timer() as t:
        values, selectors, grid = run_sweep(spec).table("energy_per_round_j")
    increasing = {s: bool(np.all(np.diff(grid[:, j]) > 0)) for j, s in enumerate(selectors)}
    detail = ", ".join(f"{s}: " + "<".join(f"{v:.3g}" for v in grid[:, j]) for j, s in enumerate(selectors))
    assert report("monotone load", all(increasing.values()), detail + " J/round", t.elapsed, 120)


def _trace_without_formation(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    drop = rows[0].index("formation_ms")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row[:drop] + row[drop + 1:])
    return buf.getvalue().encode()


def test_determinism_golden(tmp_path):
    with Timer() as t:
        codes = [main(["run", "--seed", "7", "--preset", "desk", "--out", str(tmp_path / name)]) for name in ("a", "b")]
        a = _trace_without_formation(tmp_path / "a" / "trace.csv")
        b = _trace_without_formation(tmp_path / "b" / "trace.csv")
    rounds = a.count(b"\n") - 1
    ok = codes == [0, 0] and a == b and rounds == 100
    assert report("determinism golden file", ok, f"{rounds} rounds, identical={a == b}", t.elapsed, 30)
