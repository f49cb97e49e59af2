"""Time the compiled and pure-Python kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py            # desk and full-scale graphs
    python3 benchmarks/bench_kernels.py --nodes 200 --repeat 5

Inputs come from a seeded deployment, so every backend sees identical data;
outputs are compared before any timing is reported.
"""

import argparse
import time

import numpy as np

from iomt_cluster import kernels
from iomt_cluster.cso import SetObjective, SwarmConfig, optimize, with_seed
from iomt_cluster.kernels import available_backends, load_backend
from iomt_cluster.network import NetworkConfig, build_graph, deploy


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def swarm_run(module, scores, seed):
    """Whole CSO optimization on a set objective with ``module`` as backend."""
    saved, kernels._impl = kernels._impl, module
    try:
        cfg = with_seed(SwarmConfig(), seed, [(0.0, len(scores) - 1.0)] * 5)
        return optimize(SetObjective(scores), cfg, 5).position
    finally:
        kernels._impl = saved


def cases(nodes, seed):
    net = deploy(NetworkConfig(node_count=nodes, rng_seed=seed))
    graph = build_graph(net)
    rng = np.random.default_rng(seed)
    positions = rng.uniform(0, nodes - 1, size=(100, 5))
    scores = rng.random(nodes)
    return {
        "betweenness": lambda m: m.betweenness(graph.indptr, graph.indices),
        "decode_batch": lambda m: m.decode_batch(positions, nodes),
        "set_scores": lambda m: m.set_scores(m.decode_batch(positions, nodes), scores),
        "cso_optimize": lambda m: swarm_run(m, scores, seed),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, nargs="+", default=[100, 1000])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = {name: load_backend(name) for name in available_backends()}
    if "cython" not in backends:
        print("compiled backend not built; timing the Python fallback only")
    print(f"{'kernel':<14}{'nodes':>7}" + "".join(f"{b + ' (s)':>14}" for b in backends) + f"{'speedup':>10}")
    for nodes in args.nodes:
        for kernel, fn in cases(nodes, args.seed).items():
            outputs = [np.asarray(fn(m)) for m in backends.values()]
            for out in outputs[1:]:
                if not np.array_equal(out, outputs[0]):
                    raise SystemExit(f"backends disagree on {kernel} at {nodes} nodes")
            times = {b: best_of(lambda m=m: fn(m), args.repeat) for b, m in backends.items()}
            speedup = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{kernel:<14}{nodes:>7}" + "".join(f"{t:>14.5f}" for t in times.values()) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
