"""``iomt-cluster`` command line.

Subcommands: ``run`` (one simulation), ``sweep`` (a YAML sweep spec),
``compare`` (selectors on shared snapshots), ``objectives`` (per-node
objective dump) and ``optimize`` (raw optimizer on a benchmark objective).

Every command loads and validates its whole configuration before touching
the output directory, so a configuration error exits with status 2 and
leaves no files behind.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np
import yaml

from . import __version__
from .baselines import PsoConfig, pso_optimize
from .config import PRESETS, apply_overrides, dump_config, load_config
from .cso import SetObjective, SwarmConfig, optimize, with_seed
from .errors import ConfigError, OracleLimitError
from .network import build_graph
from .objectives import evaluate_pool
from .reporting import compare_selectors, csv_text, json_text, report_files, run_sweep, spec_from_dict, write_all
from .selection import SELECTORS
from .simulation import prepare_network, run

log = logging.getLogger("iomt_cluster")

TRACE_COLUMNS = ("round", "energy_j", "alive", "bits", "delay_ms", "formation_ms", "ch_ids")
SUMMARY_COLUMNS = (
    "selector", "seed", "rounds_executed", "first_node_death_round", "half_nodes_death_round",
    "last_node_death_round", "total_energy", "total_bits", "mean_energy_per_round",
    "mean_throughput", "mean_delay", "mean_formation_time",
)
OBJECTIVE_COLUMNS = (
    "id", "residual_energy", "cluster_energy", "comm_cost", "queuing_delay",
    "link_cost", "link_quality", "centrality", "fitness",
)
OPTIMIZE_COLUMNS = ("iteration", "best_fitness")


def parse_seeds(text: str) -> list[int]:
    """``"0-9"``, ``"1,4,7"`` or a mix such as ``"0-3,10"``."""
    seeds = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                if hi < lo:
                    raise ValueError
                seeds.extend(range(lo, hi + 1))
            elif part:
                seeds.append(int(part))
    except ValueError:
        raise ConfigError(f"cannot parse seed list {text!r}") from None
    if not seeds:
        raise ConfigError("empty seed list")
    return seeds


def _config(args):
    cfg = load_config(args.config, preset_name=args.preset)
    updates = {}
    if getattr(args, "seed", None) is not None:
        updates["network"] = {"rng_seed": args.seed}
    if getattr(args, "selector", None) is not None:
        updates["selector"] = args.selector
    if updates:
        cfg = apply_overrides(cfg, updates).validate()
    return cfg


def _commit(out_dir, files: dict) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    return write_all({os.path.join(out_dir, name): text for name, text in files.items()})


def trace_rows(summary) -> list[dict]:
    return [{
        "round": m.round_index,
        "energy_j": m.energy_consumed,
        "alive": m.alive_count,
        "bits": m.bits_delivered_to_bs,
        "delay_ms": m.mean_propagation_delay,
        "formation_ms": m.cluster_formation_time,
        "ch_ids": tuple(m.ch_ids),
    } for m in summary.trace]


def cmd_run(args) -> int:
    cfg = _config(args)
    summary = run(cfg)
    record = {"selector": cfg.selector, "seed": cfg.network.rng_seed, **summary.as_dict()}
    files = {"trace.csv": csv_text(trace_rows(summary), TRACE_COLUMNS)}
    if args.format == "csv":
        files["summary.csv"] = csv_text([record], SUMMARY_COLUMNS)
    else:
        files["summary.json"] = json_text(record)
    files["config.yaml"] = dump_config(cfg)
    for path in _commit(args.out, files):
        print(path)
    log.info("FND %d, total energy %.6g J", summary.first_node_death_round, summary.total_energy)
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    try:
        with open(args.spec) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read sweep spec {args.spec}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed sweep spec {args.spec}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"sweep spec {args.spec} must be a mapping")
    spec = spec_from_dict(data, cfg).validate()
    result = run_sweep(spec, workers=args.workers)
    files = report_files(result, args.format, f"sweep_{spec.kind.value}")
    for path in _commit(args.out, files):
        print(path)
    return 0


def cmd_compare(args) -> int:
    cfg = _config(args)
    selectors = [s.strip() for s in args.selectors.split(",") if s.strip()]
    seeds = parse_seeds(args.seeds)
    drivers = None if args.drivers is None else [s.strip() for s in args.drivers.split(",") if s.strip()]
    result = compare_selectors(cfg, selectors, seeds, drivers)
    files = report_files(result, args.format, "compare")
    for path in _commit(args.out, files):
        print(path)
    return 0


def cmd_objectives(args) -> int:
    cfg = _config(args)
    net = prepare_network(cfg)
    table = evaluate_pool(net, build_graph(net), cfg.fitness.weights, cfg.fitness.mode, cfg.network.cluster_count)
    rows = [{
        "id": int(table.ids[i]),
        "residual_energy": table.residual_energy[i],
        "cluster_energy": table.cluster_energy[i],
        "comm_cost": table.comm_cost[i],
        "queuing_delay": table.queuing_delay[i],
        "link_cost": table.link_cost[i],
        "link_quality": table.link_quality[i],
        "centrality": table.centrality[i],
        "fitness": table.fitness[i],
    } for i in range(len(table))]
    if args.format == "csv":
        files = {"objectives.csv": csv_text(rows, OBJECTIVE_COLUMNS)}
    else:
        files = {"objectives.json": json_text(rows)}
    for path in _commit(args.out, files):
        print(path)
    return 0


def sphere(x):
    x = np.asarray(x, dtype=np.float64)
    return -float(np.dot(x, x))


sphere.batch = lambda X: -np.einsum("ij,ij->i", X, X)


def cmd_optimize(args) -> int:
    cfg = _config(args)
    seed = cfg.network.rng_seed
    if args.objective == "sphere":
        objective, dim = sphere, args.dim
        bounds = [(-args.bound, args.bound)] * dim
    else:
        net = prepare_network(cfg)
        table = evaluate_pool(net, build_graph(net), cfg.fitness.weights, cfg.fitness.mode,
                              cfg.network.cluster_count)
        objective, dim = SetObjective(table.fitness), cfg.network.cluster_count
        bounds = [(0.0, float(len(table) - 1))] * dim
    if args.optimizer == "cso":
        opt_cfg = with_seed(cfg.swarm, seed, bounds)
        if args.iterations is not None:
            opt_cfg = apply_overrides(opt_cfg, {"max_iterations": args.iterations})
        solution = optimize(objective, opt_cfg, dim)
    else:
        opt_cfg = with_seed(cfg.pso, seed, bounds)
        if args.iterations is not None:
            opt_cfg = apply_overrides(opt_cfg, {"max_iterations": args.iterations})
        solution = pso_optimize(objective, opt_cfg, dim)
    rows = [{"iteration": i, "best_fitness": f} for i, f in enumerate(solution.fitness_trace, start=1)]
    for path in _commit(args.out, {"optimize_trace.csv": csv_text(rows, OPTIMIZE_COLUMNS)}):
        print(path)
    print(f"best fitness {solution.fitness:.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iomt-cluster", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML config file (keys mirror SimulationConfig)")
    common.add_argument("--preset", choices=sorted(PRESETS), default=None,
                        help="starting profile (default: desk, or the file's 'preset' key)")
    common.add_argument("--seed", type=int, default=None, help="deployment seed (network.rng_seed)")
    common.add_argument("--selector", choices=SELECTORS, default=None)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", parents=[common], help="run one simulation")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    p.add_argument("spec", help="YAML sweep spec: kind, values, selectors, seeds, overrides")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", parents=[common], help="compare selectors on shared snapshots")
    p.add_argument("--selectors", default="cso,pso,random")
    p.add_argument("--seeds", default="0-9")
    p.add_argument("--drivers", default=None, help="selectors that drive full runs (default: all)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("objectives", parents=[common], help="dump per-node objectives at deployment")
    p.set_defaults(func=cmd_objectives)

    p = sub.add_parser("optimize", parents=[common], help="run an optimizer on a benchmark objective")
    p.add_argument("--objective", choices=("sphere", "ch"), default="sphere")
    p.add_argument("--optimizer", choices=("cso", "pso"), default="cso")
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--bound", type=float, default=5.0)
    p.add_argument("--iterations", type=int, default=None)
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OracleLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
