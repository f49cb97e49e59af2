"""Parameter sweeps, selector comparisons and report files.

A sweep cell is one ``(value, selector, seed)`` run. Cells share nothing
mutable, so they may run on a worker pool; results are sorted by key before
anything is aggregated or written.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import SimulationConfig, apply_overrides
from .errors import ConfigError
from .selection import SELECTORS, make_selector
from .simulation import run


class SweepKind(str, Enum):
    PACKETS = "packets"
    NODE_COUNT = "node_count"
    TX_POWER = "tx_power"
    CLUSTER_COUNT = "cluster_count"
    DELAY_VS_NODES = "delay_vs_nodes"


# Config key each sweep kind overrides, and the metrics it records.
SWEEP_KEYS = {
    SweepKind.PACKETS: ("packets_per_round",),
    SweepKind.NODE_COUNT: ("network", "node_count"),
    SweepKind.TX_POWER: ("tx_power_dbm",),
    SweepKind.CLUSTER_COUNT: ("network", "cluster_count"),
    SweepKind.DELAY_VS_NODES: ("network", "node_count"),
}
SWEEP_METRICS = {
    SweepKind.PACKETS: ("energy_per_round_j",),
    SweepKind.NODE_COUNT: ("energy_per_round_j", "lifetime_fnd", "throughput_mbps"),
    SweepKind.TX_POWER: ("energy_per_round_j", "throughput_mbps"),
    SweepKind.CLUSTER_COUNT: ("lifetime_fnd",),
    SweepKind.DELAY_VS_NODES: ("delay_ms",),
}

SWEEP_COLUMNS = ("kind", "value", "selector", "metric", "mean", "std", "seeds")
CELL_COLUMNS = ("kind", "value", "selector", "seed", "metric", "result")
COMPARE_COLUMNS = ("selector", "mean_fnd", "mean_energy_per_round_j", "mean_set_fitness", "runs", "snapshots")
PAIR_COLUMNS = ("selector_a", "selector_b", "win_rate", "not_worse_rate", "snapshots")


def metric_values(summary) -> dict:
    return {
        "energy_per_round_j": summary.mean_energy_per_round,
        "lifetime_fnd": summary.first_node_death_round,
        "throughput_mbps": summary.mean_throughput,
        "delay_ms": summary.mean_delay,
    }


@dataclass
class SweepSpec:
    kind: SweepKind
    values: list
    selectors: list = field(default_factory=lambda: ["cso", "pso", "random"])
    seeds: list = field(default_factory=lambda: list(range(10)))
    base_config: SimulationConfig = field(default_factory=SimulationConfig)
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        try:
            self.kind = SweepKind(self.kind)
        except ValueError:
            raise ConfigError(f"unknown sweep kind {self.kind!r}; choose from {[k.value for k in SweepKind]}") from None
        self.values = list(self.values)
        self.selectors = list(self.selectors)
        self.seeds = [int(s) for s in self.seeds]

    def validate(self) -> "SweepSpec":
        if not self.values:
            raise ConfigError("sweep values must be non-empty")
        diffs = np.diff(np.asarray(self.values, dtype=float))
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError(f"sweep values must be strictly monotone, got {self.values}")
        if not self.seeds:
            raise ConfigError("sweep seeds must be non-empty")
        if not self.selectors:
            raise ConfigError("sweep needs at least one selector")
        for name in self.selectors:
            if name not in SELECTORS:
                raise ConfigError(f"unknown selector {name!r}; choose from {SELECTORS}")
        key = SWEEP_KEYS[self.kind]
        node = self.overrides
        for part in key[:-1]:
            node = node.get(part, {}) if isinstance(node, dict) else {}
        if isinstance(node, dict) and key[-1] in node:
            raise ConfigError(f"override {'.'.join(key)} conflicts with the {self.kind.value} sweep")
        for value in self.values:
            self.cell_config(value, self.seeds[0])
        return self

    def cell_config(self, value, seed: int) -> SimulationConfig:
        """Config for one cell: base, then overrides, then the swept value and seed."""
        cfg = apply_overrides(self.base_config, self.overrides) if self.overrides else self.base_config
        key = SWEEP_KEYS[self.kind]
        update: dict = {key[-1]: value}
        for part in reversed(key[:-1]):
            update = {part: update}
        cfg = apply_overrides(cfg, update)
        cfg = apply_overrides(cfg, {"network": {"rng_seed": int(seed)}})
        return cfg.validate()


@dataclass
class SweepResult:
    kind: SweepKind
    cells: list  # (value, selector, seed, {metric: result}), sorted

    def aggregate(self) -> list[dict]:
        """Mean and sample standard deviation over seeds for every
        (value, selector, metric)."""
        groups: dict = {}
        for value, selector, _seed, metrics in self.cells:
            for metric in SWEEP_METRICS[self.kind]:
                groups.setdefault((value, selector, metric), []).append(float(metrics[metric]))
        rows = []
        order = {v: i for i, v in enumerate(_unique(c[0] for c in self.cells))}
        sel_order = {s: i for i, s in enumerate(_unique(c[1] for c in self.cells))}
        metric_order = {m: i for i, m in enumerate(SWEEP_METRICS[self.kind])}
        for (value, selector, metric), vals in sorted(
                groups.items(), key=lambda kv: (order[kv[0][0]], sel_order[kv[0][1]], metric_order[kv[0][2]])):
            arr = np.sort(np.asarray(vals))  # sorted: permutation-invariant sums
            std = float(np.std(arr, ddof=1)) if len(arr) > 1 else 0.0
            rows.append({
                "kind": self.kind.value, "value": value, "selector": selector, "metric": metric,
                "mean": float(np.mean(arr)), "std": std, "seeds": len(arr),
            })
        return rows

    def table(self, metric: str) -> tuple[list, list, np.ndarray]:
        """Wide view: one row per sweep value, one column per selector."""
        rows = [r for r in self.aggregate() if r["metric"] == metric]
        values = _unique(r["value"] for r in rows)
        selectors = _unique(r["selector"] for r in rows)
        grid = np.full((len(values), len(selectors)), np.nan)
        for r in rows:
            grid[values.index(r["value"]), selectors.index(r["selector"])] = r["mean"]
        return values, selectors, grid

    def cell_rows(self) -> list[dict]:
        return [
            {"kind": self.kind.value, "value": value, "selector": selector, "seed": seed,
             "metric": metric, "result": metrics[metric]}
            for value, selector, seed, metrics in self.cells
            for metric in SWEEP_METRICS[self.kind]
        ]


def _unique(items) -> list:
    seen = []
    for item in items:
        if item not in seen:
            seen.append(item)
    return seen


def run_cell(spec: SweepSpec, value, selector: str, seed: int) -> dict:
    cfg = spec.cell_config(value, seed)
    return metric_values(run(cfg, selector))


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Run every (value, selector, seed) cell; ``workers > 1`` uses a
    process pool of that size."""
    spec.validate()
    keys = [(v, s, seed) for v in spec.values for s in spec.selectors for seed in spec.seeds]
    jobs = [(spec, v, s, seed) for v, s, seed in keys]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_run_cell_args, jobs))
    else:
        results = [_run_cell_args(j) for j in jobs]
    value_pos = {v: i for i, v in enumerate(spec.values)}
    sel_pos = {s: i for i, s in enumerate(spec.selectors)}
    cells = sorted(
        ((v, s, seed, r) for (v, s, seed), r in zip(keys, results)),
        key=lambda c: (value_pos[c[0]], sel_pos[c[1]], c[2]),
    )
    return SweepResult(spec.kind, cells)


@dataclass
class Comparison:
    selectors: list
    per_selector: list[dict]
    pairs: list[dict]
    snapshots: dict  # selector -> array of elected-set fitness per snapshot

    def pair(self, a: str, b: str) -> dict:
        for p in self.pairs:
            if p["selector_a"] == a and p["selector_b"] == b:
                return p
        raise KeyError((a, b))

    def stats(self, name: str) -> dict:
        for row in self.per_selector:
            if row["selector"] == name:
                return row
        raise KeyError(name)


def win_rate(a: np.ndarray, b: np.ndarray) -> float:
    """Fraction of snapshots where ``a`` beats ``b``; ties count one half."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if len(a) == 0:
        return math.nan
    return float((np.count_nonzero(a > b) + 0.5 * np.count_nonzero(a == b)) / len(a))


def not_worse_rate(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.count_nonzero(a >= b) / len(a)) if len(a) else math.nan


def compare_selectors(config: SimulationConfig, selectors, seeds, drivers=None) -> Comparison:
    """Compare selectors on identical snapshots.

    Each driver selector runs a full simulation per seed and every other
    selector is evaluated as a shadow on the same per-round snapshot.
    Lifetime and energy columns come from driver runs only (``nan`` for
    selectors that never drive); by default every selector drives.
    """
    selectors = list(selectors)
    if len(selectors) < 2:
        raise ConfigError("compare needs at least two selectors")
    drivers = selectors if drivers is None else list(drivers)
    for name in selectors + drivers:
        if name not in SELECTORS:
            raise ConfigError(f"unknown selector {name!r}; choose from {SELECTORS}")
    built = {n: make_selector(n, config.swarm, config.pso, config.rank_order) for n in selectors}
    lifetimes = {n: [] for n in selectors}
    energies = {n: [] for n in selectors}
    snaps = {n: [] for n in selectors}
    for seed in seeds:
        cfg = apply_overrides(config, {"network": {"rng_seed": int(seed)}}).validate()
        for name in drivers:
            shadows = [built[o] for o in selectors if o != name]
            summary = run(cfg, built[name], shadows)
            lifetimes[name].append(summary.first_node_death_round)
            energies[name].append(summary.mean_energy_per_round)
            for m in summary.trace:
                for other in selectors:
                    snaps[other].append(m.ch_fitness if other == name else m.shadow_fitness[other])
    snapshots = {n: np.asarray(v, dtype=float) for n, v in snaps.items()}
    per_selector = [{
        "selector": n,
        "mean_fnd": float(np.mean(lifetimes[n])) if lifetimes[n] else math.nan,
        "mean_energy_per_round_j": float(np.mean(energies[n])) if energies[n] else math.nan,
        "mean_set_fitness": float(np.mean(snapshots[n])) if len(snapshots[n]) else math.nan,
        "runs": len(lifetimes[n]),
        "snapshots": len(snapshots[n]),
    } for n in selectors]
    pairs = [{
        "selector_a": a, "selector_b": b,
        "win_rate": win_rate(snapshots[a], snapshots[b]),
        "not_worse_rate": not_worse_rate(snapshots[a], snapshots[b]),
        "snapshots": len(snapshots[a]),
    } for a in selectors for b in selectors if a != b]
    return Comparison(selectors, per_selector, pairs, snapshots)


# --------------------------------------------------------------------------
# emission


def fmt(value) -> str:
    """Six significant digits for reals; integers and text verbatim."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return f"{float(value):.6g}"
    if isinstance(value, (tuple, list)):
        return " ".join(fmt(v) for v in value)
    return str(value)


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return None if math.isnan(v) else float(f"{v:.6g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Enum):
        return value.value
    return value


def csv_text(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def json_text(data) -> str:
    return json.dumps(_plain(data), indent=2, sort_keys=False) + "\n"


def write_atomic(path, text: str) -> str:
    """Write ``text`` to ``path`` through a temporary file in the same
    directory, so readers never see a half-written file."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_all(files: dict) -> list[str]:
    """Render every file first, then commit them; a failure removes the
    files already committed by this call."""
    written = []
    try:
        for path, text in files.items():
            written.append(write_atomic(path, text))
    except OSError:
        for p in written:
            os.unlink(p)
        raise
    return written


def report_files(results, fmt_name: str, path) -> dict:
    """Map output paths to file contents for ``results``."""
    if fmt_name not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt_name!r}")
    stem = os.path.splitext(os.fspath(path))[0]
    if isinstance(results, SweepResult):
        if not results.cells:
            raise ValueError("nothing to report: the sweep has no cells")
        rows = results.aggregate()
        if fmt_name == "csv":
            return {stem + ".csv": csv_text(rows, SWEEP_COLUMNS),
                    stem + "_cells.csv": csv_text(results.cell_rows(), CELL_COLUMNS)}
        return {stem + ".json": json_text({"kind": results.kind.value, "rows": rows, "cells": results.cell_rows()})}
    if isinstance(results, Comparison):
        if not results.selectors:
            raise ValueError("nothing to report: no selectors")
        if fmt_name == "csv":
            return {stem + ".csv": csv_text(results.per_selector, COMPARE_COLUMNS),
                    stem + "_pairs.csv": csv_text(results.pairs, PAIR_COLUMNS)}
        return {stem + ".json": json_text({"selectors": results.per_selector, "pairs": results.pairs})}
    raise TypeError(f"cannot report {type(results).__name__}")


def emit_report(results, fmt_name: str, path) -> list[str]:
    """Write a sweep or comparison as CSV (plus a companion detail CSV) or
    as one JSON document. Returns the written paths."""
    return write_all(report_files(results, fmt_name, path))


def spec_from_dict(data: dict, base_config: SimulationConfig) -> SweepSpec:
    known = {f.name for f in dataclasses.fields(SweepSpec)} - {"base_config"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown sweep keys {sorted(unknown)}")
    if "kind" not in data or "values" not in data:
        raise ConfigError("sweep spec needs 'kind' and 'values'")
    return SweepSpec(base_config=base_config, **data)


__all__ = [
    "SweepKind",
    "SweepSpec",
    "SweepResult",
    "Comparison",
    "run_sweep",
    "run_cell",
    "compare_selectors",
    "win_rate",
    "not_worse_rate",
    "emit_report",
    "report_files",
    "write_atomic",
    "fmt",
    "SWEEP_COLUMNS",
    "CELL_COLUMNS",
    "COMPARE_COLUMNS",
    "PAIR_COLUMNS",
]
