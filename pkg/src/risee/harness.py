"""Monte Carlo experiment orchestration, CSV emission, and summaries.

Every method at a given (sweep value, drop) consumes the identical channel
realization, so paired comparisons are fair by construction.
"""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .algorithms import MethodConfig, run_method
from .kernels import SolverOptions
from .scenario import SystemScenario, generate_drop, total_static_power

FLOAT_FMT = "%.12g"


def splitmix64(seed: int, index: int) -> int:
    """Independent per-drop seed stream from (base seed, drop index)."""
    z = (seed * 0x9E3779B97F4A7C15 + index + 1) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return (z ^ (z >> 31)) & 0x7FFFFFFFFFFFFFFF


@dataclass
class ExperimentConfig:
    scenario: SystemScenario
    methods: list
    sweep_var: str = "Pmax_dbm"
    sweep_values: tuple = (10.0, 20.0, 30.0)
    drops: int = 100
    base_seed: int = 12345
    output_path: str | None = None
    options: SolverOptions = field(default_factory=SolverOptions)
    threads: int = 1

    def __post_init__(self):
        if self.drops < 1:
            raise ValueError("drops must be >= 1")
        if not self.methods:
            raise ValueError("method list must be non-empty")
        if not all(np.isfinite(v) for v in self.sweep_values):
            raise ValueError("sweep values must be finite")
        if self.sweep_var not in SystemScenario.__dataclass_fields__:
            raise ValueError(f"unknown sweep variable {self.sweep_var!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        scenario = SystemScenario.from_dict(d.pop("scenario", {}))
        methods = [MethodConfig(**m) for m in d.pop("methods")]
        sweep = d.pop("sweep", None)
        opts = SolverOptions(**d.pop("options", {}))
        kwargs = dict(scenario=scenario, methods=methods, options=opts)
        if sweep is not None:
            kwargs["sweep_var"] = sweep["variable"]
            kwargs["sweep_values"] = tuple(sweep["values"])
        for key in ("drops", "base_seed", "output_path", "threads"):
            if key in d:
                kwargs[key] = d.pop(key)
        if d:
            raise ValueError(f"unknown experiment fields: {sorted(d)}")
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "methods": [{"method": m.method, "objective": m.objective,
                         "reflection_constraint": m.reflection_constraint}
                        for m in self.methods],
            "sweep": {"variable": self.sweep_var, "values": list(self.sweep_values)},
            "drops": self.drops,
            "base_seed": self.base_seed,
            "output_path": self.output_path,
            "threads": self.threads,
        }


@dataclass
class ResultRecord:
    drop_index: int
    seed: int
    method: str
    objective: str
    constraint: str
    sweep_var: str
    sweep_value: float
    gee_bits_per_joule: float
    sum_rate_bps: float
    rates_bps: tuple
    iterations_used: int
    wall_time_s: float


def _run_cell(scenario: SystemScenario, methods, options: SolverOptions,
              sweep_var: str, sweep_value, drop_index: int, seed: int):
    """All methods on one (sweep value, drop) pair, sharing the channel draw."""
    sc = replace(scenario, **{sweep_var: sweep_value})
    channels = generate_drop(sc, seed)
    pm = total_static_power(sc)
    records = []
    for cfg in methods:
        t0 = time.perf_counter()
        alloc, trace = run_method(channels, pm, sc.P_R, cfg,
                                  replace(options, seed=seed), sc.bandwidth_hz)
        wall = time.perf_counter() - t0
        records.append(ResultRecord(
            drop_index=drop_index, seed=seed, method=cfg.method,
            objective=cfg.objective, constraint=cfg.reflection_constraint,
            sweep_var=sweep_var, sweep_value=float(sweep_value),
            gee_bits_per_joule=alloc.gee_bits_per_joule,
            sum_rate_bps=float(np.sum(alloc.rates_bps)),
            rates_bps=tuple(float(r) for r in alloc.rates_bps),
            iterations_used=trace.iterations_used,
            wall_time_s=wall,
        ))
    return records


def run_experiment(config: ExperimentConfig):
    """Execute the full sweep x drops x methods grid; returns ordered records."""
    cells = [(v, d, splitmix64(config.base_seed, d))
             for v in config.sweep_values for d in range(config.drops)]
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            chunks = list(pool.map(_run_cell,
                                   *zip(*[(config.scenario, config.methods, config.options,
                                           config.sweep_var, v, d, s)
                                          for v, d, s in cells])))
    else:
        chunks = [_run_cell(config.scenario, config.methods, config.options,
                            config.sweep_var, v, d, s) for v, d, s in cells]
    records = [r for chunk in chunks for r in chunk]
    if config.output_path:
        with open(config.output_path, "w", newline="") as fh:
            write_csv(records, fh)
    return records


def write_csv(records, fh):
    """Fixed-schema CSV with 12-significant-digit floats."""
    if not records:
        raise ValueError("no records to write")
    n_users = len(records[0].rates_bps)
    header = ["drop", "seed", "method", "objective", "constraint", "sweep_var",
              "sweep_value", "gee", "sum_rate"]
    header += [f"rate_{k + 1}" for k in range(n_users)]
    header += ["iters", "wall_time_s"]
    w = csv.writer(fh)
    w.writerow(header)
    for r in records:
        row = [r.drop_index, r.seed, r.method, r.objective, r.constraint,
               r.sweep_var, FLOAT_FMT % r.sweep_value, FLOAT_FMT % r.gee_bits_per_joule,
               FLOAT_FMT % r.sum_rate_bps]
        row += [FLOAT_FMT % x for x in r.rates_bps]
        row += [r.iterations_used, FLOAT_FMT % r.wall_time_s]
        w.writerow(row)


def csv_text(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def summarize(records, group_keys=("method", "objective", "constraint", "sweep_value")):
    """Per-group mean, population standard deviation and count of gee and sum rate."""
    if not records:
        raise ValueError("cannot summarize an empty record list")
    groups = {}
    for r in records:
        key = tuple(getattr(r, _FIELD_ALIASES.get(k, k)) for k in group_keys)
        groups.setdefault(key, []).append(r)
    rows = []
    for key in sorted(groups, key=lambda t: tuple(map(str, t))):
        rs = groups[key]
        gee = np.array([r.gee_bits_per_joule for r in rs])
        sr = np.array([r.sum_rate_bps for r in rs])
        rows.append({
            **dict(zip(group_keys, key)),
            "count": len(rs),
            "gee_mean": float(gee.mean()), "gee_sd": float(gee.std()),
            "sum_rate_mean": float(sr.mean()), "sum_rate_sd": float(sr.std()),
        })
    return rows


_FIELD_ALIASES = {"drop": "drop_index", "gee": "gee_bits_per_joule",
                  "sum_rate": "sum_rate_bps"}
