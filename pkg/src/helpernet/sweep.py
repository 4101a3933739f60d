"""Sweep one scalar scenario field and emit analytic and/or simulated rows.

Grid points that produce an invalid configuration (say a user cache larger
than the catalog) become row-level error entries instead of aborting the
sweep.  Simulation points run in a worker pool when ``jobs > 1``; rows are
written in grid order regardless of completion order, with per-point seeds
derived from the base seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .delay import DelayInputs, solve_delays
from .errors import ConfigurationError
from .reproduce import write_csv
from .scenario import ScenarioConfig, scenario_from_mapping, scenario_to_mapping
from .simulate import SimConfig, run_throughput
from .throughput import busy_probability, is_stable, service_rate, throughput_S, throughput_U_stable, throughput_U_unstable

ENGINES = ("analytic", "simulate", "both")

#: Scalar config fields addressable as an axis, dotted section.key paths.
SWEEPABLE = (
    "access.q_s",
    "access.q_c",
    "access.q_d",
    "access.alpha",
    "access.arrival_rate",
    "access.weight",
    "caches.m_u",
    "caches.m_d",
    "caches.m_s",
    "catalog.zipf_shape",
    "catalog.file_count",
    "phy.noise_power_w",
    "phy.gamma_capture",
    "phy.gamma_interference",
    "phy.fading_v",
    "phy.pathloss_exponent",
)

_INT_FIELDS = ("caches.m_u", "caches.m_d", "caches.m_s", "catalog.file_count")


@dataclass(frozen=True)
class AxisSpec:
    field: str
    start: float
    stop: float
    step: float

    def __post_init__(self) -> None:
        if self.field not in SWEEPABLE:
            raise ValueError(f"cannot sweep {self.field!r}; choose one of {SWEEPABLE}")
        if self.step <= 0 or self.stop < self.start:
            raise ValueError("need step > 0 and stop >= start")

    def values(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        vals = [round(self.start + k * self.step, 12) for k in range(n)]
        if self.field in _INT_FIELDS:
            return [int(v) for v in vals]
        return vals


def _apply(scenario: ScenarioConfig, field: str, value) -> ScenarioConfig:
    section, key = field.split(".")
    data = scenario_to_mapping(scenario)
    data[section][key] = value
    return scenario_from_mapping(data)


def _analytic_row(point: ScenarioConfig) -> dict:
    hits = point.hit_profile()
    table = point.success_table()
    probs = point.access
    mode = point.modes.mu_mode
    mu = service_rate(probs, hits, table, mode)
    stable = is_stable(probs.arrival_rate, mu)
    t_s = throughput_S(probs.arrival_rate, mu)
    if stable:
        t_u = throughput_U_stable(probs, hits, table, mode)
    else:
        t_u = throughput_U_unstable(probs, hits, table)
    t_w = probs.weight * t_s + (1.0 - probs.weight) * t_u
    d_u = solve_delays(DelayInputs.from_regime(probs, hits, table, mode)).d_u
    return {
        "mu": mu,
        "stable": stable,
        "busy_prob": busy_probability(probs.arrival_rate, mu),
        "t_s": t_s,
        "t_u": t_u,
        "t_w": t_w,
        "d_u": d_u,
    }


def _sim_point(args) -> dict:
    mapping, request_mode, slots, seed = args
    point = scenario_from_mapping(mapping)
    cfg = SimConfig(slots=slots, seed=seed, request_mode=request_mode, measure="throughput")
    stats = run_throughput(point.sim_scenario(), cfg)
    return {
        "t_s_hat": stats.t_s_hat,
        "t_s_se": stats.t_s_se,
        "t_u_hat": stats.t_u_hat,
        "t_u_se": stats.t_u_se,
        "sim_unstable": stats.unstable_flag,
    }


ANALYTIC_COLS = ("mu", "stable", "busy_prob", "t_s", "t_u", "t_w", "d_u")
SIM_COLS = ("t_s_hat", "t_s_se", "t_u_hat", "t_u_se", "sim_unstable")


def sweep(
    scenario: ScenarioConfig,
    axis: AxisSpec,
    engine: str = "analytic",
    out_path: str | Path | None = None,
    slots: int = 200_000,
    seed: int = 0,
    jobs: int = 1,
) -> list[dict]:
    """One row per grid point; returns the rows and optionally writes a CSV."""
    if engine not in ENGINES:
        raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
    values = axis.values()
    rows: list[dict] = []
    points: list[ScenarioConfig | None] = []
    for value in values:
        row: dict = {"axis": axis.field, "value": value, "error": ""}
        try:
            points.append(_apply(scenario, axis.field, value))
        except (ConfigurationError, ValueError) as exc:
            points.append(None)
            row["error"] = str(exc)
        rows.append(row)

    if engine in ("analytic", "both"):
        for row, point in zip(rows, points):
            if point is None:
                continue
            try:
                row.update(_analytic_row(point))
            except ValueError as exc:
                row["error"] = str(exc)

    if engine in ("simulate", "both"):
        tasks = [
            (scenario_to_mapping(point), point.modes.request_mode, slots, seed + k)
            for k, point in enumerate(points)
            if point is not None
        ]
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_sim_point, tasks))
        else:
            results = [_sim_point(t) for t in tasks]
        it = iter(results)
        for row, point in zip(rows, points):
            if point is not None:
                row.update(next(it))

    if engine == "both":
        for row in rows:
            if row["error"] or "t_s_hat" not in row:
                continue
            ok_s = abs(row["t_s"] - row["t_s_hat"]) <= 3.0 * row["t_s_se"]
            ok_u = abs(row["t_u"] - row["t_u_hat"]) <= 3.0 * row["t_u_se"]
            row["agree_3se"] = ok_s and ok_u

    if out_path is not None:
        header = ["axis", "value", "error"]
        if engine in ("analytic", "both"):
            header += list(ANALYTIC_COLS)
        if engine in ("simulate", "both"):
            header += list(SIM_COLS)
        if engine == "both":
            header.append("agree_3se")
        write_csv(
            Path(out_path),
            [f"sweep of {axis.field} from {axis.start} to {axis.stop} step {axis.step}",
             f"engine: {engine}",
             "columns: " + ", ".join(header)],
            header,
            [[row.get(h, "") for h in header] for row in rows],
        )
    return rows
