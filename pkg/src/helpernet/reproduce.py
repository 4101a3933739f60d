"""Reproduction targets: tables and figure data, with embedded golden checks.

Each target writes one CSV (column schema documented in '#' header comments,
fixed order, deterministic float formatting) into the output directory;
figure targets render a PNG next to the CSV.  Golden comparisons only apply
when the scenario sections they depend on are still at the reference
defaults; otherwise rows are emitted computed-only and flagged "no golden".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import goldens
from .cache import CacheSizes, CatalogConfig, hit_profile
from .delay import DelayInputs, solve_delays
from .errors import RegimeError
from .figures import render_lines
from .optimize import OptimizationProblem, optimize
from .scenario import ScenarioConfig, scenario_to_mapping, default_scenario, with_access, with_shape, with_sizes
from .throughput import weighted_throughput

WEIGHTS = (0.25, 0.5, 0.75)
SHAPES = (0.5, 1.2)

TARGETS = (
    "link_table",
    "cache_table",
    "unstable_opt_table",
    "unstable_opt_table_MD0",
    "unstable_opt_table_MS0",
    "stable_opt_table",
    "fig_throughput_vs_lambda",
    "fig_throughput_vs_MU",
    "fig_delay_vs_lambda",
    "fig_delay_vs_alpha",
    "fig_delay_vs_qs",
    "fig_delay_vs_qd",
    "fig_delay_vs_MU",
)


@dataclass
class ReproduceSummary:
    target: str
    files: list[Path] = field(default_factory=list)
    checks: list[goldens.GoldenCheck] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(c.passed is False for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            if c.passed is None:
                out.append(f"[{self.target}] {c.key}: computed {_fmt(c.computed)} (no golden)")
            else:
                out.append(
                    f"[{self.target}] {c.key}: computed {_fmt(c.computed)} vs "
                    f"{_fmt(c.golden)} +-{_fmt(c.tol)} -> {c.status}"
                )
        return out


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        if math.isinf(x):
            return "inf"
        return format(x, ".10g")
    if x is None:
        return ""
    return str(x)


def write_csv(path: Path, comments: list[str], header: list[str], rows: list[list]) -> Path:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def _section_is_default(scenario: ScenarioConfig, section: str) -> bool:
    return scenario_to_mapping(scenario)[section] == scenario_to_mapping(default_scenario())[section]


def reproduce(
    target: str,
    out_dir: str | Path,
    scenario: ScenarioConfig | None = None,
    arrival_rate: float | None = None,
) -> ReproduceSummary:
    """Run one reproduction target; returns the summary with golden checks."""
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    scenario = scenario or default_scenario()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[target](scenario, out, arrival_rate)


def reproduce_all(
    out_dir: str | Path,
    scenario: ScenarioConfig | None = None,
    arrival_rate: float | None = None,
) -> list[ReproduceSummary]:
    return [reproduce(t, out_dir, scenario, arrival_rate) for t in TARGETS]


def _link_table(scenario: ScenarioConfig, out: Path, _lam) -> ReproduceSummary:
    summary = ReproduceSummary("link_table")
    table = scenario.success_table().as_dict()
    use_goldens = _section_is_default(scenario, "phy")
    rows = []
    for key, value in table.items():
        g = goldens.LINK_TABLE.get(key) if use_goldens else None
        chk = goldens.check(g, value, key=key)
        summary.checks.append(chk)
        rows.append([key, value, chk.golden, chk.tol, chk.status, g.source if g else ""])
    summary.files.append(
        write_csv(
            out / "link_table.csv",
            ["link success probabilities", "columns: quantity, computed, golden, tol, status, source"],
            ["quantity", "computed", "golden", "tol", "status", "source"],
            rows,
        )
    )
    return summary


def _cache_table(scenario: ScenarioConfig, out: Path, _lam) -> ReproduceSummary:
    summary = ReproduceSummary("cache_table")
    use_goldens = (
        _section_is_default(scenario, "caches")
        and scenario.catalog.file_count == default_scenario().catalog.file_count
    )
    rows = []
    for shape in SHAPES:
        profile = with_shape(scenario, shape).hit_profile()
        for name, value in (("q_u", profile.q_u), ("p_hd", profile.p_hd), ("p_hs", profile.p_hs)):
            g = goldens.CACHE_TABLE.get((str(shape), name)) if use_goldens else None
            chk = goldens.check(g, value, key=f"{shape}/{name}")
            summary.checks.append(chk)
            rows.append([shape, name, value, chk.golden, chk.tol, chk.status, g.source if g else ""])
    summary.files.append(
        write_csv(
            out / "cache_table.csv",
            [
                "hit profile by zipf shape",
                "columns: zipf_shape, quantity, computed, golden, tol, status, source",
            ],
            ["zipf_shape", "quantity", "computed", "golden", "tol", "status", "source"],
            rows,
        )
    )
    return summary


def _variant_sizes(scenario: ScenarioConfig, variant: str) -> ScenarioConfig:
    if variant == "md0":
        return with_sizes(scenario, m_d=0)
    if variant == "ms0":
        return with_sizes(scenario, m_s=0)
    return scenario


def _unstable_opt(variant: str):
    def run(scenario: ScenarioConfig, out: Path, _lam) -> ReproduceSummary:
        name = {"base": "unstable_opt_table", "md0": "unstable_opt_table_MD0", "ms0": "unstable_opt_table_MS0"}[variant]
        summary = ReproduceSummary(name)
        base = _variant_sizes(scenario, variant)
        use_goldens = (
            _section_is_default(scenario, "phy")
            and _section_is_default(scenario, "caches")
            and scenario.catalog.file_count == default_scenario().catalog.file_count
            and scenario.access.alpha == 0.7
        )
        rows = []
        for shape in SHAPES:
            shaped = with_shape(base, shape)
            hits = shaped.hit_profile()
            table = shaped.success_table()
            for w in WEIGHTS:
                problem = OptimizationProblem(
                    regime="unstable",
                    weight=w,
                    hits=hits,
                    table=table,
                    alpha=scenario.access.alpha,
                    mu_mode=scenario.modes.mu_mode,
                )
                result = optimize(problem)
                g = goldens.UNSTABLE_OPT.get((variant, shape, w)) if use_goldens else None
                chk = goldens.check(g, result.best_value, key=f"{variant}/{shape}/w={w}")
                summary.checks.append(chk)
                qs, qc, qd = result.best_q
                rows.append(
                    [shape, w, result.best_value, qs, qc, qd, chk.golden, chk.tol, chk.status]
                )
        summary.files.append(
            write_csv(
                out / f"{name}.csv",
                [
                    f"maximum weighted throughput, saturated queue, variant={variant}",
                    "columns: zipf_shape, weight, t_w, q_s, q_c, q_d, golden, tol, status",
                ],
                ["zipf_shape", "weight", "t_w", "q_s", "q_c", "q_d", "golden", "tol", "status"],
                rows,
            )
        )
        return summary

    return run


def _stable_opt(scenario: ScenarioConfig, out: Path, lam) -> ReproduceSummary:
    summary = ReproduceSummary("stable_opt_table")
    lam = scenario.access.arrival_rate if lam is None else lam
    rows = []
    for shape in SHAPES:
        shaped = with_shape(scenario, shape)
        hits = shaped.hit_profile()
        table = shaped.success_table()
        for w in WEIGHTS:
            problem = OptimizationProblem(
                regime="stable",
                weight=w,
                hits=hits,
                table=table,
                alpha=scenario.access.alpha,
                arrival_rate=lam,
                mu_mode=scenario.modes.mu_mode,
            )
            result = optimize(problem)
            chk = goldens.check(None, result.best_value, key=f"stable/{shape}/w={w}/lam={lam}")
            summary.checks.append(chk)
            q = result.best_q or (math.nan, math.nan, math.nan)
            rows.append([shape, w, lam, result.best_value, *q, result.feasible])
    summary.files.append(
        write_csv(
            out / "stable_opt_table.csv",
            [
                "maximum weighted throughput, stable queue, computed-only",
                "(the reference tables' arrival rate is unstated, so no goldens apply)",
                "columns: zipf_shape, weight, arrival_rate, t_w, q_s, q_c, q_d, feasible",
            ],
            ["zipf_shape", "weight", "arrival_rate", "t_w", "q_s", "q_c", "q_d", "feasible"],
            rows,
        )
    )
    return summary


def _fig_throughput_vs_lambda(scenario: ScenarioConfig, out: Path, _lam) -> ReproduceSummary:
    summary = ReproduceSummary("fig_throughput_vs_lambda")
    rows = []
    for shape in SHAPES:
        shaped = with_shape(scenario, shape)
        hits = shaped.hit_profile()
        table = shaped.success_table()
        for w in WEIGHTS:
            for lam in np.arange(0.05, 0.701, 0.05):
                lam = round(float(lam), 6)
                problem = OptimizationProblem(
                    regime="stable",
                    weight=w,
                    hits=hits,
                    table=table,
                    alpha=scenario.access.alpha,
                    arrival_rate=lam,
                    mu_mode=scenario.modes.mu_mode,
                )
                result = optimize(problem)
                rows.append(
                    {
                        "zipf_shape": shape,
                        "weight": w,
                        "arrival_rate": lam,
                        "t_w": result.best_value if result.feasible else math.nan,
                        "feasible": result.feasible,
                    }
                )
    summary.files.append(
        write_csv(
            out / "fig_throughput_vs_lambda.csv",
            [
                "maximum stable weighted throughput vs arrival rate",
                "columns: zipf_shape, weight, arrival_rate, t_w, feasible",
            ],
            ["zipf_shape", "weight", "arrival_rate", "t_w", "feasible"],
            [[r["zipf_shape"], r["weight"], r["arrival_rate"], r["t_w"], r["feasible"]] for r in rows],
        )
    )
    summary.files.append(
        render_lines(
            rows,
            x="arrival_rate",
            y="t_w",
            series=("zipf_shape", "weight"),
            out_png=out / "fig_throughput_vs_lambda.png",
            xlabel="arrival rate (packets/slot)",
            ylabel="max weighted throughput",
            title="Stable-queue optimum vs arrival rate",
        )
    )
    return summary


def _fig_throughput_vs_mu_cache(scenario: ScenarioConfig, out: Path, lam) -> ReproduceSummary:
    summary = ReproduceSummary("fig_throughput_vs_MU")
    lam = 0.4 if lam is None else lam
    rows = []
    for regime in ("stable", "unstable"):
        for shape in SHAPES:
            for m_u in range(200, 1001, 200):
                shaped = with_shape(with_sizes(scenario, m_u=m_u), shape)
                hits = shaped.hit_profile()
                table = shaped.success_table()
                for w in WEIGHTS:
                    problem = OptimizationProblem(
                        regime=regime,
                        weight=w,
                        hits=hits,
                        table=table,
                        alpha=scenario.access.alpha,
                        arrival_rate=lam if regime == "stable" else None,
                        mu_mode=scenario.modes.mu_mode,
                    )
                    result = optimize(problem)
                    rows.append(
                        {
                            "regime": regime,
                            "zipf_shape": shape,
                            "weight": w,
                            "m_u": m_u,
                            "t_w": result.best_value if result.feasible else math.nan,
                            "feasible": result.feasible,
                        }
                    )
    summary.files.append(
        write_csv(
            out / "fig_throughput_vs_MU.csv",
            [
                f"maximum weighted throughput vs user cache size (stable rows at arrival_rate={lam})",
                "columns: regime, zipf_shape, weight, m_u, t_w, feasible",
            ],
            ["regime", "zipf_shape", "weight", "m_u", "t_w", "feasible"],
            [
                [r["regime"], r["zipf_shape"], r["weight"], r["m_u"], r["t_w"], r["feasible"]]
                for r in rows
            ],
        )
    )
    for regime in ("stable", "unstable"):
        summary.files.append(
            render_lines(
                [r for r in rows if r["regime"] == regime],
                x="m_u",
                y="t_w",
                series=("zipf_shape", "weight"),
                out_png=out / f"fig_throughput_vs_MU_{regime}.png",
                xlabel="user cache size (files)",
                ylabel="max weighted throughput",
                title=f"Optimum vs user cache size ({regime} queue)",
            )
        )
    return summary


def _delay_fig(name: str, axis_field: str, axis_values, arrival_rates, xlabel: str):
    axis_is_lam = axis_field == "arrival_rate"

    def run(scenario: ScenarioConfig, out: Path, _lam) -> ReproduceSummary:
        summary = ReproduceSummary(name)
        rows = []
        for shape in SHAPES:
            shaped = with_shape(scenario, shape)
            for lam in arrival_rates:
                for value in axis_values:
                    if axis_field == "m_u":
                        point = with_sizes(shaped, m_u=int(value))
                    else:
                        point = with_access(shaped, **{axis_field: float(value)})
                    if lam is not None:
                        point = with_access(point, arrival_rate=float(lam))
                    inputs = DelayInputs.from_regime(
                        point.access,
                        point.hit_profile(),
                        point.success_table(),
                        mode=point.modes.mu_mode,
                    )
                    solution = solve_delays(inputs)
                    row = {
                        "zipf_shape": shape,
                        axis_field: value,
                        "d_u": solution.d_u,
                        "transmit_prob": inputs.transmit_prob,
                    }
                    if not axis_is_lam:
                        row["arrival_rate"] = float(lam)
                    rows.append(row)
        header = ["zipf_shape", axis_field, "d_u", "transmit_prob"]
        if not axis_is_lam:
            header.insert(1, "arrival_rate")
        summary.files.append(
            write_csv(
                out / f"{name}.csv",
                [f"mean user delay vs {axis_field}", "columns: " + ", ".join(header)],
                header,
                [[r[h] for h in header] for r in rows],
            )
        )
        series = ("zipf_shape",) if axis_is_lam else ("zipf_shape", "arrival_rate")
        summary.files.append(
            render_lines(
                rows,
                x=axis_field,
                y="d_u",
                series=series,
                out_png=out / f"{name}.png",
                xlabel=xlabel,
                ylabel="mean delay (slots)",
                title=f"User delay vs {xlabel}",
            )
        )
        return summary

    return run


_RUNNERS = {
    "link_table": _link_table,
    "cache_table": _cache_table,
    "unstable_opt_table": _unstable_opt("base"),
    "unstable_opt_table_MD0": _unstable_opt("md0"),
    "unstable_opt_table_MS0": _unstable_opt("ms0"),
    "stable_opt_table": _stable_opt,
    "fig_throughput_vs_lambda": _fig_throughput_vs_lambda,
    "fig_throughput_vs_MU": _fig_throughput_vs_mu_cache,
    "fig_delay_vs_lambda": _delay_fig(
        "fig_delay_vs_lambda",
        "arrival_rate",
        [round(x, 2) for x in np.arange(0.05, 0.451, 0.05)],
        [None],
        "arrival rate (packets/slot)",
    ),
    "fig_delay_vs_alpha": _delay_fig(
        "fig_delay_vs_alpha",
        "alpha",
        [round(x, 2) for x in np.arange(0.2, 1.001, 0.05)],
        (0.2, 0.4),
        "data-center availability",
    ),
    "fig_delay_vs_qs": _delay_fig(
        "fig_delay_vs_qs",
        "q_s",
        [round(x, 2) for x in np.arange(0.0, 1.001, 0.05)],
        (0.2, 0.4),
        "helper-link access probability",
    ),
    "fig_delay_vs_qd": _delay_fig(
        "fig_delay_vs_qd",
        "q_d",
        [round(x, 2) for x in np.arange(0.0, 1.001, 0.05)],
        (0.2, 0.4),
        "destination-helper access probability",
    ),
    "fig_delay_vs_MU": _delay_fig(
        "fig_delay_vs_MU",
        "m_u",
        list(range(100, 1001, 100)),
        (0.2, 0.4),
        "user cache size (files)",
    ),
}
