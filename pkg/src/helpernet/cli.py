"""Command-line interface.

Subcommands: linkprobs, hitprofile, analytic, delay, optimize, simulate,
sweep, reproduce.  The default output directory comes from the HELPERNET_OUT
environment variable (falling back to ./out) and every command accepts
--config for a scenario file; omitted fields use the documented defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .delay import DelayInputs, closed_form_checks, solve_delays
from .errors import ConfigurationError
from .optimize import OptimizationProblem, optimize
from .reproduce import TARGETS, reproduce, reproduce_all
from .scenario import ScenarioConfig, default_scenario, load_scenario
from .simulate import SimConfig, mu_mode_discrepancy, run_delay, run_throughput
from .sweep import ENGINES, AxisSpec, sweep
from .throughput import is_stable, service_rate, weighted_throughput


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario file (YAML); defaults apply")
    common.add_argument("--seed", type=int, default=0, help="simulation seed")
    common.add_argument(
        "--out",
        type=Path,
        default=None,
        help="output directory (default: $HELPERNET_OUT or ./out)",
    )
    common.add_argument("--slots", type=int, default=1_000_000, help="simulated slots")
    common.add_argument(
        "--mu-mode",
        choices=("verbatim", "corrected"),
        default=None,
        help="service-rate variant (corrected is what the protocol realizes)",
    )
    common.add_argument(
        "--request-mode",
        choices=("factorized", "factorized-independence", "zipf-exact"),
        default=None,
        help="how the user's cache hits are drawn",
    )
    common.add_argument("--jobs", type=int, default=1, help="parallel workers")

    parser = argparse.ArgumentParser(prog="helpernet", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("linkprobs", parents=[common], help="print the link success probabilities")
    sub.add_parser("hitprofile", parents=[common], help="print the cache hit profile")
    sub.add_parser("analytic", parents=[common], help="print the throughput report")
    sub.add_parser("delay", parents=[common], help="print the solved delays")

    p_opt = sub.add_parser("optimize", parents=[common], help="maximize the weighted throughput")
    p_opt.add_argument("--regime", choices=("stable", "unstable"), default="unstable")
    p_opt.add_argument("--w", type=float, default=None, help="objective weight (default: scenario)")
    p_opt.add_argument("--lam", type=float, default=None, help="arrival rate for the stable regime")

    p_sim = sub.add_parser("simulate", parents=[common], help="run the Monte Carlo")
    p_sim.add_argument("--measure", choices=("throughput", "delay"), default="throughput")
    p_sim.add_argument("--warmup", type=int, default=10_000)
    p_sim.add_argument("--requests", type=int, default=100_000, help="delay-mode request count")

    p_sweep = sub.add_parser("sweep", parents=[common], help="sweep one scalar config field")
    p_sweep.add_argument("--axis", required=True, help="dotted field, e.g. access.alpha")
    p_sweep.add_argument("--start", type=float, required=True)
    p_sweep.add_argument("--stop", type=float, required=True)
    p_sweep.add_argument("--step", type=float, required=True)
    p_sweep.add_argument("--engine", choices=ENGINES, default="analytic")

    p_rep = sub.add_parser("reproduce", parents=[common], help="emit table/figure data with golden checks")
    p_rep.add_argument("target", choices=TARGETS + ("all",))
    p_rep.add_argument("--lam", type=float, default=None, help="arrival rate for stable tables")
    return parser


def _scenario(args) -> ScenarioConfig:
    scenario = load_scenario(args.config) if args.config else default_scenario()
    modes = scenario.modes
    if args.mu_mode:
        modes = replace(modes, mu_mode=args.mu_mode)
    if args.request_mode:
        modes = replace(modes, request_mode=args.request_mode)
    return replace(scenario, modes=modes)


def _out_dir(args) -> Path:
    if args.out is not None:
        return args.out
    return Path(os.environ.get("HELPERNET_OUT", "out"))


def _cmd_linkprobs(args) -> int:
    table = _scenario(args).success_table()
    for key, value in table.as_dict().items():
        print(f"{key} = {value:.6f}")
    return 0


def _cmd_hitprofile(args) -> int:
    scenario = _scenario(args)
    profile = scenario.hit_profile()
    print(f"q_u  = {profile.q_u:.6f}")
    print(f"p_hd = {profile.p_hd:.6f}")
    print(f"p_hs = {profile.p_hs:.6f}")
    return 0


def _cmd_analytic(args) -> int:
    scenario = _scenario(args)
    hits = scenario.hit_profile()
    table = scenario.success_table()
    mode = scenario.modes.mu_mode
    mu = service_rate(scenario.access, hits, table, mode)
    regime = "stable" if is_stable(scenario.access.arrival_rate, mu) else "unstable"
    report = weighted_throughput(regime, scenario.access, hits, table, mode)
    print(f"mu_mode   = {mode}")
    print(f"regime    = {regime}")
    print(f"mu        = {report.mu:.6f}")
    print(f"stable    = {report.stable}")
    print(f"busy_prob = {report.busy_prob:.6f}")
    print(f"t_s       = {report.t_s:.6f}")
    print(f"t_u       = {report.t_u:.6f}")
    print(f"t_w       = {report.t_w:.6f}")
    return 0


def _cmd_delay(args) -> int:
    scenario = _scenario(args)
    inputs = DelayInputs.from_regime(
        scenario.access, scenario.hit_profile(), scenario.success_table(), scenario.modes.mu_mode
    )
    solution = solve_delays(inputs)
    print(f"transmit_prob = {inputs.transmit_prob:.6f}")
    for name in ("d_u", "d_s1", "d_s2", "d_dc", "d_dc0s", "d_dc1s", "d_dc0d", "d_dc1d", "d_d"):
        print(f"{name:7s} = {getattr(solution, name):.6f}")
    if solution.finite:
        report = closed_form_checks(inputs, solution)
        print(f"closed-form residuals: dc={report.dc_residual:.2e} "
              f"s1={report.s1_residual:.2e} dd_rate={report.dd_rate_residual:.2e}")
        print(f"user-row variant gap = {report.d_u_variant_gap:.6f}")
    return 0


def _cmd_optimize(args) -> int:
    scenario = _scenario(args)
    weight = scenario.access.weight if args.w is None else args.w
    lam = args.lam
    if args.regime == "stable" and lam is None:
        lam = scenario.access.arrival_rate
    problem = OptimizationProblem(
        regime=args.regime,
        weight=weight,
        hits=scenario.hit_profile(),
        table=scenario.success_table(),
        alpha=scenario.access.alpha,
        arrival_rate=lam,
        mu_mode=scenario.modes.mu_mode,
    )
    result = optimize(problem)
    print(f"regime   = {args.regime}")
    print(f"weight   = {weight}")
    if args.regime == "stable":
        print(f"lam      = {lam}")
    print(f"feasible = {result.feasible}")
    if result.feasible:
        qs, qc, qd = result.best_q
        print(f"best_q   = ({qs:.4f}, {qc:.4f}, {qd:.4f})")
        print(f"best_t_w = {result.best_value:.6f}")
    return 0


def _cmd_simulate(args) -> int:
    scenario = _scenario(args)
    sim_mu = "verbatim-eq2" if scenario.modes.mu_mode == "verbatim" else "protocol"
    cfg = SimConfig(
        slots=args.slots,
        seed=args.seed,
        request_mode=scenario.modes.request_mode,
        mu_mode=sim_mu,
        measure=args.measure,
        warmup_slots=min(args.warmup, max(0, args.slots - 1)),
        target_requests=args.requests,
    )
    scen = scenario.sim_scenario()
    if args.measure == "throughput":
        stats = run_throughput(scen, cfg)
        print(f"slots        = {stats.slots}")
        print(f"t_s_hat      = {stats.t_s_hat:.6f} +- {stats.t_s_se:.6f}")
        print(f"t_u_hat      = {stats.t_u_hat:.6f} +- {stats.t_u_se:.6f}")
        print(f"service_rate = {stats.service_rate_hat:.6f} +- {stats.service_rate_se:.6f}")
        print(f"busy_frac    = {stats.busy_frac:.6f}")
        print(f"mean_queue   = {stats.mean_queue_len:.3f}")
        print(f"drift_slope  = {stats.drift_slope:.6f}")
        print(f"unstable     = {stats.unstable_flag}")
        report = mu_mode_discrepancy(scen, stats)
        print(
            f"mu formulas: verbatim={report.mu_verbatim:.6f} corrected={report.mu_corrected:.6f}"
            f" -> realized matches: {report.matches}"
        )
    else:
        stats = run_delay(scen, cfg)
        print(f"completed  = {stats.completed_requests}")
        print(f"timed_out  = {stats.timed_out_requests}")
        print(f"mean_delay = {stats.mean_delay_hat:.6f} +- {stats.mean_delay_se:.6f}")
    return 0


def _cmd_sweep(args) -> int:
    scenario = _scenario(args)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    axis = AxisSpec(field=args.axis, start=args.start, stop=args.stop, step=args.step)
    path = out / f"sweep_{args.axis.replace('.', '_')}.csv"
    sweep(
        scenario,
        axis,
        engine=args.engine,
        out_path=path,
        slots=args.slots,
        seed=args.seed,
        jobs=args.jobs,
    )
    print(f"wrote {path}")
    return 0


def _cmd_reproduce(args) -> int:
    scenario = _scenario(args)
    out = _out_dir(args)
    if args.target == "all":
        summaries = reproduce_all(out, scenario, args.lam)
    else:
        summaries = [reproduce(args.target, out, scenario, args.lam)]
    failed = False
    for summary in summaries:
        for line in summary.lines():
            print(line)
        for path in summary.files:
            print(f"wrote {path}")
        failed = failed or summary.failed
    print("golden checks: " + ("FAILED" if failed else "all passed (where applicable)"))
    return 1 if failed else 0


_COMMANDS = {
    "linkprobs": _cmd_linkprobs,
    "hitprofile": _cmd_hitprofile,
    "analytic": _cmd_analytic,
    "delay": _cmd_delay,
    "optimize": _cmd_optimize,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "reproduce": _cmd_reproduce,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
