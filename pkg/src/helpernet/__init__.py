"""Throughput, delay, and Monte Carlo analysis of a four-node wireless
caching-helper system: a source/destination helper pair exchanging queued
packets while both, plus a randomly available data center, serve a user's
Zipf-popular content requests over Rayleigh-faded slotted random access."""

__version__ = "0.1.0"

from .cache import (
    CacheSizes,
    CatalogConfig,
    CmpcPlacement,
    HitProfile,
    RequestLocation,
    hit_profile,
    sample_request,
    zipf_pmf,
)
from .delay import (
    DelayInputs,
    DelaySolution,
    assemble_delay_system,
    closed_form_checks,
    recursion_residuals,
    solve_delays,
)
from .errors import ConfigurationError, RegimeError
from .optimize import OptimizationProblem, OptimizationResult, feasible_region_probe, optimize
from .phy import (
    LinkGeometry,
    PhyConfig,
    SuccessProbTable,
    build_success_table,
    received_power_factor,
    success_probability,
)
from .scenario import ScenarioConfig, default_scenario, load_scenario, save_scenario
from .simulate import (
    MuModeReport,
    SimConfig,
    SimScenario,
    SimState,
    SimStats,
    mu_mode_discrepancy,
    run_delay,
    run_throughput,
    step,
)
from .throughput import (
    AccessProbs,
    ThroughputReport,
    busy_probability,
    is_stable,
    service_rate,
    throughput_S,
    throughput_U_stable,
    throughput_U_unstable,
    weighted_throughput,
)

__all__ = [
    "AccessProbs",
    "CacheSizes",
    "CatalogConfig",
    "CmpcPlacement",
    "ConfigurationError",
    "DelayInputs",
    "DelaySolution",
    "HitProfile",
    "LinkGeometry",
    "MuModeReport",
    "OptimizationProblem",
    "OptimizationResult",
    "PhyConfig",
    "RegimeError",
    "RequestLocation",
    "ScenarioConfig",
    "SimConfig",
    "SimScenario",
    "SimState",
    "SimStats",
    "SuccessProbTable",
    "ThroughputReport",
    "assemble_delay_system",
    "build_success_table",
    "busy_probability",
    "closed_form_checks",
    "default_scenario",
    "feasible_region_probe",
    "hit_profile",
    "is_stable",
    "load_scenario",
    "mu_mode_discrepancy",
    "optimize",
    "received_power_factor",
    "recursion_residuals",
    "run_delay",
    "run_throughput",
    "sample_request",
    "save_scenario",
    "service_rate",
    "solve_delays",
    "step",
    "success_probability",
    "throughput_S",
    "throughput_U_stable",
    "throughput_U_unstable",
    "weighted_throughput",
    "zipf_pmf",
]
