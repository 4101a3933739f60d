"""Scenario configuration: YAML schema, defaults, validation, round-trip.

A scenario file is a nested key/value document with five sections (``phy``,
``catalog``, ``caches``, ``access``, ``modes``).  Every field has a default:
the link budget and cache defaults follow the reference operating tables, the
access defaults follow the delay-study operating point (q_s=0.9, q_c=0.5,
q_d=0.8, alpha=0.7, arrival_rate=0.2).  An empty file is therefore a valid
scenario.  Unknown keys and out-of-range values fail with the offending field
named.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .cache import CacheSizes, CatalogConfig, CmpcPlacement, HitProfile, hit_profile, zipf_pmf
from .errors import ConfigurationError
from .phy import PROTOCOL_LINKS, LinkGeometry, PhyConfig, SuccessProbTable, build_success_table
from .simulate import REQUEST_MODES, SimScenario
from .throughput import MU_MODES, AccessProbs

#: Default transmit powers (mW) and link distances (m) of the reference setup.
DEFAULT_TX_POWER_MW = {"S": 1.0, "D": 0.5, "DC": 10.0}
DEFAULT_DISTANCE_M = {"S_D": 50.0, "S_U": 40.0, "D_U": 50.0, "DC_U": 80.0, "DC_D": 100.0}
DEFAULT_NOISE_W = 1e-11
DEFAULT_PATHLOSS = 4.0
DEFAULT_FADING_V = 0.25
DEFAULT_GAMMA_CAPTURE = 1.0
DEFAULT_GAMMA_INTERFERENCE = 4.0


@dataclass(frozen=True)
class Modes:
    mu_mode: str = "verbatim"
    request_mode: str = "factorized"

    def __post_init__(self) -> None:
        if self.mu_mode not in MU_MODES:
            raise ConfigurationError(f"modes.mu_mode: must be one of {MU_MODES}, got {self.mu_mode!r}")
        if self.request_mode not in REQUEST_MODES:
            raise ConfigurationError(
                f"modes.request_mode: must be one of {REQUEST_MODES}, got {self.request_mode!r}"
            )


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated system description."""

    phy: PhyConfig
    catalog: CatalogConfig
    sizes: CacheSizes
    access: AccessProbs
    modes: Modes = field(default_factory=Modes)

    def hit_profile(self) -> HitProfile:
        return hit_profile(self.catalog, self.sizes)

    def success_table(self) -> SuccessProbTable:
        return build_success_table(self.phy)

    def placement(self) -> CmpcPlacement:
        return CmpcPlacement.from_sizes(self.sizes)

    def pmf(self) -> np.ndarray:
        return zipf_pmf(self.catalog)

    def sim_scenario(self) -> SimScenario:
        needs_pmf = self.modes.request_mode == "zipf-exact"
        return SimScenario(
            probs=self.access,
            hits=self.hit_profile(),
            table=self.success_table(),
            pmf=self.pmf() if needs_pmf else None,
            placement=self.placement() if needs_pmf else None,
        )


def default_scenario() -> ScenarioConfig:
    return scenario_from_mapping({})


def _as_float(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{section}.{key}: expected a number, got {value!r}")
    return float(value)


def _as_int(section: str, key: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{section}.{key}: expected an integer, got {value!r}")
    return value


def _check_known(section: str, data: Mapping[str, Any], known: tuple[str, ...]) -> None:
    for key in data:
        if key not in known:
            raise ConfigurationError(f"unknown field {section}.{key}")


def _build_phy(data: Mapping[str, Any]) -> PhyConfig:
    _check_known(
        "phy",
        data,
        (
            "noise_power_w",
            "gamma_capture",
            "gamma_interference",
            "fading_v",
            "pathloss_exponent",
            "tx_power_mw",
            "distance_m",
            "fading_v_per_link",
        ),
    )
    noise = _as_float("phy", "noise_power_w", data.get("noise_power_w", DEFAULT_NOISE_W))
    g_cap = _as_float("phy", "gamma_capture", data.get("gamma_capture", DEFAULT_GAMMA_CAPTURE))
    g_int = _as_float(
        "phy", "gamma_interference", data.get("gamma_interference", DEFAULT_GAMMA_INTERFERENCE)
    )
    v_global = _as_float("phy", "fading_v", data.get("fading_v", DEFAULT_FADING_V))
    ple = _as_float("phy", "pathloss_exponent", data.get("pathloss_exponent", DEFAULT_PATHLOSS))

    powers = dict(DEFAULT_TX_POWER_MW)
    for node, value in (data.get("tx_power_mw") or {}).items():
        if node not in powers:
            raise ConfigurationError(f"unknown field phy.tx_power_mw.{node}")
        powers[node] = _as_float("phy.tx_power_mw", node, value)
    distances = dict(DEFAULT_DISTANCE_M)
    for link, value in (data.get("distance_m") or {}).items():
        if link not in distances:
            raise ConfigurationError(f"unknown field phy.distance_m.{link}")
        distances[link] = _as_float("phy.distance_m", link, value)
    v_per_link = {}
    for link, value in (data.get("fading_v_per_link") or {}).items():
        if link not in DEFAULT_DISTANCE_M:
            raise ConfigurationError(f"unknown field phy.fading_v_per_link.{link}")
        v_per_link[link] = _as_float("phy.fading_v_per_link", link, value)

    links = {}
    for tx, rx in PROTOCOL_LINKS:
        key = f"{tx}_{rx}"
        try:
            links[(tx, rx)] = LinkGeometry(
                tx_power_mw=powers[tx],
                distance_m=distances[key],
                pathloss_exponent=ple,
                fading_v=v_per_link.get(key, v_global),
            )
        except ValueError as exc:
            raise ConfigurationError(f"phy link {key}: {exc}") from None
    try:
        return PhyConfig(
            noise_power_w=noise, gamma_capture=g_cap, gamma_interference=g_int, links=links
        )
    except ValueError as exc:
        raise ConfigurationError(f"phy: {exc}") from None


def scenario_from_mapping(data: Mapping[str, Any] | None) -> ScenarioConfig:
    """Validate a parsed mapping, applying defaults for anything omitted."""
    data = data or {}
    if not isinstance(data, Mapping):
        raise ConfigurationError("scenario file must contain a mapping of sections")
    _check_known("scenario", data, ("phy", "catalog", "caches", "access", "modes"))

    phy = _build_phy(data.get("phy") or {})

    cat = data.get("catalog") or {}
    _check_known("catalog", cat, ("file_count", "zipf_shape"))
    try:
        catalog = CatalogConfig(
            file_count=_as_int("catalog", "file_count", cat.get("file_count", 10_000)),
            zipf_shape=_as_float("catalog", "zipf_shape", cat.get("zipf_shape", 0.5)),
        )
    except ValueError as exc:
        raise ConfigurationError(f"catalog: {exc}") from None

    cch = data.get("caches") or {}
    _check_known("caches", cch, ("m_u", "m_d", "m_s"))
    try:
        sizes = CacheSizes(
            m_u=_as_int("caches", "m_u", cch.get("m_u", 200)),
            m_d=_as_int("caches", "m_d", cch.get("m_d", 1000)),
            m_s=_as_int("caches", "m_s", cch.get("m_s", 2000)),
        )
    except ValueError as exc:
        raise ConfigurationError(f"caches: {exc}") from None
    if sizes.total > catalog.file_count:
        raise ConfigurationError(
            f"caches: m_u + m_d + m_s = {sizes.total} exceeds catalog.file_count "
            f"= {catalog.file_count}"
        )

    acc = data.get("access") or {}
    _check_known("access", acc, ("q_s", "q_c", "q_d", "alpha", "arrival_rate", "weight"))
    try:
        access = AccessProbs(
            q_s=_as_float("access", "q_s", acc.get("q_s", 0.9)),
            q_c=_as_float("access", "q_c", acc.get("q_c", 0.5)),
            q_d=_as_float("access", "q_d", acc.get("q_d", 0.8)),
            alpha=_as_float("access", "alpha", acc.get("alpha", 0.7)),
            arrival_rate=_as_float("access", "arrival_rate", acc.get("arrival_rate", 0.2)),
            weight=_as_float("access", "weight", acc.get("weight", 0.5)),
        )
    except ValueError as exc:
        raise ConfigurationError(f"access: {exc}") from None

    mod = data.get("modes") or {}
    _check_known("modes", mod, ("mu_mode", "request_mode"))
    modes = Modes(
        mu_mode=mod.get("mu_mode", "verbatim"),
        request_mode=mod.get("request_mode", "factorized"),
    )
    return ScenarioConfig(phy=phy, catalog=catalog, sizes=sizes, access=access, modes=modes)


def scenario_to_mapping(config: ScenarioConfig) -> dict[str, Any]:
    """Inverse of :func:`scenario_from_mapping` (values only, no comments)."""
    sd = config.phy.links[("S", "D")]
    powers = {tx: config.phy.links[(tx, rx)].tx_power_mw for tx, rx in PROTOCOL_LINKS}
    distances = {f"{tx}_{rx}": config.phy.links[(tx, rx)].distance_m for tx, rx in PROTOCOL_LINKS}
    v_per_link = {
        f"{tx}_{rx}": geo.fading_v
        for (tx, rx), geo in config.phy.links.items()
        if geo.fading_v != sd.fading_v
    }
    phy: dict[str, Any] = {
        "noise_power_w": config.phy.noise_power_w,
        "gamma_capture": config.phy.gamma_capture,
        "gamma_interference": config.phy.gamma_interference,
        "fading_v": sd.fading_v,
        "pathloss_exponent": sd.pathloss_exponent,
        "tx_power_mw": powers,
        "distance_m": distances,
    }
    if v_per_link:
        phy["fading_v_per_link"] = v_per_link
    return {
        "phy": phy,
        "catalog": {
            "file_count": config.catalog.file_count,
            "zipf_shape": config.catalog.zipf_shape,
        },
        "caches": {"m_u": config.sizes.m_u, "m_d": config.sizes.m_d, "m_s": config.sizes.m_s},
        "access": {
            "q_s": config.access.q_s,
            "q_c": config.access.q_c,
            "q_d": config.access.q_d,
            "alpha": config.access.alpha,
            "arrival_rate": config.access.arrival_rate,
            "weight": config.access.weight,
        },
        "modes": {"mu_mode": config.modes.mu_mode, "request_mode": config.modes.request_mode},
    }


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load and validate a scenario file; an empty file yields the defaults."""
    text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: not valid YAML: {exc}") from None
    return scenario_from_mapping(data)


def save_scenario(config: ScenarioConfig, path: str | Path) -> None:
    """Write a scenario file that loads back field-for-field."""
    header = (
        "# helpernet scenario\n"
        "# Omitted fields fall back to the documented defaults: the reference\n"
        "# link budget and cache setup, and the delay-study access point.\n"
    )
    body = yaml.safe_dump(scenario_to_mapping(config), sort_keys=False)
    Path(path).write_text(header + body)


def with_access(config: ScenarioConfig, **overrides: float) -> ScenarioConfig:
    """Scenario with some access-probability fields replaced."""
    return replace(config, access=replace(config.access, **overrides))


def with_sizes(config: ScenarioConfig, **overrides: int) -> ScenarioConfig:
    sizes = replace(config.sizes, **overrides)
    if sizes.total > config.catalog.file_count:
        raise ConfigurationError(
            f"caches: m_u + m_d + m_s = {sizes.total} exceeds catalog.file_count "
            f"= {config.catalog.file_count}"
        )
    return replace(config, sizes=sizes)


def with_shape(config: ScenarioConfig, zipf_shape: float) -> ScenarioConfig:
    return replace(config, catalog=replace(config.catalog, zipf_shape=zipf_shape))
