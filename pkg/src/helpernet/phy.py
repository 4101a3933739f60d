"""Rayleigh-fading link model: received power factors and success probabilities.

A transmission from node ``i`` to node ``j`` succeeds when the SINR at ``j``
clears the receiver threshold.  Under Rayleigh fading the success probability
has the closed form

    P(i -> j | T) = exp(-g_cap * n_j / (v_ij * h_ij))
                    * prod_{k in T \\ {i, j}} (1 + g_int * v_kj * h_kj / (v_ij * h_ij))^-1

with ``h_ij = P_tx(i) / r_ij^p`` the received power factor, ``n_j`` the noise
power at the receiver, ``v`` the fading parameter, and ``T`` the set of nodes
transmitting in the slot.  A receiver that is itself transmitting does not
interfere with its own reception (perfect self-interference cancellation), so
``j`` is always dropped from the interferer set.

Two thresholds are carried separately: ``gamma_capture`` scales the noise term
and ``gamma_interference`` scales each interferer's attenuation factor.  The
defaults (1 and 4, with ``v = 0.25`` on every link) reproduce the reference
link budget used throughout this package to within 1e-3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ConfigurationError

NODES = ("S", "D", "U", "DC")

#: Links the slotted protocol can ever exercise (transmitter, receiver).
PROTOCOL_LINKS = (("S", "D"), ("S", "U"), ("D", "U"), ("DC", "U"), ("DC", "D"))


def received_power_factor(tx_power_mw: float, distance_m: float, pathloss_exponent: float) -> float:
    """Mean received power ``P_tx / r^p`` in watts.

    Parameters
    ----------
    tx_power_mw : float
        Transmit power in milliwatts (converted to watts internally).
    distance_m : float
        Transmitter-receiver distance in meters.
    pathloss_exponent : float
        Path-loss exponent, typically in [2, 6].

    Returns
    -------
    float
        Received power factor in watts.
    """
    if tx_power_mw <= 0:
        raise ValueError(f"tx_power_mw must be > 0, got {tx_power_mw}")
    if distance_m <= 0:
        raise ValueError(f"distance_m must be > 0, got {distance_m}")
    return (tx_power_mw * 1e-3) / distance_m**pathloss_exponent


@dataclass(frozen=True)
class LinkGeometry:
    """Static geometry of one directed link."""

    tx_power_mw: float
    distance_m: float
    pathloss_exponent: float = 4.0
    fading_v: float = 0.25

    def __post_init__(self) -> None:
        if self.tx_power_mw <= 0:
            raise ValueError(f"tx_power_mw must be > 0, got {self.tx_power_mw}")
        if self.distance_m <= 0:
            raise ValueError(f"distance_m must be > 0, got {self.distance_m}")
        if not 2.0 <= self.pathloss_exponent <= 6.0:
            raise ValueError(
                f"pathloss_exponent must be in [2, 6], got {self.pathloss_exponent}"
            )
        if self.fading_v <= 0:
            raise ValueError(f"fading_v must be > 0, got {self.fading_v}")

    @property
    def power_factor_w(self) -> float:
        return received_power_factor(self.tx_power_mw, self.distance_m, self.pathloss_exponent)


@dataclass(frozen=True)
class PhyConfig:
    """Noise, thresholds, and per-link geometry for the whole network."""

    noise_power_w: float
    gamma_capture: float = 1.0
    gamma_interference: float = 4.0
    links: Mapping[tuple[str, str], LinkGeometry] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.noise_power_w <= 0:
            raise ValueError(f"noise_power_w must be > 0, got {self.noise_power_w}")
        if self.gamma_capture <= 0 or self.gamma_interference <= 0:
            raise ValueError("both gamma thresholds must be > 0")

    def geometry(self, tx: str, rx: str) -> LinkGeometry:
        try:
            return self.links[(tx, rx)]
        except KeyError:
            raise ConfigurationError(f"no link geometry configured for {tx}->{rx}") from None


@dataclass(frozen=True)
class SuccessProbTable:
    """Success probabilities for every link/interferer pair the protocol uses.

    The ``_given_X`` entries condition on node ``X`` transmitting in the same
    slot.  ``p_sd_given_d`` equals ``p_sd`` exactly: the destination helper's
    own transmission is cancelled at its receiver.
    """

    p_su: float
    p_du: float
    p_dcu: float
    p_dcu_given_s: float
    p_sd: float
    p_sd_given_d: float
    p_sd_given_dc: float
    p_du_given_s: float

    _PAIRS = (
        ("p_dcu_given_s", "p_dcu"),
        ("p_sd_given_d", "p_sd"),
        ("p_sd_given_dc", "p_sd"),
        ("p_du_given_s", "p_du"),
    )

    def __post_init__(self) -> None:
        for name, value in self.as_dict().items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability, got {value}")
        for with_intf, without in self._PAIRS:
            if getattr(self, with_intf) > getattr(self, without) + 1e-15:
                raise ValueError(f"{with_intf} exceeds {without}")
        if self.p_sd_given_d != self.p_sd:
            raise ValueError("p_sd_given_d must equal p_sd (self-interference is cancelled)")

    def as_dict(self) -> dict[str, float]:
        return {
            "p_su": self.p_su,
            "p_du": self.p_du,
            "p_dcu": self.p_dcu,
            "p_dcu_given_s": self.p_dcu_given_s,
            "p_sd": self.p_sd,
            "p_sd_given_d": self.p_sd_given_d,
            "p_sd_given_dc": self.p_sd_given_dc,
            "p_du_given_s": self.p_du_given_s,
        }


def success_probability(tx: str, rx: str, interferers: Iterable[str], phy: PhyConfig) -> float:
    """Success probability of ``tx -> rx`` given a set of interfering nodes.

    Parameters
    ----------
    tx, rx : str
        Transmitter and receiver node identifiers.
    interferers : iterable of str
        Nodes transmitting in the same slot.  ``tx`` and ``rx`` are ignored if
        present; dropping ``rx`` models perfect self-interference cancellation.
    phy : PhyConfig
        Noise power, thresholds, and link geometries.

    Returns
    -------
    float
        Probability in [0, 1].
    """
    link = phy.geometry(tx, rx)
    signal = link.fading_v * link.power_factor_w
    prob = math.exp(-phy.gamma_capture * phy.noise_power_w / signal)
    for k in set(interferers) - {tx, rx}:
        intf = phy.geometry(k, rx)
        prob /= 1.0 + phy.gamma_interference * intf.fading_v * intf.power_factor_w / signal
    return prob


def build_success_table(phy: PhyConfig) -> SuccessProbTable:
    """Precompute the eight success probabilities used by the protocol."""
    return SuccessProbTable(
        p_su=success_probability("S", "U", (), phy),
        p_du=success_probability("D", "U", (), phy),
        p_dcu=success_probability("DC", "U", (), phy),
        p_dcu_given_s=success_probability("DC", "U", ("S",), phy),
        p_sd=success_probability("S", "D", (), phy),
        p_sd_given_d=success_probability("S", "D", ("D",), phy),
        p_sd_given_dc=success_probability("S", "D", ("DC",), phy),
        p_du_given_s=success_probability("D", "U", ("S",), phy),
    )
