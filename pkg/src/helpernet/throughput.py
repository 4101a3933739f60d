"""Closed-form service rate, stability test, and per-flow throughputs.

The source helper's queue serves the helper-to-helper packet flow; the user's
throughput comes from whichever node answers its external content requests.
Two variants of the service-rate formula are carried: ``verbatim`` keeps the
doubled attempt probability that appears in the term where the data center
interferes with the helper link, ``corrected`` applies that probability once.
The slotted protocol realizes the corrected variant; the verbatim one is kept
as the default because the reference operating tables were produced with it
(the two coincide at q_s in {0, 1}, where all tabulated optima sit).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cache import HitProfile
from .errors import RegimeError
from .phy import SuccessProbTable

MU_MODES = ("verbatim", "corrected")
REGIMES = ("stable", "unstable")


@dataclass(frozen=True)
class AccessProbs:
    """Random-access probabilities plus arrival rate and objective weight."""

    q_s: float
    q_c: float
    q_d: float
    alpha: float
    arrival_rate: float = 0.0
    weight: float = 0.5

    def __post_init__(self) -> None:
        for name in ("q_s", "q_c", "q_d", "alpha", "arrival_rate", "weight"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class ThroughputReport:
    """Analytic throughput summary for one operating point."""

    mu: float
    stable: bool
    busy_prob: float
    t_s: float
    t_u: float
    t_w: float


def _check_mode(mode: str) -> None:
    if mode not in MU_MODES:
        raise ValueError(f"mu mode must be one of {MU_MODES}, got {mode!r}")


# Broadcasting cores: every q argument may be a float or a numpy array of a
# common shape.  The public API below wraps them for scalar inputs.

def _mu(qs, qd, q_u, p_hd, alpha, table: SuccessProbTable, mode: str):
    d_serving = qd * p_hd
    third_qs = qs if mode == "verbatim" else 1.0
    return qs * (
        (1.0 - q_u) * table.p_sd
        + q_u * d_serving * table.p_sd_given_d
        + q_u * (1.0 - d_serving) * alpha * third_qs * table.p_sd_given_dc
        + q_u * (1.0 - d_serving) * (1.0 - alpha) * table.p_sd
    )


def _busy_bracket(qd, p_hd, alpha, table: SuccessProbTable):
    # Serving options while the source helper transmits: destination, else DC.
    d_serving = qd * p_hd
    return d_serving * table.p_du_given_s + (1.0 - d_serving) * alpha * table.p_dcu_given_s


def _free_bracket(qc, qd, p_hd, p_hs, alpha, table: SuccessProbTable):
    # Serving hierarchy while the source helper is silent: D, then S, then DC.
    d_serving = qd * p_hd
    s_serving = qc * p_hs
    return (
        d_serving * table.p_du
        + (1.0 - d_serving) * s_serving * table.p_su
        + (1.0 - d_serving) * (1.0 - s_serving) * alpha * table.p_dcu
    )


def _t_u_unstable(qs, qc, qd, q_u, p_hd, p_hs, alpha, table: SuccessProbTable):
    return q_u * qs * _busy_bracket(qd, p_hd, alpha, table) + q_u * (1.0 - qs) * _free_bracket(
        qc, qd, p_hd, p_hs, alpha, table
    )


def _t_u_stable(qs, qc, qd, q_u, p_hd, p_hs, alpha, busy, table: SuccessProbTable):
    free = _free_bracket(qc, qd, p_hd, p_hs, alpha, table)
    return q_u * (
        (1.0 - busy) * free
        + busy * qs * _busy_bracket(qd, p_hd, alpha, table)
        + busy * (1.0 - qs) * free
    )


def service_rate(
    probs: AccessProbs, hits: HitProfile, table: SuccessProbTable, mode: str = "verbatim"
) -> float:
    """Average packets per slot the source helper's queue can serve."""
    _check_mode(mode)
    return float(_mu(probs.q_s, probs.q_d, hits.q_u, hits.p_hd, probs.alpha, table, mode))


def is_stable(arrival_rate: float, mu: float) -> bool:
    """Queue stability: average arrival rate strictly below the service rate."""
    return arrival_rate < mu


def busy_probability(arrival_rate: float, mu: float) -> float:
    """Stationary probability the queue is non-empty; 1 once saturated."""
    if mu <= 0.0:
        return 0.0 if arrival_rate == 0.0 else 1.0
    if arrival_rate >= mu:
        return 1.0
    return arrival_rate / mu


def throughput_S(arrival_rate: float, mu: float) -> float:
    """Helper-to-helper throughput: the arrival rate while stable, else mu."""
    return arrival_rate if arrival_rate < mu else mu


def throughput_U_stable(
    probs: AccessProbs, hits: HitProfile, table: SuccessProbTable, mode: str = "verbatim"
) -> float:
    """User throughput with a stable queue (busy probability lambda/mu).

    ``arrival_rate == 0`` is always accepted (the queue is then permanently
    empty, busy probability 0, whatever the service rate).
    """
    mu = service_rate(probs, hits, table, mode)
    if probs.arrival_rate > 0.0 and not is_stable(probs.arrival_rate, mu):
        raise RegimeError(
            f"stable-regime throughput needs arrival_rate < mu, got "
            f"{probs.arrival_rate} >= {mu:.6g}"
        )
    busy = busy_probability(probs.arrival_rate, mu)
    return float(
        _t_u_stable(
            probs.q_s, probs.q_c, probs.q_d, hits.q_u, hits.p_hd, hits.p_hs, probs.alpha,
            busy, table,
        )
    )


def throughput_U_unstable(probs: AccessProbs, hits: HitProfile, table: SuccessProbTable) -> float:
    """User throughput with a saturated queue (busy probability 1)."""
    return float(
        _t_u_unstable(
            probs.q_s, probs.q_c, probs.q_d, hits.q_u, hits.p_hd, hits.p_hs, probs.alpha, table
        )
    )


def weighted_throughput(
    regime: str,
    probs: AccessProbs,
    hits: HitProfile,
    table: SuccessProbTable,
    mode: str = "verbatim",
) -> ThroughputReport:
    """Weighted sum ``w*t_s + (1-w)*t_u`` evaluated in the requested regime.

    The report's ``stable`` flag records the actual stability fact
    (arrival_rate < mu); ``busy_prob``, ``t_s``, and ``t_u`` follow the
    requested regime.
    """
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}, got {regime!r}")
    mu = service_rate(probs, hits, table, mode)
    stable = is_stable(probs.arrival_rate, mu)
    if regime == "stable":
        if probs.arrival_rate > 0.0 and not stable:
            raise RegimeError(
                f"arrival_rate {probs.arrival_rate} is not below mu {mu:.6g}"
            )
        busy = busy_probability(probs.arrival_rate, mu)
        t_s = probs.arrival_rate
        t_u = throughput_U_stable(probs, hits, table, mode)
    else:
        busy = 1.0
        t_s = mu
        t_u = throughput_U_unstable(probs, hits, table)
    t_w = probs.weight * t_s + (1.0 - probs.weight) * t_u
    return ThroughputReport(mu=mu, stable=stable, busy_prob=busy, t_s=t_s, t_u=t_u, t_w=t_w)
