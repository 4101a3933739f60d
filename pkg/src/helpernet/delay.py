"""Average content-retrieval delay at the user, solved as a linear system.

The retry process is a nine-unknown affine recursion: the delay seen from each
retry state equals one slot plus a probability-weighted mix of the delays of
the states it can fall back to.  Writing the unknowns as ``x`` the system is
``x = T x + c`` with ``T`` non-negative and row sums at most 1, so the single
source of truth here is the exact solve of ``(I - T) x = c``.  The handful of
closed forms that exist for individual unknowns are demoted to validation
checks against that solve.

States with no path to a successful reception (for example the data-center
branch with the data center permanently unavailable) have no absorbing exit;
they are detected structurally, before solving, and reported as ``inf``.

One term of the user-delay row is treated specially: the branch where the file
sits at the destination helper, the source helper is silent, and the
destination transmits but fails must continue into a retry.  ``solve_delays``
keeps that continuation by default (the probability-conserving row, which the
Monte Carlo protocol realizes); ``drop_d_retry_term=True`` reproduces the
truncated variant, and :func:`closed_form_checks` reports the gap between the
two.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .cache import HitProfile
from .phy import SuccessProbTable
from .throughput import AccessProbs, busy_probability, service_rate

log = logging.getLogger(__name__)

#: Order of unknowns in the assembled system.
UNKNOWNS = ("d_u", "d_s1", "d_s2", "d_dc", "d_dc0s", "d_dc1s", "d_dc0d", "d_dc1d", "d_d")

_EXIT_EPS = 1e-12


@dataclass(frozen=True)
class DelayInputs:
    """Everything the delay recursion depends on.

    ``transmit_prob`` is the per-slot probability that the source helper
    transmits to the destination helper: its access probability times the
    stationary busy probability of its queue.
    """

    probs: AccessProbs
    hits: HitProfile
    table: SuccessProbTable
    transmit_prob: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.transmit_prob <= 1.0:
            raise ValueError(f"transmit_prob must be in [0, 1], got {self.transmit_prob}")

    @classmethod
    def from_regime(
        cls,
        probs: AccessProbs,
        hits: HitProfile,
        table: SuccessProbTable,
        mode: str = "verbatim",
    ) -> "DelayInputs":
        """Derive ``transmit_prob = q_s * P(queue non-empty)`` from the arrival rate."""
        mu = service_rate(probs, hits, table, mode)
        busy = busy_probability(probs.arrival_rate, mu)
        return cls(probs=probs, hits=hits, table=table, transmit_prob=probs.q_s * busy)


@dataclass(frozen=True)
class DelaySolution:
    """Solved delays in slots; unreachable receptions are ``inf``."""

    d_u: float
    d_s1: float
    d_s2: float
    d_dc: float
    d_dc0s: float
    d_dc1s: float
    d_dc0d: float
    d_dc1d: float
    d_d: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in UNKNOWNS])

    @property
    def finite(self) -> bool:
        return bool(np.isfinite(self.as_array()).all())


@dataclass(frozen=True)
class DelaySystem:
    """The assembled system ``(I - T) x = c``."""

    matrix: np.ndarray  # I - T, shape (9, 9)
    rhs: np.ndarray  # c, shape (9,)

    @property
    def recycling(self) -> np.ndarray:
        """The non-negative recursion matrix T."""
        return np.eye(len(UNKNOWNS)) - self.matrix


@dataclass(frozen=True)
class ClosedFormReport:
    """Residuals of the closed forms against the linear solve."""

    dc_residual: float
    s1_residual: float
    dd_rate_residual: float
    d_u_variant_gap: float


def assemble_delay_system(inputs: DelayInputs, drop_d_retry_term: bool = False) -> DelaySystem:
    """Encode the nine delay recursions as ``(I - T) x = c``.

    With ``drop_d_retry_term=True`` the user-delay row omits the retry
    continuation after a failed destination-helper transmission in the
    source-silent branch (the truncated variant; see the module docstring).
    """
    p = inputs.probs
    t = inputs.table
    psd = inputs.transmit_prob
    pn = 1.0 - psd
    qc, qd, alpha = p.q_c, p.q_d, p.alpha
    p_hd, p_hs = inputs.hits.p_hd, inputs.hits.p_hs

    i = {name: k for k, name in enumerate(UNKNOWNS)}
    T = np.zeros((9, 9))
    c = np.zeros(9)

    # Delay from S given D missed: S attempts with q_c, otherwise DC gets the slot.
    T[i["d_s1"], i["d_s1"]] = qc * (1.0 - t.p_su)
    T[i["d_s1"], i["d_dc0s"]] = 1.0 - qc
    c[i["d_s1"]] = qc

    # Delay from S given D caches the file but stays silent; failure returns to D.
    T[i["d_s2"], i["d_d"]] = 1.0 - qc * t.p_su
    c[i["d_s2"]] = 1.0

    # Data-center retry loop, with/without the source helper interfering.
    T[i["d_dc"], i["d_dc"]] = psd * (1.0 - alpha * t.p_dcu_given_s) + pn * (
        1.0 - alpha * t.p_dcu
    )
    c[i["d_dc"]] = 1.0

    # One data-center attempt, falling back to the S or D track on failure.
    T[i["d_dc0s"], i["d_s1"]] = 1.0 - alpha * t.p_dcu
    c[i["d_dc0s"]] = 1.0
    T[i["d_dc1s"], i["d_s1"]] = 1.0 - alpha * t.p_dcu_given_s
    c[i["d_dc1s"]] = 1.0
    T[i["d_dc0d"], i["d_d"]] = 1.0 - alpha * t.p_dcu
    c[i["d_dc0d"]] = 1.0
    T[i["d_dc1d"], i["d_d"]] = 1.0 - alpha * t.p_dcu_given_s
    c[i["d_dc1d"]] = 1.0

    # Destination-helper track.
    T[i["d_d"], i["d_d"]] = qd * (psd * (1.0 - t.p_du_given_s) + pn * (1.0 - t.p_du))
    T[i["d_d"], i["d_dc1d"]] = psd * (1.0 - qd)
    T[i["d_d"], i["d_s2"]] = pn * (1.0 - qd) * p_hs
    T[i["d_d"], i["d_dc0d"]] = pn * (1.0 - qd) * (1.0 - p_hs)
    c[i["d_d"]] = qd

    # User delay: mix of the three top-level branches.
    w_d = p_hd
    w_s = (1.0 - p_hd) * p_hs
    w_dc = (1.0 - p_hd) * (1.0 - p_hs)
    r = i["d_u"]
    # file at D
    T[r, i["d_d"]] += w_d * psd * qd * (1.0 - t.p_du_given_s)
    T[r, i["d_dc1d"]] += w_d * psd * (1.0 - qd)
    c[r] += w_d * psd * qd
    if drop_d_retry_term:
        c[r] += w_d * pn * qd * t.p_du
    else:
        T[r, i["d_d"]] += w_d * pn * qd * (1.0 - t.p_du)
        c[r] += w_d * pn * qd
    T[r, i["d_s2"]] += w_d * pn * (1.0 - qd) * p_hs
    T[r, i["d_dc0d"]] += w_d * pn * (1.0 - qd) * (1.0 - p_hs)
    # file at S, D missed
    T[r, i["d_s1"]] += w_s * psd * (1.0 - alpha * t.p_dcu_given_s)
    c[r] += w_s * psd
    T[r, i["d_s1"]] += w_s * pn * qc * (1.0 - t.p_su)
    T[r, i["d_dc0s"]] += w_s * pn * (1.0 - qc)
    c[r] += w_s * pn * qc
    # data center only
    T[r, i["d_dc"]] += w_dc * (psd * (1.0 - alpha * t.p_dcu_given_s) + pn * (1.0 - alpha * t.p_dcu))
    c[r] += w_dc

    return DelaySystem(matrix=np.eye(9) - T, rhs=c)


def _finite_unknowns(T: np.ndarray) -> np.ndarray:
    """Boolean mask of unknowns whose recursion reaches an absorbing exit.

    An unknown is finite iff every state reachable from it (following edges
    with positive recursion weight) has a path to a row that leaks probability,
    i.e. a row with exit probability above 1e-12.
    """
    n = T.shape[0]
    adj = T > _EXIT_EPS
    can_exit = (1.0 - T.sum(axis=1)) > _EXIT_EPS
    for _ in range(n):
        can_exit = can_exit | (adj & can_exit[None, :]).any(axis=1)
    finite = np.empty(n, dtype=bool)
    for k in range(n):
        reach = np.zeros(n, dtype=bool)
        reach[k] = True
        for _ in range(n):
            grown = reach | adj[reach].any(axis=0)
            if (grown == reach).all():
                break
            reach = grown
        finite[k] = can_exit[reach].all()
    return finite


def solve_delays(inputs: DelayInputs, drop_d_retry_term: bool = False) -> DelaySolution:
    """Solve the delay system exactly; non-absorbing unknowns come back as inf."""
    system = assemble_delay_system(inputs, drop_d_retry_term=drop_d_retry_term)
    T = system.recycling
    finite = _finite_unknowns(T)
    x = np.full(len(UNKNOWNS), np.inf)
    idx = np.where(finite)[0]
    if idx.size:
        sub = np.eye(idx.size) - T[np.ix_(idx, idx)]
        x[idx] = np.linalg.solve(sub, system.rhs[idx])
    if not finite.all():
        log.debug(
            "delay unknowns without an absorbing exit reported as inf: %s",
            [UNKNOWNS[k] for k in range(len(UNKNOWNS)) if not finite[k]],
        )
    return DelaySolution(**dict(zip(UNKNOWNS, x.tolist())))


def recursion_residuals(
    inputs: DelayInputs, solution: DelaySolution, drop_d_retry_term: bool = False
) -> np.ndarray:
    """Plug the solution back into each recursion; returns |lhs - rhs| per row.

    Written as a literal re-transcription of the recursions, independent of
    the matrix assembly, so it can catch transcription slips there.
    """
    p = inputs.probs
    t = inputs.table
    psd = inputs.transmit_prob
    pn = 1.0 - psd
    qc, qd, alpha = p.q_c, p.q_d, p.alpha
    p_hd, p_hs = inputs.hits.p_hd, inputs.hits.p_hs
    s = solution

    rhs_s1 = qc * t.p_su + qc * (1 - t.p_su) * (1 + s.d_s1) + (1 - qc) * s.d_dc0s
    rhs_s2 = qc * t.p_su + (1 - qc * t.p_su) * (1 + s.d_d)
    rhs_dc = psd * (alpha * t.p_dcu_given_s + (1 - alpha * t.p_dcu_given_s) * (1 + s.d_dc)) + pn * (
        alpha * t.p_dcu + (1 - alpha * t.p_dcu) * (1 + s.d_dc)
    )
    rhs_dc0s = alpha * t.p_dcu + (1 - alpha * t.p_dcu) * (1 + s.d_s1)
    rhs_dc1s = alpha * t.p_dcu_given_s + (1 - alpha * t.p_dcu_given_s) * (1 + s.d_s1)
    rhs_dc0d = alpha * t.p_dcu + (1 - alpha * t.p_dcu) * (1 + s.d_d)
    rhs_dc1d = alpha * t.p_dcu_given_s + (1 - alpha * t.p_dcu_given_s) * (1 + s.d_d)
    rhs_dd = psd * (
        qd * (t.p_du_given_s + (1 - t.p_du_given_s) * (1 + s.d_d)) + (1 - qd) * s.d_dc1d
    ) + pn * (
        qd * (t.p_du + (1 - t.p_du) * (1 + s.d_d))
        + (1 - qd) * (p_hs * s.d_s2 + (1 - p_hs) * s.d_dc0d)
    )
    if drop_d_retry_term:
        silent_d = qd * t.p_du + (1 - qd) * (p_hs * s.d_s2 + (1 - p_hs) * s.d_dc0d)
    else:
        silent_d = (
            qd * (t.p_du + (1 - t.p_du) * (1 + s.d_d))
            + (1 - qd) * (p_hs * s.d_s2 + (1 - p_hs) * s.d_dc0d)
        )
    rhs_du = (
        p_hd
        * (
            psd
            * (
                (1 - qd) * s.d_dc1d
                + qd * t.p_du_given_s
                + qd * (1 - t.p_du_given_s) * (1 + s.d_d)
            )
            + pn * silent_d
        )
        + (1 - p_hd)
        * p_hs
        * (
            psd * (alpha * t.p_dcu_given_s + (1 - alpha * t.p_dcu_given_s) * (1 + s.d_s1))
            + pn * (qc * t.p_su + qc * (1 - t.p_su) * (1 + s.d_s1) + (1 - qc) * s.d_dc0s)
        )
        + (1 - p_hd)
        * (1 - p_hs)
        * (
            psd * (alpha * t.p_dcu_given_s + (1 - alpha * t.p_dcu_given_s) * (1 + s.d_dc))
            + pn * (alpha * t.p_dcu + (1 - alpha * t.p_dcu) * (1 + s.d_dc))
        )
    )
    lhs = s.as_array()
    rhs = np.array(
        [rhs_du, rhs_s1, rhs_s2, rhs_dc, rhs_dc0s, rhs_dc1s, rhs_dc0d, rhs_dc1d, rhs_dd]
    )
    with np.errstate(invalid="ignore"):
        res = np.abs(lhs - rhs)
    res[np.isinf(lhs) & np.isinf(rhs)] = 0.0
    return res


def closed_form_checks(inputs: DelayInputs, solution: DelaySolution) -> ClosedFormReport:
    """Validate the known closed forms against a finite linear solve.

    Checks, as residuals that should vanish:

    * the data-center loop delay times its per-slot absorption rate is 1;
    * the S-track delay times ``q_c*P(S->U) + alpha*(1-q_c)*P(DC->U)`` is 1;
    * the destination-track delay times its per-slot absorption rate is 1
      (the published expression for that track is the rate, the delay is its
      reciprocal).

    Also reports the gap between the probability-conserving user-delay row
    and the truncated variant, which is a finding rather than a residual.
    """
    if not solution.finite:
        raise ValueError("closed-form checks need a finite solution")
    p = inputs.probs
    t = inputs.table
    psd = inputs.transmit_prob
    qc, qd, alpha = p.q_c, p.q_d, p.alpha
    p_hs = inputs.hits.p_hs

    dc_rate = alpha * (psd * (t.p_dcu_given_s - t.p_dcu) + t.p_dcu)
    s1_rate = qc * t.p_su + alpha * (1.0 - qc) * t.p_dcu
    dd_rate = (
        (1.0 - qd) * (1.0 - psd) * qc * p_hs * t.p_su
        + (1.0 - qd) * alpha * (psd * t.p_dcu_given_s + (1.0 - psd) * (1.0 - p_hs) * t.p_dcu)
        + qd * (t.p_du + psd * (t.p_du_given_s - t.p_du))
    )
    truncated = solve_delays(inputs, drop_d_retry_term=True)
    return ClosedFormReport(
        dc_residual=abs(solution.d_dc * dc_rate - 1.0),
        s1_residual=abs(solution.d_s1 * s1_rate - 1.0),
        dd_rate_residual=abs(solution.d_d * dd_rate - 1.0),
        d_u_variant_gap=solution.d_u - truncated.d_u,
    )
