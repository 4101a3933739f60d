"""Slotted-time Monte Carlo of the caching-helper protocol.

This is the independent cross-check for every analytic quantity.  Two
measures are supported:

* ``throughput``: the full protocol with the live queue at the source helper.
  Arrivals are Bernoulli per slot, the user draws a fresh request every slot
  (memoryless, matching the throughput formulas), the queue head is served
  before the slot's arrival joins, and success draws use the precomputed link
  table keyed by who else is transmitting.
* ``delay``: one outstanding external request is followed at a time through
  the retry state machine that mirrors the delay recursion, with the
  source-helper transmission event drawn i.i.d. per slot with the stationary
  probability ``q_s * P(queue non-empty)``.

Request modes control how cache hits are drawn each slot (or per request):
``factorized`` places the file in exactly one tier with the placement-
consistent conditional probabilities; ``factorized-independence`` draws the
destination and source hits as independent coins, reproducing the probability
products the closed forms use; ``zipf-exact`` samples a rank and locates it.

``mu_mode="verbatim-eq2"`` adds one extra q_s thinning coin to the
helper-to-helper success draw in the slot pattern where the data center
interferes, which makes the realized service rate match the verbatim
service-rate formula instead of the protocol's corrected one.

A fixed number of uniforms (11) is consumed per slot in a documented order,
so :func:`step` and the chunked fast path in :func:`run_throughput` produce
bit-identical runs from the same seed.
"""

from __future__ import annotations

import logging
import math
import random
from bisect import bisect_left
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .cache import CmpcPlacement, HitProfile
from .phy import SuccessProbTable
from .throughput import AccessProbs, busy_probability, service_rate

log = logging.getLogger(__name__)

REQUEST_MODES = ("factorized", "factorized-independence", "zipf-exact")
SIM_MU_MODES = ("protocol", "verbatim-eq2")
MEASURES = ("throughput", "delay")

#: Queue drift (packets/slot) above which a run is flagged unstable.
DRIFT_THRESHOLD = 1e-3

_CHUNK = 1 << 18
_DRAWS_PER_SLOT = 11


class RequestState(Enum):
    """Progress of the one outstanding request in delay measurement.

    TRY_D, TRY_S_AFTER_D_MISS, and TRY_DC persist across slots.
    TRY_S_D_SILENT is the one-slot detour inside the TRY_D track where the
    destination helper holds the file but stays silent and the source helper
    (holding it too, in independence mode) gets the slot; it resolves back to
    TRY_D on failure.
    """

    TRY_D = "TRY_D"
    TRY_S_AFTER_D_MISS = "TRY_S_AFTER_D_MISS"
    TRY_S_D_SILENT = "TRY_S_D_SILENT"
    TRY_DC = "TRY_DC"


@dataclass(frozen=True)
class SimScenario:
    """Inputs the simulator needs; ``pmf``/``placement`` only for zipf-exact."""

    probs: AccessProbs
    hits: HitProfile
    table: SuccessProbTable
    pmf: np.ndarray | None = None
    placement: CmpcPlacement | None = None


@dataclass(frozen=True)
class SimConfig:
    slots: int = 1_000_000
    seed: int = 0
    request_mode: str = "factorized"
    mu_mode: str = "protocol"
    measure: str = "throughput"
    warmup_slots: int = 10_000
    batches: int = 30
    target_requests: int = 100_000
    request_slot_cap: int = 1_000_000

    def __post_init__(self) -> None:
        if not self.slots > self.warmup_slots >= 0:
            raise ValueError(
                f"need slots > warmup_slots >= 0, got {self.slots}, {self.warmup_slots}"
            )
        if self.request_mode not in REQUEST_MODES:
            raise ValueError(f"request_mode must be one of {REQUEST_MODES}")
        if self.mu_mode not in SIM_MU_MODES:
            raise ValueError(f"mu_mode must be one of {SIM_MU_MODES}")
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}")


@dataclass
class SimState:
    queue_len: int = 0
    slot: int = 0
    outstanding: RequestState | None = None


@dataclass(frozen=True)
class SlotEvents:
    arrival: bool
    s_transmitted: bool
    s_delivered: bool
    server: str | None  # "D", "S", "DC", or None
    u_delivered: bool


@dataclass(frozen=True)
class SimStats:
    t_s_hat: float = math.nan
    t_s_se: float = math.nan
    t_u_hat: float = math.nan
    t_u_se: float = math.nan
    service_rate_hat: float = math.nan
    service_rate_se: float = math.nan
    busy_frac: float = math.nan
    mean_queue_len: float = math.nan
    drift_slope: float = math.nan
    unstable_flag: bool = False
    queue_batch_means: tuple[float, ...] = field(default=())
    mean_delay_hat: float = math.nan
    mean_delay_se: float = math.nan
    completed_requests: int = 0
    timed_out_requests: int = 0
    slots: int = 0


@dataclass(frozen=True)
class MuModeReport:
    """Which service-rate variant the empirical rate agrees with (3 sigma)."""

    mu_verbatim: float
    mu_corrected: float
    service_rate_hat: float
    service_rate_se: float
    matches: str  # "verbatim" | "corrected" | "both" | "neither"


def _hit_draws(scen: SimScenario, mode: str, u_req, u_d, u_s):
    """Vectorized (external, d_has, s_has) indicator arrays for one chunk."""
    h = scen.hits
    if mode == "factorized":
        external = u_req < h.q_u
        d_has = u_req < h.p_hd
        s_has = (u_req >= h.p_hd) & (u_req < h.p_hd + h.p_hs)
    elif mode == "factorized-independence":
        external = u_req < h.q_u
        d_has = u_d < h.p_hd
        s_has = u_s < h.p_hs
    else:  # zipf-exact
        if scen.pmf is None or scen.placement is None:
            raise ValueError("zipf-exact request mode needs the scenario pmf and placement")
        cdf = np.cumsum(scen.pmf)
        rank = np.searchsorted(cdf, u_req) + 1
        pl = scen.placement
        external = rank >= pl.u_range[1]
        d_has = (rank >= pl.d_range[0]) & (rank < pl.d_range[1])
        s_has = (rank >= pl.s_range[0]) & (rank < pl.s_range[1])
    return external, d_has, s_has


def step(state: SimState, scen: SimScenario, rng: np.random.Generator,
         request_mode: str = "factorized", mu_mode: str = "protocol") -> SlotEvents:
    """Advance the protocol one slot, consuming exactly 11 uniforms.

    Draw order: arrival, S attempt, request, D hit, S hit, q_d, q_c, alpha,
    user-link success, helper-link success, verbatim gate.
    """
    u = rng.random(_DRAWS_PER_SLOT)
    p, t = scen.probs, scen.table
    external, d_has, s_has = _hit_draws(
        scen, request_mode, u[2:3], u[3:4], u[4:5]
    )
    busy = state.queue_len > 0
    s_tx = busy and u[1] < p.q_s

    server = None
    u_ok = False
    if external[0]:
        if d_has[0] and u[5] < p.q_d:
            server = "D"
            u_ok = u[8] < (t.p_du_given_s if s_tx else t.p_du)
        elif (not s_tx) and s_has[0] and u[6] < p.q_c:
            server = "S"
            u_ok = u[8] < t.p_su
        elif u[7] < p.alpha:
            server = "DC"
            u_ok = u[8] < (t.p_dcu_given_s if s_tx else t.p_dcu)

    s_ok = False
    if s_tx:
        if server == "DC":
            s_ok = u[9] < t.p_sd_given_dc
            if mu_mode == "verbatim-eq2":
                s_ok = s_ok and u[10] < p.q_s
        elif server == "D":
            s_ok = u[9] < t.p_sd_given_d
        else:
            s_ok = u[9] < t.p_sd
        if s_ok:
            state.queue_len -= 1

    arrival = u[0] < p.arrival_rate
    if arrival:
        state.queue_len += 1
    state.slot += 1
    return SlotEvents(
        arrival=bool(arrival),
        s_transmitted=s_tx,
        s_delivered=s_ok,
        server=server,
        u_delivered=bool(u_ok),
    )


def _batch_se(means: list[float]) -> float:
    if len(means) < 2:
        return math.nan
    return float(np.std(means, ddof=1) / math.sqrt(len(means)))


def run_throughput(scen: SimScenario, cfg: SimConfig) -> SimStats:
    """Long-run throughput estimates with batch-mean standard errors."""
    if cfg.measure != "throughput":
        raise ValueError("run_throughput needs measure='throughput'")
    p, t = scen.probs, scen.table
    lam = p.arrival_rate
    q_s, q_d, q_c, alpha = p.q_s, p.q_d, p.q_c, p.alpha
    p_du_s, p_du, p_su = t.p_du_given_s, t.p_du, t.p_su
    p_dcu_s, p_dcu = t.p_dcu_given_s, t.p_dcu
    p_sd, p_sd_d, p_sd_dc = t.p_sd, t.p_sd_given_d, t.p_sd_given_dc
    verbatim_gate = cfg.mu_mode == "verbatim-eq2"

    rng = np.random.default_rng(cfg.seed)
    warmup = cfg.warmup_slots
    window = cfg.slots - warmup
    batch_size = max(1, window // cfg.batches)

    queue = 0
    queue_at_warmup = 0
    ts_total = tu_total = busy_total = dep_total = 0
    qsum = 0
    b_ts = b_tu = b_busy = b_dep = 0
    b_q = 0
    n_in_batch = 0
    ts_means: list[float] = []
    tu_means: list[float] = []
    q_means: list[float] = []
    rate_means: list[float] = []

    slot = 0
    while slot < cfg.slots:
        m = min(_CHUNK, cfg.slots - slot)
        u = rng.random((m, _DRAWS_PER_SLOT))
        external, d_has, s_has = _hit_draws(scen, cfg.request_mode, u[:, 2], u[:, 3], u[:, 4])
        arrival = (u[:, 0] < lam).tolist()
        qs_coin = (u[:, 1] < q_s).tolist()
        external = external.tolist()
        d_has = d_has.tolist()
        s_has = s_has.tolist()
        qd_coin = (u[:, 5] < q_d).tolist()
        qc_coin = (u[:, 6] < q_c).tolist()
        a_coin = (u[:, 7] < alpha).tolist()
        u_serve = u[:, 8].tolist()
        u_sd = u[:, 9].tolist()
        gate = (u[:, 10] < q_s).tolist()

        for i in range(m):
            q0 = queue
            s_tx = q0 > 0 and qs_coin[i]
            server = 0
            u_ok = False
            if external[i]:
                if d_has[i] and qd_coin[i]:
                    server = 1
                    u_ok = u_serve[i] < (p_du_s if s_tx else p_du)
                elif (not s_tx) and s_has[i] and qc_coin[i]:
                    server = 2
                    u_ok = u_serve[i] < p_su
                elif a_coin[i]:
                    server = 3
                    u_ok = u_serve[i] < (p_dcu_s if s_tx else p_dcu)
            dep = False
            if s_tx:
                if server == 3:
                    ok = u_sd[i] < p_sd_dc
                    if verbatim_gate:
                        ok = ok and gate[i]
                elif server == 1:
                    ok = u_sd[i] < p_sd_d
                else:
                    ok = u_sd[i] < p_sd
                if ok:
                    queue -= 1
                    dep = True
            if arrival[i]:
                queue += 1

            g = slot + i
            if g >= warmup:
                if g == warmup:
                    queue_at_warmup = q0
                ts_total += dep
                tu_total += u_ok
                busy_total += q0 > 0
                dep_total += dep
                qsum += q0
                b_ts += dep
                b_tu += u_ok
                b_busy += q0 > 0
                b_dep += dep
                b_q += q0
                n_in_batch += 1
                if n_in_batch == batch_size:
                    ts_means.append(b_ts / batch_size)
                    tu_means.append(b_tu / batch_size)
                    q_means.append(b_q / batch_size)
                    if b_busy:
                        rate_means.append(b_dep / b_busy)
                    b_ts = b_tu = b_busy = b_dep = 0
                    b_q = 0
                    n_in_batch = 0
        slot += m

    drift = (queue - queue_at_warmup) / window
    return SimStats(
        t_s_hat=ts_total / window,
        t_s_se=_batch_se(ts_means),
        t_u_hat=tu_total / window,
        t_u_se=_batch_se(tu_means),
        service_rate_hat=dep_total / busy_total if busy_total else math.nan,
        service_rate_se=_batch_se(rate_means),
        busy_frac=busy_total / window,
        mean_queue_len=qsum / window,
        drift_slope=drift,
        unstable_flag=drift > DRIFT_THRESHOLD,
        queue_batch_means=tuple(q_means),
        slots=cfg.slots,
    )


def _track_drawer(scen: SimScenario, mode: str):
    """Sampler for the initial branch of one external request."""
    h = scen.hits
    if mode == "factorized-independence":
        at_d = h.p_hd
        at_s = at_d + (1.0 - h.p_hd) * h.p_hs

        def draw(rnd: random.Random) -> RequestState:
            r = rnd.random()
            if r < at_d:
                return RequestState.TRY_D
            if r < at_s:
                return RequestState.TRY_S_AFTER_D_MISS
            return RequestState.TRY_DC

        return draw
    if mode == "factorized":

        def draw(rnd: random.Random) -> RequestState:
            r = rnd.random() * h.q_u
            if r < h.p_hd:
                return RequestState.TRY_D
            if r < h.p_hd + h.p_hs:
                return RequestState.TRY_S_AFTER_D_MISS
            return RequestState.TRY_DC

        return draw
    # zipf-exact: sample ranks, rejecting those held by the user's own cache
    if scen.pmf is None or scen.placement is None:
        raise ValueError("zipf-exact request mode needs the scenario pmf and placement")
    cdf = np.cumsum(scen.pmf).tolist()
    pl = scen.placement

    def draw(rnd: random.Random) -> RequestState:
        while True:
            rank = bisect_left(cdf, rnd.random()) + 1
            if rank < pl.u_range[1]:
                continue
            if pl.d_range[0] <= rank < pl.d_range[1]:
                return RequestState.TRY_D
            if pl.s_range[0] <= rank < pl.s_range[1]:
                return RequestState.TRY_S_AFTER_D_MISS
            return RequestState.TRY_DC

    return draw


def run_delay(scen: SimScenario, cfg: SimConfig, transmit_prob: float | None = None) -> SimStats:
    """Mean slots from external miss to reception, over completed requests.

    ``transmit_prob`` is the per-slot probability the source helper transmits
    to the destination; when omitted it is derived from the scenario's arrival
    rate via the stationary busy probability (corrected service rate under
    ``mu_mode='protocol'``, verbatim otherwise).

    The run aborts with a timeout diagnostic if any single request exceeds
    ``request_slot_cap`` slots, which is the signature of a retry state with
    no absorbing exit.
    """
    if cfg.measure != "delay":
        raise ValueError("run_delay needs measure='delay'")
    p, t, h = scen.probs, scen.table, scen.hits
    if h.q_u == 0.0:
        return SimStats(slots=0)
    if transmit_prob is None:
        analytic_mode = "corrected" if cfg.mu_mode == "protocol" else "verbatim"
        mu = service_rate(p, h, t, analytic_mode)
        transmit_prob = p.q_s * busy_probability(p.arrival_rate, mu)

    independence = cfg.request_mode == "factorized-independence"
    rnd = random.Random(cfg.seed)
    draw_track = _track_drawer(scen, cfg.request_mode)
    psd = transmit_prob
    qd, qc, alpha, p_hs = p.q_d, p.q_c, p.alpha, h.p_hs
    p_du_s, p_du, p_su = t.p_du_given_s, t.p_du, t.p_su
    p_dcu_s, p_dcu = t.p_dcu_given_s, t.p_dcu

    n = 0
    timed_out = 0
    sum_d = 0.0
    sum_d2 = 0.0
    for _ in range(cfg.target_requests):
        track = draw_track(rnd)
        first_s_slot = True
        slots = 0
        done = False
        while slots < cfg.request_slot_cap:
            slots += 1
            if track is RequestState.TRY_D:
                s_tx = rnd.random() < psd
                if rnd.random() < qd:
                    if rnd.random() < (p_du_s if s_tx else p_du):
                        done = True
                        break
                elif s_tx:
                    if rnd.random() < alpha and rnd.random() < p_dcu_s:
                        done = True
                        break
                elif independence and rnd.random() < p_hs:
                    # TRY_S_D_SILENT detour: the source helper holds the file
                    # too and gets this slot; no data-center fallback here.
                    if rnd.random() < qc and rnd.random() < p_su:
                        done = True
                        break
                else:
                    if rnd.random() < alpha and rnd.random() < p_dcu:
                        done = True
                        break
            elif track is RequestState.TRY_S_AFTER_D_MISS:
                # Only the request's first slot sees the helper-to-helper
                # transmission; the retry loop runs the silent-source pattern.
                if first_s_slot and rnd.random() < psd:
                    if rnd.random() < alpha and rnd.random() < p_dcu_s:
                        done = True
                        break
                else:
                    if rnd.random() < qc:
                        if rnd.random() < p_su:
                            done = True
                            break
                    elif rnd.random() < alpha and rnd.random() < p_dcu:
                        done = True
                        break
                first_s_slot = False
            else:  # TRY_DC
                s_tx = rnd.random() < psd
                if rnd.random() < alpha and rnd.random() < (p_dcu_s if s_tx else p_dcu):
                    done = True
                    break
        if not done:
            timed_out += 1
            log.warning(
                "delay request timed out after %d slots (track %s); aborting run",
                cfg.request_slot_cap,
                track.value,
            )
            break
        n += 1
        sum_d += slots
        sum_d2 += slots * slots

    if n == 0:
        return SimStats(timed_out_requests=timed_out)
    mean = sum_d / n
    var = (sum_d2 - n * mean * mean) / (n - 1) if n > 1 else math.nan
    return SimStats(
        mean_delay_hat=mean,
        mean_delay_se=math.sqrt(var / n) if n > 1 else math.nan,
        completed_requests=n,
        timed_out_requests=timed_out,
    )


def mu_mode_discrepancy(scen: SimScenario, stats: SimStats) -> MuModeReport:
    """Compare the realized service rate against both formula variants."""
    mu_v = service_rate(scen.probs, scen.hits, scen.table, "verbatim")
    mu_c = service_rate(scen.probs, scen.hits, scen.table, "corrected")
    hat, se = stats.service_rate_hat, stats.service_rate_se
    hit_v = math.isfinite(hat) and abs(hat - mu_v) <= 3.0 * se
    hit_c = math.isfinite(hat) and abs(hat - mu_c) <= 3.0 * se
    matches = {
        (True, True): "both",
        (True, False): "verbatim",
        (False, True): "corrected",
        (False, False): "neither",
    }[(hit_v, hit_c)]
    return MuModeReport(
        mu_verbatim=mu_v,
        mu_corrected=mu_c,
        service_rate_hat=hat,
        service_rate_se=se,
        matches=matches,
    )
