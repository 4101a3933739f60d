"""Weighted-throughput maximization over the three access probabilities.

The objective is a cheap closed form on the unit box, so the solver is a
deterministic derivative-free search: a coarse vectorized grid (step 0.05)
picks an incumbent, then coordinate-wise golden-section passes refine it to a
step below 1e-3.  Ties within 1e-9 of the best value resolve to the
lexicographically smallest (q_s, q_c, q_d), which keeps flat optima
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cache import HitProfile
from .phy import SuccessProbTable
from .throughput import MU_MODES, REGIMES, _mu, _t_u_stable, _t_u_unstable

_TIE_EPS = 1e-9
_STABILITY_MARGIN = 1e-12
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizationProblem:
    """One maximization instance.

    ``arrival_rate`` is required in the stable regime, where grid points with
    ``arrival_rate >= mu`` are infeasible and discarded.
    """

    regime: str
    weight: float
    hits: HitProfile
    table: SuccessProbTable
    alpha: float
    arrival_rate: float | None = None
    mu_mode: str = "verbatim"

    def __post_init__(self) -> None:
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight must be in [0, 1], got {self.weight}")
        if self.mu_mode not in MU_MODES:
            raise ValueError(f"mu_mode must be one of {MU_MODES}, got {self.mu_mode!r}")
        if self.regime == "stable" and self.arrival_rate is None:
            raise ValueError("stable-regime problems need an arrival_rate")


@dataclass(frozen=True)
class OptimizationResult:
    best_q: tuple[float, float, float] | None
    best_value: float
    feasible: bool
    grid_resolution: float
    refinement_iterations: int


def _objective(problem: OptimizationProblem, qs, qc, qd):
    """Vectorized objective; infeasible stable points evaluate to -inf."""
    h, t = problem.hits, problem.table
    mu = _mu(qs, qd, h.q_u, h.p_hd, problem.alpha, t, problem.mu_mode)
    if problem.regime == "unstable":
        t_u = _t_u_unstable(qs, qc, qd, h.q_u, h.p_hd, h.p_hs, problem.alpha, t)
        return problem.weight * mu + (1.0 - problem.weight) * t_u
    lam = problem.arrival_rate
    feasible = mu > lam + _STABILITY_MARGIN
    with np.errstate(divide="ignore", invalid="ignore"):
        busy = np.where(feasible, lam / np.where(mu > 0, mu, 1.0), 1.0)
        t_u = _t_u_stable(qs, qc, qd, h.q_u, h.p_hd, h.p_hs, problem.alpha, busy, t)
        value = problem.weight * lam + (1.0 - problem.weight) * t_u
    return np.where(feasible, value, -np.inf)


def optimize(
    problem: OptimizationProblem, grid_step: float = 0.05, refine_tol: float = 1e-3
) -> OptimizationResult:
    """Maximize the weighted throughput over (q_s, q_c, q_d) in the unit box."""
    n = round(1.0 / grid_step) + 1
    axis = np.linspace(0.0, 1.0, n)
    qs, qc, qd = np.meshgrid(axis, axis, axis, indexing="ij")
    values = np.asarray(_objective(problem, qs, qc, qd), dtype=float)

    best = float(values.max())
    if not np.isfinite(best):
        return OptimizationResult(
            best_q=None,
            best_value=float("nan"),
            feasible=False,
            grid_resolution=grid_step,
            refinement_iterations=0,
        )
    tied = np.argwhere(values >= best - _TIE_EPS)
    # Lexicographically smallest (q_s, q_c, q_d) among near-ties.
    row = min(map(tuple, tied))
    q = [axis[row[0]], axis[row[1]], axis[row[2]]]
    best = float(values[row])

    iterations = 0
    for _ in range(50):
        improved = False
        for ax in range(3):
            lo = max(0.0, q[ax] - grid_step)
            hi = min(1.0, q[ax] + grid_step)
            t_new, v_new = _golden_section(problem, q, ax, lo, hi, refine_tol)
            iterations += 1
            if v_new > best + _TIE_EPS:
                q[ax] = t_new
                best = v_new
                improved = True
        if not improved:
            break

    return OptimizationResult(
        best_q=(q[0], q[1], q[2]),
        best_value=best,
        feasible=True,
        grid_resolution=grid_step,
        refinement_iterations=iterations,
    )


def _golden_section(problem, q, ax, lo, hi, tol):
    """Maximize the objective along one coordinate inside [lo, hi]."""

    def f(t: float) -> float:
        point = list(q)
        point[ax] = t
        return float(_objective(problem, *point))

    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    # Evaluate the bracket endpoints too: affine coordinates peak at a corner.
    candidates = [(f(lo), lo), (f1, x1), (f2, x2), (f(hi), hi)]
    best_value = max(v for v, _ in candidates)
    best_t = min(t for v, t in candidates if v >= best_value - _TIE_EPS)
    return best_t, best_value


def feasible_region_probe(
    problem: OptimizationProblem, q_s_grid: np.ndarray | list[float]
) -> list[tuple[float, float, bool]]:
    """Stability of the best-case service rate along a q_s grid.

    For each candidate q_s the service rate is evaluated at q_d = 1, its
    maximizer (q_c never enters the service rate), so the returned flag is
    exact for the whole (q_c, q_d) slice.
    """
    if problem.regime != "stable":
        raise ValueError("the feasibility probe applies to the stable regime")
    h = problem.hits
    out = []
    for qs in q_s_grid:
        mu = float(_mu(qs, 1.0, h.q_u, h.p_hd, problem.alpha, problem.table, problem.mu_mode))
        out.append((float(qs), mu, problem.arrival_rate < mu))
    return out
