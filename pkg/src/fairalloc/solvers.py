"""Allocation solvers at a fixed global capacity.

Every group's TP as a function of its within-group capacity, ``H_i(c_i)``,
is piecewise linear, non-decreasing and concave. Each fairness regime fixes
the allocation through one scalar (a common TP level, a common ratio or a
common multiplier) that moves the total capacity monotonically, so every
solver is a one-dimensional bisection over group-wise curve inversions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DomainError
from .policy import GroupThresholdPolicy, policy_for_capacities
from .population import GroupedPopulation
from .rootfind import bisect_monotone

MAX_ITER = 200


@dataclass(frozen=True)
class SolveResult:
    regime: str
    capacity: float
    policy: GroupThresholdPolicy
    capacities: np.ndarray
    tps: np.ndarray
    weights: np.ndarray
    global_tp: float
    iterations: int
    residual: float
    parameter: float
    flags: tuple = ()

    @property
    def shares(self):
        """Fraction of the global budget each group receives."""
        if self.capacity <= 0.0:
            return np.zeros_like(self.capacities)
        return self.weights * self.capacities / self.capacity


def _check_capacity(c):
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"capacity {c!r} outside [0, 1]")


def _curve_tp(curve, c):
    return float(kernels.tp_at(curve.values, curve.cw, curve.cm, c))


def _fill_zero_mass(pop, caps, c):
    """Top up capacity on zero-score mass when positive mass is exhausted."""
    rho = pop.weights
    short = c - float(np.dot(rho, caps))
    if short <= 1e-15:
        return caps, False
    caps = caps.copy()
    for i in range(len(caps)):
        room = rho[i] * (1.0 - caps[i])
        add = min(room, short)
        caps[i] += add / rho[i]
        short -= add
        if short <= 0.0:
            break
    return caps, True


def _result(regime, pop, c, caps, iterations, parameter, flags):
    caps = np.clip(np.asarray(caps, dtype=np.float64), 0.0, 1.0)
    curves = [g.dist.curve for g in pop]
    tps = np.array([_curve_tp(cv, x) for cv, x in zip(curves, caps)])
    rho = pop.weights
    return SolveResult(
        regime=regime, capacity=c, policy=policy_for_capacities(pop, caps), capacities=caps, tps=tps,
        weights=rho, global_tp=float(np.dot(rho, tps)), iterations=iterations,
        residual=abs(float(np.dot(rho, caps)) - c), parameter=float(parameter), flags=tuple(flags),
    )


def _solve_monotone(pop, c, caps_at, lo, hi, increasing):
    """Find the scalar where total capacity hits ``c``; interpolate the final bracket.

    ``caps_at(s)`` returns within-group capacities, each monotone in ``s``
    and continuous, so the interpolated capacities sum to ``c`` exactly.
    """
    rho = pop.weights

    def total(s):
        return float(np.dot(rho, caps_at(s)))

    br = bisect_monotone(total, c, lo, hi, increasing=increasing, max_iter=MAX_ITER)
    if increasing:
        a, b = caps_at(br.lo), caps_at(br.hi)
    else:
        a, b = caps_at(br.hi), caps_at(br.lo)
    ta, tb = float(np.dot(rho, a)), float(np.dot(rho, b))
    theta = 0.0 if tb <= ta else min(max((c - ta) / (tb - ta), 0.0), 1.0)
    return a + theta * (b - a), br.iterations, 0.5 * (br.lo + br.hi)


def solve_utility_max(pop: GroupedPopulation, c: float) -> SolveResult:
    """One pooled threshold; ties at it are split pro rata by group mass."""
    _check_capacity(c)
    pooled = pop.pooled().curve
    t, gamma = kernels.threshold_at(pooled.values, pooled.cw, c)
    t, gamma = float(t), float(gamma)
    caps = np.array([g.dist.survival(t) + gamma * g.dist.pmf(t) for g in pop])
    return _result("utility_max", pop, c, caps, 0, t, [])


def _equalize(regime, pop, c, targets, s_max, saturate):
    """Common level ``s``: group i needs TP ``s * targets[i]`` (capped at its base rate).

    The cap only binds for max-min; elsewhere it absorbs rounding in targets
    that equal a base rate.
    """
    curves = [g.dist.curve for g in pop]
    base = np.array([cv.base_rate for cv in curves])

    def caps_at(s):
        h = np.minimum(s * targets, base)
        return np.array([kernels.capacity_for_tp(cv.values, cv.cw, cv.cm, x) for cv, x in zip(curves, h)])

    flags = []
    if c <= 0.0:
        return _result(regime, pop, c, np.zeros(len(pop)), 0, 0.0, flags)
    top = caps_at(s_max)
    if float(np.dot(pop.weights, top)) <= c:
        caps, iters, s = top, 0, s_max
    else:
        caps, iters, s = _solve_monotone(pop, c, caps_at, 0.0, s_max, increasing=True)
    if saturate:
        flags += [f"saturated:{n}" for n, b in zip(pop.names, base) if s * 1.0 > b * (1 + 1e-12)]
    caps, filled = _fill_zero_mass(pop, caps, c)
    if filled:
        flags.append("zero_score_fill")
    return _result(regime, pop, c, caps, iters, s, flags)


def solve_max_min(pop: GroupedPopulation, c: float) -> SolveResult:
    """Maximize the smallest group TP by raising a common TP level.

    Groups that cannot reach the level (their whole positive mass is
    allocated) stay saturated and are flagged.
    """
    _check_capacity(c)
    base = pop.base_rates()
    return _equalize("max_min", pop, c, np.ones(len(pop)), float(base.max()), saturate=True)


def solve_equal_opportunity(pop: GroupedPopulation, c: float) -> SolveResult:
    """Maximize TP subject to TP_i / b_i equal across groups."""
    _check_capacity(c)
    base = pop.base_rates()
    if np.any(base <= 0.0):
        raise DomainError("equal opportunity needs every base rate positive")
    return _equalize("equal_opportunity", pop, c, base, 1.0, saturate=False)


def solve_achievable_eo(pop: GroupedPopulation, c: float) -> SolveResult:
    """Maximize TP subject to TP_i / A_i equal, A_i the TP with the whole budget on group i."""
    _check_capacity(c)
    if c <= 0.0:
        return _result("achievable_eo", pop, c, np.zeros(len(pop)), 0, 0.0, [])
    ach = achievable_tps(pop, c)
    if np.any(ach <= 0.0):
        raise DomainError("achievable equal opportunity needs positive achievable TP in every group")
    return _equalize("achievable_eo", pop, c, ach, 1.0, saturate=False)


def achievable_tps(pop: GroupedPopulation, c: float) -> np.ndarray:
    return np.array([_curve_tp(g.dist.curve, min(1.0, c / g.weight)) for g in pop])


def solve_proportional(pop: GroupedPopulation, c: float) -> SolveResult:
    """Maximize sum_i rho_i ln H_i(c_i) subject to sum_i rho_i c_i = c.

    At the optimum every funded group has marginal score over TP equal to a
    common multiplier. Groups whose scores are all zero are excluded and
    flagged; a capacity cap at 1 gives the inequality form at the edge.
    """
    _check_capacity(c)
    curves = [g.dist.curve for g in pop]
    active = np.array([cv.base_rate > 0.0 for cv in curves])
    flags = [f"excluded:{n}" for n, a in zip(pop.names, active) if not a]
    if c <= 0.0 or not active.any():
        caps, filled = _fill_zero_mass(pop, np.zeros(len(pop)), c)
        return _result("proportional", pop, c, caps, 0, math.inf, flags + (["zero_score_fill"] if filled else []))

    def caps_at(log_lam):
        lam = math.exp(log_lam)
        return np.array([
            kernels.capacity_for_ratio(cv.values, cv.cw, cv.cm, lam) if a else 0.0
            for cv, a in zip(curves, active)
        ])

    rho = pop.weights
    hi = math.log(1.0 / c)
    lo = hi
    while float(np.dot(rho, caps_at(lo))) < c and lo > -700.0:
        lo -= 8.0
    if float(np.dot(rho, caps_at(lo))) <= c:
        caps, iters, s = caps_at(lo), 0, lo
    else:
        caps, iters, s = _solve_monotone(pop, c, caps_at, lo, hi, increasing=False)
    caps, filled = _fill_zero_mass(pop, caps, c)
    if filled:
        flags.append("zero_score_fill")
    return _result("proportional", pop, c, caps, iters, math.exp(s), flags)


def marginal_ratios(result: SolveResult, pop: GroupedPopulation) -> np.ndarray:
    """t_i(c_i) / H_i(c_i) per group, with t_i the score of the last unit allocated."""
    out = []
    for g, x, h in zip(pop, result.capacities, result.tps):
        cv = g.dist.curve
        t = float(kernels.marginal_score(cv.values, cv.cw, x))
        out.append(t / h if h > 0 else math.inf)
    return np.array(out)


SOLVERS = {
    "achievable_eo": solve_achievable_eo,
    "equal_opportunity": solve_equal_opportunity,
    "max_min": solve_max_min,
    "proportional": solve_proportional,
    "utility_max": solve_utility_max,
}
FAIR_REGIMES = ("achievable_eo", "equal_opportunity", "max_min", "proportional")


def solve(pop: GroupedPopulation, c: float, regime: str) -> SolveResult:
    try:
        fn = SOLVERS[regime]
    except KeyError:
        raise DomainError(f"unknown regime {regime!r}; expected one of {sorted(SOLVERS)}") from None
    return fn(pop, c)


class PriceOfFairness(NamedTuple):
    multiplicative: float
    additive: float
    tp_opt: float
    tp_regime: float


def price_of_fairness(pop: GroupedPopulation, c: float, regime: str) -> PriceOfFairness:
    """TP_opt / TP_regime and TP_opt - TP_regime, TP_opt from the utility-max solver."""
    if regime not in FAIR_REGIMES:
        raise DomainError(f"regime must be one of {FAIR_REGIMES}, got {regime!r}")
    opt = solve_utility_max(pop, c).global_tp
    fair = solve(pop, c, regime).global_tp
    mult = opt / fair if fair > 0.0 else math.inf
    return PriceOfFairness(mult, opt - fair, opt, fair)
