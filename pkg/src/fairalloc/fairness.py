"""Group fairness metrics and structural diagnostics for threshold policies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .policy import GroupThresholdPolicy, calibration_error, capacity, solve_threshold_for_capacity, tp_count
from .population import GroupedPopulation, LabeledSamples
from .score_dist import ScoreDistribution


def dp_gap(policy: GroupThresholdPolicy, pop: GroupedPopulation) -> float:
    """Largest difference in allocation rate between two groups."""
    per = capacity(policy, pop).per_group
    return float(per.max() - per.min())


def _eo_rates(policy, pop):
    b = pop.base_rates()
    if np.any(b <= 0.0):
        zero = [n for n, x in zip(pop.names, b) if x <= 0.0]
        raise DomainError(f"zero base rate in groups {zero}")
    return tp_count(policy, pop).per_group / b


def eo_gap(policy: GroupThresholdPolicy, pop: GroupedPopulation) -> float:
    """Largest difference in E[f | y = 1, group] between groups, using TP_i / b_i."""
    r = _eo_rates(policy, pop)
    return float(r.max() - r.min())


def prop_value(policy: GroupThresholdPolicy, pop: GroupedPopulation) -> float:
    """sum_i rho_i ln TP_i; ``-inf`` when some group gets zero TP."""
    per = tp_count(policy, pop).per_group
    if np.any(per <= 0.0):
        return -math.inf
    return float(np.dot(pop.weights, np.log(per)))


def kl_decomposition(policy: GroupThresholdPolicy, pop: GroupedPopulation):
    """(KL(Q_S || Q_f), ln TP) where Q_S are group weights and Q_f the TP shares."""
    ev = tp_count(policy, pop)
    if ev.total <= 0.0:
        raise DomainError("global TP is zero; Q_f is undefined")
    q_s = pop.weights
    q_f = q_s * ev.per_group / ev.total
    with np.errstate(divide="ignore"):
        terms = np.where(q_s > 0, q_s * np.log(q_s / q_f), 0.0)
    return float(terms.sum()), math.log(ev.total)


def _survival_points(d1, d2, lo, hi):
    pts = np.concatenate(([lo], d1.values, d2.values))
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    s1 = np.array([d1.survival(r) for r in pts])
    s2 = np.array([d2.survival(r) for r in pts])
    return s1, s2


def tail_dominance(d1: ScoreDistribution, d2: ScoreDistribution, t0: float) -> bool:
    """Pr_1[u > r] >= Pr_2[u > r] for every r >= t0.

    Survival functions only change at support points, so checking t0 and
    every support point above it is exact.
    """
    s1, s2 = _survival_points(d1, d2, t0, 1.0)
    return bool(np.all(s1 >= s2))


def tail_dominance_gap(d1: ScoreDistribution, d2: ScoreDistribution, t0: float, t_max: float, eta: float) -> bool:
    """Gap dominance: margin ``eta`` on [t0, t_max] and weak dominance above t_max."""
    if not 0.0 <= t0 <= t_max <= 1.0 or eta < 0.0:
        raise DomainError("need 0 <= t0 <= t_max <= 1 and eta >= 0")
    s1, s2 = _survival_points(d1, d2, t0, t_max)
    if not np.all(s1 - s2 >= eta):
        return False
    return tail_dominance(d1, d2, t_max)


def non_degenerate(pop: GroupedPopulation, c: float) -> bool:
    """Whether every group keeps positive-score mass after losing capacity ``c``.

    Removing global capacity ``c`` can take at most ``c / rho_i`` of group i,
    so the residual is the bottom ``1 - c / rho_i`` of its scores. That
    residual has positive mean iff the mass at score 0 is smaller.
    """
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"capacity {c!r} outside [0, 1]")
    for g in pop:
        share = c / g.weight
        if share >= 1.0:
            return False
        if g.dist.cdf(0.0) >= 1.0 - share:
            return False
    return True


def achievable_tp(pop: GroupedPopulation, group: str, c: float) -> float:
    """Best TP of ``group`` when the whole budget ``c`` goes to it."""
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"capacity {c!r} outside [0, 1]")
    g = pop.group(group)
    t, gamma = solve_threshold_for_capacity(g.dist, min(1.0, c / g.weight))
    v, w = g.dist.values, g.dist.weights
    alloc = np.where(v > t, 1.0, np.where(v == t, gamma, 0.0))
    return float(np.dot(w * v, alloc))


@dataclass
class FairnessReport:
    names: tuple
    capacities: np.ndarray
    tps: np.ndarray
    global_capacity: float
    global_tp: float
    dp_gap: float
    eo_gap: float
    prop_value: float
    kl_term: float
    log_tp: float
    min_group_tp: float
    dominance: dict
    calibration: dict | None = None
    flags: list = field(default_factory=list)

    def as_row(self) -> dict:
        """Flat mapping with a stable column order."""
        row = {"global_capacity": self.global_capacity, "global_tp": self.global_tp}
        for n, c in zip(self.names, self.capacities):
            row[f"capacity_{n}"] = float(c)
        for n, t in zip(self.names, self.tps):
            row[f"tp_{n}"] = float(t)
        row.update(dp_gap=self.dp_gap, eo_gap=self.eo_gap, prop_value=self.prop_value,
                   kl_term=self.kl_term, log_tp=self.log_tp, min_group_tp=self.min_group_tp)
        for (a, b), flag in self.dominance.items():
            row[f"dominates_{a}_over_{b}"] = int(flag)
        if self.calibration is not None:
            for n in self.names:
                row[f"calibration_{n}"] = self.calibration[n]
        row["flags"] = ";".join(self.flags)
        return row


def fairness_report(policy: GroupThresholdPolicy, pop: GroupedPopulation,
                    samples: LabeledSamples | None = None) -> FairnessReport:
    cap = capacity(policy, pop)
    tp = tp_count(policy, pop)
    flags = []
    try:
        eo = eo_gap(policy, pop)
    except DomainError:
        eo = math.nan
        flags.append("zero_base_rate")
    prop = prop_value(policy, pop)
    if math.isinf(prop):
        flags.append("zero_group_tp")
    if tp.total > 0.0:
        kl, log_tp = kl_decomposition(policy, pop)
    else:
        kl, log_tp = math.nan, -math.inf
    dom = {}
    for i, gi in enumerate(pop):
        for j, gj in enumerate(pop):
            if i != j:
                dom[(gi.name, gj.name)] = tail_dominance(gi.dist, gj.dist, 0.0)
    calib = None
    if samples is not None:
        calib = {n: calibration_error(samples, n) for n in pop.names}
    return FairnessReport(
        names=pop.names, capacities=cap.per_group, tps=tp.per_group,
        global_capacity=cap.total, global_tp=tp.total,
        dp_gap=float(cap.per_group.max() - cap.per_group.min()), eo_gap=eo,
        prop_value=prop, kl_term=kl, log_tp=log_tp, min_group_tp=float(tp.per_group.min()),
        dominance=dom, calibration=calib, flags=flags,
    )
