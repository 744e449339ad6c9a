"""Randomized group-threshold policies and their evaluation.

Evaluation here sums directly over each group's support and never goes
through the curve kernels, so it doubles as an independent check on the
solvers.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DomainError, UnknownGroupError, ValidationError
from .population import GroupedPopulation, LabeledSamples
from .score_dist import ScoreDistribution


@dataclass(frozen=True)
class GroupThresholdPolicy:
    """Per-group threshold ``t`` and tie mass ``gamma``.

    Scores above ``t`` are allocated, scores equal to ``t`` are allocated with
    probability ``gamma``, scores below are not.
    """

    names: tuple
    thresholds: tuple
    gammas: tuple

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if not len(self.names) == len(self.thresholds) == len(self.gammas):
            raise ValidationError("names, thresholds and gammas differ in length")
        for t, g in zip(self.thresholds, self.gammas):
            if not (0.0 <= t <= 1.0 and 0.0 <= g <= 1.0):
                raise ValidationError(f"threshold {t} / gamma {g} outside [0, 1]")

    def __getitem__(self, name):
        try:
            i = self.names.index(name)
        except ValueError:
            raise UnknownGroupError(name) from None
        return self.thresholds[i], self.gammas[i]

    def allocation(self, score, group):
        t, g = self[group]
        return np.where(score > t, 1.0, np.where(score == t, g, 0.0))

    def aligned(self, names):
        """(thresholds, gammas) arrays in the order of ``names``."""
        idx = [self._pos(n) for n in names]
        return np.array(self.thresholds)[idx], np.array(self.gammas)[idx]

    def _pos(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownGroupError(name) from None


class Evaluation(NamedTuple):
    """A population-level value with its per-group conditional values."""

    total: float
    per_group: np.ndarray


def solve_threshold_for_capacity(dist: ScoreDistribution, c: float):
    """(t, gamma) with E[tau(u)] = c; t = q(1 - c), gamma 0 when t carries no atom."""
    if not 0.0 <= c <= 1.0:
        raise DomainError(f"capacity {c!r} outside [0, 1]")
    cv = dist.curve
    t, g = kernels.threshold_at(cv.values, cv.cw, c)
    return float(t), float(g)


def policy_for_capacities(pop: GroupedPopulation, capacities) -> GroupThresholdPolicy:
    """The TP-optimal threshold policy with the given within-group capacities."""
    caps = np.clip(np.asarray(capacities, dtype=np.float64), 0.0, 1.0)
    pairs = [solve_threshold_for_capacity(g.dist, c) for g, c in zip(pop, caps)]
    return GroupThresholdPolicy(pop.names, [p[0] for p in pairs], [p[1] for p in pairs])


def _alloc(dist, t, g):
    v = dist.values
    return np.where(v > t, 1.0, np.where(v == t, g, 0.0))


def capacity(policy: GroupThresholdPolicy, pop: GroupedPopulation) -> Evaluation:
    ts, gs = policy.aligned(pop.names)
    per = np.array([np.dot(grp.dist.weights, _alloc(grp.dist, t, g)) for grp, t, g in zip(pop, ts, gs)])
    return Evaluation(float(np.dot(pop.weights, per)), per)


def tp_count(policy: GroupThresholdPolicy, pop: GroupedPopulation) -> Evaluation:
    """E[tau(p(x), g(x)) p(x)], and per group conditional on membership."""
    ts, gs = policy.aligned(pop.names)
    per = np.array([
        np.dot(grp.dist.weights * grp.dist.values, _alloc(grp.dist, t, g))
        for grp, t, g in zip(pop, ts, gs)
    ])
    return Evaluation(float(np.dot(pop.weights, per)), per)


def _sample_alloc(policy, samples):
    ts, gs = policy.aligned(samples.names)
    t, g = ts[samples.groups], gs[samples.groups]
    s = samples.scores
    return np.where(s > t, 1.0, np.where(s == t, g, 0.0))


def tp_count_empirical(policy: GroupThresholdPolicy, samples: LabeledSamples) -> Evaluation:
    """Weighted sum of tau(score, group) * y, normalized by total weight."""
    a = _sample_alloc(policy, samples) * samples.labels * samples.weights
    per = []
    for i in range(len(samples.names)):
        sel = samples.groups == i
        wsum = samples.weights[sel].sum()
        per.append(a[sel].sum() / wsum if wsum > 0 else np.nan)
    return Evaluation(float(a.sum() / samples.weights.sum()), np.array(per))


def _loss_table(loss):
    arr = np.asarray(loss, dtype=np.float64)
    if arr.shape != (2, 2):
        raise ValidationError("loss must be a 2x2 table indexed [decision][label]")
    if arr[0, 0] != 0.0 or arr[1, 1] != 0.0:
        raise ValidationError("loss table must have zero diagonal")
    if np.any(arr < 0.0):
        raise ValidationError("loss entries must be non-negative")
    return arr


ZERO_ONE_LOSS = ((0.0, 1.0), (1.0, 0.0))


def expected_loss(policy: GroupThresholdPolicy, data, loss=ZERO_ONE_LOSS) -> float:
    """E[f l(1, y) + (1 - f) l(0, y)].

    ``data`` is a population (labels drawn as Bernoulli(score)) or labeled
    samples. ``loss[a][y]`` is the loss of decision ``a`` on label ``y``.
    """
    L = _loss_table(loss)
    if isinstance(data, LabeledSamples):
        f = _sample_alloc(policy, data)
        y = data.labels
        per = f * L[1, y] + (1.0 - f) * L[0, y]
        return float(np.dot(per, data.weights) / data.weights.sum())
    ts, gs = policy.aligned(data.names)
    total = 0.0
    for grp, t, g, rho in zip(data, ts, gs, data.weights):
        v, w = grp.dist.values, grp.dist.weights
        f = _alloc(grp.dist, t, g)
        take = v * L[1, 1] + (1 - v) * L[1, 0]
        leave = v * L[0, 1] + (1 - v) * L[0, 0]
        total += rho * np.dot(w, f * take + (1 - f) * leave)
    return float(total)


def calibration_error(samples: LabeledSamples, group: str) -> float:
    """Sum over distinct scores r of |E[(y - r) 1(p = r) | group]|."""
    sel = samples.mask(group)
    if not np.any(sel):
        raise DomainError(f"group {group!r} has no samples")
    s, y, w = samples.scores[sel], samples.labels[sel], samples.weights[sel]
    uniq, inv = np.unique(s, return_inverse=True)
    dev = np.bincount(inv, weights=w * (y - s), minlength=uniq.size)
    return float(np.abs(dev).sum() / w.sum())
