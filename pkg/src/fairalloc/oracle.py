"""Brute-force reference optimizer over a grid of capacity splits.

The global budget ``c`` is cut into ``steps - 1`` equal units and every way
of handing the units to groups is evaluated. Group values come from direct
summation in :mod:`fairalloc.policy`, never from the solver kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import CapabilityError, DomainError
from .fairness import achievable_tp
from .policy import policy_for_capacities, tp_count
from .population import Group, GroupedPopulation

MAX_GROUPS = 4
OBJECTIVES = ("tp", "min_tp", "prop", "eo_ratio", "aeo_ratio")
_SLACK = 1e-12


@dataclass(frozen=True)
class GridSpec:
    steps: int
    capacity: float

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise DomainError(f"steps must be an integer >= 2, got {self.steps!r}")
        if not self.capacity >= 0.0:
            raise DomainError(f"capacity must be non-negative, got {self.capacity!r}")

    @property
    def units(self):
        return int(self.steps) - 1

    @property
    def cell(self):
        """Global capacity carried by one grid unit."""
        return self.capacity / self.units


class OracleResult(NamedTuple):
    split: np.ndarray
    value: float
    evaluated: int


def _compositions(n, m):
    if m == 1:
        yield (n,)
        return
    for k in range(n + 1):
        for rest in _compositions(n - k, m - 1):
            yield (k,) + rest


def _check_size(pop):
    if len(pop) > MAX_GROUPS:
        raise CapabilityError(f"oracle supports at most {MAX_GROUPS} groups, got {len(pop)}")


def _unit_caps(pop, grid):
    """Within-group capacity for 0..units units; NaN where it exceeds 1."""
    k = np.arange(grid.units + 1, dtype=np.float64)
    caps = np.outer(grid.cell / pop.weights, k)
    caps[caps > 1.0 + _SLACK] = np.nan
    return np.minimum(caps, 1.0)


def enumerate_splits(pop: GroupedPopulation, grid: GridSpec) -> Iterator[np.ndarray]:
    """Yield within-group capacity vectors with sum_i rho_i c_i = c, in lexicographic order."""
    _check_size(pop)
    table = _unit_caps(pop, grid)
    idx = np.arange(len(pop))
    for comp in _compositions(grid.units, len(pop)):
        caps = table[idx, comp]
        if not np.any(np.isnan(caps)):
            yield caps


def _group_values(pop, table):
    """TP of each group at each tabulated capacity, evaluated one group at a time."""
    out = np.full(table.shape, np.nan)
    for i, g in enumerate(pop):
        solo = GroupedPopulation([Group(g.name, 1.0, g.dist)])
        for k, c in enumerate(table[i]):
            if not np.isnan(c):
                out[i, k] = tp_count(policy_for_capacities(solo, [c]), solo).total
    return out


def _score(objective, pop, tps, grid):
    rho = pop.weights
    if objective == "tp":
        return tps @ rho
    if objective == "min_tp":
        return tps.min(axis=1)
    if objective == "prop":
        with np.errstate(divide="ignore"):
            return np.log(tps) @ rho
    if objective == "eo_ratio":
        base = pop.base_rates()
        if np.any(base <= 0.0):
            raise DomainError("eo_ratio needs every base rate positive")
        return (tps / base).min(axis=1)
    if objective == "aeo_ratio":
        ach = np.array([achievable_tp(pop, n, grid.capacity) for n in pop.names])
        if np.any(ach <= 0.0):
            raise DomainError("aeo_ratio needs positive achievable TP in every group")
        return (tps / ach).min(axis=1)
    raise DomainError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")


def oracle_solve(pop: GroupedPopulation, grid: GridSpec, objective: str) -> OracleResult:
    """Exhaustive argmax of ``objective`` over the grid; ties go to the smallest split."""
    if objective not in OBJECTIVES:
        raise DomainError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    _check_size(pop)
    table = _unit_caps(pop, grid)
    comps = np.array(list(_compositions(grid.units, len(pop))), dtype=np.intp).reshape(-1, len(pop))
    idx = np.arange(len(pop))
    caps = table[idx, comps]
    ok = ~np.any(np.isnan(caps), axis=1)
    if not ok.any():
        raise DomainError("no feasible split on this grid")
    comps, caps = comps[ok], caps[ok]
    tps = _group_values(pop, table)[idx, comps]
    values = _score(objective, pop, tps, grid)
    best = int(np.argmax(values))  # first maximum, and rows are in lexicographic order
    return OracleResult(caps[best], float(values[best]), int(len(values)))


def objective_value(pop: GroupedPopulation, caps, objective: str, capacity: float) -> float:
    """Evaluate ``objective`` at one capacity vector, the same way the oracle does."""
    caps = np.asarray(caps, dtype=np.float64)
    tps = _group_values(pop, caps.reshape(-1, 1)).reshape(1, -1)
    return float(_score(objective, pop, tps, GridSpec(2, capacity))[0])


def cell_bound(pop: GroupedPopulation, grid: GridSpec, objective: str, tps=None) -> float:
    """Largest change of ``objective`` when each group's global share moves by one cell.

    Group TP has slope at most its top score, and one cell of global share is
    ``cell / rho_i`` of within-group capacity. ``tps`` (the per-group TP at
    the optimum) is needed for ``prop``.
    """
    rho = pop.weights
    vmax = np.array([g.dist.values[-1] for g in pop])
    step = vmax * grid.cell / rho
    if objective == "tp":
        return float(np.dot(rho, step))
    if objective == "min_tp":
        return float(step.max())
    if objective == "eo_ratio":
        return float((step / pop.base_rates()).max())
    if objective == "aeo_ratio":
        ach = np.array([achievable_tp(pop, n, grid.capacity) for n in pop.names])
        return float((step / ach).max())
    if objective == "prop":
        if tps is None:
            raise DomainError("prop bound needs the per-group TP at the optimum")
        low = np.asarray(tps) - step
        if np.any(low <= 0.0):
            return math.inf
        return float(np.dot(rho, np.log(np.asarray(tps) / low)))
    raise DomainError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")


SOLVER_OBJECTIVE = {
    "utility_max": "tp",
    "max_min": "min_tp",
    "proportional": "prop",
    "equal_opportunity": "eo_ratio",
    "achievable_eo": "aeo_ratio",
}
