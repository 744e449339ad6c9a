import math

import numpy as np
import pytest

from fairalloc.errors import DomainError
from fairalloc.fairness import non_degenerate
from fairalloc.population import Group, GroupedPopulation, random_population
from fairalloc.score_dist import ScoreDistribution
from fairalloc.solvers import (
    SOLVERS, marginal_ratios, price_of_fairness, solve, solve_achievable_eo, solve_equal_opportunity,
    solve_max_min, solve_proportional, solve_utility_max,
)


def flat_family(m, delta, k):
    groups = [Group("S1", 1.0, ScoreDistribution.point_mass(k * delta))]
    groups += [Group(f"S{i + 1}", 1.0, ScoreDistribution.point_mass(delta)) for i in range(1, m)]
    return GroupedPopulation(groups)


def test_g2_utility_max(g2):
    r = solve_utility_max(g2, 0.2)
    assert r.capacities == pytest.approx([0.2, 0.2]) and r.global_tp == pytest.approx(0.12)


def test_g2_max_min(g2):
    r = solve_max_min(g2, 0.2)
    assert r.capacities == pytest.approx([1 / 9, 0.2 + 0.8 / 9], abs=1e-12)
    assert r.tps == pytest.approx([0.8 / 9, 0.8 / 9], abs=1e-12)
    assert r.flags == ()


def test_g2_equal_opportunity(g2):
    r = solve_equal_opportunity(g2, 0.2)
    assert r.capacities == pytest.approx([0.2, 0.2]) and r.global_tp == pytest.approx(0.12)


def test_g2_proportional(g2):
    r = solve_proportional(g2, 0.2)
    assert r.capacities == pytest.approx([0.2, 0.2], abs=1e-12) and r.global_tp == pytest.approx(0.12)
    assert marginal_ratios(r, g2) == pytest.approx([5.0, 5.0])


def test_g2_achievable_eo(g2):
    r = solve_achievable_eo(g2, 0.2)
    assert r.capacities == pytest.approx([0.2, 0.2]) and r.global_tp == pytest.approx(0.12)
    assert r.tps / np.array([0.2, 0.1]) == pytest.approx([0.8, 0.8])


@pytest.mark.parametrize("regime", sorted(SOLVERS))
def test_zero_capacity(g2, regime):
    r = solve(g2, 0.0, regime)
    assert r.global_tp == 0.0 and np.all(r.capacities == 0.0)


@pytest.mark.parametrize("regime", sorted(SOLVERS))
def test_identical_groups_split_evenly(regime, rng):
    d = random_population(rng, groups=1)[0].dist
    # achievable TP depends on group size, so that regime needs equal sizes
    w = (0.5, 0.5) if regime == "achievable_eo" else (0.3, 0.7)
    pop = GroupedPopulation([Group("A", w[0], d), Group("B", w[1], d)])
    r = solve(pop, 0.25, regime)
    assert r.capacities == pytest.approx([0.25, 0.25], abs=1e-9)


@pytest.mark.parametrize("regime", sorted(SOLVERS))
def test_budget_exact(regime, rng):
    for _ in range(100):
        pop = random_population(rng, groups=int(rng.integers(1, 5)))
        c = float(rng.uniform(0, 1))
        r = solve(pop, c, regime)
        assert r.residual <= 1e-10
        assert abs(np.dot(pop.weights, r.capacities) - c) <= 1e-10
        assert np.all((r.capacities >= 0) & (r.capacities <= 1))


def test_utility_max_shares_threshold(rng):
    for _ in range(50):
        pop = random_population(rng, groups=3)
        r = solve_utility_max(pop, float(rng.uniform(0, 1)))
        t = set(r.policy.thresholds)
        # groups either share the pooled threshold or sit above/below it with no atom there
        assert len(t) >= 1 and r.iterations == 0


def test_max_min_saturation_flag():
    rich = ScoreDistribution([0.9], [1.0])
    poor = ScoreDistribution([0.0, 0.1], [0.9, 0.1])
    pop = GroupedPopulation([Group("R", 1, rich), Group("P", 1, poor)])
    r = solve_max_min(pop, 0.6)
    assert "saturated:P" in r.flags
    assert r.tps[1] == pytest.approx(0.01)
    assert r.residual <= 1e-12


def test_max_min_zero_group_boundary():
    pop = GroupedPopulation([Group("Z", 1, ScoreDistribution.point_mass(0.0)),
                             Group("B", 1, ScoreDistribution([0.3, 0.6], [0.5, 0.5]))])
    r = solve_max_min(pop, 0.2)
    assert "saturated:Z" in r.flags and r.tps[0] == 0.0
    assert r.residual <= 1e-12


def test_full_capacity_fills_zero_mass(g2):
    pop = GroupedPopulation([Group("A", 1, ScoreDistribution([0.0, 0.5], [0.5, 0.5])), Group("B", 1, g2[1].dist)])
    r = solve_equal_opportunity(pop, 0.9)
    assert r.residual <= 1e-12 and "zero_score_fill" in r.flags


def test_equal_opportunity_zero_base_rate():
    pop = GroupedPopulation([Group("Z", 1, ScoreDistribution.point_mass(0.0)),
                             Group("B", 1, ScoreDistribution.point_mass(0.5))])
    with pytest.raises(DomainError):
        solve_equal_opportunity(pop, 0.2)
    with pytest.raises(DomainError):
        solve_achievable_eo(pop, 0.2)
    r = solve_proportional(pop, 0.2)
    assert "excluded:Z" in r.flags and r.capacities[0] == 0.0 and r.capacities[1] == pytest.approx(0.4)


def test_capacity_out_of_range(g2):
    with pytest.raises(DomainError):
        solve_max_min(g2, 1.2)
    with pytest.raises(DomainError):
        solve(g2, 0.1, "nope")


def test_equal_base_rates_eo_matches_max_min(rng):
    for _ in range(100):
        a = random_population(rng, groups=1)[0].dist
        b = random_population(rng, groups=1)[0].dist
        # shift b's scores so both means agree
        vb = np.clip(b.values * a.mean / b.mean, 0, 1)
        b = ScoreDistribution(vb, b.weights)
        if abs(b.mean - a.mean) > 1e-12:
            continue
        pop = GroupedPopulation([Group("A", 1, a), Group("B", 2, b)])
        c = float(rng.uniform(0, 0.6))
        assert abs(solve_equal_opportunity(pop, c).global_tp - solve_max_min(pop, c).global_tp) <= 1e-8


def test_proportional_derivative_condition(rng):
    for _ in range(100):
        pop = random_population(rng, groups=2, support=6)
        c = float(rng.uniform(0.05, 0.5))
        r = solve_proportional(pop, c)
        lam = r.parameter
        for (x, h), g in zip(zip(r.capacities, r.tps), pop):
            cv = g.dist.curve
            # left-limit ratio >= lam >= right-limit ratio at interior points
            i = min(np.searchsorted(cv.cw, x - 1e-13), len(cv.values) - 1)
            assert cv.values[i] / h >= lam * (1 - 1e-9) or x >= 1 - 1e-12


def test_aeo_achievable_equals_eo_at_full_capacity(rng):
    for _ in range(30):
        pop = random_population(rng, groups=3)
        a, e = solve_achievable_eo(pop, 1.0), solve_equal_opportunity(pop, 1.0)
        assert a.global_tp == pytest.approx(e.global_tp, abs=1e-12)


def test_flat_family_tightness():
    m, delta, c = 4, 0.01, 0.1
    for k in (2, 10, 50, 100):
        pop = flat_family(m, delta, k)
        r = solve_achievable_eo(pop, c)
        assert r.capacities == pytest.approx([c] * m, abs=1e-12)
        assert r.global_tp == pytest.approx(delta * c * (k / m + (m - 1) / m), rel=1e-12)
        assert solve_utility_max(pop, c).global_tp == pytest.approx(c * k * delta, rel=1e-12)


def test_pof_examples(g2, rng):
    p = price_of_fairness(g2, 0.2, "max_min")
    assert p.multiplicative == pytest.approx(0.12 / (0.8 / 9)) and p.additive == pytest.approx(0.12 - 0.8 / 9)
    assert p.multiplicative == pytest.approx(1.35, abs=0.01) and p.additive == pytest.approx(0.0311, abs=1e-4)
    d = random_population(rng, groups=1)[0].dist
    same = GroupedPopulation([Group("A", 1, d), Group("B", 1, d)])
    for regime in ("max_min", "equal_opportunity", "proportional", "achievable_eo"):
        q = price_of_fairness(same, 0.3, regime)
        assert q.multiplicative == pytest.approx(1.0) and q.additive == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        price_of_fairness(g2, 0.2, "utility_max")


def test_pof_infinite_sentinel():
    pop = GroupedPopulation([Group("Z", 1, ScoreDistribution.point_mass(0.0)),
                             Group("B", 1, ScoreDistribution.point_mass(0.0))])
    p = price_of_fairness(pop, 0.2, "max_min")
    assert math.isinf(p.multiplicative) and p.additive == 0.0


def test_max_min_is_lexicographic_past_a_zero_group():
    pop = GroupedPopulation([Group("Z", 1, ScoreDistribution.point_mass(0.0)),
                             Group("B", 1, ScoreDistribution.point_mass(0.5))])
    r = solve_max_min(pop, 0.2)
    assert r.tps == pytest.approx([0.0, 0.2]) and "saturated:Z" in r.flags


def test_max_min_equal_tp_on_non_degenerate(rng):
    n = 0
    while n < 50:
        pop = random_population(rng, groups=int(rng.integers(2, 5)))
        c = float(rng.uniform(0.01, 0.3))
        if not non_degenerate(pop, 2 * c):
            continue
        n += 1
        r = solve_max_min(pop, c)
        assert r.tps.max() - r.tps.min() <= 1e-8


def test_figure_targets_fast():
    from fairalloc.population import make_figure_population
    pop = make_figure_population("fig3")
    assert solve_proportional(pop, 0.15).global_tp == pytest.approx(0.001124, rel=0.01)
