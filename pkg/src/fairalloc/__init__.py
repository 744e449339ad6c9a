"""Capacity-constrained allocation of a scarce resource under group fairness regimes."""
from .errors import CapabilityError, DomainError, ParseError, UnknownGroupError, ValidationError
from .fairness import (
    FairnessReport, achievable_tp, dp_gap, eo_gap, fairness_report, kl_decomposition,
    non_degenerate, prop_value, tail_dominance, tail_dominance_gap,
)
from .kernels import BACKEND
from .oracle import GridSpec, enumerate_splits, oracle_solve
from .policy import (
    GroupThresholdPolicy, calibration_error, capacity, expected_loss, policy_for_capacities,
    solve_threshold_for_capacity, tp_count, tp_count_empirical,
)
from .population import (
    Group, GroupedPopulation, LabeledSample, LabeledSamples, base_rate, from_csv,
    labeled_distribution, make_figure_population, simulate_labels,
)
from .score_dist import ClippedGaussianSpec, ScoreDistribution, discretize
from .solvers import (
    SolveResult, price_of_fairness, solve, solve_achievable_eo, solve_equal_opportunity,
    solve_max_min, solve_proportional, solve_utility_max,
)

__version__ = "0.1.0"
