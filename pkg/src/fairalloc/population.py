"""Grouped populations, labeled samples and the simulation presets."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ParseError, UnknownGroupError, ValidationError
from .rootfind import bisect_monotone
from .score_dist import DEFAULT_BINS, ClippedGaussianSpec, ScoreDistribution, discretize


@dataclass(frozen=True)
class Group:
    name: str
    weight: float
    dist: ScoreDistribution


class GroupedPopulation:
    """A partition of the population into named groups with score distributions.

    Group weights are normalized on construction; order is preserved.
    """

    def __init__(self, groups: Sequence[Group | tuple]):
        groups = [g if isinstance(g, Group) else Group(*g) for g in groups]
        if not groups:
            raise ValidationError("a population needs at least one group")
        names = [str(g.name) for g in groups]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate group names in {names}")
        w = np.array([g.weight for g in groups], dtype=np.float64)
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValidationError("group weights must be positive")
        w = w / w.sum()
        w.flags.writeable = False
        self._groups = tuple(Group(n, float(x), g.dist) for n, x, g in zip(names, w, groups))
        self._weights = w
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self):
        return len(self._groups)

    def __iter__(self) -> Iterator[Group]:
        return iter(self._groups)

    def __getitem__(self, i):
        return self._groups[i]

    def __repr__(self):
        inner = ", ".join(f"{g.name}:{g.weight:.4g}" for g in self._groups)
        return f"GroupedPopulation({inner})"

    @property
    def names(self):
        return tuple(g.name for g in self._groups)

    @property
    def weights(self):
        return self._weights

    @property
    def dists(self):
        return tuple(g.dist for g in self._groups)

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownGroupError(name) from None

    def group(self, name):
        return self._groups[self.index(name)]

    def base_rates(self):
        return np.array([g.dist.mean for g in self._groups])

    @property
    def mean_score(self):
        """Population-level E[p(x)]."""
        pooled = np.concatenate([g.weight * g.dist.weights * g.dist.values for g in self._groups])
        return float(pooled.sum())

    def pooled(self):
        """The score distribution of the whole population."""
        values = np.concatenate([g.dist.values for g in self._groups])
        weights = np.concatenate([g.weight * g.dist.weights for g in self._groups])
        return ScoreDistribution(values, weights)

    def split_group(self, name, eta):
        """Split a group uniformly at random into two parts of relative size eta, 1 - eta."""
        if not 0.0 < eta < 1.0:
            raise DomainError("eta must lie in (0, 1)")
        i = self.index(name)
        g = self._groups[i]
        parts = [Group(f"{name}.a", g.weight * eta, g.dist), Group(f"{name}.b", g.weight * (1 - eta), g.dist)]
        return GroupedPopulation(list(self._groups[:i]) + parts + list(self._groups[i + 1:]))


def base_rate(pop: GroupedPopulation, group: str) -> float:
    """E[p(x) | x in group], the base rate under the simulated distribution."""
    return pop.group(group).dist.mean


class LabeledSample(NamedTuple):
    score: float
    group: str
    label: int
    weight: float


class LabeledSamples:
    """Weighted labeled samples stored column-wise.

    ``groups`` holds indices into ``names``. Weights need not sum to one.
    """

    def __init__(self, scores, groups, labels, weights, names):
        self.scores = np.asarray(scores, dtype=np.float64)
        self.groups = np.asarray(groups, dtype=np.intp)
        self.labels = np.asarray(labels, dtype=np.int8)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.names = tuple(names)
        n = self.scores.size
        if not (self.groups.size == self.labels.size == self.weights.size == n):
            raise ValidationError("sample columns differ in length")
        if np.any(self.weights <= 0.0):
            raise ValidationError("sample weights must be positive")
        if np.any((self.scores < 0.0) | (self.scores > 1.0)):
            raise ValidationError("sample scores must lie in [0, 1]")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise ValidationError("labels must be 0 or 1")
        for a in (self.scores, self.groups, self.labels, self.weights):
            a.flags.writeable = False

    def __len__(self):
        return self.scores.size

    def __iter__(self):
        return iter(self.records())

    def records(self):
        return [LabeledSample(float(s), self.names[g], int(y), float(w))
                for s, g, y, w in zip(self.scores, self.groups, self.labels, self.weights)]

    @classmethod
    def from_records(cls, records: Sequence[LabeledSample]):
        names = list(dict.fromkeys(r.group for r in records))
        idx = {n: i for i, n in enumerate(names)}
        return cls([r.score for r in records], [idx[r.group] for r in records],
                   [r.label for r in records], [r.weight for r in records], names)

    def group_index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownGroupError(name) from None

    def mask(self, name):
        return self.groups == self.group_index(name)


def simulate_labels(pop: GroupedPopulation, n: int, seed: int,
                    label_prob: Callable[[np.ndarray], np.ndarray] | None = None) -> LabeledSamples:
    """Draw ``n`` iid (group, score, label) triples.

    Labels are Bernoulli(score) unless ``label_prob`` maps scores to a
    different success probability, which is how miscalibration is injected.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    rng = np.random.default_rng(seed)
    groups = rng.choice(len(pop), size=n, p=pop.weights)
    scores = np.empty(n)
    for i, g in enumerate(pop):
        sel = groups == i
        scores[sel] = rng.choice(g.dist.values, size=int(sel.sum()), p=g.dist.weights)
    probs = scores if label_prob is None else np.clip(label_prob(scores), 0.0, 1.0)
    labels = (rng.random(n) < probs).astype(np.int8)
    return LabeledSamples(scores, groups, labels, np.full(n, 1.0 / n), pop.names)


def labeled_distribution(pop: GroupedPopulation,
                         label_prob: Callable[[np.ndarray], np.ndarray] | None = None) -> LabeledSamples:
    """The exact joint law of (group, score, label) as weighted records.

    Each support point yields a positive and a negative record weighted by
    the label probability, so sample-based evaluation returns expectations.
    """
    cols = ([], [], [], [])
    for i, g in enumerate(pop):
        v, w = g.dist.values, g.weight * g.dist.weights
        pi = v if label_prob is None else np.clip(label_prob(v), 0.0, 1.0)
        for label, mass in ((1, w * pi), (0, w * (1.0 - pi))):
            keep = mass > 0.0
            cols[0].append(v[keep])
            cols[1].append(np.full(int(keep.sum()), i))
            cols[2].append(np.full(int(keep.sum()), label))
            cols[3].append(mass[keep])
    return LabeledSamples(*(np.concatenate(c) for c in cols), pop.names)


_POP_COLS = ("group", "score", "weight")
_LABELED_COLS = ("group", "score", "weight", "label")


def from_csv(path) -> GroupedPopulation | LabeledSamples:
    """Load ``group,score,weight`` (population) or ``group,score,weight,label`` (samples)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(h.strip() for h in next(reader))
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if header not in (_POP_COLS, _LABELED_COLS):
            raise ParseError(f"header must be {','.join(_POP_COLS)}[,label], got {','.join(header)}", line=1)
        labeled = len(header) == 4
        rows = []
        for line, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=line)
            name = row[0].strip()
            try:
                score = float(row[1])
                weight = float(row[2])
                label = int(row[3]) if labeled else None
            except ValueError as exc:
                raise ParseError(str(exc), line=line) from None
            if not name:
                raise ParseError("empty group identifier", line=line)
            if not (0.0 <= score <= 1.0):
                raise ValidationError(f"line {line}: score {score} outside [0, 1]")
            if not weight > 0.0:
                raise ValidationError(f"line {line}: weight must be positive, got {weight}")
            if labeled and label not in (0, 1):
                raise ValidationError(f"line {line}: label must be 0 or 1, got {label}")
            rows.append((name, score, weight, label))
    if not rows:
        raise ParseError("no data rows")
    names = list(dict.fromkeys(r[0] for r in rows))
    if labeled:
        idx = {n: i for i, n in enumerate(names)}
        return LabeledSamples([r[1] for r in rows], [idx[r[0]] for r in rows],
                              [r[3] for r in rows], [r[2] for r in rows], names)
    groups = []
    for name in names:
        sc = [r[1] for r in rows if r[0] == name]
        wt = [r[2] for r in rows if r[0] == name]
        groups.append(Group(name, float(sum(wt)), ScoreDistribution(sc, wt)))
    return GroupedPopulation(groups)


FIG2_POST_CLIP_MEAN = 0.00235


def calibrate_clipped_mean(variance, target, bins=DEFAULT_BINS):
    """Pre-clip mean whose discretized, clipped Gaussian has mean ``target``."""
    def post_mean(mu):
        return discretize(ClippedGaussianSpec(mu, variance, bins)).mean

    br = bisect_monotone(post_mean, target, -1.0, 1.0, xtol=1e-15)
    return 0.5 * (br.lo + br.hi)


@lru_cache(maxsize=16)
def make_figure_population(which: str, bins: int = DEFAULT_BINS) -> GroupedPopulation:
    """The two-group populations behind the three simulation figures."""
    if which == "fig1":
        specs = [(0.05, 0.02), (0.05, 0.01)]
    elif which == "fig2":
        specs = [(calibrate_clipped_mean(v, FIG2_POST_CLIP_MEAN, bins), v) for v in (5e-5, 5e-6)]
    elif which == "fig3":
        specs = [(0.005, 5e-6), (0.002, 8e-6)]
    else:
        raise DomainError(f"unknown preset {which!r}; expected fig1, fig2 or fig3")
    return GroupedPopulation([
        Group(f"S{i + 1}", 0.5, discretize(ClippedGaussianSpec(mu, var, bins)))
        for i, (mu, var) in enumerate(specs)
    ])


def population_from_samples(samples: LabeledSamples) -> GroupedPopulation:
    """Group-wise weighted score distributions of labeled samples."""
    groups = []
    for i, name in enumerate(samples.names):
        sel = samples.groups == i
        if not np.any(sel):
            raise ValidationError(f"group {name!r} has no samples")
        w = samples.weights[sel]
        groups.append(Group(name, float(w.sum()), ScoreDistribution(samples.scores[sel], w)))
    return GroupedPopulation(groups)


def random_population(rng: np.random.Generator, groups: int = 2, support: int = 5,
                      equal_weights: bool = False) -> GroupedPopulation:
    """Small random instance: ``support`` uniform scores per group, Dirichlet masses."""
    out = []
    rho = np.full(groups, 1.0 / groups) if equal_weights else rng.dirichlet(np.full(groups, 2.0))
    for i in range(groups):
        vals = rng.uniform(0.0, 1.0, size=support)
        out.append(Group(f"G{i + 1}", float(rho[i]), ScoreDistribution(vals, rng.dirichlet(np.ones(support)))))
    return GroupedPopulation(out)
