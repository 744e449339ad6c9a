"""Command-line front end: ``fairalloc run | sweep | verify``.

A JSON config is the source of truth; every flag mirrors a config key and
overrides it. Outputs are CSV files written in a fixed row and column order.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle, solvers
from .errors import CapabilityError, DomainError, ParseError, ValidationError
from .fairness import fairness_report
from .population import (
    Group, GroupedPopulation, LabeledSamples, from_csv, make_figure_population,
    population_from_samples, random_population,
)
from .score_dist import DEFAULT_BINS, ClippedGaussianSpec, discretize

ALL_REGIMES = tuple(sorted(solvers.SOLVERS))
HIST_BINS = 100
HIST_TOP_QUANTILE = 0.9999


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    population: dict
    capacities: list
    regimes: list = field(default_factory=lambda: list(ALL_REGIMES))
    bins: int = DEFAULT_BINS
    seed: int = 0
    out: str = "out"

    def validate(self):
        if not isinstance(self.population, dict):
            raise ConfigError("population must be an object")
        sources = [k for k in ("preset", "csv", "groups") if k in self.population]
        if len(sources) != 1:
            raise ConfigError("population needs exactly one of preset, csv, groups")
        if not self.capacities:
            raise ConfigError("at least one capacity is required")
        for c in self.capacities:
            if not isinstance(c, (int, float)) or not 0.0 <= c <= 1.0:
                raise ConfigError(f"capacity {c!r} outside [0, 1]")
        if not self.regimes:
            raise ConfigError("regimes must be non-empty")
        bad = [r for r in self.regimes if r not in solvers.SOLVERS]
        if bad:
            raise ConfigError(f"unknown regimes {bad}; expected {list(ALL_REGIMES)}")
        if not isinstance(self.bins, int) or self.bins < 2:
            raise ConfigError(f"bins must be an integer >= 2, got {self.bins!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        return self


def load_config(args) -> ScenarioConfig:
    raw = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    known = {"population", "capacity", "capacities", "regimes", "bins", "seed", "out"}
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown config keys {sorted(extra)}")
    caps = raw.get("capacities", raw.get("capacity"))
    if args.capacity is not None:
        caps = args.capacity
    if isinstance(caps, (int, float)):
        caps = [caps]
    regimes = raw.get("regimes", list(ALL_REGIMES))
    if args.regime is not None:
        regimes = args.regime
    if isinstance(regimes, str):
        regimes = [r for r in regimes.split(",") if r]
    cfg = ScenarioConfig(
        population=raw.get("population"),
        capacities=list(caps or []),
        regimes=list(regimes),
        bins=args.bins if args.bins is not None else raw.get("bins", DEFAULT_BINS),
        seed=args.seed if args.seed is not None else raw.get("seed", 0),
        out=args.out if args.out is not None else raw.get("out", "out"),
    )
    if cfg.population is None:
        raise ConfigError("no population given")
    return cfg.validate()


def build_population(cfg: ScenarioConfig, base: Path):
    """(population, labeled samples or None)."""
    src = cfg.population
    if "preset" in src:
        return make_figure_population(src["preset"], cfg.bins), None
    if "csv" in src:
        path = Path(src["csv"])
        if not path.is_absolute():
            path = base / path
        data = from_csv(path)
        if isinstance(data, LabeledSamples):
            return population_from_samples(data), data
        return data, None
    groups = []
    for i, g in enumerate(src["groups"]):
        try:
            spec = ClippedGaussianSpec(float(g["mean"]), float(g["variance"]), cfg.bins)
            groups.append(Group(str(g.get("name", f"S{i + 1}")), float(g.get("weight", 1.0)), discretize(spec)))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"group {i}: needs mean and variance ({exc})") from None
    return GroupedPopulation(groups), None


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row.get(h, "")) for h in header])


def _row_checks(res, report):
    warn = list(res.flags)
    if abs(float(np.dot(res.weights, res.capacities)) - res.capacity) > 1e-9:
        warn.append("capacity_residual")
    if report.global_tp > 0.0 and not math.isinf(report.prop_value):
        if abs(report.prop_value + report.kl_term - report.log_tp) > 1e-9:
            warn.append("kl_identity")
    return warn


def histogram_rows(pop: GroupedPopulation):
    top = max(g.dist.quantile(HIST_TOP_QUANTILE) for g in pop)
    top = top if top > 0.0 else 1.0
    edges = np.linspace(0.0, top, HIST_BINS + 1)
    rows = [dict(bin_lo=0.0, bin_hi=0.0, **{f"mass_{g.name}": g.dist.pmf(0.0) for g in pop})]
    for lo, hi in zip(edges[:-1], edges[1:]):
        rows.append(dict(bin_lo=lo, bin_hi=hi, **{
            f"mass_{g.name}": float(g.dist.weights[(g.dist.values > lo) & (g.dist.values <= hi)].sum())
            for g in pop}))
    if top < 1.0:
        rows.append(dict(bin_lo=top, bin_hi=1.0, **{f"mass_{g.name}": g.dist.survival(top) for g in pop}))
    return rows


def execute(cfg: ScenarioConfig, base: Path = Path(".")) -> Path:
    pop, samples = build_population(cfg, base)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    caps = sorted(set(float(c) for c in cfg.capacities))
    if len(caps) < len(cfg.capacities):
        print("warning: duplicate capacities removed", file=sys.stderr)
    regimes = sorted(set(cfg.regimes))
    names = pop.names
    alloc_rows, fair_rows, pof_rows = [], [], []
    for c in caps:
        opt = solvers.solve_utility_max(pop, c).global_tp
        for regime in regimes:
            key = dict(capacity=c, regime=regime)
            try:
                res = solvers.solve(pop, c, regime)
            except DomainError as exc:
                alloc_rows.append(dict(key, warning=f"error: {exc}"))
                fair_rows.append(dict(key, flags=f"error: {exc}"))
                continue
            report = fairness_report(res.policy, pop, samples)
            row = dict(key)
            for n, t, g in zip(names, res.policy.thresholds, res.policy.gammas):
                row[f"threshold_{n}"], row[f"gamma_{n}"] = t, g
            for n, x, h in zip(names, res.capacities, res.tps):
                row[f"capacity_{n}"], row[f"tp_{n}"] = x, h
            row.update(global_tp=res.global_tp, iterations=res.iterations, residual=res.residual,
                       warning=";".join(_row_checks(res, report)))
            alloc_rows.append(row)
            fair_rows.append(dict(key, **report.as_row()))
            if regime in solvers.FAIR_REGIMES:
                fair = res.global_tp
                pof_rows.append(dict(key, tp_opt=opt, tp_regime=fair,
                                     multiplicative=opt / fair if fair > 0.0 else math.inf,
                                     additive=opt - fair))
    alloc_cols = ["capacity", "regime"]
    alloc_cols += [f"{k}_{n}" for k in ("threshold", "gamma") for n in names]
    alloc_cols += [f"{k}_{n}" for k in ("capacity", "tp") for n in names]
    alloc_cols += ["global_tp", "iterations", "residual", "warning"]
    _write(out / "allocations.csv", alloc_cols, alloc_rows)
    fair_cols = ["capacity", "regime"]
    for r in fair_rows:
        fair_cols += [k for k in r if k not in fair_cols]
    _write(out / "fairness.csv", fair_cols, fair_rows)
    _write(out / "pof.csv", ["capacity", "regime", "tp_opt", "tp_regime", "multiplicative", "additive"], pof_rows)
    _write(out / "histogram.csv", ["bin_lo", "bin_hi"] + [f"mass_{n}" for n in names], histogram_rows(pop))
    return out


def g2_population():
    from .score_dist import ScoreDistribution
    return GroupedPopulation([
        Group("S1", 0.5, ScoreDistribution([0.2, 0.8], [0.8, 0.2])),
        Group("S2", 0.5, ScoreDistribution([0.1, 0.4], [0.8, 0.2])),
    ])


def verify_instance(pop, c, steps=41):
    """(regime, gap, bound) for every solver against the grid oracle."""
    out = []
    for regime, objective in oracle.SOLVER_OBJECTIVE.items():
        try:
            res = solvers.solve(pop, c, regime)
        except DomainError:
            continue
        grid = oracle.GridSpec(steps, c)
        best = oracle.oracle_solve(pop, grid, objective)
        value = oracle.objective_value(pop, res.capacities, objective, c)
        bound = oracle.cell_bound(pop, grid, objective, res.tps)
        out.append((regime, value - best.value, bound))
    return out


def verify(seed: int, instances: int = 20) -> bool:
    rng = np.random.default_rng(seed)
    cases = [("g2", g2_population(), 0.2)]
    for k in range(instances):
        pop = random_population(rng, groups=int(rng.integers(2, 4)), support=4)
        cases.append((f"random{k}", pop, float(rng.uniform(0.05, 0.5))))
    ok = True
    for label, pop, c in cases:
        for regime, gap, bound in verify_instance(pop, c):
            good = -1e-9 <= gap <= bound + 1e-12
            ok &= good
            print(f"{'PASS' if good else 'FAIL'} {label} c={c:.4f} {regime} gap={gap:.3e} bound={bound:.3e}")
    return ok


def _parser():
    p = argparse.ArgumentParser(prog="fairalloc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in ("run", "sweep", "verify"):
        s = sub.add_parser(verb)
        s.add_argument("--config", help="JSON scenario file")
        s.add_argument("--capacity", type=_capacity_list, help="capacity, or comma-separated list for sweep")
        s.add_argument("--regime", help="comma-separated regimes")
        s.add_argument("--seed", type=int)
        s.add_argument("--out", help="output directory")
        s.add_argument("--bins", type=int)
    return p


def _capacity_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad capacity list {text!r}") from None


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.verb == "verify":
        return 0 if verify(args.seed if args.seed is not None else 0) else 1
    try:
        cfg = load_config(args)
        if args.verb == "run" and len(set(cfg.capacities)) != 1:
            raise ConfigError("run takes exactly one capacity; use sweep for a list")
        base = Path(args.config).parent if args.config else Path(".")
        out = execute(cfg, base)
    except (ConfigError, ValidationError, ParseError, DomainError, CapabilityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
