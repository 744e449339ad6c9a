"""Discrete score distributions on [0, 1].

Everything downstream works on a finite weighted support. Continuous
families only enter through :func:`discretize`, so CDF, quantile and
threshold arithmetic stay exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, ValidationError

DROP_BELOW = 1e-15
DEFAULT_BINS = 10_000


def _check_unit(x, name):
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name}={x!r} outside [0, 1]")


class Curve:
    """Score support sorted high to low, with running mass and score mass.

    ``cw[k]`` is the mass of the top ``k + 1`` support points and ``cm[k]``
    their summed ``weight * score``. These arrays are what the kernels
    consume.
    """

    __slots__ = ("values", "weights", "cw", "cm")

    def __init__(self, values, weights):
        vd = np.ascontiguousarray(values[::-1], dtype=np.float64)
        wd = np.ascontiguousarray(weights[::-1], dtype=np.float64)
        cw = np.cumsum(wd)
        cw[-1] = 1.0
        cm = np.cumsum(wd * vd)
        for a in (vd, wd, cw, cm):
            a.flags.writeable = False
        self.values = vd
        self.weights = wd
        self.cw = cw
        self.cm = cm

    @property
    def base_rate(self):
        return float(self.cm[-1])

    @property
    def positive_mass(self):
        """Mass carried by strictly positive scores."""
        if self.values[-1] > 0.0:
            return 1.0
        return 1.0 - float(self.weights[-1])


class ScoreDistribution:
    """Finite distribution of predictor scores on [0, 1].

    Duplicate values are merged and masses below ``1e-15`` dropped before the
    weights are renormalized, so any positive weighting is accepted.

    >>> d = ScoreDistribution([0.1, 0.3, 0.6], [0.5, 0.3, 0.2])
    >>> d.cdf(0.3), d.quantile(0.6)
    (0.8, 0.3)
    """

    __slots__ = ("_values", "_weights", "_cum", "__dict__")

    def __init__(self, values, weights):
        v = np.asarray(values, dtype=np.float64).ravel()
        w = np.asarray(weights, dtype=np.float64).ravel()
        if v.shape != w.shape or v.size == 0:
            raise ValidationError("values and weights must be non-empty and of equal length")
        if not np.all(np.isfinite(v)) or np.any(v < 0.0) or np.any(v > 1.0):
            raise ValidationError("score values must lie in [0, 1]")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0):
            raise ValidationError("weights must be finite and non-negative")
        uniq, inv = np.unique(v, return_inverse=True)
        merged = np.bincount(inv, weights=w, minlength=uniq.size)
        total = merged.sum()
        if total <= 0.0:
            raise ValidationError("total mass must be positive")
        merged = merged / total
        keep = merged >= DROP_BELOW
        uniq, merged = uniq[keep], merged[keep]
        merged = merged / merged.sum()
        cum = np.cumsum(merged)
        cum[-1] = 1.0
        for a in (uniq, merged, cum):
            a.flags.writeable = False
        self._values = uniq
        self._weights = merged
        self._cum = cum

    @classmethod
    def point_mass(cls, value):
        return cls([value], [1.0])

    @property
    def values(self):
        return self._values

    @property
    def weights(self):
        return self._weights

    def __len__(self):
        return self._values.size

    def __repr__(self):
        return f"ScoreDistribution(n={len(self)}, mean={self.mean:.6g})"

    def __eq__(self, other):
        if not isinstance(other, ScoreDistribution):
            return NotImplemented
        return np.array_equal(self._values, other._values) and np.array_equal(
            self._weights, other._weights
        )

    def __hash__(self):
        return hash((self._values.tobytes(), self._weights.tobytes()))

    @cached_property
    def curve(self):
        return Curve(self._values, self._weights)

    @cached_property
    def mean(self):
        return float(np.dot(self._values, self._weights))

    def cdf(self, t):
        """Pr[u <= t]."""
        _check_unit(t, "t")
        idx = np.searchsorted(self._values, t, side="right")
        return 0.0 if idx == 0 else float(self._cum[idx - 1])

    def survival(self, t):
        """Pr[u > t], summed from the top to avoid cancellation."""
        idx = np.searchsorted(self._values, t, side="right")
        return float(self._weights[idx:].sum())

    def pmf(self, t):
        idx = np.searchsorted(self._values, t, side="left")
        if idx < self._values.size and self._values[idx] == t:
            return float(self._weights[idx])
        return 0.0

    def quantile(self, kappa):
        """inf{t : F(t) >= kappa}; the smallest support value at kappa = 0."""
        _check_unit(kappa, "kappa")
        idx = int(np.searchsorted(self._cum, kappa, side="left"))
        return float(self._values[min(idx, self._values.size - 1)])

    def tail_expectation(self, t, t_max=None):
        """E[1(u > t) u], or E[1(t < u <= t_max) u] when ``t_max`` is given."""
        _check_unit(t, "t")
        mask = self._values > t
        if t_max is not None:
            _check_unit(t_max, "t_max")
            if t_max < t:
                raise DomainError("t_max must not be below t")
            mask &= self._values <= t_max
        return float(np.dot(self._values[mask], self._weights[mask]))

    def quantile_integral(self, lo, hi):
        """Exact integral of the quantile function over [lo, hi].

        q is constant on each cell (F_{k-1}, F_k], so the integral is a
        weighted sum of cell overlaps.
        """
        _check_unit(lo, "lo")
        _check_unit(hi, "hi")
        if hi <= lo:
            return 0.0
        starts = np.concatenate(([0.0], self._cum[:-1]))
        overlap = np.clip(np.minimum(self._cum, hi) - np.maximum(starts, lo), 0.0, None)
        return float(np.dot(overlap, self._values))

    def window_mass(self, beta, t0=0.0):
        """max over r >= t0 of Pr[r <= u <= r + beta]."""
        lo = np.concatenate(([t0], self._values[self._values >= t0]))
        left = np.searchsorted(self._values, lo, side="left")
        right = np.searchsorted(self._values, lo + beta, side="right")
        cum0 = np.concatenate(([0.0], self._cum))
        return float(np.max(cum0[right] - cum0[left]))


@dataclass(frozen=True)
class ClippedGaussianSpec:
    """Gaussian scores clipped to [0, 1]; the clipped mass lands on 0 and 1."""

    mean: float
    variance: float
    bins: int = DEFAULT_BINS

    def __post_init__(self):
        if not self.variance > 0.0:
            raise DomainError(f"variance must be positive, got {self.variance!r}")
        if int(self.bins) != self.bins or self.bins < 2:
            raise DomainError(f"bins must be an integer >= 2, got {self.bins!r}")


def discretize(spec):
    """Histogram a clipped Gaussian onto bin midpoints plus atoms at 0 and 1."""
    sd = np.sqrt(spec.variance)
    edges = np.linspace(0.0, 1.0, spec.bins + 1)
    z = (edges - spec.mean) / sd
    lower = ndtr(z)
    # upper-tail masses from the complementary side keep precision when mean > 1
    upper = ndtr(-z)
    interior = np.where(z[1:] <= 0.0, lower[1:] - lower[:-1], upper[:-1] - upper[1:])
    mids = 0.5 * (edges[:-1] + edges[1:])
    values = np.concatenate(([0.0], mids, [1.0]))
    weights = np.concatenate(([lower[0]], np.clip(interior, 0.0, None), [upper[-1]]))
    return ScoreDistribution(values, weights)
