"""Pure-Python curve kernels; the reference the Cython build must match.

A group curve is the support sorted high to low (``vd``) with running mass
``cw`` and running score mass ``cm`` (see :class:`fairalloc.score_dist.Curve`).
Within-group capacity ``c`` fills the curve from the top.
"""
from bisect import bisect_left, bisect_right
import math


def tp_at(vd, cw, cm, c):
    """TP of the group when the top ``c`` mass is allocated."""
    if c <= 0.0:
        return 0.0
    n = len(vd)
    if c >= 1.0:
        c = 1.0
    k = min(bisect_left(cw, c), n - 1)
    if k == 0:
        return c * vd[0]
    return cm[k - 1] + (c - cw[k - 1]) * vd[k]


def threshold_at(vd, cw, c):
    """(t, gamma) of the randomized threshold with within-group capacity ``c``.

    ``t`` is the smallest support value with at most ``c`` mass strictly above
    it, which is q(1 - c).
    """
    n = len(vd)
    if c <= 0.0:
        return vd[0], 0.0
    k = min(bisect_right(cw, c), n - 1)
    above = cw[k - 1] if k > 0 else 0.0
    w = cw[k] - above
    gamma = (c - above) / w if w > 0.0 else 0.0
    return vd[k], min(max(gamma, 0.0), 1.0)


def capacity_for_tp(vd, cw, cm, h):
    """Smallest capacity whose TP reaches ``h``; ``inf`` when out of reach."""
    if h <= 0.0:
        return 0.0
    k = bisect_left(cm, h)
    if k >= len(vd):
        return math.inf
    prev_w = cw[k - 1] if k > 0 else 0.0
    prev_m = cm[k - 1] if k > 0 else 0.0
    c = prev_w + (h - prev_m) / vd[k]
    return min(c, cw[k])


def capacity_for_ratio(vd, cw, cm, lam):
    """Capacity where marginal score over TP crosses ``lam``.

    ``t(c) / H(c)`` is non-increasing in ``c`` and jumps down between support
    points; inside a jump the capacity sticks to the breakpoint.
    """
    n = len(vd)
    lo, hi = 0, n - 1
    # last k with vd[k] >= lam * cm[k-1]
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if vd[mid] >= lam * cm[mid - 1]:
            lo = mid
        else:
            hi = mid - 1
    k = lo
    prev_w = cw[k - 1] if k > 0 else 0.0
    prev_m = cm[k - 1] if k > 0 else 0.0
    if vd[k] <= 0.0:
        return prev_w
    c = prev_w + 1.0 / lam - prev_m / vd[k]
    return min(max(c, prev_w), cw[k])


def marginal_score(vd, cw, c):
    """Score of the last unit allocated at capacity ``c`` (left limit)."""
    if c <= 0.0:
        return vd[0]
    return vd[min(bisect_left(cw, c), len(vd) - 1)]
