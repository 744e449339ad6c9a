"""Bracketing bisection for monotone scalar functions."""
from typing import Callable, NamedTuple


class Bracket(NamedTuple):
    lo: float
    hi: float
    iterations: int


def bisect_monotone(fn: Callable[[float], float], target: float, lo: float, hi: float,
                    *, increasing: bool = True, xtol: float = 0.0, max_iter: int = 200) -> Bracket:
    """Shrink [lo, hi] around the point where monotone ``fn`` crosses ``target``.

    Invariant on return: ``fn(lo) <= target <= fn(hi)`` for increasing ``fn``
    (reversed when decreasing), provided it held for the initial bracket.
    Stops when the bracket stops shrinking in floating point, when it is
    narrower than ``xtol``, or after ``max_iter`` halvings.
    """
    sign = 1.0 if increasing else -1.0
    it = 0
    while it < max_iter:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        it += 1
        if sign * (fn(mid) - target) < 0.0:
            lo = mid
        else:
            hi = mid
    return Bracket(lo, hi, it)
