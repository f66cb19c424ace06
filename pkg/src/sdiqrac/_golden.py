"""Derivative-free 1-D maximization on a closed interval."""
from __future__ import annotations

import math
from typing import Callable

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(fn: Callable[[float], float], lo: float, hi: float,
               iters: int = 60) -> tuple[float, float]:
    """Golden-section maximization of ``fn`` on ``[lo, hi]``.

    Returns ``(x, fn(x))`` for the best point seen, endpoints included.
    Exact for unimodal functions; for piecewise-smooth objectives callers
    should pass a bracket inside one smooth segment.
    """
    if hi < lo:
        lo, hi = hi, lo
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    candidates = [(c, fc), (d, fd), (lo, fn(lo)), (hi, fn(hi))]
    return max(candidates, key=lambda t: t[1])


def bisect_decreasing(fn: Callable[[float], float], target: float,
                      lo: float, hi: float, iters: int = 80) -> float:
    """Solve ``fn(x) = target`` for strictly decreasing ``fn`` on [lo, hi]."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
