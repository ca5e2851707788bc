"""Small one-dimensional search routines shared by the solvers."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-9
) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(argmax, max)``.

    The endpoints are evaluated too, so a maximum sitting on the boundary of
    the bracket is not lost.
    """
    if b < a:
        a, b = b, a
    fa, fb = f(a), f(b)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    best_v, best_x = max(((fc, c), (fd, d), (fa, a), (fb, b)), key=lambda t: t[0])
    return best_x, best_v


def grid_then_golden_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    n: int = 1000,
    top: int = 3,
    tol: float = 1e-9,
) -> tuple[float, float]:
    """Maximize ``f`` on ``[lo, hi]`` by a dense grid, then golden-section
    refinement inside the ``top`` best grid cells.

    Ties are broken by grid order so repeated calls are deterministic.
    """
    if hi <= lo:
        return lo, f(lo)
    grid = np.linspace(lo, hi, n + 1)
    values = np.array([f(float(x)) for x in grid])
    order = np.argsort(-values, kind="stable")
    best_x, best_v = float(grid[order[0]]), float(values[order[0]])
    for idx in order[:top]:
        left = float(grid[max(idx - 1, 0)])
        right = float(grid[min(idx + 1, n)])
        x, v = golden_section_max(f, left, right, tol)
        if v > best_v:
            best_x, best_v = x, v
    return best_x, best_v


def bisect_root(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Plain bisection for a sign change of ``g`` on ``[lo, hi]``."""
    glo = g(lo)
    if glo == 0.0:
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0.0) == (glo < 0.0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)
