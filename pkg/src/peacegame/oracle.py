"""Brute-force cross-checks for the analytic solvers.

Nothing here reuses the closed-form reciprocal integrals: integrals go through
``scipy.integrate.quad`` on the quantile function, thresholds come from grid
scans, and auction equilibria come from fictitious play on a discretized game.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .dist import Dist
from .errors import DomainError


@dataclass(frozen=True, eq=False)
class DiscreteGame:
    """A finite all-pay auction: weighted type grids and a shared bid grid."""

    types1: np.ndarray
    weights1: np.ndarray
    types2: np.ndarray
    weights2: np.ndarray
    bids: np.ndarray

    def __post_init__(self) -> None:
        for t, w in ((self.types1, self.weights1), (self.types2, self.weights2)):
            if len(t) != len(w) or len(t) == 0:
                raise DomainError("type grid and weights must be nonempty and aligned")
            if np.any(np.diff(t) <= 0):
                raise DomainError("type grids must be strictly increasing")
            if np.any(w < 0) or abs(float(np.sum(w)) - 1.0) > 1e-12:
                raise DomainError("type weights must be nonnegative and sum to 1")
        if self.bids[0] != 0.0 or np.any(np.diff(self.bids) <= 0):
            raise DomainError("bid grid must start at 0 and strictly increase")


@dataclass(frozen=True, eq=False)
class PlayResult:
    """Averaged strategies after fictitious play and their summary.

    ``H1``/``H2`` are the aggregate bid CDFs on the bid grid; ``regret1`` and
    ``regret2`` hold each type's best-response gain over its mixed strategy.
    """

    game: DiscreteGame
    strategy1: np.ndarray
    strategy2: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    c1: float
    c2: float
    x_sigma: float
    regret1: np.ndarray
    regret2: np.ndarray

    @property
    def max_regret(self) -> float:
        return float(max(self.regret1.max(), self.regret2.max()))


def discretize(d: Dist, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n`` equal-weight types at the quantile midpoints ``(k - 0.5) / n``."""
    if n < 2:
        raise DomainError("need at least two types")
    types = np.array([d.quantile((k - 0.5) / n) for k in range(1, n + 1)])
    return types, np.full(n, 1.0 / n)


def point_type(v: float) -> tuple[np.ndarray, np.ndarray]:
    return np.array([float(v)]), np.array([1.0])


def make_game(t1, t2, top_bid: float, n_bids: int) -> DiscreteGame:
    bids = np.linspace(0.0, top_bid, n_bids)
    return DiscreteGame(t1[0], t1[1], t2[0], t2[1], bids)


def _win_prob(opp_mass: np.ndarray, zero_tie: str) -> np.ndarray:
    below = np.cumsum(opp_mass) - opp_mass
    win = below + 0.5 * opp_mass
    if zero_tie == "win":
        win[0] = opp_mass[0]
    elif zero_tie != "split":
        raise DomainError(f"unknown zero-tie rule {zero_tie!r}")
    return win


def _payoffs(types: np.ndarray, bids: np.ndarray, win: np.ndarray) -> np.ndarray:
    return types[:, None] * win[None, :] - bids[None, :]


def fictitious_play(g: DiscreteGame, iters: int = 10_000, zero_tie: str = "split") -> PlayResult:
    """Simultaneous fictitious play with ``1/t`` averaging from uniform play.

    Ties at positive bids are split evenly.  ``zero_tie="split"`` does the
    same at zero; ``"win"`` credits a zero bid with the opponent's whole atom,
    under which mutual zero bidding can become a spurious rest point.
    """
    if iters < 1:
        raise DomainError("need at least one iteration")
    nb = len(g.bids)
    s1 = np.full((len(g.types1), nb), 1.0 / nb)
    s2 = np.full((len(g.types2), nb), 1.0 / nb)
    rows1, rows2 = np.arange(len(g.types1)), np.arange(len(g.types2))
    for t in range(1, iters + 1):
        m1, m2 = g.weights1 @ s1, g.weights2 @ s2
        br1 = np.argmax(_payoffs(g.types1, g.bids, _win_prob(m2, zero_tie)), axis=1)
        br2 = np.argmax(_payoffs(g.types2, g.bids, _win_prob(m1, zero_tie)), axis=1)
        step = 1.0 / (t + 1)
        s1 *= 1.0 - step
        s2 *= 1.0 - step
        s1[rows1, br1] += step
        s2[rows2, br2] += step

    m1, m2 = g.weights1 @ s1, g.weights2 @ s2
    u1 = _payoffs(g.types1, g.bids, _win_prob(m2, zero_tie))
    u2 = _payoffs(g.types2, g.bids, _win_prob(m1, zero_tie))
    regret1 = u1.max(axis=1) - np.sum(u1 * s1, axis=1)
    regret2 = u2.max(axis=1) - np.sum(u2 * s2, axis=1)
    h1, h2 = np.cumsum(m1), np.cumsum(m2)
    done = np.nonzero((h1 >= 1.0 - 1e-3) & (h2 >= 1.0 - 1e-3))[0]
    x = float(g.bids[done[0]]) if len(done) else float(g.bids[-1])
    return PlayResult(g, s1, s2, h1, h2, float(h1[0]), float(h2[0]), x, regret1, regret2)


# -- quadrature-based re-derivations ---------------------------------------------


def _quad(fun, a: float, b: float, points=()) -> float:
    if b <= a:
        return 0.0
    inner = sorted(p for p in points if a < p < b) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(fun, a, b, points=inner, limit=200, epsabs=1e-12, epsrel=1e-11)
    return val


def _kinks(d: Dist) -> list[float]:
    """CDF levels at the interior piece boundaries, where the quantile has kinks."""
    return [d.cdf(p.lo) for p in d.pieces[1:]]


def upper_tail_integral(f2: Dist, a: float) -> float:
    """``∫_0^1 ds / Q(s | v >= a)`` by quadrature on the quantile function."""
    base = f2.cdf(a)
    if a <= 0.0 and f2.pdf(0.0) > 0.0:
        return math.inf
    kinks = [(k - base) / (1.0 - base) for k in _kinks(f2)]
    return _quad(lambda s: 1.0 / f2.quantile(base + s * (1.0 - base)), 0.0, 1.0, kinks)


def lower_tail_integral(f2: Dist, alpha: float, c: float) -> float:
    """``∫_c^1 ds / Q(s | v <= alpha)`` by quadrature on the quantile function."""
    top = f2.cdf(alpha)
    return _quad(lambda s: 1.0 / f2.quantile(s * top), c, 1.0, [k / top for k in _kinks(f2)])


def known_value_atom(v: float, opp: Dist) -> tuple[float, float]:
    """``(c_known, c_opp)`` atoms when value ``v`` is known, via quadrature
    and bisection on the boundary condition."""
    full = math.inf if opp.support_lo == 0.0 and opp.pdf(0.0) > 0.0 else upper_tail_integral(opp, opp.support_lo)
    if v * full <= 1.0:
        return max(1.0 - v * full, 0.0), 0.0
    g = lambda c: v * _quad(lambda s: 1.0 / opp.quantile(s), c, 1.0, _kinks(opp)) - 1.0  # noqa: E731
    left = 1e-3
    while g(left) <= 0.0:
        left *= 1e-3
    return 0.0, brentq(g, left, 1.0, xtol=1e-13)


def brute_threshold(b: float, belief_v1: float, f2: Dist, grid_n: int = 400) -> float | None:
    """Rejection threshold by scanning ``a`` and minimizing ``|c1(a) * a - b|``.

    ``c1(a)`` is player 1's atom in the auction against player 2's prior
    truncated to ``[a, hi]``, computed by quadrature.  Candidates where player
    2 would keep an atom at zero are skipped.  Returns ``None`` when the bribe
    is accepted by every type.
    """
    lo, hi = f2.support_lo, f2.support_hi
    if b > hi - belief_v1:
        return None
    best_a, best_gap = lo, math.inf
    for a in np.linspace(lo, hi, grid_n + 1)[:-1]:
        a = float(a)
        integral = upper_tail_integral(f2, a)
        if belief_v1 * integral > 1.0:
            # Player 2 would keep an atom at zero after rejecting, so the
            # rejecting types could not all prefer fighting; not a threshold.
            continue
        c1 = 1.0 - belief_v1 * integral
        gap = abs(c1 * a - b)
        if gap < best_gap:
            best_a, best_gap = a, gap
    return best_a


def grid_request_payoff(r: float, v: float, f2: Dist) -> float:
    """Top type's payoff from demanding ``r``, with every integral by quadrature."""
    lo = f2.support_lo
    if r <= lo:
        return r
    _, c_full = known_value_atom(v, f2)
    x_full = v * (1.0 - c_full)
    if r >= x_full:
        return v - x_full
    c2 = 1.0 - r / v
    g = lambda a: v * lower_tail_integral(f2, a, c2) - 1.0  # noqa: E731
    alpha = brentq(g, lo + 1e-9 * f2.support_hi, f2.support_hi, xtol=1e-12)
    p = f2.cdf(alpha)
    return p * (v - r) + (1.0 - p) * r


def grid_request_residual(v1_bar: float, f2: Dist, grid_n: int = 40, zooms: int = 3) -> float:
    """``|lo2 - max_r payoff(r)|`` from a grid over ``[lo2, x*]`` refined by
    repeated zooming around the best node."""
    lo = f2.support_lo
    _, c_full = known_value_atom(v1_bar, f2)
    left, right = lo, v1_bar * (1.0 - c_full)
    best_r, best = lo, grid_request_payoff(lo, v1_bar, f2)
    for _ in range(zooms + 1):
        grid = np.linspace(left, right, grid_n + 1)
        vals = [grid_request_payoff(float(r), v1_bar, f2) for r in grid]
        k = int(np.argmax(vals))
        if vals[k] > best:
            best_r, best = float(grid[k]), vals[k]
        step = (right - left) / grid_n
        left, right = max(lo, float(grid[k]) - step), min(right, float(grid[k]) + step)
    return abs(lo - best)


def two_bribe_candidates(s, cuts, low_bribes) -> list[tuple[float, float, float]]:
    """Grid search for ``(b_l, b_h, cut)`` menus that pass the two-bribe checks.

    The cutoff residual is ``payoff(b_l) - (cut - b_h)``, linear in ``b_h``
    with slope one, so one probe per ``(cut, b_l)`` pins down the ``b_h``
    that zeroes it.  Menus where that ``b_h`` is too small to be accepted or
    does not exceed ``b_l`` are dropped.
    """
    from .bribing import verify_two_bribe_candidate

    found = []
    for cut in cuts:
        for b_l in low_bribes:
            probe_h = float(b_l) + 1.0
            probe = verify_two_bribe_candidate(float(b_l), probe_h, float(cut), s)
            b_h = probe_h - probe.residuals["cutoff_indifference"]
            need = probe_h - probe.residuals["high_bribe_accepted"]
            if b_h > b_l and b_h >= need:
                found.append((float(b_l), b_h, float(cut)))
    return found


def grid_cdf_gap(h_grid: np.ndarray, curve, bids: np.ndarray) -> float:
    """Distance between a bid CDF on a grid and a continuous one, up to one bid step.

    A discrete bid ``b_k`` stands for continuous bids in ``(b_{k-1}, b_{k+1})``,
    so ``h_grid[k]`` is only compared against the band
    ``[curve(b_{k-1}), curve(b_{k+1})]``.  Index 0 covers the atom at zero.
    """
    bids = np.asarray(bids, dtype=float)
    above = np.array([curve(float(b)) for b in np.append(bids[1:], bids[-1])])
    below = np.array([curve(float(b)) for b in np.insert(bids[:-1], 0, 0.0)])
    return float(np.max(np.clip(np.maximum(h_grid - above, below - h_grid), 0.0, None)))
