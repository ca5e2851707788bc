"""Equilibria of two-player all-pay auctions with private values.

An equilibrium is summarized by the highest bid ``x_sigma``, the atoms at
zero ``c1`` and ``c2`` of the two bid distributions, and the bid CDFs ``H1``
and ``H2`` on ``[0, x_sigma]``.  The CDFs satisfy

    H_i'(beta) = 1 / Q_j(H_j(beta)),   H_i(x_sigma) = 1,   c1 * c2 = 0,

where ``Q_j`` is the quantile function of the opponent's belief.  When one
player's value is commonly known the system has a closed form; otherwise it
is solved by shooting on ``x_sigma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import brentq

from .dist import Dist
from .errors import DegenerateSupportError, DomainError, NumericFailure

#: Number of bid levels in every stored bid CDF table.
TABLE_SIZE = 2048
#: Atoms at or below this are reported as exactly zero.
ATOM_SNAP = 1e-6
#: Largest change of either bid CDF allowed in one integration step.
MAX_STEP_DH = 1e-3


@dataclass(frozen=True)
class PointMass:
    """A belief that puts probability one on the value ``v``."""

    v: float


@dataclass(frozen=True)
class Prior:
    """A belief given by a continuous distribution."""

    d: Dist


Belief = Union[PointMass, Prior]


@dataclass(frozen=True, eq=False)
class BidCurve:
    """A nondecreasing bid CDF sampled on an increasing grid of bids."""

    beta: np.ndarray
    values: np.ndarray

    def __call__(self, b: float) -> float:
        if b >= self.beta[-1]:
            return 1.0
        return float(np.interp(b, self.beta, self.values))

    @property
    def atom(self) -> float:
        return float(self.values[0])


@dataclass(frozen=True, eq=False)
class AuctionEq:
    """Summary of an all-pay auction equilibrium.

    ``known_side`` is 1 or 2 when the equilibrium was built with that
    player's value commonly known (``known_value``), else ``None``.
    """

    x_sigma: float
    c1: float
    c2: float
    H1: BidCurve
    H2: BidCurve
    known_side: int | None = None
    known_value: float | None = None

    def curve(self, player: int) -> BidCurve:
        return self.H1 if player == 1 else self.H2

    def summary(self) -> dict:
        return {"x_sigma": self.x_sigma, "c1": self.c1, "c2": self.c2}

    def table(self) -> list[tuple[float, float, float]]:
        """Rows ``(beta, H1(beta), H2(beta))`` on the shared bid grid."""
        grid = self.H1.beta
        if not np.array_equal(grid, self.H2.beta):
            grid = np.union1d(self.H1.beta, self.H2.beta)
        return [(float(b), self.H1(float(b)), self.H2(float(b))) for b in grid]


def _other(side: int) -> int:
    if side not in (1, 2):
        raise DomainError(f"player index must be 1 or 2, got {side}")
    return 3 - side


def _boundary_quantile(v: float, opp: Dist) -> float:
    """The value ``q`` with ``v * ∫_q^hi f(t)/t dt == 1``, or ``opp.support_lo``
    when the whole integral is already at most ``1/v``."""
    lo, hi = opp.support_lo, opp.support_hi
    total = opp.recip_integral(lo, hi)
    if v * total <= 1.0:
        return lo
    g = lambda q: v * opp.recip_integral(q, hi) - 1.0  # noqa: E731
    left = lo
    if lo == 0.0:
        # The integral diverges at zero; walk down until it exceeds 1/v.
        left = hi * 1e-3
        while g(left) <= 0.0:
            left *= 1e-3
            if left < hi * 1e-300:
                raise NumericFailure("reciprocal integral does not exceed 1/v near zero")
    return brentq(g, left, hi, xtol=1e-13 * max(hi, 1.0), rtol=4 * np.finfo(float).eps, maxiter=500)


def threshold_c(v: float, opp: Dist) -> float:
    """Smallest ``c`` with ``v * ∫_c^1 ds / Q_opp(s) <= 1``.

    This is the opponent's atom at zero when the value ``v`` is commonly
    known.  It is nondecreasing in ``v`` and zero for small enough ``v``.
    """
    if v < 0.0:
        raise DomainError(f"value must be nonnegative, got {v}")
    if v == 0.0:
        return 0.0
    q = _boundary_quantile(v, opp)
    return 0.0 if q == opp.support_lo else opp.cdf(q)


def top_bid(v_star: float, opp: Dist) -> float:
    """Highest bid ``x_sigma`` of the equilibrium with known value ``v_star``,
    without building the bid tables."""
    return v_star * (1.0 - threshold_c(v_star, opp))


def solve_one_sided(v_star: float, opp: Dist, known_side: int = 1) -> AuctionEq:
    """Closed-form equilibrium when player ``known_side`` has commonly known
    value ``v_star`` and the opponent's value is distributed as ``opp``.

    ``v_star == 0`` is accepted as a limiting case: the known player never
    bids, the opponent wins with an arbitrarily small bid, and ``x_sigma`` is 0.
    """
    opp_side = _other(known_side)
    if v_star < 0.0 or not math.isfinite(v_star):
        raise DomainError(f"known value must be finite and nonnegative, got {v_star}")
    if v_star == 0.0:
        flat = BidCurve(np.zeros(1), np.ones(1))
        atoms = {known_side: 1.0, opp_side: 0.0}
        return AuctionEq(0.0, atoms[1], atoms[2], flat, flat, known_side, 0.0)

    q0 = _boundary_quantile(v_star, opp)
    if q0 == opp.support_lo:
        c_opp = 0.0
        c_known = max(1.0 - v_star * opp.recip_integral(opp.support_lo, opp.support_hi), 0.0)
    else:
        c_opp = opp.cdf(q0)
        c_known = 0.0
    if c_known <= ATOM_SNAP * 1e-3:
        c_known = 0.0
    x = v_star * (1.0 - c_opp)

    beta = np.linspace(0.0, x, TABLE_SIZE)
    h_opp = np.minimum(c_opp + beta / v_star, 1.0)
    h_opp[-1] = 1.0
    h_known = np.empty_like(beta)
    h_known[0] = c_known
    for k in range(1, TABLE_SIZE):
        # H_known(beta) = c_known + v* ∫ ds / Q_opp(s) over s in [c_opp, H_opp(beta)].
        h_known[k] = c_known + v_star * opp.recip_integral(q0, opp.quantile(float(h_opp[k])))
    h_known = np.minimum(np.maximum.accumulate(h_known), 1.0)
    h_known[-1] = 1.0

    curves = {known_side: BidCurve(beta, h_known), opp_side: BidCurve(beta, h_opp)}
    atoms = {known_side: c_known, opp_side: c_opp}
    return AuctionEq(x, atoms[1], atoms[2], curves[1], curves[2], known_side, float(v_star))


def solve(belief1: Belief, belief2: Belief, **kwargs) -> AuctionEq:
    """Dispatch on the belief pair: closed form when one side is a point mass."""
    if isinstance(belief1, PointMass) and isinstance(belief2, PointMass):
        raise DomainError("both values known is outside the model")
    if isinstance(belief1, PointMass):
        return solve_one_sided(belief1.v, belief2.d, known_side=1)
    if isinstance(belief2, PointMass):
        return solve_one_sided(belief2.v, belief1.d, known_side=2)
    return solve_two_sided(belief1.d, belief2.d, **kwargs)


# -- two-sided shooting ---------------------------------------------------------


def _shoot(x: float, f1: Dist, f2: Dist, record: bool = False):
    """Integrate the bid-CDF system backward from ``beta = x`` with both CDFs 1.

    Returns ``(miss, nodes)``.  ``miss`` is ``min(H1(0), H2(0))`` when both
    stay positive down to zero bid, else minus the bid at which the first CDF
    reaches zero.  ``nodes`` holds ``(beta, H1, H2)`` rows when ``record``.
    """

    def rhs(h1: float, h2: float) -> tuple[float, float]:
        q2 = f2.quantile(min(max(h2, 0.0), 1.0))
        q1 = f1.quantile(min(max(h1, 0.0), 1.0))
        return (1.0 / q2 if q2 > 0.0 else math.inf, 1.0 / q1 if q1 > 0.0 else math.inf)

    beta, h1, h2 = x, 1.0, 1.0
    nodes = [(beta, h1, h2)] if record else None
    floor = x * 1e-15
    while beta > floor:
        s1, s2 = rhs(h1, h2)
        slope = max(s1, s2)
        if not math.isfinite(slope):
            break
        step = min(beta, MAX_STEP_DH / slope)
        k1 = (s1, s2)
        k2 = rhs(h1 - 0.5 * step * k1[0], h2 - 0.5 * step * k1[1])
        k3 = rhs(h1 - 0.5 * step * k2[0], h2 - 0.5 * step * k2[1])
        k4 = rhs(h1 - step * k3[0], h2 - step * k3[1])
        if not all(math.isfinite(a) for a in (*k2, *k3, *k4)):
            # The right-hand side blows up inside the step; fall back to Euler.
            k2 = k3 = k4 = k1
        n1 = h1 - step * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
        n2 = h2 - step * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
        nb = beta - step
        if n1 <= 0.0 or n2 <= 0.0:
            # Locate where the first CDF crosses zero by linear interpolation.
            t1 = h1 / (h1 - n1) if n1 <= 0.0 else math.inf
            t2 = h2 / (h2 - n2) if n2 <= 0.0 else math.inf
            t = min(t1, t2)
            cross = beta - t * step
            c1 = 0.0 if t1 <= t2 else h1 + t * (n1 - h1)
            c2 = 0.0 if t2 <= t1 else h2 + t * (n2 - h2)
            if record:
                nodes.append((cross, max(c1, 0.0), max(c2, 0.0)))
            return -cross, nodes
        beta, h1, h2 = nb, n1, n2
        if record:
            nodes.append((beta, h1, h2))
    if beta > floor:
        # Stopped on an infinite slope: one CDF is pinned at a zero quantile.
        return -beta, nodes
    return min(h1, h2), nodes


def solve_two_sided(
    f1: Dist, f2: Dist, xtol: float = 1e-10, max_iter: int = 200
) -> AuctionEq:
    """Equilibrium for independent continuous priors, by shooting on ``x_sigma``.

    The highest bid lies between the smaller support infimum and the larger
    support supremum; the miss function of :func:`_shoot` is decreasing in
    ``x`` and its root is the equilibrium.  Raises :class:`NumericFailure`
    carrying the bracket when the root is not found within ``max_iter``
    iterations or the bracket shows no sign change.
    """
    if max(f1.support_lo, f2.support_lo) <= 0.0:
        raise DegenerateSupportError(
            "at least one support infimum must be positive for the shooting solver"
        )
    lo = min(f1.support_lo, f2.support_lo)
    hi = max(f1.support_hi, f2.support_hi)
    miss = lambda x: _shoot(x, f1, f2)[0]  # noqa: E731
    g_lo = miss(lo) if lo > 0.0 else 1.0
    g_hi = miss(hi)
    if g_lo < 0.0 or g_hi > 0.0:
        raise NumericFailure(f"shooting bracket [{lo}, {hi}] has no sign change", (lo, hi))
    if g_lo == 0.0:
        x = lo
    elif g_hi == 0.0:
        x = hi
    else:
        try:
            x, info = brentq(
                miss, lo if lo > 0.0 else hi * 1e-12, hi,
                xtol=xtol, maxiter=max_iter, full_output=True, disp=False,
            )
        except ValueError as exc:
            raise NumericFailure(str(exc), (lo, hi)) from exc
        if not info.converged:
            raise NumericFailure(
                f"shooting did not converge in {max_iter} iterations", (lo, hi)
            )
    return _assemble(x, f1, f2)


def _assemble(x: float, f1: Dist, f2: Dist) -> AuctionEq:
    _, nodes = _shoot(x, f1, f2, record=True)
    rows = np.array(nodes[::-1])
    if rows[0, 0] > 0.0:
        rows = np.vstack([[0.0, rows[0, 1], rows[0, 2]], rows])
    beta = np.linspace(0.0, x, TABLE_SIZE)
    curves = []
    for col in (1, 2):
        h = np.interp(beta, rows[:, 0], rows[:, col])
        h = np.clip(np.maximum.accumulate(h), 0.0, 1.0)
        h[-1] = 1.0
        curves.append(h)
    c1, c2 = (0.0 if h[0] <= ATOM_SNAP else float(h[0]) for h in curves)
    curves[0][0], curves[1][0] = c1, c2
    return AuctionEq(float(x), c1, c2, BidCurve(beta, curves[0]), BidCurve(beta, curves[1]))


# -- payoffs ----------------------------------------------------------------


def payoff_sup(v: float, opp_curve: BidCurve) -> float:
    """Best expected payoff ``max_beta v * H_opp(beta) - beta`` of a bidder with
    value ``v`` facing the bid CDF ``opp_curve``.

    The tables are piecewise linear, so the maximum sits on a grid node.
    """
    if v < 0.0:
        raise DomainError(f"value must be nonnegative, got {v}")
    if v == 0.0:
        return 0.0
    return max(float(np.max(v * opp_curve.values - opp_curve.beta)), 0.0)


def secret_best_response(v: float, eq: AuctionEq, known_v: float | None = None) -> tuple[float, float]:
    """Best ``(bid, payoff)`` of a player whose true value ``v`` differs from
    the commonly known value the equilibrium ``eq`` was built on.

    Values above the known one bid the top bid ``x_sigma``; lower values bid
    zero and collect the opponent's atom.
    """
    if eq.known_side is None:
        raise DomainError("secret bidding needs an equilibrium with a known value")
    known_v = eq.known_value if known_v is None else known_v
    c_opp = eq.c2 if eq.known_side == 1 else eq.c1
    if v > known_v:
        return eq.x_sigma, max(v - eq.x_sigma, c_opp * v)
    return 0.0, c_opp * v
