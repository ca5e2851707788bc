"""Peace through bribing: player 1 offers a payment, player 2 accepts or fights.

Player 2 answers an offer ``b`` by rejecting exactly when its value is at
least a threshold ``a2(b)``.  The threshold makes the marginal rejecting type
indifferent between taking ``b`` and entering the auction that follows a
rejection, in which that type bids zero and wins only against player 1's
atom: ``c1 * a2 == b``.  With player 1 believed to have value ``v`` the
condition reads ``1 - b/a2 == v * I(a2)``, where ``I(x)`` is the reciprocal
quantile integral of player 2's prior truncated to ``[x, hi]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from scipy.optimize import brentq

from . import _numerics
from .auction import AuctionEq, payoff_sup, secret_best_response, solve_one_sided, solve_two_sided, threshold_c
from .dist import Dist
from .errors import ContractError, DomainError, InvariantViolation, NumericFailure

#: Slack applied to every "<=" and "== 0" condition.
EQ_TOL = 1e-9
#: Default size of the bribe grid searched before golden-section refinement.
BRIBE_GRID = 1000


@dataclass(frozen=True)
class Scenario:
    """Independent priors of the two players."""

    f1: Dist
    f2: Dist

    @classmethod
    def from_literals(cls, f1: dict, f2: dict) -> "Scenario":
        return cls(Dist.from_literal(f1), Dist.from_literal(f2))


class ReplyKind(str, enum.Enum):
    FULL_ACCEPTANCE = "full_acceptance"
    INTERVAL = "interval"


@dataclass(frozen=True, eq=False)
class RejectionReply:
    """Player 2's reply to a bribe: types at or above ``a2`` reject.

    ``a2`` and ``continuation`` are ``None`` for full acceptance.
    """

    kind: ReplyKind
    a2: float | None = None
    continuation: AuctionEq | None = None

    def acceptance_prob(self, f2: Dist) -> float:
        return 1.0 if self.kind is ReplyKind.FULL_ACCEPTANCE else f2.cdf(self.a2)


@dataclass(frozen=True)
class ImplementabilityReport:
    c1_bar: float
    b_star: float
    a2_at_bstar: float | None
    acceptance_prob: float
    dev_payoff: float
    lhs: float
    rhs: float
    implementable: bool
    bribe_interval: tuple[float, float] | None
    tol: float = EQ_TOL
    b_grid_size: int = BRIBE_GRID


@dataclass(frozen=True)
class SecurityWitness:
    c1_low: float
    b_bar_candidate: float
    lower_bound: float
    witness_bribe: float
    accepted_under_belief_v1bar: bool


@dataclass(frozen=True)
class TwoBribeVerdict:
    """Outcome of checking a two-bribe pooling candidate.

    ``checks`` maps ``"high_bribe_accepted"``, ``"cutoff_indifference"`` and
    ``"bribes_increasing"`` to pass/fail; ``residuals`` holds the matching
    signed slacks (nonnegative or near zero when passing).
    """

    checks: dict[str, bool]
    residuals: dict[str, float]
    a2_low: float | None
    acceptance_prob_low: float
    tol: float = field(default=1e-6)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


# -- thresholds -------------------------------------------------------------


def _tail_integral(f2: Dist, a: float) -> float:
    if a >= f2.support_hi:
        return 1.0 / f2.support_hi
    return f2.recip_integral_above(a)


def threshold_value(b: float, belief_v1: float, f2: Dist) -> float | None:
    """The rejection threshold ``a2(b)`` against a known player-1 value, or
    ``None`` when every type of player 2 accepts."""
    if b < 0.0:
        raise DomainError(f"bribe must be nonnegative, got {b}")
    if belief_v1 < 0.0:
        raise DomainError(f"believed value must be nonnegative, got {belief_v1}")
    lo, hi = f2.support_lo, f2.support_hi
    if b > hi - belief_v1:
        return None
    if lo > 0.0:
        lhs = 1.0 - b / lo
    else:
        lhs = 1.0 if b == 0.0 else -math.inf
    rhs = 0.0 if belief_v1 == 0.0 else belief_v1 * _tail_integral(f2, lo)
    if lhs > rhs:
        return lo
    gap = lambda a: 1.0 - b / a - belief_v1 * _tail_integral(f2, a)  # noqa: E731
    # At the top the tail integral is 1/hi, so the gap is (hi - b - v)/hi.
    if hi - b - belief_v1 <= 0.0:
        # Only the top type is indifferent; a null rejection set is full acceptance.
        return None
    left = lo if lo > 0.0 else hi * 1e-12
    if gap(left) >= 0.0:
        if lo > 0.0:
            return lo
        raise NumericFailure("rejection threshold is not bracketed", (left, hi))
    return brentq(gap, left, hi, xtol=1e-12 * max(hi, 1.0), rtol=1e-15, maxiter=500)


def rejection_threshold(b: float, belief_v1: float, f2: Dist) -> RejectionReply:
    """Player 2's reply to bribe ``b`` when player 1 is believed to have value
    ``belief_v1``, with the auction that follows a rejection."""
    a2 = threshold_value(b, belief_v1, f2)
    if a2 is None:
        return RejectionReply(ReplyKind.FULL_ACCEPTANCE)
    cont = solve_one_sided(belief_v1, f2.truncate_below(a2), known_side=1)
    return RejectionReply(ReplyKind.INTERVAL, a2, cont)


# -- deviation payoffs ------------------------------------------------------


def lowest_type_deviation_payoff(b: float, s: Scenario) -> float:
    """Payoff of player 1's lowest type from offering ``b`` when player 2
    believes the offer comes from that type."""
    v_low = s.f1.support_lo
    a2 = threshold_value(b, v_low, s.f2)
    accept = 1.0 if a2 is None else s.f2.cdf(a2)
    return accept * (v_low - b)


def deviation_payoff(v1: float, b: float, s: Scenario) -> float:
    """Payoff of player 1 with value ``v1`` from offering ``b`` when player 2
    believes the lowest type made the offer.  After a rejection, player 1 bids
    secretly against an equilibrium built on the lowest value."""
    if not s.f1.support_lo <= v1 <= s.f1.support_hi:
        raise DomainError(f"value {v1} outside player 1's support")
    reply = rejection_threshold(b, s.f1.support_lo, s.f2)
    if reply.kind is ReplyKind.FULL_ACCEPTANCE:
        return v1 - b
    accept = s.f2.cdf(reply.a2)
    _, secret = secret_best_response(v1, reply.continuation, s.f1.support_lo)
    return accept * (v1 - b) + (1.0 - accept) * secret


def optimal_bribe(s: Scenario, grid_n: int = BRIBE_GRID) -> tuple[float, float]:
    """Most profitable off-path bribe ``(b_star, payoff)`` for player 1's lowest
    type, searched over ``[0, max(0, hi2 - lo1)]``."""
    upper = max(0.0, s.f2.support_hi - s.f1.support_lo)
    payoff = lambda b: lowest_type_deviation_payoff(b, s)  # noqa: E731
    if upper == 0.0:
        return 0.0, payoff(0.0)
    return _numerics.grid_then_golden_max(payoff, 0.0, upper, n=grid_n, top=3, tol=1e-9)


# -- peace certificates -----------------------------------------------------


def implementability(s: Scenario, grid_n: int = BRIBE_GRID, tol: float = EQ_TOL) -> ImplementabilityReport:
    """Decide whether some peaceful equilibrium exists, with its certificate.

    Peace is sustainable by a bribe ``b`` iff the highest type of player 2
    accepts it and no type of player 1 gains by deviating.  The feasible
    bribes form ``[hi2 * c1_bar, lo1 - dev_payoff]``.
    """
    lo1, hi2 = s.f1.support_lo, s.f2.support_hi
    c1_bar = threshold_c(hi2, s.f1)
    if hi2 <= lo1:
        ok = c1_bar <= tol
        return ImplementabilityReport(
            c1_bar=c1_bar, b_star=0.0, a2_at_bstar=None, acceptance_prob=1.0,
            dev_payoff=lo1, lhs=hi2 * c1_bar + lo1, rhs=lo1, implementable=ok,
            bribe_interval=(0.0, 0.0) if ok else None, tol=tol, b_grid_size=grid_n,
        )
    b_star, dev = optimal_bribe(s, grid_n)
    a2 = threshold_value(b_star, lo1, s.f2)
    lhs = hi2 * c1_bar + dev
    ok = lhs <= lo1 + tol
    return ImplementabilityReport(
        c1_bar=c1_bar, b_star=b_star, a2_at_bstar=a2,
        acceptance_prob=1.0 if a2 is None else s.f2.cdf(a2),
        dev_payoff=dev, lhs=lhs, rhs=lo1, implementable=ok,
        bribe_interval=(hi2 * c1_bar, lo1 - dev) if ok else None, tol=tol, b_grid_size=grid_n,
    )


def security_witness(s: Scenario) -> SecurityWitness:
    """A bribe showing that peace can never be guaranteed under all beliefs.

    The only bribe that could secure peace is what the highest type of player
    2 expects when player 1 believes it is the lowest type.  Any offer between
    ``max(hi2 - hi1, 0)`` and that amount is accepted by everyone under the
    belief that player 1 is strongest, yet is too small to secure peace.
    """
    lo2, hi2, hi1 = s.f2.support_lo, s.f2.support_hi, s.f1.support_hi
    c_low = threshold_c(lo2, s.f1)
    b_bar = hi2 - lo2 * (1.0 - c_low)
    lower = max(hi2 - hi1, 0.0)
    if not lower < b_bar:
        raise InvariantViolation(f"witness interval ({lower}, {b_bar}) is empty")
    witness = 0.5 * (lower + b_bar)
    accepted = threshold_value(witness, hi1, s.f2) is None
    return SecurityWitness(c_low, b_bar, lower, witness, accepted)


# -- two-bribe candidates -----------------------------------------------------


def _pooled_threshold(b: float, belief: Dist, f2: Dist) -> tuple[float | None, AuctionEq | None]:
    """Rejection threshold against a prior belief about player 1, from the
    indifference ``c1(a) * a == b`` of the marginal rejecting type."""
    lo, hi = f2.support_lo, f2.support_hi

    def gap(a: float) -> float:
        eq = solve_two_sided(belief, f2.truncate_below(a))
        return eq.c1 * a - b

    top = hi - 1e-6 * (hi - lo)
    if gap(top) < 0.0:
        return None, None
    bottom = max(lo, hi * 1e-6)
    if gap(bottom) >= 0.0:
        a2 = bottom
    else:
        a2 = brentq(gap, bottom, top, xtol=1e-7 * hi, maxiter=100)
    return a2, solve_two_sided(belief, f2.truncate_below(a2))


def verify_two_bribe_candidate(
    b_l: float, b_h: float, v1_cut: float, s: Scenario, tol: float = 1e-6
) -> TwoBribeVerdict:
    """Check a candidate where types below ``v1_cut`` offer ``b_l`` and types
    above offer ``b_h``.  The cutoff type counts on both sides.

    Checks that ``b_h`` is accepted by every type of player 2, that the cutoff
    type is indifferent between the two offers, and that ``b_l < b_h``.
    """
    if b_l == b_h:
        raise ContractError("a two-bribe candidate needs two different bribes")
    if b_l < 0.0 or b_h < 0.0:
        raise DomainError("bribes must be nonnegative")
    lo1, hi1 = s.f1.support_lo, s.f1.support_hi
    if not lo1 < v1_cut < hi1:
        raise DomainError(f"cutoff {v1_cut} must lie strictly inside ({lo1}, {hi1})")

    hi2 = s.f2.support_hi
    need_high = hi2 * threshold_c(hi2, s.f1.truncate_below(v1_cut))
    a2, cont = _pooled_threshold(b_l, s.f1.truncate_above(v1_cut), s.f2)
    accept = 1.0 if a2 is None else s.f2.cdf(a2)
    fight = 0.0 if cont is None else payoff_sup(v1_cut, cont.H2)
    indiff = accept * (v1_cut - b_l) + (1.0 - accept) * fight - (v1_cut - b_h)

    residuals = {
        "high_bribe_accepted": b_h - need_high,
        "cutoff_indifference": indiff,
        "bribes_increasing": b_h - b_l,
    }
    checks = {
        "high_bribe_accepted": residuals["high_bribe_accepted"] >= -tol,
        "cutoff_indifference": abs(indiff) <= tol,
        "bribes_increasing": b_l < b_h,
    }
    return TwoBribeVerdict(checks, residuals, a2, accept, tol)


def bribe_curve(s: Scenario, n: int = 201) -> list[tuple[float, float | None, float]]:
    """Rows ``(b, a2(b), lowest-type payoff)`` on an even grid of bribes."""
    upper = max(0.0, s.f2.support_hi - s.f1.support_lo)
    rows = []
    for k in range(n):
        b = upper * k / (n - 1) if n > 1 else 0.0
        a2 = threshold_value(b, s.f1.support_lo, s.f2)
        accept = 1.0 if a2 is None else s.f2.cdf(a2)
        rows.append((b, a2, accept * (s.f1.support_lo - b)))
    return rows
