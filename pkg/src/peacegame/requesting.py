"""Peace through requesting: player 1 demands a payment ``r`` to stay out.

Player 2 pays or fights.  Against a demand that is neither trivially small nor
too large, the types of player 2 that fight form a bottom interval
``[lo2, alpha2(r)]``.  In the auction after a rejection player 1's top bid
equals ``r`` (the marginal type is indifferent between paying ``r`` and
fighting), which pins player 2's atom at ``1 - r/v`` and the threshold via

    v * ∫_{c2}^{1} ds / Q(s | v2 <= alpha) == 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from scipy.optimize import brentq

from . import _numerics
from .auction import AuctionEq, solve_one_sided, threshold_c, top_bid
from .bribing import EQ_TOL, Scenario
from .dist import Dist
from .errors import ContractError, DomainError

#: Default tolerance on the knife-edge no-profitable-request equality.
RESIDUAL_TOL = 1e-6
#: Default size of the request grid searched before golden-section refinement.
REQUEST_GRID = 1000
#: Offset keeping the threshold search off the bottom of player 2's support.
_BOTTOM_OFFSET = 1e-12


class RequestKind(str, enum.Enum):
    FULL_ACCEPTANCE = "full_acceptance"
    PARTIAL = "partial"
    FULL_REJECTION = "full_rejection"


@dataclass(frozen=True, eq=False)
class RequestReply:
    """Player 2's reply to a demand ``r``.

    ``alpha2`` is set only for partial rejection; ``continuation`` is the
    auction after a rejection and is ``None`` under full acceptance.
    """

    kind: RequestKind
    rejection_prob: float
    alpha2: float | None = None
    continuation: AuctionEq | None = None

    def effective_alpha(self, f2: Dist) -> float:
        """Top of the rejecting interval, with the support endpoints standing in
        for the two corner replies."""
        if self.kind is RequestKind.FULL_ACCEPTANCE:
            return f2.support_lo
        if self.kind is RequestKind.FULL_REJECTION:
            return f2.support_hi
        return self.alpha2


@dataclass(frozen=True)
class SecurityConditions:
    """The two tests deciding whether peace holds under every belief."""

    top_type_atom_test: bool
    low_type_above: bool
    range_test: bool | None
    securable: bool


@dataclass(frozen=True)
class RequestReport:
    cond_a: bool
    cond_b: bool
    cond_c_residual: float | None
    exists: bool
    r_bar: float | None
    r_star: float | None
    x_sigma_star: float | None
    securable: bool | None = None
    security_conditions: SecurityConditions | None = None
    tol: float = RESIDUAL_TOL
    r_grid_size: int = REQUEST_GRID


# -- thresholds -------------------------------------------------------------


def _classify(r: float, v: float, f2: Dist) -> tuple[RequestKind, float | None]:
    """Reply kind and, for partial rejection, the threshold ``alpha2``."""
    if r < 0.0:
        raise DomainError(f"request must be nonnegative, got {r}")
    if v <= 0.0:
        raise DomainError(f"believed value must be positive, got {v}")
    lo, hi = f2.support_lo, f2.support_hi
    if v <= lo:
        # Every type of player 2 outbids a known value v; only r <= v is paid.
        return (RequestKind.FULL_ACCEPTANCE, None) if r <= v else (RequestKind.FULL_REJECTION, None)
    if r <= lo:
        return RequestKind.FULL_ACCEPTANCE, None
    x_full = top_bid(v, f2)
    if r >= x_full:
        return RequestKind.FULL_REJECTION, None
    c2 = 1.0 - r / v
    gap = lambda a: v * f2.recip_integral_below(a, c2) - 1.0  # noqa: E731
    bottom = lo + _BOTTOM_OFFSET * max(hi, 1.0)
    alpha = brentq(gap, bottom, hi, xtol=1e-12 * max(hi, 1.0), rtol=1e-15, maxiter=500)
    return RequestKind.PARTIAL, alpha


def request_rejection_threshold(r: float, belief_v1: float, f2: Dist) -> RequestReply:
    """Player 2's reply to a demand ``r`` when player 1 is believed to have
    value ``belief_v1``.  Indifferent types accept."""
    kind, alpha = _classify(r, belief_v1, f2)
    if kind is RequestKind.FULL_ACCEPTANCE:
        return RequestReply(kind, 0.0)
    if kind is RequestKind.FULL_REJECTION:
        return RequestReply(kind, 1.0, None, solve_one_sided(belief_v1, f2))
    cont = solve_one_sided(belief_v1, f2.truncate_above(alpha))
    return RequestReply(kind, f2.cdf(alpha), alpha, cont)


def request_payoff(r: float, v1: float, f2: Dist) -> float:
    """Expected payoff of a player 1 with value ``v1`` who demands ``r`` and is
    believed to have value ``v1``: ``r`` when paid, else the auction payoff."""
    kind, alpha = _classify(r, v1, f2)
    if kind is RequestKind.FULL_ACCEPTANCE:
        return r
    if kind is RequestKind.FULL_REJECTION:
        return v1 - top_bid(v1, f2)
    p = f2.cdf(alpha)
    return p * (v1 - r) + (1.0 - p) * r


def optimal_request(v1_bar: float, f2: Dist, grid_n: int = REQUEST_GRID) -> tuple[float, float]:
    """Most profitable demand ``(r_star, payoff)`` for player 1's top type,
    searched over ``[lo2, x*]`` where ``x*`` is the top bid when that type is
    known and everybody fights."""
    lo = f2.support_lo
    if not lo < v1_bar <= 2.0 * lo:
        raise DomainError(f"need {lo} < v1_bar <= {2 * lo}, got v1_bar={v1_bar}")
    x_full = top_bid(v1_bar, f2)
    payoff = lambda r: request_payoff(r, v1_bar, f2)  # noqa: E731
    if x_full <= lo:
        return lo, payoff(lo)
    return _numerics.grid_then_golden_max(payoff, lo, x_full, n=grid_n, top=3, tol=1e-9)


# -- peace certificates -----------------------------------------------------


def robust_peaceful_exists(
    s: Scenario, tol: float = RESIDUAL_TOL, grid_n: int = REQUEST_GRID
) -> RequestReport:
    """Decide whether a peaceful equilibrium surviving belief refinement exists.

    Needs (a) ``lo2 < hi1 <= 2 lo2``, (b) player 2's lowest type gets nothing
    from fighting a known lowest player-2 value, and (c) the top type of
    player 1 cannot beat ``lo2`` with any other demand.  The last condition is
    an exact equality, so its residual is reported alongside the verdict.
    """
    lo2, hi1 = s.f2.support_lo, s.f1.support_hi
    cond_a = lo2 < hi1 <= 2.0 * lo2
    cond_b = lo2 * threshold_c(lo2, s.f1) <= EQ_TOL if lo2 > 0.0 else True
    residual = r_star = x_star = None
    if cond_a:
        r_star, best = optimal_request(hi1, s.f2, grid_n)
        residual = abs(lo2 - best)
        x_star = top_bid(hi1, s.f2)
    exists = bool(cond_a and cond_b and residual is not None and residual <= tol)
    return RequestReport(
        cond_a=cond_a, cond_b=cond_b, cond_c_residual=residual, exists=exists,
        r_bar=lo2 if exists else None, r_star=r_star, x_sigma_star=x_star,
        tol=tol, r_grid_size=grid_n,
    )


def security_conditions(s: Scenario) -> SecurityConditions:
    """Evaluate the security tests without requiring existence first."""
    lo1, hi1 = s.f1.support_lo, s.f1.support_hi
    lo2, hi2 = s.f2.support_lo, s.f2.support_hi
    top_test = lo2 * threshold_c(hi2, s.f1) <= EQ_TOL if lo2 > 0.0 else True
    if lo1 > lo2:
        return SecurityConditions(top_test, True, None, top_test)
    range_ok = hi1 - lo1 <= lo2 + EQ_TOL
    return SecurityConditions(top_test, False, range_ok, top_test and range_ok)


def request_security(s: Scenario, report: RequestReport) -> RequestReport:
    """Fill the security fields of an existence report."""
    if not report.exists:
        raise ContractError("security is only defined when a robust peaceful equilibrium exists")
    cond = security_conditions(s)
    return replace(report, securable=cond.securable, security_conditions=cond)


def request_curve(s: Scenario, n: int = 201) -> list[tuple[float, float, float]]:
    """Rows ``(r, alpha2(r), payoff)`` for player 1's top type on ``[0, hi1]``.

    Corner replies report the support endpoint as the threshold.
    """
    hi1 = s.f1.support_hi
    rows = []
    for k in range(n):
        r = hi1 * k / (n - 1) if n > 1 else 0.0
        kind, alpha = _classify(r, hi1, s.f2)
        eff = {RequestKind.FULL_ACCEPTANCE: s.f2.support_lo, RequestKind.FULL_REJECTION: s.f2.support_hi}
        rows.append((r, eff.get(kind, alpha), request_payoff(r, hi1, s.f2)))
    return rows
