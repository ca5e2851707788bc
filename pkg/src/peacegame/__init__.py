"""Equilibria of peace-through-bribing and peace-through-requesting games
played over two-player all-pay auctions."""

from .auction import AuctionEq, BidCurve, PointMass, Prior, payoff_sup, secret_best_response, solve, solve_one_sided, solve_two_sided, threshold_c, top_bid
from .bribing import (
    ImplementabilityReport,
    RejectionReply,
    ReplyKind,
    Scenario,
    SecurityWitness,
    TwoBribeVerdict,
    deviation_payoff,
    implementability,
    lowest_type_deviation_payoff,
    optimal_bribe,
    rejection_threshold,
    security_witness,
    threshold_value,
    verify_two_bribe_candidate,
)
from .dist import Dist, Piece
from .errors import ContractError, DegenerateSupportError, DomainError, InvariantViolation, NumericFailure, PeaceGameError
from .requesting import (
    RequestKind,
    RequestReply,
    RequestReport,
    SecurityConditions,
    optimal_request,
    request_payoff,
    request_rejection_threshold,
    request_security,
    robust_peaceful_exists,
    security_conditions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
