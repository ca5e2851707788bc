"""Invariant suite run by ``peacegame verify`` and the test-suite.

Each check appends a violation record ``{"check", "detail"}`` instead of
raising, so one run reports every failure.  ``tol`` is the slack granted to
every comparison; a negative value makes exact-equality checks fail.
"""

from __future__ import annotations

import math

import numpy as np

from . import auction, bribing, oracle, requesting
from .bribing import Scenario
from .errors import PeaceGameError


class _Log:
    def __init__(self) -> None:
        self.violations: list[dict] = []
        self.checked: list[str] = []

    def check(self, name: str, ok: bool, detail: str) -> None:
        if name not in self.checked:
            self.checked.append(name)
        if not ok:
            self.violations.append({"check": name, "detail": detail})


def _dist_checks(log: _Log, scen: Scenario, tol: float) -> None:
    for label, d in (("f1", scen.f1), ("f2", scen.f2)):
        worst = max(abs(d.cdf(d.quantile(p)) - p) for p in np.linspace(0.01, 0.99, 99).tolist())
        log.check("cdf_quantile_round_trip", worst <= min(tol, 1e-9),
                  f"{label}: max |cdf(quantile(p)) - p| = {worst!r}")
        xs = np.linspace(d.support_lo, d.support_hi, 52)[1:-1]
        vals = [d.recip_integral_above(float(x)) for x in xs]
        rises = [float(b - a) for a, b in zip(vals, vals[1:]) if b - a > tol]
        log.check("tail_integral_decreasing", not rises, f"{label}: increments {rises[:3]}")


def _eq_checks(log: _Log, name: str, eq: auction.AuctionEq, tol: float) -> None:
    log.check("atoms_complementary", eq.c1 * eq.c2 <= tol, f"{name}: c1*c2 = {eq.c1 * eq.c2!r}")
    for label, h in (("H1", eq.H1), ("H2", eq.H2)):
        drop = float(np.min(np.diff(h.values))) if len(h.values) > 1 else 0.0
        log.check("bid_cdf_monotone", drop >= -tol, f"{name}.{label}: largest drop {drop!r}")
        log.check("bid_cdf_reaches_one", abs(h.values[-1] - 1.0) <= tol, f"{name}.{label}: end {h.values[-1]!r}")


def _equilibria(log: _Log, scen: Scenario, tol: float) -> None:
    f1, f2 = scen.f1, scen.f2
    _eq_checks(log, "known_top_player2", auction.solve_one_sided(f2.support_hi, f1, known_side=2), tol)
    if f1.support_lo > 0.0:
        _eq_checks(log, "known_bottom_player1", auction.solve_one_sided(f1.support_lo, f2, known_side=1), tol)
    if max(f1.support_lo, f2.support_lo) > 0.0:
        try:
            _eq_checks(log, "priors", auction.solve_two_sided(f1, f2), tol)
        except PeaceGameError as exc:
            log.check("two_sided_solves", False, str(exc))


def _bribe_checks(log: _Log, scen: Scenario, tol: float, grid_n: int) -> None:
    f1, f2 = scen.f1, scen.f2
    lo1, hi1, lo2, hi2 = f1.support_lo, f1.support_hi, f2.support_lo, f2.support_hi
    upper = max(0.0, hi2 - lo1)

    def eff(a):
        return hi2 if a is None else a

    b_grid = np.linspace(0.0, upper, 100)
    a_vals = [eff(bribing.threshold_value(float(b), lo1, f2)) for b in b_grid]
    drops = [k for k in range(99) if a_vals[k + 1] < a_vals[k] - tol]
    log.check("threshold_nondecreasing_in_bribe", not drops, f"drops at grid indices {drops[:5]}")

    for b in (0.0, 0.5 * upper):
        beliefs = np.linspace(lo1, hi1, 20)
        vals = [eff(bribing.threshold_value(b, float(v), f2)) for v in beliefs]
        drops = [k for k in range(19) if vals[k + 1] < vals[k] - tol]
        log.check("threshold_nondecreasing_in_belief", not drops, f"b={b!r}: drops at {drops[:5]}")

    for b in b_grid[::10]:
        reply = bribing.rejection_threshold(float(b), lo1, f2)
        if reply.kind is bribing.ReplyKind.FULL_ACCEPTANCE:
            continue
        log.check("continuation_no_player2_atom", reply.continuation.c2 <= tol,
                  f"b={float(b)!r}: c2 = {reply.continuation.c2!r}")
        if lo2 < reply.a2 < hi2:
            gap = abs(reply.continuation.c1 * reply.a2 - b)
            log.check("threshold_indifference", gap <= tol * max(1.0, b),
                      f"b={float(b)!r}: |c1*a2 - b| = {gap!r}")

    b_star, _ = bribing.optimal_bribe(scen, grid_n)
    v_grid = np.linspace(lo1, hi1, 50)
    pay = [bribing.deviation_payoff(float(v), b_star, scen) for v in v_grid]
    slopes = np.diff(pay) / np.diff(v_grid)
    bad = [float(s) for s in slopes if s < -tol or s > 1.0 + tol]
    log.check("deviation_payoff_slope", not bad, f"slopes outside [0, 1]: {bad[:3]}")

    try:
        w = bribing.security_witness(scen)
        ok = w.lower_bound < w.witness_bribe < w.b_bar_candidate and w.accepted_under_belief_v1bar
        log.check("security_witness", ok, repr(w))
    except PeaceGameError as exc:
        log.check("security_witness", False, str(exc))

    step = (hi2 - lo2) / grid_n
    for b in (0.0, 0.5 * b_star, b_star):
        ana = bribing.threshold_value(b, lo1, f2)
        bru = oracle.brute_threshold(b, lo1, f2, grid_n)
        if ana is None or bru is None:
            ok = ana is None and bru is None
            gap = None
        else:
            gap = abs(ana - bru)
            ok = gap <= 2.0 * step
        log.check("oracle_threshold_agreement", ok, f"b={b!r}: analytic={ana!r} brute={bru!r}")


def _request_checks(log: _Log, scen: Scenario, tol: float) -> None:
    f1, f2 = scen.f1, scen.f2
    lo1, hi1 = f1.support_lo, f1.support_hi
    kinds = requesting.RequestKind
    for r in np.linspace(0.0, hi1, 100):
        r = float(r)
        replies = {}
        for label, v in (("low", lo1), ("high", hi1)):
            if v <= 0.0:
                continue
            kind, alpha = requesting._classify(r, v, f2)
            replies[label] = (kind, alpha)
            if kind is kinds.PARTIAL:
                x = auction.top_bid(v, f2.truncate_above(alpha))
                log.check("partial_reply_top_bid_equals_request", abs(x - r) <= tol, f"r={r!r} v={v!r}: x={x!r}")
            elif kind is kinds.FULL_REJECTION:
                x = auction.top_bid(v, f2)
                log.check("full_rejection_top_bid_below_request", x <= r + tol, f"r={r!r} v={v!r}: x={x!r}")
        if len(replies) == 2:
            eff = {kinds.FULL_ACCEPTANCE: f2.support_lo, kinds.FULL_REJECTION: f2.support_hi}
            a_low = eff.get(replies["low"][0], replies["low"][1])
            a_high = eff.get(replies["high"][0], replies["high"][1])
            log.check("request_threshold_belief_order", a_low >= a_high - tol,
                      f"r={r!r}: low-belief {a_low!r} < high-belief {a_high!r}")
            if replies["high"][0] is kinds.FULL_REJECTION:
                log.check("full_rejection_propagates", replies["low"][0] is kinds.FULL_REJECTION, f"r={r!r}")

    rep = requesting.robust_peaceful_exists(scen)
    if rep.exists:
        worst = max(requesting.request_payoff(float(r), hi1, f2) for r in np.linspace(1e-9, hi1, 1000))
        log.check("no_profitable_request", worst <= f2.support_lo + tol, f"best deviation payoff {worst!r}")


def run_invariants(scen: Scenario, tol: float = 1e-6, grid_n: int = 100) -> tuple[list[dict], list[str]]:
    """Run every property check on ``scen``; returns ``(violations, checked)``."""
    log = _Log()
    _dist_checks(log, scen, tol)
    _equilibria(log, scen, tol)
    _bribe_checks(log, scen, tol, grid_n)
    _request_checks(log, scen, tol)
    return log.violations, log.checked


def convergence_table(scen: Scenario, grid_n: int) -> list[dict]:
    """Largest brute-force versus analytic threshold gap at ``n``, ``2n``, ``4n``."""
    lo1, f2 = scen.f1.support_lo, scen.f2
    b_star, _ = bribing.optimal_bribe(scen, max(grid_n, 100))
    rows = []
    for n in (grid_n, 2 * grid_n, 4 * grid_n):
        worst = 0.0
        for b in (0.0, 0.5 * b_star, b_star):
            ana = bribing.threshold_value(b, lo1, f2)
            bru = oracle.brute_threshold(b, lo1, f2, n)
            if ana is not None and bru is not None:
                worst = max(worst, abs(ana - bru))
            elif (ana is None) != (bru is None):
                worst = math.inf
        rows.append({"grid_n": n, "grid_step": (f2.support_hi - f2.support_lo) / n, "max_threshold_gap": worst})
    return rows
