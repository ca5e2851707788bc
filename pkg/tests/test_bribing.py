import math

import numpy as np
import pytest

from peacegame import (
    ContractError,
    Dist,
    DomainError,
    ReplyKind,
    Scenario,
    deviation_payoff,
    implementability,
    lowest_type_deviation_payoff,
    optimal_bribe,
    rejection_threshold,
    security_witness,
    threshold_value,
    verify_two_bribe_candidate,
)
from peacegame.auction import threshold_c
from peacegame.oracle import brute_threshold, two_bribe_candidates

from conftest import kinked

U = Dist.uniform


def bisect_threshold_uniform(b, v):
    """Independent bisection on 1 - b/a = v * ln(100/a)/(100 - a)."""
    g = lambda a: 1 - b / a - v * math.log(100 / a) / (100 - a)
    lo, hi = 1e-9, 100 - 1e-9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if g(mid) < 0 else (lo, mid)
    return lo


def test_threshold_examples(u100):
    reply = rejection_threshold(12.1762, 30.0, u100)
    assert reply.kind is ReplyKind.INTERVAL
    assert reply.a2 == pytest.approx(26.5604, rel=1e-4)
    assert rejection_threshold(100 - 30 + 1, 30.0, u100).kind is ReplyKind.FULL_ACCEPTANCE
    a0 = threshold_value(0.0, 30.0, u100)
    assert a0 == pytest.approx(bisect_threshold_uniform(0.0, 30.0), abs=1e-9)
    assert a0 == pytest.approx(4.088, abs=1e-3)


def test_threshold_matches_bisection_oracle(u100):
    for b in (1.0, 5.0, 12.1762, 30.0, 60.0):
        assert threshold_value(b, 30.0, u100) == pytest.approx(bisect_threshold_uniform(b, 30.0), abs=1e-8)


def test_continuation_has_no_player2_atom(u100):
    for b in (0.0, 5.0, 12.1762, 40.0):
        reply = rejection_threshold(b, 30.0, u100)
        assert reply.continuation.c2 == 0.0
        assert reply.continuation.c1 * reply.a2 == pytest.approx(b, abs=1e-6)


def test_corner_threshold_at_support_bottom():
    # 1 - b/lo exceeds v * I(lo): everybody above lo rejects.
    reply = rejection_threshold(1.0, 20.0, U(60, 100))
    assert reply.a2 == 60.0
    assert reply.continuation.c1 * 60.0 >= 1.0


def test_top_type_root_is_full_acceptance(u100):
    # b == hi - v makes only the top type indifferent.
    assert threshold_value(70.0, 30.0, u100) is None


def test_threshold_monotone_in_bribe_and_belief(u100):
    a = [threshold_value(float(b), 30.0, u100) or 100.0 for b in np.linspace(0, 70, 100)]
    assert all(y >= x - 1e-12 for x, y in zip(a, a[1:]))
    for b in (0.0, 10.0, 25.0):
        a = [threshold_value(b, float(v), u100) or 100.0 for v in np.linspace(30, 130, 40)]
        assert all(y >= x - 1e-12 for x, y in zip(a, a[1:]))


def test_brute_force_agreement(u100):
    for b in (0.0, 5.0, 12.1762):
        grid = 400
        assert abs(brute_threshold(b, 30.0, u100, grid) - threshold_value(b, 30.0, u100)) <= 2 * 100 / grid
    assert brute_threshold(80.0, 30.0, u100) is None


def test_lowest_type_payoff(example):
    assert lowest_type_deviation_payoff(12.1762, example) == pytest.approx(4.73407, rel=1e-4)
    assert lowest_type_deviation_payoff(30.0, example) == 0.0


def test_deviation_payoff(example):
    b = 12.1762
    assert deviation_payoff(30.0, b, example) == pytest.approx(lowest_type_deviation_payoff(b, example), abs=1e-12)
    assert deviation_payoff(100.0, 80.0, example) == 20.0
    vs = np.linspace(30, 130, 60)
    pays = [deviation_payoff(float(v), b, example) for v in vs]
    slopes = np.diff(pays) / np.diff(vs)
    assert np.all(slopes >= -1e-6) and np.all(slopes <= 1 + 1e-6)


def test_optimal_bribe(example):
    b, pay = optimal_bribe(example)
    assert b == pytest.approx(12.1762, rel=1e-4)
    assert pay == pytest.approx(4.73407, rel=1e-4)
    # Empty range: the highest player-2 type is below the lowest player-1 type.
    high = Scenario(U(120, 200), U(0, 100))
    assert optimal_bribe(high) == (0.0, 120.0)


def test_implementability_example(example):
    rep = implementability(example)
    assert rep.c1_bar == pytest.approx((130 / math.e - 30) / 100, rel=1e-9)
    expected_lhs = 100 * rep.c1_bar + 4.73407
    assert rep.lhs == pytest.approx(expected_lhs, rel=1e-5)
    assert rep.lhs == pytest.approx(100 * rep.c1_bar + rep.dev_payoff, abs=1e-9)
    assert rep.implementable
    lo, hi = rep.bribe_interval
    assert lo == pytest.approx(17.824, abs=1e-3) and hi == pytest.approx(25.266, abs=1e-3)


def test_implementability_sufficient_condition():
    # hi2 * integral <= 1 and hi2 <= lo1: peace with a zero bribe.
    s = Scenario(U(100, 200), U(0, 60))
    assert 60 * math.log(2) / 100 <= 1
    rep = implementability(s)
    assert rep.implementable and rep.b_star == 0.0 and rep.bribe_interval == (0.0, 0.0)


def test_implementability_fails_without_zero_atom():
    rep = implementability(Scenario(U(0, 100), U(0, 100)))
    assert rep.c1_bar > 0 and not rep.implementable and rep.bribe_interval is None


def test_implementability_monotone_under_dominance():
    base = U(30, 130)
    # Tilted toward high values: F(v) = ((v - 30)/100)^2 dominates the uniform.
    tilted = Dist.piecewise([(30, 130, [0.09, -0.006, 0.0001])])
    for f2 in (U(0, 100), U(0, 60), kinked()):
        if implementability(Scenario(base, f2)).implementable:
            assert implementability(Scenario(tilted, f2)).implementable


def test_security_witness(example):
    w = security_witness(example)
    assert w.b_bar_candidate == 100.0 and w.lower_bound == 0.0 and w.witness_bribe == 50.0
    assert w.accepted_under_belief_v1bar
    s = Scenario(U(35, 100), U(60, 100))
    w = security_witness(s)
    c = threshold_c(60.0, U(35, 100))
    assert c == 0.0  # 60 * ln(100/35)/65 < 1
    assert w.b_bar_candidate == pytest.approx(100 - 60 * (1 - c))
    assert w.lower_bound < w.witness_bribe < w.b_bar_candidate


def test_two_bribe_preconditions(example):
    with pytest.raises(ContractError):
        verify_two_bribe_candidate(5.0, 5.0, 80.0, example)
    with pytest.raises(DomainError):
        verify_two_bribe_candidate(5.0, 10.0, 130.0, example)


def test_two_bribe_monotonicity_failure(example):
    v = verify_two_bribe_candidate(20.0, 5.0, 80.0, example)
    assert not v.checks["bribes_increasing"] and not v.passed


def test_two_bribe_grid_candidate_passes(example):
    found = two_bribe_candidates(example, [60.0], [2.0])
    assert found
    b_l, b_h, cut = found[0]
    v = verify_two_bribe_candidate(b_l, b_h, cut, example)
    assert v.passed
    assert abs(v.residuals["cutoff_indifference"]) <= 1e-6
