import math

import numpy as np
import pytest

from peacegame import (
    DegenerateSupportError,
    Dist,
    NumericFailure,
    PointMass,
    Prior,
    payoff_sup,
    secret_best_response,
    solve,
    solve_one_sided,
    solve_two_sided,
    threshold_c,
)
from peacegame.auction import TABLE_SIZE
from peacegame.oracle import known_value_atom

from conftest import kinked

U = Dist.uniform


def assert_valid(eq, tol=1e-9):
    assert eq.c1 * eq.c2 <= tol
    for h in (eq.H1, eq.H2):
        assert np.all(np.diff(h.values) >= 0)
        assert h.values[-1] == pytest.approx(1.0, abs=tol)
    assert eq.H1.values[0] == eq.c1 and eq.H2.values[0] == eq.c2


def test_one_sided_known_fifty(u100):
    eq = solve_one_sided(50.0, u100)
    assert eq.c1 == 0.0
    assert eq.c2 == pytest.approx(math.exp(-2), abs=1e-12)
    assert eq.x_sigma == pytest.approx(50 * (1 - math.exp(-2)), rel=1e-12)
    assert len(eq.H1.beta) == TABLE_SIZE
    assert_valid(eq)
    # Quadrature-and-bisection oracle for the atoms.
    c_known, c_opp = known_value_atom(50.0, u100)
    assert (eq.c1, eq.c2) == pytest.approx((c_known, c_opp), abs=1e-9)


def test_one_sided_no_atom_for_opponent():
    eq = solve_one_sided(60.0, U(35, 100))
    assert 60 * math.log(100 / 35) / 65 == pytest.approx(0.969, abs=1e-3)
    assert eq.c2 == 0.0 and eq.x_sigma == 60.0
    assert eq.c1 == pytest.approx(1 - 60 * math.log(100 / 35) / 65, rel=1e-12)
    assert_valid(eq)


def test_one_sided_player_two_known(u100):
    eq = solve_one_sided(100.0, u100, known_side=2)
    assert eq.c1 == pytest.approx(math.exp(-1), abs=1e-12)
    assert eq.c2 == 0.0
    assert payoff_sup(100.0, eq.H1) == pytest.approx(100 * math.exp(-1), rel=1e-9)


def test_one_sided_curves_follow_closed_form(u100):
    eq = solve_one_sided(50.0, u100)
    c2 = math.exp(-2)
    for b in np.linspace(0.0, eq.x_sigma, 9):
        assert eq.H2(float(b)) == pytest.approx(c2 + b / 50, abs=1e-12)
        # H1 = 50 * ln(H2 / c2) / 100 for a uniform opponent on [0, 100].
        assert eq.H1(float(b)) == pytest.approx(0.5 * math.log((c2 + b / 50) / c2), abs=1e-6)


def test_top_bid_below_value_iff_atom():
    for v, opp in ((50.0, U(0, 100)), (60.0, U(35, 100)), (40.0, kinked()), (90.0, U(10, 60))):
        eq = solve_one_sided(v, opp)
        assert (eq.x_sigma < v) == (eq.c2 > 0)


def test_threshold_c():
    assert threshold_c(100.0, U(0, 100)) == pytest.approx(math.exp(-1), abs=1e-12)
    assert threshold_c(100.0, U(30, 130)) == pytest.approx((130 / math.e - 30) / 100, rel=1e-12)
    assert threshold_c(10.0, U(30, 130)) == 0.0
    vals = [threshold_c(float(v), U(30, 130)) for v in np.linspace(1, 200, 40)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_two_sided_symmetric():
    eq = solve_two_sided(U(20, 80), U(20, 80))
    assert eq.c1 == 0.0 and eq.c2 == 0.0
    assert np.array_equal(eq.H1.values, eq.H2.values)
    # With identical priors the top bid equals the mean value.
    assert eq.x_sigma == pytest.approx(50.0, abs=1e-6)
    assert_valid(eq)


def test_two_sided_matches_one_sided_for_narrow_prior(u100):
    ref = solve_one_sided(50.0, u100)
    gaps = []
    for width in (1.0, 0.1, 0.01):
        eq = solve_two_sided(U(50 - width, 50 + width), u100)
        gap = max(
            max(abs(eq.H1(float(b)) - ref.H1(float(b))) for b in ref.H1.beta[::16]),
            max(abs(eq.H2(float(b)) - ref.H2(float(b))) for b in ref.H2.beta[::16]),
        )
        gaps.append(gap)
        assert_valid(eq)
    assert gaps[-1] <= 1e-3
    assert gaps[0] >= gaps[-1]


def test_two_sided_asymmetric_is_consistent():
    eq = solve_two_sided(U(30, 130), U(60, 100))
    assert_valid(eq)
    assert eq.x_sigma >= 30.0 - 1e-9
    # The ODE holds on the table: dH1/dbeta = 1 / Q2(H2).
    f2 = U(60, 100)
    k = TABLE_SIZE // 2
    db = eq.H1.beta[k + 1] - eq.H1.beta[k - 1]
    slope = (eq.H1.values[k + 1] - eq.H1.values[k - 1]) / db
    assert slope == pytest.approx(1.0 / f2.quantile(eq.H2.values[k]), rel=1e-3)


def test_two_sided_requires_positive_infimum(u100):
    with pytest.raises(DegenerateSupportError):
        solve_two_sided(u100, u100)


def test_two_sided_iteration_cap():
    with pytest.raises(NumericFailure) as info:
        solve_two_sided(U(35, 100), U(60, 100), max_iter=1)
    assert info.value.bracket == (35.0, 100.0)


def test_solve_dispatch(u100):
    eq = solve(PointMass(50.0), Prior(u100))
    assert eq.c2 == pytest.approx(math.exp(-2))
    eq2 = solve(Prior(u100), PointMass(50.0))
    assert eq2.c1 == pytest.approx(math.exp(-2))


def test_payoff_sup():
    eq = solve_one_sided(50.0, U(0, 100))
    assert payoff_sup(0.0, eq.H1) == 0.0
    # A value above the known one does best at the top bid.
    assert payoff_sup(80.0, eq.H2) == pytest.approx(80.0 - eq.x_sigma, rel=1e-9)
    vs = np.linspace(0, 100, 101)
    pays = np.array([payoff_sup(float(v), eq.H2) for v in vs])
    slopes = np.diff(pays) / np.diff(vs)
    assert np.all(slopes >= -1e-9) and np.all(slopes <= 1 + 1e-6)
    assert np.all(np.diff(slopes) >= -1e-6)


def test_secret_best_response():
    eq = solve_one_sided(60.0, U(35, 100))
    assert secret_best_response(60.0, eq) == (0.0, 0.0)
    assert secret_best_response(70.0, eq) == (60.0, pytest.approx(10.0))
    eq2 = solve_one_sided(50.0, U(0, 100))
    bid, pay = secret_best_response(50.0, eq2)
    assert bid == 0.0 and pay == pytest.approx(math.exp(-2) * 50)
    # Player 2's top type against a known lowest player-2 value.
    lo2, hi2 = 60.0, 100.0
    eq3 = solve_one_sided(lo2, U(35, 100), known_side=2)
    _, pay = secret_best_response(hi2, eq3)
    assert pay == pytest.approx(hi2 - lo2 * (1 - eq3.c1), rel=1e-12)
    assert pay == pytest.approx(payoff_sup(hi2, eq3.H1), rel=1e-9)


def test_zero_known_value_limit(u100):
    eq = solve_one_sided(0.0, u100)
    assert (eq.x_sigma, eq.c1, eq.c2) == (0.0, 1.0, 0.0)
