import math

import pytest

from manetsim.harness import generator_for
from manetsim.theory import (
    bound_report,
    grid_search_hitting_distance,
    heuristic_fast,
    heuristic_slow,
    no_relay_bound_fast,
    no_relay_bound_slow,
    upper_bound_fast,
    upper_bound_slow,
)


def test_heuristic_fast_values():
    lam, l_star = heuristic_fast(10_000, 100, W=1.0, c1=1.0)
    assert lam == pytest.approx(math.sqrt(100 * math.pi / 10_000), rel=1e-12)
    assert lam == pytest.approx(0.17725, abs=1e-5)
    # max-min consistent optimal hitting distance (c1 pi W D n)^(-1/4)
    assert l_star == pytest.approx((math.pi * 1e6) ** -0.25, rel=1e-12)
    assert l_star == pytest.approx(0.023753, abs=1e-6)


def test_heuristic_fast_scalings():
    lam1, _ = heuristic_fast(10_000, 100)
    lam2, _ = heuristic_fast(10_000, 400)
    assert lam2 == pytest.approx(2 * lam1, rel=1e-12)  # D -> 4D doubles lambda
    lam3, _ = heuristic_fast(40_000, 100)
    assert lam3 == pytest.approx(lam1 / 2, rel=1e-12)  # n -> 4n halves lambda


def test_heuristic_slow_values():
    lam, l_star = heuristic_slow(1_000_000, 1000, W=1.0, c2=1.0)
    assert lam == pytest.approx((1000 * math.pi / 1e6) ** (1 / 3), rel=1e-12)
    assert lam == pytest.approx(0.14646, abs=1e-5)
    assert l_star == pytest.approx((math.pi * 1000 * 1000.0) ** (-1 / 3), rel=1e-12)


def test_heuristic_slow_scalings():
    lam1, _ = heuristic_slow(1e6, 100)
    lam2, _ = heuristic_slow(1e6, 800)
    assert lam2 == pytest.approx(2 * lam1, rel=1e-12)  # D -> 8D doubles lambda


def test_slow_dominates_fast_for_small_argument():
    # cbrt(x) >= sqrt(x) for x <= 1: multi-hop within a slot buys throughput,
    # so the slow-mobility heuristic dominates whenever pi W D <= n with unit
    # constants. (The algebraic comparison of sqrt vs cbrt settles the
    # direction; see the decisions ledger.)
    for n, D in [(1e4, 100), (1e6, 50), (1e5, 1000)]:
        x = math.pi * D / n
        lam_f, _ = heuristic_fast(n, D)
        lam_s, _ = heuristic_slow(n, D)
        assert lam_f == pytest.approx(x**0.5, rel=1e-12)
        assert lam_s == pytest.approx(x ** (1 / 3), rel=1e-12)
        if x <= 1:
            assert lam_s >= lam_f


def test_upper_bound_fast_value():
    # 8*sqrt(2)*10*3
    assert upper_bound_fast(100, 4, 1, 1, 1) == pytest.approx(339.411255, abs=1e-5)
    # D=0 collapses to the no-relay bound
    assert upper_bound_fast(100, 0, 1, 1, 1) == pytest.approx(
        no_relay_bound_fast(100, 1, 1, 1), rel=1e-12
    )


def test_upper_bound_fast_sqrtD_scaling():
    big = upper_bound_fast(1e6, 4e8, 1, 1, 1) / upper_bound_fast(1e6, 1e8, 1, 1, 1)
    assert big == pytest.approx(2.0, abs=1e-3)


def test_upper_bound_slow_value():
    # 4*2^(1/3)*100*3
    assert upper_bound_slow(1000, 8, 1, 1, 1) == pytest.approx(1511.9053, abs=1e-4)


def test_upper_bound_slow_scalings():
    r = upper_bound_slow(1e6, 8e12, 1, 1, 1) / upper_bound_slow(1e6, 1e12, 1, 1, 1)
    assert r == pytest.approx(2.0, abs=1e-3)  # cbrt(D) scaling
    r = upper_bound_slow(1e6, 8, 1, 1, 8.0) / upper_bound_slow(1e6, 8, 1, 1, 1.0)
    assert r == pytest.approx(0.25, rel=1e-9)  # delta^(-2/3)


def test_grid_search_recovers_fast_l_star():
    # the closed form is the max-min optimizer of the virtual channel;
    # parameters deep enough in the regime that the linearized erasure
    # branch matches the exact one within the grid step
    rng = generator_for(101)
    for _ in range(5):
        n = float(rng.integers(2_000_000, 20_000_000))
        D = int(rng.integers(200, 1500))
        W = float(rng.uniform(0.5, 2.0))
        _, l_star = heuristic_fast(n, D, W)
        l_grid, _ = grid_search_hitting_distance(n, D, W, 1.0, "fast")
        assert abs(l_grid - l_star) <= 2e-4


def test_grid_search_recovers_slow_l_star():
    rng = generator_for(202)
    for _ in range(5):
        n = float(rng.integers(4_000_000, 100_000_000))
        D = int(rng.integers(10, 50))
        W = float(rng.uniform(0.5, 2.0))
        _, l_star = heuristic_slow(n, D, W)
        l_grid, _ = grid_search_hitting_distance(n, D, W, 1.0, "slow")
        assert abs(l_grid - l_star) <= 2e-4


def test_l_star_clamped_with_warning():
    with pytest.warns(UserWarning):
        _, l_star = heuristic_fast(4, 1, W=0.01)
    assert l_star == 0.5


def test_bound_report_fields():
    rep = bound_report("fast", 10_000, 100, W=1.0, delta=0.5, T=2.0)
    assert rep.regime == "fast"
    assert rep.upper_bound_total == pytest.approx(upper_bound_fast(10_000, 100, 1.0, 2.0, 0.5))
    assert rep.no_relay_bound == pytest.approx(no_relay_bound_fast(10_000, 1.0, 2.0, 0.5))
    assert rep.constants["T"] == 2.0
    assert rep.lambda_heuristic > 0 and 0 < rep.L_star <= 0.5
    rep_s = bound_report("slow", 10_000, 100)
    assert rep_s.upper_bound_total == pytest.approx(upper_bound_slow(10_000, 100, 1.0, 1.0, 0.4))
    assert rep_s.no_relay_bound == pytest.approx(no_relay_bound_slow(10_000, 1.0, 1.0, 0.4))


def test_heuristic_lambda_matches_grid_value():
    # the attained max-min value approaches the closed-form lambda
    n, D, W = 8_000_000, 500, 1.0
    lam, _ = heuristic_fast(n, D, W)
    _, val = grid_search_hitting_distance(n, D, W, 1.0, "fast")
    assert val == pytest.approx(lam, rel=2e-2)
