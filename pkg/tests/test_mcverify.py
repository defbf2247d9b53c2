import math

import pytest

from manetsim.errors import ParameterError
from manetsim.harness import generator_for
from manetsim.mcverify import (
    check_balls_bins_broadcast,
    check_balls_bins_trashcan,
    check_chernoff,
    default_grid,
    poisson_tv_distance,
    run_grid,
)


def test_chernoff_delta_one_upper_tail():
    # delta = 1 is allowed for the upper tail only: bound e^{-mu/3} = e^{-10}
    rng = generator_for(1)
    lower, upper = check_chernoff(30.0, 1.0, 2000, rng, tails="upper")
    assert lower is None
    assert upper.bound == pytest.approx(math.exp(-10.0), rel=1e-12)
    assert upper.bound == pytest.approx(4.54e-5, rel=1e-3)
    assert upper.passed


def test_chernoff_vacuous_small_delta():
    rng = generator_for(2)
    lower, upper = check_chernoff(20.0, 0.01, 1000, rng)
    assert lower.bound > 0.99 and upper.bound > 0.99  # bounds tend to 1
    assert lower.passed and upper.passed


def test_chernoff_degenerate_mu_zero():
    rng = generator_for(3)
    lower, upper = check_chernoff(0.0, 0.5, 1000, rng)
    assert lower.empirical_tail == 0.0 and upper.empirical_tail == 0.0
    assert lower.passed and upper.passed


def test_chernoff_parameter_errors():
    rng = generator_for(4)
    with pytest.raises(ParameterError):
        check_chernoff(10.0, 1.5, 1000, rng)  # lower tail needs delta < 1
    with pytest.raises(ParameterError):
        check_chernoff(10.0, 1.5, 1000, rng, tails="lower")
    with pytest.raises(ParameterError):
        check_chernoff(10.0, 0.0, 1000, rng)
    with pytest.raises(ParameterError):
        check_chernoff(10.0, 0.5, 10, rng)


def test_broadcast_all_bins_filled():
    rng = generator_for(5)
    res = check_balls_bins_broadcast(50, 50, 1, 0.3, 1000, rng)
    # h=m fills every bin; p1 = 1-e^-1 so the tail event never happens
    assert res.empirical_tail == 0.0
    assert res.passed


def test_broadcast_formula_instance():
    rng = generator_for(6)
    res = check_balls_bins_broadcast(1000, 100, 10, 0.2, 2000, rng)
    p1 = 1.0 - math.exp(-1.0)
    assert res.params["p~1"] == pytest.approx(p1, rel=1e-12)
    assert res.bound == pytest.approx(2 * math.exp(-0.04 * 1000 * p1 / 3), rel=1e-12)
    assert res.passed


def test_broadcast_degenerate_no_rounds():
    rng = generator_for(7)
    res = check_balls_bins_broadcast(100, 10, 0, 0.2, 1000, rng)
    assert res.bound == pytest.approx(2.0)
    assert res.passed


def test_broadcast_h_exceeds_m():
    with pytest.raises(ParameterError):
        check_balls_bins_broadcast(10, 11, 1, 0.2, 1000, generator_for(8))


def test_trashcan_single_bin_no_trash():
    rng = generator_for(9)
    res = check_balls_bins_trashcan(1, 1.0, 5, 0.5, 1000, rng)
    assert res.empirical_tail == 0.0  # the single bin is filled whenever n >= 1
    assert res.passed


def test_trashcan_receiving_step_instance():
    # The fast-scheme receiving analysis at D=1000, M=10: bins = 16D/(25M) = 64,
    # per-ball bin mass p = 168/(1375 M), 5D = 5000 balls, delta = 1/6.
    rng = generator_for(10)
    res = check_balls_bins_trashcan(64, 168.0 / 13750.0, 5000, 1.0 / 6.0, 2000, rng)
    assert res.passed
    # same instance at a delta where the bound is informative
    res2 = check_balls_bins_trashcan(64, 168.0 / 13750.0, 5000, 0.5, 2000, rng)
    assert res2.bound < 0.1
    assert res2.passed


def test_trashcan_parameter_errors():
    rng = generator_for(11)
    with pytest.raises(ParameterError):
        check_balls_bins_trashcan(10, 0.0, 5, 0.2, 1000, rng)
    with pytest.raises(ParameterError):
        check_balls_bins_trashcan(10, 1.2, 5, 0.2, 1000, rng)


def test_trashcan_vacuous_delta_zero():
    rng = generator_for(12)
    res = check_balls_bins_trashcan(10, 0.5, 5, 0.0, 1000, rng)
    assert res.bound == pytest.approx(2.0)
    assert res.passed


def test_poisson_heuristic_total_variation():
    # per-bin counts of the broadcast process stay within TV 0.05 of
    # Poisson(nh/m) for m >= 100
    rng = generator_for(13)
    tv = poisson_tv_distance(1000, 100, 10, 200, rng)
    assert tv < 0.05


def test_default_grid_runs_clean():
    rng = generator_for(14)
    results = run_grid(None, 1000, rng)
    assert len(results) >= 12
    assert all(r.passed for r in results)
    lemmas = {r.lemma for r in results}
    assert {"chernoff-lower", "chernoff-upper",
            "balls-bins-broadcast", "balls-bins-trashcan"} <= lemmas


def test_default_grid_contains_receiving_instance():
    grid = default_grid()
    assert any(
        g["kind"] == "trashcan"
        and g["m"] == 64
        and g["n"] == 5000
        and abs(g["p"] - 168.0 / 13750.0) < 1e-12
        and abs(g["delta"] - 1 / 6) < 1e-12
        for g in grid
    )
    assert len(grid) >= 12
