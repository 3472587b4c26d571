import csv
import math

import numpy as np
import pytest

from trunctail import (
    ArgumentError,
    CannotBoundError,
    DegenerateSampleError,
    alpha_upper_bound,
    hill_grid,
    hill_random_k,
    hill_statistic,
    random_k,
    simulate_sample,
    write_grid_csv,
)
from trunctail.hill import HillEstimate
from conftest import make_config


class TestHillStatistic:
    def test_constant_sample_is_zero(self):
        assert hill_statistic([5, 5, 5, 5], 3).h == 0.0

    def test_hand_computed_value(self):
        # (log e^2 + log e + log 1) / 3 = 1
        est = hill_statistic([math.e**2, math.e, 1.0, 1.0], 3)
        assert est.h == pytest.approx(1.0, abs=1e-12)
        assert est.k == 3 and est.n == 4

    def test_scale_invariance(self, rng):
        x = rng.pareto(2.0, 500) + 1.0
        h1 = hill_statistic(x, 50).h
        h2 = hill_statistic(17.3 * x, 50).h
        assert h1 == pytest.approx(h2, rel=1e-12)

    def test_permutation_invariance(self, rng):
        x = rng.pareto(1.0, 200) + 1.0
        assert hill_statistic(x, 20).h == hill_statistic(rng.permutation(x), 20).h

    def test_depends_only_on_top_k(self, rng):
        x = np.sort(rng.pareto(1.0, 100) + 1.0)[::-1]
        k = 10
        padded = np.concatenate([x[:k], np.full(90, x[k - 1] * 0.001)])
        assert hill_statistic(x, k).h == pytest.approx(hill_statistic(padded, k).h)

    def test_k_range_errors(self):
        with pytest.raises(ArgumentError):
            hill_statistic([1, 2, 3], 0)
        with pytest.raises(ArgumentError):
            hill_statistic([1, 2, 3], 4)

    def test_zero_at_order_statistic_k(self):
        with pytest.raises(DegenerateSampleError):
            hill_statistic([1.0, 0.0, 0.0], 2)

    def test_zeros_below_k_tolerated(self):
        est = hill_statistic([2.0, 1.0, 0.0], 2)
        assert est.h == pytest.approx(math.log(2.0) / 2)

    def test_negative_values_rejected(self):
        with pytest.raises(ArgumentError):
            hill_statistic([1.0, -2.0, 3.0], 2)


class TestRandomK:
    def test_hand_computed(self):
        # one point above 0.5 * 10 -> k = [4 * (1/4)^0.5] = 2
        assert random_k([10, 1, 1, 1], gamma=0.5, beta=0.5) == 2

    def test_all_equal_gives_n(self):
        assert random_k([3.0] * 7, gamma=0.9, beta=0.4) == 7

    def test_beta_one_counts_exceedances(self):
        x = [10, 9, 1, 1]
        assert random_k(x, gamma=0.85, beta=1.0) == 2

    def test_beta_one_exact_floor(self):
        # 3 of 10 points above the cut; n (m/n)^1 must floor to exactly 3
        x = [10, 9, 8, 1, 1, 1, 1, 1, 1, 1]
        assert random_k(x, gamma=0.5, beta=1.0) == 3

    def test_perfect_square_floor_guard(self):
        # 1 of 4 above the cut with beta=0.5: 4 * (1/4)^0.5 = 2 exactly
        assert random_k([8.0, 1.0, 1.0, 1.0], gamma=0.5, beta=0.5) == 2

    def test_all_zero_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            random_k([0.0, 0.0], 0.5, 0.5)

    def test_parameter_validation(self):
        for gamma, beta in ((0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.5)):
            with pytest.raises(ArgumentError):
                random_k([1.0, 2.0], gamma, beta)

    def test_bounds_and_scale_invariance(self, rng):
        for _ in range(20):
            x = rng.pareto(1.5, 50) + 1.0
            k = random_k(x, 0.4, 0.6)
            assert 1 <= k <= 50
            assert k == random_k(x * 123.4, 0.4, 0.6)


class TestHillRandomK:
    def test_constant_sample(self):
        est = hill_random_k([2.0] * 10, 0.5, 0.5)
        assert est.h == 0.0 and est.k == 10
        assert est.beta == 0.5 and est.gamma == 0.5

    def test_matches_composition(self, rng):
        x = rng.pareto(2.0, 300) + 1.0
        k = random_k(x, 0.5, 0.5)
        assert hill_random_k(x, 0.5, 0.5).h == hill_statistic(x, k).h

    @pytest.mark.parametrize(
        "alpha,rho,lo,hi",
        [
            (2.0, 1.0, 0.45, 0.55),  # soft truncation m_n = n
            # hard truncation; rho = 0.45 keeps the finite-n clamp bias
            # (about -0.5^(a/2) m^(-a/2) / a) inside the +-0.1 window
            (1.0, 0.45, 0.9, 1.1),
        ],
    )
    def test_consistency(self, alpha, rho, lo, hi):
        cfg = make_config(alpha, rho)
        n = 10**5
        hits = 0
        seeds = 100
        for i in range(seeds):
            x = np.abs(simulate_sample(cfg, n, seed=(909, i))[:, 0])
            h = hill_random_k(x, 0.5, 0.5).h
            hits += lo <= h <= hi
        assert hits >= 0.9 * seeds


class TestHillGrid:
    def test_cardinality_and_order(self, rng):
        x = rng.pareto(1.0, 100) + 1.0
        betas = [0.3, 0.4, 0.5, 0.6, 0.7]
        gammas = [0.3, 0.4, 0.5, 0.6, 0.7]
        grid = hill_grid(x, betas, gammas)
        assert len(grid) == 25
        assert [ (e.beta, e.gamma) for e in grid[:6] ] == [
            (0.3, 0.3), (0.3, 0.4), (0.3, 0.5), (0.3, 0.6), (0.3, 0.7), (0.4, 0.3),
        ]

    def test_matches_individual_ops(self, rng):
        x = rng.pareto(1.5, 400) + 1.0
        for e in hill_grid(x, [0.4, 0.6], [0.3, 0.7]):
            assert e.h == hill_random_k(x, e.gamma, e.beta).h
            assert e.k == random_k(x, e.gamma, e.beta)

    def test_constant_sample_all_zero(self):
        grid = hill_grid([4.0] * 20, [0.3, 0.5], [0.4, 0.6])
        assert all(e.h == 0.0 for e in grid)

    def test_grid_consistency_simulation(self):
        # soft regime: cells with beta <= 0.5 keep k large enough that the
        # grid max deviates from 1/alpha = 2/3 by well under 0.1; the
        # beta = 0.7 cells have k ~ n^0.3 and sampling noise alone puts them
        # near 0.1, so the full-grid bound is looser
        cfg = make_config(1.5, 1.0)
        n = 10**5
        grids = [0.3, 0.4, 0.5, 0.6, 0.7]
        hits_full = hits_sub = 0
        seeds = 50
        for i in range(seeds):
            x = np.abs(simulate_sample(cfg, n, seed=(311, i))[:, 0])
            grid = hill_grid(x, grids, grids)
            hits_full += max(abs(e.h - 2 / 3) for e in grid) <= 0.2
            hits_sub += max(abs(e.h - 2 / 3) for e in grid if e.beta <= 0.5) <= 0.1
        assert hits_full >= 0.8 * seeds
        assert hits_sub >= 0.8 * seeds

    def test_empty_grid_rejected(self, rng):
        with pytest.raises(ArgumentError):
            hill_grid(rng.random(10), [], [0.5])


class TestAlphaBound:
    def test_max_reciprocal(self):
        grid = [HillEstimate(h=h, k=10, n=100) for h in (0.5, 0.4, 0.45)]
        assert alpha_upper_bound(grid, margin=1.0).a_upper == pytest.approx(2.5)

    def test_margin_applied(self):
        grid = [HillEstimate(h=1.0, k=10, n=100)] * 3
        bound = alpha_upper_bound(grid, margin=1.1)
        assert bound.a_upper == pytest.approx(1.1)
        assert bound.rule == "margin-max"

    def test_zero_h_cannot_bound(self):
        grid = [HillEstimate(h=0.0, k=10, n=100)]
        with pytest.raises(CannotBoundError):
            alpha_upper_bound(grid)

    def test_empty_grid(self):
        with pytest.raises(ArgumentError):
            alpha_upper_bound([])

    def test_dominates_grid_reciprocals(self, rng):
        x = rng.pareto(1.5, 1000) + 1.0
        grid = hill_grid(x, [0.4, 0.5], [0.4, 0.5])
        bound = alpha_upper_bound(grid, margin=1.1)
        assert all(bound.a_upper >= 1.0 / e.h for e in grid)

    def test_simulated_bound_brackets_alpha(self):
        cfg = make_config(1.5, 1.0)
        grids = [0.3, 0.4, 0.5, 0.6, 0.7]
        hits = 0
        seeds = 50
        for i in range(seeds):
            x = np.abs(simulate_sample(cfg, 10**5, seed=(27, i))[:, 0])
            a = alpha_upper_bound(hill_grid(x, grids, grids), margin=1.1).a_upper
            hits += 1.5 <= a <= 2.2
        assert hits >= 0.8 * seeds


def test_grid_csv_round_trip(tmp_path, rng):
    x = rng.pareto(1.0, 200) + 1.0
    grid = hill_grid(x, [0.3, 0.5], [0.4, 0.6])
    path = tmp_path / "grid.csv"
    write_grid_csv(grid, path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(grid)
    for row, est in zip(rows, grid):
        assert float(row["beta"]) == est.beta
        assert float(row["gamma"]) == est.gamma
        assert int(row["k"]) == est.k
        assert float(row["h"]) == est.h
