import json
import math

import numpy as np
import pytest
from scipy.stats import chi2, ks_2samp

from trunctail import (
    ArgumentError,
    CriticalValuePolicy,
    DegenerateSampleError,
    TestOutcome,
    build_table,
    chi1_quantile,
    chi1_sf,
    signed_power,
    simulate_sample,
    test_hard as hard_test,
    test_hard_strong as hard_strong_test,
    test_soft as soft_test,
    z_hard,
    z_soft,
)
from conftest import make_config


@pytest.fixture(scope="module")
def cheap_policy():
    # tiny-budget critical values; plenty for decision-logic tests
    table = build_table([0.5, 0.6, 0.95], [0.05, 0.025], n_terms=2000, n_reps=2000, seed=1)
    return CriticalValuePolicy(table=table, n_terms=2000, n_reps=2000, seed=1)


class TestZSoft:
    def test_equal_values_give_n(self):
        assert z_soft([3.0] * 9, 2.0) == pytest.approx(9.0)

    def test_hand_computed(self):
        assert z_soft([2.0, 1.0], 1.0) == pytest.approx(1.5)

    def test_scale_invariance(self, rng):
        x = rng.standard_cauchy(200)
        assert z_soft(0.37 * x, 1.7) == pytest.approx(z_soft(x, 1.7), rel=1e-12)

    def test_range(self, rng):
        for _ in range(20):
            x = rng.standard_cauchy(50)
            v = z_soft(x, 2.5)
            assert 1.0 <= v <= 50.0

    def test_permutation_invariance(self, rng):
        x = rng.standard_cauchy(100)
        assert z_soft(x, 2.0) == pytest.approx(z_soft(rng.permutation(x), 2.0))

    def test_monotone_in_non_maximal_entries(self):
        x = [5.0, 1.0, 2.0]
        bumped = [5.0, 1.5, 2.0]
        assert z_soft(bumped, 2.0) >= z_soft(x, 2.0)

    def test_all_zero(self):
        with pytest.raises(DegenerateSampleError):
            z_soft([0.0, 0.0], 1.0)

    def test_bad_exponent(self):
        with pytest.raises(ArgumentError):
            z_soft([1.0], 0.0)


class TestTestSoft:
    def test_constant_sample_rejects(self, cheap_policy):
        # statistic equals n, far above any tabled critical value
        out = soft_test([1.0] * 10**4, 1.9, 2.0, 0.05, cheap_policy)
        assert out.statistic == pytest.approx(10**4)
        assert out.reject and out.comparison == ">"
        assert out.p_value is None

    def test_decision_matches_rule(self, cheap_policy):
        # statistic == len for constant samples; pick sizes either side of
        # the Markov-bound critical values at theta = 0.95
        reject = soft_test(
            [1.0] * 161, 1.9, 2.0, 0.025,
            CriticalValuePolicy(mode="markov-bound"),
        )
        assert reject.statistic == pytest.approx(161.0)
        assert reject.critical_value == pytest.approx(141.23, abs=0.1)
        assert reject.reject
        accept = soft_test(
            [1.0] * 11, 1.9, 2.0, 0.05,
            CriticalValuePolicy(mode="markov-bound"),
        )
        assert accept.critical_value == pytest.approx(127.37, abs=0.1)
        assert not accept.reject

    def test_statistic_uses_a1_and_theta_ratio(self, cheap_policy):
        x = [4.0, 2.0, 1.0]
        out = soft_test(x, 1.0, 2.0, 0.05, cheap_policy)
        assert out.statistic == pytest.approx(z_soft(x, 2.0))
        assert out.params["theta"] == pytest.approx(0.5)

    def test_a1_must_exceed_a(self):
        with pytest.raises(ArgumentError):
            soft_test([1.0, 2.0], 2.0, 2.0, 0.05)
        with pytest.raises(ArgumentError):
            soft_test([1.0, 2.0], 2.0, 1.0, 0.05)

    def test_outcome_records_source(self, cheap_policy):
        out = soft_test([1.0, 5.0, 2.0] * 40, 1.0, 2.0, 0.05, cheap_policy)
        assert out.critical_source["method"] == "monte-carlo"
        high = soft_test([1.0, 5.0, 2.0] * 40, 1.9, 2.0, 0.05, cheap_policy)
        assert high.critical_source["method"] == "markov-bound"


class TestSignedPower:
    def test_examples(self):
        assert signed_power(-4.0, 0.5) == pytest.approx(-2.0)
        assert signed_power(9.0, 0.5) == pytest.approx(3.0)
        assert signed_power(0.0, 2.3) == 0.0

    def test_elementwise(self):
        out = signed_power(np.array([-1.0, 0.0, 8.0]), 1.0 / 3.0)
        assert out == pytest.approx([-1.0, 0.0, 2.0])


class TestZHard:
    def test_cancellation(self):
        assert z_hard([1.0, 1.0, 1.0, 1.0], 2.0, 0.5) == 0.0

    def test_hand_computed(self):
        # (-2 + 0)^2 / (1 + 1) = 2
        assert z_hard([2.0, 0.0, 1.0, 1.0], 2.0, 0.5) == pytest.approx(2.0)

    def test_order_dependence(self):
        x = [2.0, 0.0, 1.0, 1.0]
        assert z_hard(x, 2.0, 0.5) != z_hard(x[::-1], 2.0, 0.5)

    def test_scale_invariance(self, rng):
        x = rng.standard_cauchy(100)
        assert z_hard(3.7 * x, 2.4, 0.3) == pytest.approx(z_hard(x, 2.4, 0.3), rel=1e-12)

    def test_block_bounds(self):
        # [gamma n] = 0 is the only reachable violation: floor(gamma n) < n
        # holds automatically for gamma < 1
        with pytest.raises(ArgumentError):
            z_hard([1.0] * 5, 2.0, 0.1)
        with pytest.raises(ArgumentError):
            z_hard([1.0], 2.0, 0.5)

    def test_zero_denominator(self):
        with pytest.raises(DegenerateSampleError):
            z_hard([1.0, 1.0, 0.0, 0.0], 2.0, 0.5)

    def test_signs_start_negative(self):
        # single head point j=1 carries (-1)^1: numerator (-x_1^(a/2))^2
        assert z_hard([3.0, 1.0], 2.0, 0.5) == pytest.approx(9.0)

    def test_distribution_invariant_under_exchangeability(self):
        # values change under permutation but the law does not (i.i.d. input)
        cfg = make_config(1.0, 0.3)
        raw, shuffled = [], []
        gen = np.random.default_rng(99)
        for i in range(300):
            x = simulate_sample(cfg, 2000, seed=(7, i))[:, 0]
            raw.append(z_hard(x, 3.0, 0.5))
            shuffled.append(z_hard(gen.permutation(x), 3.0, 0.5))
        assert ks_2samp(raw, shuffled).pvalue > 0.01


class TestChi1:
    def test_sf_at_zero(self):
        assert chi1_sf(0.0) == 1.0

    @pytest.mark.parametrize("z,p", [(3.8415, 0.05), (6.6349, 0.01)])
    def test_standard_quantiles(self, z, p):
        assert chi1_sf(z) == pytest.approx(p, abs=1e-4)

    def test_against_scipy_oracle(self):
        for z in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0):
            assert chi1_sf(z) == pytest.approx(chi2.sf(z, df=1), rel=1e-12)

    def test_quantile_inverts_sf(self):
        for p in (0.5, 0.1, 0.05, 0.01, 0.001):
            assert chi1_sf(chi1_quantile(p)) == pytest.approx(p, abs=1e-9)

    def test_validation(self):
        with pytest.raises(ArgumentError):
            chi1_sf(-1.0)
        with pytest.raises(ArgumentError):
            chi1_quantile(1.5)


class TestTestHard:
    def test_c1_at_half(self):
        out = hard_test([1.0, 2.0, 1.0, 1.0], 2.0, 0.5, 0.05)
        assert out.params["C1"] == pytest.approx(2.0)
        assert out.critical_value == pytest.approx(2.0 * chi1_quantile(0.05))

    def test_zero_statistic_accepts(self):
        out = hard_test([1.0, 1.0, 1.0, 1.0], 2.0, 0.5, 0.05)
        assert out.statistic == 0.0
        assert out.p_value == 1.0
        assert not out.reject

    def test_decision_consistency(self):
        cfg = make_config(1.0, 0.3)
        for i in range(10):
            x = simulate_sample(cfg, 2000, seed=(13, i))[:, 0]
            out = hard_test(x, 3.0, 0.4, 0.05)
            assert out.reject == (out.statistic > out.critical_value)
            assert 0.0 <= out.p_value <= 1.0

    def test_shuffle_is_seeded(self):
        x = np.arange(1.0, 101.0)
        a = hard_test(x, 2.0, 0.5, 0.05, shuffle_seed=5)
        b = hard_test(x, 2.0, 0.5, 0.05, shuffle_seed=5)
        c = hard_test(x, 2.0, 0.5, 0.05, shuffle_seed=6)
        assert a.statistic == b.statistic
        assert a.statistic != c.statistic

    def test_calibration_close_to_nominal(self):
        # smaller-budget version of the acceptance calibration
        cfg = make_config(1.0, 0.3)
        rejections = 0
        reps = 200
        for i in range(reps):
            x = simulate_sample(cfg, 2 * 10**4, seed=(29, i))[:, 0]
            rejections += hard_test(x, 3.0, 0.5, 0.05).reject
        assert rejections / reps <= 0.1


class TestTestHardStrong:
    def test_threshold_closed_form(self):
        out = hard_strong_test([10.0] + [1.0] * (10**4 - 1), 2.0, 0.4, 0.05)
        assert out.critical_value == pytest.approx(
            math.sqrt(abs(math.log(0.95))) * (10**4) ** 0.2, rel=1e-12
        )
        assert out.critical_value == pytest.approx(1.429, abs=2e-3)

    def test_large_statistic_accepts(self):
        # z_soft ~ n here, far above the threshold
        out = hard_strong_test([1.0] * 10**4, 2.0, 0.4, 0.05)
        assert not out.reject

    def test_minimal_statistic_rejects(self):
        # one dominant point drives z_soft to ~1, below the threshold
        x = [10.0**6] + [1.0] * 9999
        out = hard_strong_test(x, 3.0, 0.4, 0.05)
        assert out.statistic == pytest.approx(1.0, abs=1e-6)
        assert out.reject and out.comparison == "<="

    def test_p_value_is_exponential_bound(self):
        x = [10.0**6] + [1.0] * 9999
        out = hard_strong_test(x, 3.0, 0.4, 0.05)
        scaled = out.statistic * (10**4) ** (-0.2)
        assert out.p_value == pytest.approx(1.0 - math.exp(-(scaled**2)))

    def test_epsilon_validation(self):
        with pytest.raises(ArgumentError):
            hard_strong_test([1.0, 2.0], 2.0, 1.2, 0.05)


class TestOutcomeSerialization:
    def test_round_trip(self, cheap_policy):
        out = soft_test([1.0, 5.0, 2.0] * 50, 1.9, 2.0, 0.05, cheap_policy)
        blob = json.dumps(out.to_dict())
        assert TestOutcome.from_dict(json.loads(blob)) == out

    def test_round_trip_hard(self):
        out = hard_test([1.0, 2.0, 3.0, 0.5], 2.0, 0.5, 0.05)
        assert TestOutcome.from_dict(json.loads(json.dumps(out.to_dict()))) == out
