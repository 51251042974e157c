import math

import numpy as np
import pytest

from liasim.auction import Bid, SlackProfile
from liasim.mechanisms import Outcome
from liasim.metrics import (LaiCurve, bootstrap_ci, clearing_latency,
                            counterfactual_gains, effective_welfare,
                            lai_index, reduction_grid, welfare_ratios)


def profile(slacks, horizon_time=100.0):
    arr = np.asarray(slacks, dtype=float)
    return SlackProfile(true_slack=arr, eta=np.zeros(len(arr)),
                        horizon_time=horizon_time)


def outcome(winners, payments, decision=50.0):
    return Outcome("lia", tuple(winners), tuple(payments), decision, 0.0)


def bids_of(values, emissions=None):
    emissions = emissions or [0.0] * len(values)
    return [Bid(i, float(v), float(v), 0, float(e))
            for i, (v, e) in enumerate(zip(values, emissions))]


class TestWelfareRatios:
    def test_feasible_global_max_is_fully_efficient(self):
        sw_all, sw_feas, reach = welfare_ratios(
            outcome([1], [2.0]), bids_of([50.0, 80.0]), profile([5.0, 5.0]))
        assert (sw_all, sw_feas, reach) == (1.0, 1.0, 1.0)

    def test_reachability_decomposition(self):
        sw_all, sw_feas, reach = welfare_ratios(
            outcome([0], [0.0]), bids_of([100.0, 120.0]), profile([5.0, -1.0]))
        assert sw_feas == 1.0
        assert reach == pytest.approx(100.0 / 120.0)
        assert sw_all == pytest.approx(0.83333333, abs=1e-6)

    def test_identity_holds_to_twelve_digits(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            n = int(rng.integers(2, 20))
            values = rng.uniform(0, 1000, n)
            slacks = rng.uniform(-20, 60, n)
            if not (slacks >= 0).any():
                slacks[0] = 1.0
            feas = np.flatnonzero(slacks >= 0)
            winner = int(rng.choice(feas))
            sw_all, sw_feas, reach = welfare_ratios(
                outcome([winner], [0.0]), bids_of(values), profile(slacks))
            assert sw_all == pytest.approx(sw_feas * reach, abs=1e-12)

    def test_no_feasible_bid_flags_conditional_ratio(self):
        sw_all, sw_feas, reach = welfare_ratios(
            outcome([], []), bids_of([10.0, 20.0]), profile([-1.0, -5.0]))
        assert sw_all == 0.0 and sw_feas is None and reach == 0.0


def test_clearing_latency_examples():
    bids = bids_of([10.0], emissions=[0.0])
    assert clearing_latency(outcome([0], [0.0], decision=10.0), bids) == 10.0
    bids = bids_of([10.0, 5.0], emissions=[4.0, 9.0])
    assert clearing_latency(outcome([0], [0.0], decision=100.0), bids) == 96.0


class TestEffectiveWelfare:
    def test_zero_rate_is_identity(self):
        assert effective_welfare(123.0, 5000.0, 0.0) == 123.0

    def test_exponential_decay(self):
        assert effective_welfare(100.0, 1000.0, 0.001) == \
            pytest.approx(100.0 * math.exp(-1.0))

    def test_waiting_cost_construction(self):
        # two bidders: value 1 at zero delay, value 1/eps at gap
        # (1/r) ln(1/eps); clearing now and waiting both land at ratio eps
        r, eps = 0.002, 0.1
        gap = math.log(1.0 / eps) / r
        opt = 1.0 / eps
        assert effective_welfare(1.0, 0.0, r) / opt == pytest.approx(eps)
        assert effective_welfare(opt, gap, r) / opt == pytest.approx(eps)

    def test_negative_rate_rejected(self):
        with pytest.raises(ValueError):
            effective_welfare(1.0, 1.0, -0.1)


class TestBootstrap:
    def test_constant_samples_collapse(self):
        lo, hi, mean = bootstrap_ci([4.2] * 50, seed=1)
        assert lo == hi == mean
        assert mean == pytest.approx(4.2)

    def test_binary_sample_interval(self):
        data = [0.0, 1.0] * 500
        lo, hi, mean = bootstrap_ci(data, level=0.95, resamples=4000, seed=2)
        assert mean == 0.5
        assert 0.4 < lo < hi < 0.6

    def test_single_resample_degenerates(self):
        lo, hi, mean = bootstrap_ci([1.0, 2.0, 3.0], resamples=1, seed=3)
        assert lo == hi

    def test_seed_determinism_and_coverage(self):
        data = np.random.default_rng(9).normal(10.0, 2.0, 200)
        a = bootstrap_ci(data, seed=42)
        b = bootstrap_ci(data, seed=42)
        assert a == b
        lo, hi, mean = a
        assert lo <= mean <= hi

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bootstrap_ci([])


class TestLaiIndex:
    def test_all_negative_curve_floors_at_zero(self):
        curve = LaiCurve(np.array([1.0, 2.0]), np.array([-3.0, -0.5]),
                         np.array([10, 10]))
        assert lai_index(curve) == 0.0

    def test_max_over_grid(self):
        curve = LaiCurve(np.array([1.0, 2.0, 3.0]), np.array([-1.0, 2.0, 0.5]),
                         np.array([5, 5, 5]))
        assert lai_index(curve) == 2.0

    def test_unreached_points_ignored(self):
        curve = LaiCurve(np.array([1.0, 2.0]), np.array([-1.0, np.nan]),
                         np.array([5, 0]))
        assert lai_index(curve) == 0.0

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            LaiCurve(np.array([2.0, 1.0]), np.zeros(2), np.zeros(2, dtype=int))
        with pytest.raises(ValueError):
            LaiCurve(np.array([]), np.array([]), np.array([], dtype=int))


def test_reduction_grid_always_contains_one_ms():
    for span in (5.0, 48.0, 4.4e6):
        grid = reduction_grid(span)
        assert 1.0 in grid.tolist()
        assert np.all(np.diff(grid) > 0) and np.all(grid > 0)
        assert grid.max() == pytest.approx(span)


class TestCounterfactualGains:
    """A stub mechanism whose winner is the earliest arrival; gains must be
    positive for advances that flip the winner and zero otherwise."""

    def evaluate(self, prof, arrivals):
        winner = int(np.argmin(arrivals))
        return Outcome("stub", (winner,), (0.0,), float(arrivals.min()), 0.0)

    def test_zero_advance_is_exactly_neutral(self):
        bids = bids_of([10.0, 20.0], emissions=[0.0, 1.0])
        arrivals = np.array([5.0, 6.0])
        gains = counterfactual_gains(self.evaluate, bids, profile([1.0, 1.0]),
                                     arrivals, 1, [1e-12])
        assert gains[0] == 0.0

    def test_flip_produces_the_value_as_gain(self):
        bids = bids_of([10.0, 20.0], emissions=[0.0, 1.0])
        arrivals = np.array([5.0, 6.0])
        gains = counterfactual_gains(self.evaluate, bids, profile([1.0, 1.0]),
                                     arrivals, 1, [2.0, 10.0])
        assert gains[0] == 20.0
        assert np.isnan(gains[1])  # reduction exceeds the 5 ms delay
