import math

import pytest
from hypothesis import given, strategies as st

from platoonsim.chainsim import MacParams, NodeStats, SimConfig, Topology, run_simulation
from platoonsim.metrics import (
    UndefinedDelayError,
    build_report,
    end_to_end_delay,
    objective,
    one_hop_delay,
    one_hop_throughput,
    transmission_probability,
)


class TestOneHopDelay:
    def test_direct_division(self):
        stats = NodeStats(busy_window_us=1_000_000, successes=250)
        assert one_hop_delay(stats) == 4000.0

    def test_typical_regime(self):
        stats = NodeStats(busy_window_us=1_000_000, successes=312)
        assert one_hop_delay(stats) == pytest.approx(3205.13, abs=0.5)

    def test_zero_successes_undefined(self):
        with pytest.raises(UndefinedDelayError):
            one_hop_delay(NodeStats(busy_window_us=1_000_000, successes=0))


class TestObjective:
    def test_zero_variance(self):
        assert objective([3200.0, 3200.0, 3200.0], 3200.0) == 0.0

    def test_direct_arithmetic(self):
        assert objective([3000.0, 4000.0], 3000.0) == 1_000_000.0

    def test_infinite_delay_poisons_value(self):
        assert objective([3000.0, math.inf], 3000.0) == math.inf

    @given(
        delays=st.lists(
            st.floats(min_value=1.0, max_value=1e5), min_size=2, max_size=8
        ),
        target=st.floats(min_value=1.0, max_value=1e5),
    )
    def test_permutation_invariant_and_nonnegative(self, delays, target):
        value = objective(delays, target)
        assert value >= 0.0
        assert objective(list(reversed(delays)), target) == pytest.approx(value)

    def test_doubling_deviations_quadruples(self):
        target = 3000.0
        near = [3100.0, 2900.0, 3050.0]
        far = [target + 2 * (d - target) for d in near]
        assert objective(far, target) == pytest.approx(4 * objective(near, target))


class TestThroughput:
    def test_typical_magnitude(self):
        stats = NodeStats(busy_window_us=1_000_000, successes=300)
        assert one_hop_throughput(stats, 2048, 1_000_000) == 614_400.0

    def test_zero_successes(self):
        stats = NodeStats(busy_window_us=1_000_000, successes=0)
        assert one_hop_throughput(stats, 2048, 1_000_000) == 0.0

    def test_consistent_with_delay(self):
        # packet rate is the reciprocal of delay, so throughput*delay = payload
        stats = NodeStats(busy_window_us=1_000_000, successes=293)
        thr = one_hop_throughput(stats, 2048, 1_000_000)
        assert thr == pytest.approx(0.6e6, rel=0.05)
        delay_s = one_hop_delay(stats) / 1e6
        assert thr * delay_s == pytest.approx(2048, rel=1e-9)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            one_hop_throughput(NodeStats(1.0, 1), 2048, 0)


class TestTransmissionProbability:
    def test_direct_ratio(self):
        stats = NodeStats(1.0, 0, tx_starts=100, decision_slots=9900)
        assert transmission_probability(stats) == 0.01

    def test_no_transmissions(self):
        stats = NodeStats(1.0, 0, tx_starts=0, decision_slots=500)
        assert transmission_probability(stats) == 0.0

    def test_undefined_without_eligible_slots(self):
        with pytest.raises(ValueError):
            transmission_probability(NodeStats(1.0, 0))


class TestEndToEndDelay:
    def test_balanced_chain(self):
        assert end_to_end_delay([3200.0] * 6, 6) == 16_000.0

    def test_empty_path(self):
        assert end_to_end_delay([3200.0] * 6, 1) == 0.0

    def test_partial_sum(self):
        assert end_to_end_delay([3000.0, 4000.0, 3500.0], 3) == 7000.0

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            end_to_end_delay([1.0, 2.0], 3)
        with pytest.raises(ValueError):
            end_to_end_delay([1.0, 2.0], 0)

    @given(st.lists(st.floats(min_value=1.0, max_value=1e5), min_size=2, max_size=10))
    def test_increment_is_the_hop_delay(self, delays):
        for i in range(1, len(delays)):
            diff = end_to_end_delay(delays, i + 1) - end_to_end_delay(delays, i)
            assert diff == pytest.approx(delays[i - 1])


class TestReport:
    def test_report_from_run(self):
        cfg = SimConfig(
            mac=MacParams(),
            topo=Topology(n=4),
            window_us=500_000,
            warmup_us=100_000,
            seed=9,
        )
        outcome = run_simulation(cfg, (16, 16, 16, 16))
        report = build_report(outcome, cfg.mac.payload_bits)
        assert report.n == 4
        assert report.avg_delay_us == pytest.approx(
            sum(report.delays_us) / 4, rel=1e-12
        )
        assert report.e2e_delay_us[0] == 0.0
        assert all(
            b >= a for a, b in zip(report.e2e_delay_us, report.e2e_delay_us[1:])
        )
        # throughput_i * delay_i recovers the payload when the whole window
        # is credited to the vehicle
        for thr, delay in zip(report.throughput_bps, report.delays_us):
            assert thr * (delay / 1e6) == pytest.approx(2048, rel=0.01)
