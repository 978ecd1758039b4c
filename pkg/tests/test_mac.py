import pytest
from hypothesis import given, strategies as st

from platoonsim.mac import (
    FrameDurations,
    InvalidStageError,
    MacParams,
    contention_window,
    frame_durations,
)


class TestContentionWindow:
    def test_standard_window_at_stage_zero(self):
        assert contention_window(0, 64) == 64

    def test_identity_stage(self):
        assert contention_window(0, 1) == 1

    def test_direct_arithmetic(self):
        assert contention_window(3, 20) == 160

    def test_stage_above_retry_limit_rejected(self):
        with pytest.raises(InvalidStageError):
            contention_window(6, 64, retry_limit=5)
        with pytest.raises(InvalidStageError):
            contention_window(-1, 64)

    def test_bad_window_rejected(self):
        with pytest.raises(ValueError):
            contention_window(0, 0)

    @given(
        k=st.integers(min_value=0, max_value=4),
        w0=st.integers(min_value=1, max_value=1024),
    )
    def test_exactly_doubles_per_stage(self, k, w0):
        here = contention_window(k, w0)
        nxt = contention_window(k + 1, w0)
        assert nxt == 2 * here
        assert nxt >= here


class TestFrameDurations:
    def test_default_parameters(self):
        fd = frame_durations(MacParams())
        assert fd.t_data_us == pytest.approx(2048 / 6e6 * 1e6)  # 341.33 us
        assert fd.t_ack_us == pytest.approx(40.0)
        assert fd.t_success_us == pytest.approx(341.33333333 + 28 + 40 + 54, rel=1e-9)
        assert fd.t_fail_us == fd.t_success_us

    def test_zero_payload_degenerate(self):
        fd = frame_durations(MacParams(payload_bits=0))
        assert fd.t_data_us == 0.0
        assert fd.t_success_us == pytest.approx(28 + 40 + 54)

    def test_pure_function(self):
        p = MacParams()
        assert frame_durations(p) == frame_durations(p)

    def test_invariants(self):
        fd = frame_durations(MacParams())
        assert fd.t_success_us >= fd.t_data_us + fd.t_ack_us
        assert fd.t_fail_us >= fd.t_data_us

    def test_pinned_slot_ratio(self):
        # exchange length in slots is load-bearing for delay magnitudes;
        # any change beyond a tenth of a slot must be deliberate
        p = MacParams()
        ratio = frame_durations(p).t_success_us / p.slot_us
        assert ratio == pytest.approx(35.641025641025642, abs=1e-9)
        assert abs(ratio - 35.6) < 0.1


class TestMacParamsValidation:
    def test_defaults_are_valid(self):
        p = MacParams()
        assert p.cw_standard == 64
        assert p.retry_limit == 5

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"slot_us": 0},
            {"sifs_us": -1},
            {"ack_bits": 0},
            {"bitrate_bps": 0},
            {"payload_bits": -1},
            {"p_error": 1.5},
            {"p_error": -0.1},
            {"retry_limit": -1},
            {"cw_lo": 0},
            {"cw_lo": 10, "cw_hi": 5},
            {"cw_standard": 100},
        ],
    )
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            MacParams(**kwargs)

    def test_frozen(self):
        with pytest.raises(AttributeError):
            MacParams().slot_us = 5  # type: ignore[misc]
