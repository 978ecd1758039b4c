"""MAC/PHY constants of the backbone control channel and derived frame timings.

All durations are microseconds. The timing model for one frame exchange is:
data frame, SIFS, ACK, then a full DIFS before the next contention round.
A failed exchange spans the same wall-clock time because the sender waits
the ACK timeout (SIFS + ACK duration) before concluding failure.
"""

from __future__ import annotations

from dataclasses import dataclass


class InvalidStageError(ValueError):
    """Backoff stage outside [0, retry_limit]."""


@dataclass(frozen=True)
class MacParams:
    """DCF parameters of the shared control channel.

    Defaults are the usual vehicular control-channel setup: 13 us slots,
    6 Mbps, 2048-bit payloads, per-frame error probability 0.1, retry
    limit 5 and a standard minimum contention window of 64. ``cw_lo`` and
    ``cw_hi`` bound the per-vehicle minimum windows the optimizer may pick.
    """

    slot_us: float = 13.0
    sifs_us: float = 28.0
    difs_us: float = 54.0
    ack_bits: int = 240
    payload_bits: int = 2048
    bitrate_bps: float = 6e6
    p_error: float = 0.1
    retry_limit: int = 5
    cw_standard: int = 64
    cw_lo: int = 1
    cw_hi: int = 64

    def __post_init__(self):
        if self.slot_us <= 0 or self.sifs_us <= 0 or self.difs_us <= 0:
            raise ValueError("inter-frame timings must be strictly positive")
        if self.ack_bits <= 0 or self.bitrate_bps <= 0:
            raise ValueError("frame sizes and bit rate must be strictly positive")
        # payload 0 is tolerated so the degenerate zero-payload timing case
        # stays computable; the simulator itself requires a real payload.
        if self.payload_bits < 0:
            raise ValueError("payload_bits must be non-negative")
        if not 0.0 <= self.p_error <= 1.0:
            raise ValueError("p_error must lie in [0, 1]")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")
        if not 1 <= self.cw_lo <= self.cw_hi:
            raise ValueError("need 1 <= cw_lo <= cw_hi")
        if not self.cw_lo <= self.cw_standard <= self.cw_hi:
            raise ValueError("cw_standard must lie within [cw_lo, cw_hi]")


@dataclass(frozen=True)
class FrameDurations:
    """Airtime of one data/ACK exchange, in microseconds."""

    t_data_us: float
    t_ack_us: float
    t_success_us: float
    t_fail_us: float


def contention_window(k: int, w0: int, retry_limit: int = 5) -> int:
    """Contention window at backoff stage k for a vehicle with minimum window w0.

    The window doubles on every retransmission: W_k = w0 * 2**k. The backoff
    counter is then drawn uniformly from [0, W_k - 1] by the simulator.
    """
    if w0 < 1:
        raise ValueError("minimum contention window must be >= 1")
    if k < 0 or k > retry_limit:
        raise InvalidStageError(f"stage {k} outside [0, {retry_limit}]")
    return w0 * (2**k)


def frame_durations(p: MacParams) -> FrameDurations:
    """Derive exchange durations from the MAC parameters.

    Pure function of the inputs: same parameters give bit-identical output.
    """
    t_data = p.payload_bits / p.bitrate_bps * 1e6
    t_ack = p.ack_bits / p.bitrate_bps * 1e6
    t_success = t_data + p.sifs_us + t_ack + p.difs_us
    # Failure costs the same span: the sender only learns of the loss after
    # the ACK timeout (SIFS + ACK), then defers a DIFS like everyone else.
    return FrameDurations(
        t_data_us=t_data,
        t_ack_us=t_ack,
        t_success_us=t_success,
        t_fail_us=t_success,
    )
