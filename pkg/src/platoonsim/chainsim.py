"""Slot-level simulator of saturated DCF traffic on a chain of backbone vehicles.

Carrier sensing reaches adjacent vehicles only, so a transmission two hops
away is invisible to a sender and collides at the shared receiver: the
hidden-terminal situation this model exists to reproduce. Time advances on
a global slot clock; transmissions start on slot boundaries and any slot
of overlap at the receiver destroys the data frame (no capture).

Busy spans are quantised to whole slots by rounding cumulative boundaries
up, while the DIFS deferral uses the nearest whole slot. With the default
timings this puts one successful exchange plus deferral at 36 slots
(468 us), within half a slot of the continuous-time 463.33 us, so slotted
results track the closed-form single-sender delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .mac import MacParams, frame_durations
from .seeding import stream_seed


class InvalidTopologyError(ValueError):
    """Chain topology that cannot carry one-hop traffic."""


@dataclass(frozen=True)
class Topology:
    """Linear chain of n backbone vehicles, indexed 1..n.

    ``a`` is the probability that an interior vehicle addresses its left
    neighbour; otherwise it addresses its right neighbour. The chain ends
    have a single in-range neighbour and always use it.
    """

    n: int
    a: float = 0.5

    def __post_init__(self):
        if self.n < 2:
            raise InvalidTopologyError("chain needs at least 2 backbone vehicles")
        if not 0.0 <= self.a <= 1.0:
            raise ValueError("destination probability a must lie in [0, 1]")

    def sense(self, i: int) -> frozenset[int]:
        """Vehicles audible from vehicle i: its chain neighbours."""
        self._check(i)
        return frozenset(j for j in (i - 1, i + 1) if 1 <= j <= self.n)

    def comm_range(self, i: int) -> frozenset[int]:
        """Communication range equals sensing range in this model."""
        return self.sense(i)

    def _check(self, i: int) -> None:
        if not 1 <= i <= self.n:
            raise ValueError(f"vehicle index {i} outside 1..{self.n}")


def sample_destination(i: int, topo: Topology, rng) -> int:
    """Draw the destination of vehicle i's next packet.

    Interior vehicles pick their left neighbour with probability ``topo.a``
    and their right neighbour otherwise; vehicles 1 and n address their sole
    in-range neighbour. ``rng`` needs only a ``random()`` method.
    """
    topo._check(i)
    if i == 1:
        return 2
    if i == topo.n:
        return topo.n - 1
    return i - 1 if rng.random() < topo.a else i + 1


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: MAC constants, chain, measurement window and seed.

    ``active_mask`` restricts which vehicles carry saturated traffic
    (default: all of them); inactive vehicles still receive and acknowledge.
    """

    mac: MacParams
    topo: Topology
    window_us: float = 2_000_000.0
    warmup_us: float = 1_000_000.0
    seed: int = 1
    active_mask: frozenset[int] | None = None

    def __post_init__(self):
        if self.window_us <= 0:
            raise ValueError("window_us must be positive")
        if self.warmup_us < 0:
            raise ValueError("warmup_us must be non-negative")
        if self.active_mask is not None:
            mask = frozenset(self.active_mask)
            if not mask:
                raise ValueError("active_mask must not be empty")
            if not all(1 <= i <= self.topo.n for i in mask):
                raise ValueError("active_mask indices outside 1..n")
            object.__setattr__(self, "active_mask", mask)

    def active(self) -> frozenset[int]:
        if self.active_mask is None:
            return frozenset(range(1, self.topo.n + 1))
        return self.active_mask


@dataclass(frozen=True)
class NodeStats:
    """Counters of one vehicle over the measurement window.

    ``busy_window_us`` is the measurement duration credited to the vehicle
    (saturated senders are serving a packet the whole window). ``airtime_us``
    additionally records the cumulative busy span of its exchanges so the
    alternative delay reading stays computable. ``decision_slots`` counts
    idle backoff slots in which the vehicle could have started a
    transmission but decremented instead.
    """

    busy_window_us: float
    successes: int
    attempts: int = 0
    collisions: int = 0
    channel_errors: int = 0
    drops: int = 0
    decision_slots: int = 0
    tx_starts: int = 0
    airtime_us: float = 0.0


@dataclass(frozen=True)
class SimOutcome:
    """Per-vehicle counters from one run."""

    per_node: tuple[NodeStats, ...]
    window_us: float


@dataclass(frozen=True)
class SlotTiming:
    """Exchange layout in whole slots."""

    data_slots: int
    busy_slots: int   # data + SIFS + ACK (equally, data + ACK timeout)
    cycle_slots: int  # busy span + DIFS deferral before the next round
    difs_slots: int   # idle slots required before backoff resumes


def slot_timing(mac: MacParams) -> SlotTiming:
    """Quantise the exchange timeline onto the slot clock."""
    durations = frame_durations(mac)
    slot = mac.slot_us
    data = math.ceil(durations.t_data_us / slot)
    busy = math.ceil((durations.t_data_us + mac.sifs_us + durations.t_ack_us) / slot)
    difs = max(1, round(mac.difs_us / slot))
    return SlotTiming(
        data_slots=data,
        busy_slots=busy,
        cycle_slots=busy + difs,
        difs_slots=difs,
    )


# splitmix64 stream per vehicle: wraparound uint64 arithmetic, stable on
# every platform, cheap inside the jitted kernel.
_SM_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM_M1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, nogil=True, inline="always")
def _u01(states, i):
    states[i] = states[i] + _SM_GAMMA
    z = states[i]
    z = (z ^ (z >> _S30)) * _SM_M1
    z = (z ^ (z >> _S27)) * _SM_M2
    z = z ^ (z >> _S31)
    return (z >> _S11) * _INV53


@njit(cache=True, nogil=True, inline="always")
def _draw_destination(states, i, n, a):
    # 0-based chain indices inside the kernel
    if i == 0:
        return 1
    if i == n - 1:
        return n - 2
    if _u01(states, i) < a:
        return i - 1
    return i + 1


# out columns
_SUCCESSES = 0
_ATTEMPTS = 1
_COLLISIONS = 2
_CHANNEL_ERRORS = 3
_DROPS = 4
_DECISION_SLOTS = 5
_TX_STARTS = 6
_AIRTIME_SLOTS = 7


@njit(cache=True, nogil=True)
def _chain_kernel(
    n,
    a,
    p_error,
    retry_limit,
    w0,
    active,
    data_slots,
    busy_slots,
    cycle_slots,
    difs_slots,
    warmup_slots,
    total_slots,
    states,
    out,
):
    CONTEND = 0
    IN_TX = 1

    mode = np.zeros(n, np.int64)
    stage = np.zeros(n, np.int64)
    backoff = np.zeros(n, np.int64)
    dest = np.zeros(n, np.int64)
    tx_from = np.full(n, -1, np.int64)
    corrupted = np.zeros(n, np.bool_)
    emit_start = np.full(n, total_slots + 1, np.int64)
    emit_end = np.zeros(n, np.int64)
    last_busy = np.full(n, -(difs_slots + 1), np.int64)
    em = np.zeros(n, np.bool_)
    # 0 = frozen/ineligible, 1 = decision slot (counter > 0), 2 = tx start
    decided = np.zeros(n, np.int64)

    for i in range(n):
        if active[i]:
            dest[i] = _draw_destination(states, i, n, a)
            backoff[i] = int(_u01(states, i) * w0[i])

    for t in range(total_slots):
        in_window = t >= warmup_slots

        # 1) resolve data frames ending now, release finished exchanges
        for i in range(n):
            if mode[i] != IN_TX:
                continue
            if t == tx_from[i] + data_slots:
                failed_by_error = False
                ok = not corrupted[i]
                if ok and p_error > 0.0 and _u01(states, i) < p_error:
                    ok = False
                    failed_by_error = True
                if in_window:
                    out[i, _ATTEMPTS] += 1
                    out[i, _TX_STARTS] += 1
                if ok:
                    if in_window:
                        out[i, _SUCCESSES] += 1
                    d = dest[i]
                    emit_start[d] = t
                    emit_end[d] = tx_from[i] + busy_slots
                    stage[i] = 0
                    dest[i] = _draw_destination(states, i, n, a)
                    backoff[i] = int(_u01(states, i) * w0[i])
                else:
                    if in_window:
                        if corrupted[i]:
                            out[i, _COLLISIONS] += 1
                        elif failed_by_error:
                            out[i, _CHANNEL_ERRORS] += 1
                    stage[i] += 1
                    if stage[i] > retry_limit:
                        if in_window:
                            out[i, _DROPS] += 1
                        stage[i] = 0
                        dest[i] = _draw_destination(states, i, n, a)
                    backoff[i] = int(_u01(states, i) * (w0[i] << stage[i]))
            if t == tx_from[i] + cycle_slots:
                mode[i] = CONTEND

        # 2) energy in the air this slot (including ACKs that start now)
        for i in range(n):
            em[i] = emit_start[i] <= t < emit_end[i]

        # 3) transmission decisions on pre-slot sensing: a frame starting in
        #    this very slot is invisible, which is what makes equal backoff
        #    expiries collide
        for i in range(n):
            decided[i] = 0
            if mode[i] == CONTEND and active[i] and t - last_busy[i] > difs_slots:
                if backoff[i] == 0:
                    decided[i] = 2
                    mode[i] = IN_TX
                    tx_from[i] = t
                    corrupted[i] = False
                    emit_start[i] = t
                    emit_end[i] = t + data_slots
                    em[i] = True
                else:
                    decided[i] = 1

        # 4) receiver-side overlap: any other in-range emission during the
        #    data window, or the destination itself emitting, kills the frame
        for s in range(n):
            if mode[s] == IN_TX and tx_from[s] <= t < tx_from[s] + data_slots:
                d = dest[s]
                if em[d]:
                    corrupted[s] = True
                else:
                    if d > 0 and d - 1 != s and em[d - 1]:
                        corrupted[s] = True
                    if d < n - 1 and d + 1 != s and em[d + 1]:
                        corrupted[s] = True

        # 5) carrier sensing, backoff decrements, airtime
        for i in range(n):
            busy = em[i]
            if i > 0 and em[i - 1]:
                busy = True
            if i < n - 1 and em[i + 1]:
                busy = True
            if busy:
                last_busy[i] = t
            if decided[i] == 1:
                if in_window:
                    out[i, _DECISION_SLOTS] += 1
                if not busy:
                    backoff[i] -= 1
            if mode[i] == IN_TX and in_window and t < tx_from[i] + busy_slots:
                out[i, _AIRTIME_SLOTS] += 1


def run_simulation(cfg: SimConfig, cw) -> SimOutcome:
    """Simulate the chain under per-vehicle minimum contention windows.

    Deterministic for a fixed (cfg.seed, cw): every vehicle draws from its
    own named sub-stream, so results do not depend on evaluation order or
    host thread count.
    """
    n = cfg.topo.n
    cw = tuple(int(c) for c in cw)
    if len(cw) != n:
        raise ValueError(f"need {n} contention windows, got {len(cw)}")
    for c in cw:
        if not cfg.mac.cw_lo <= c <= cfg.mac.cw_hi:
            raise ValueError(
                f"contention window {c} outside [{cfg.mac.cw_lo}, {cfg.mac.cw_hi}]"
            )
    if cfg.mac.payload_bits <= 0:
        raise ValueError("simulation requires a positive payload size")

    timing = slot_timing(cfg.mac)
    slot = cfg.mac.slot_us
    window_slots = int(round(cfg.window_us / slot))
    warmup_slots = int(round(cfg.warmup_us / slot))
    if window_slots < timing.cycle_slots:
        raise ValueError("window shorter than one frame exchange")

    active = np.zeros(n, dtype=np.bool_)
    for i in cfg.active():
        active[i - 1] = True
    states = np.array(
        [stream_seed(cfg.seed, "node", i) for i in range(n)], dtype=np.uint64
    )
    out = np.zeros((n, 8), dtype=np.int64)

    _chain_kernel(
        n,
        float(cfg.topo.a),
        float(cfg.mac.p_error),
        int(cfg.mac.retry_limit),
        np.asarray(cw, dtype=np.int64),
        active,
        timing.data_slots,
        timing.busy_slots,
        timing.cycle_slots,
        timing.difs_slots,
        warmup_slots,
        warmup_slots + window_slots,
        states,
        out,
    )

    per_node = tuple(
        NodeStats(
            busy_window_us=cfg.window_us,
            successes=int(out[i, _SUCCESSES]),
            attempts=int(out[i, _ATTEMPTS]),
            collisions=int(out[i, _COLLISIONS]),
            channel_errors=int(out[i, _CHANNEL_ERRORS]),
            drops=int(out[i, _DROPS]),
            decision_slots=int(out[i, _DECISION_SLOTS]),
            tx_starts=int(out[i, _TX_STARTS]),
            airtime_us=float(out[i, _AIRTIME_SLOTS]) * slot,
        )
        for i in range(n)
    )
    return SimOutcome(per_node=per_node, window_us=cfg.window_us)
