"""Performance metrics of one run: per-vehicle delay, throughput,
transmission probability, end-to-end delay, and the balance objective."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .chainsim import NodeStats, SimOutcome


class UndefinedDelayError(ArithmeticError):
    """No packet got through, so delay per delivered packet is undefined."""


def one_hop_delay(stats: NodeStats) -> float:
    """One-hop delay in microseconds: window credited to the vehicle divided
    by the number of packets it delivered."""
    if stats.successes <= 0:
        raise UndefinedDelayError("no successful packets in the window")
    return stats.busy_window_us / stats.successes


def objective(delays: Sequence[float], target_us: float) -> float:
    """Sum of squared deviations of the per-vehicle delays from the target.

    Units are us**2; zero exactly when every delay equals the target. Not
    divided by the vehicle count.
    """
    return float(sum((d - target_us) ** 2 for d in delays))


def one_hop_throughput(stats: NodeStats, payload_bits: int, window_us: float) -> float:
    """Delivered payload bits per second over the measurement window."""
    if window_us <= 0:
        raise ValueError("window_us must be positive")
    return stats.successes * payload_bits / (window_us / 1e6)


def transmission_probability(stats: NodeStats) -> float:
    """Chance the vehicle begins a transmission at a slot where its backoff
    machinery was eligible to act."""
    chances = stats.tx_starts + stats.decision_slots
    if chances == 0:
        raise ValueError("no eligible slots recorded")
    return stats.tx_starts / chances


def end_to_end_delay(delays: Sequence[float], i: int) -> float:
    """Delay from vehicle 1 to vehicle i: the sum of one-hop delays along
    the relay chain. Zero for i = 1."""
    if not 1 <= i <= len(delays):
        raise ValueError(f"vehicle index {i} outside 1..{len(delays)}")
    return float(sum(delays[: i - 1]))


@dataclass(frozen=True)
class MetricsReport:
    """Per-vehicle metrics of one run (or of averaged replications)."""

    delays_us: tuple[float, ...]
    avg_delay_us: float
    throughput_bps: tuple[float, ...]
    tx_probability: tuple[float, ...]
    e2e_delay_us: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.delays_us)


def build_report(outcome: SimOutcome, payload_bits: int) -> MetricsReport:
    """Turn raw counters into the report the figures are drawn from."""
    delays = tuple(one_hop_delay(s) for s in outcome.per_node)
    return report_from_parts(
        delays,
        tuple(
            one_hop_throughput(s, payload_bits, outcome.window_us)
            for s in outcome.per_node
        ),
        tuple(transmission_probability(s) for s in outcome.per_node),
    )


def report_from_parts(
    delays: Sequence[float],
    throughput: Sequence[float],
    tx_prob: Sequence[float],
) -> MetricsReport:
    delays = tuple(float(d) for d in delays)
    n = len(delays)
    finite = [d for d in delays if math.isfinite(d)]
    avg = sum(delays) / n if len(finite) == n else math.inf
    return MetricsReport(
        delays_us=delays,
        avg_delay_us=avg,
        throughput_bps=tuple(float(x) for x in throughput),
        tx_probability=tuple(float(x) for x in tx_prob),
        e2e_delay_us=tuple(end_to_end_delay(delays, i) for i in range(1, n + 1)),
    )
