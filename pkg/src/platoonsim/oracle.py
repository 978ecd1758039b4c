"""Independent ground truth for tests: a closed-form single-sender delay and
an exhaustive grid search over small contention-window spaces."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .chainsim import SimConfig
from .mac import MacParams, frame_durations
from .metrics import objective

GRID_GUARD = 100_000


class GridTooLargeError(ValueError):
    """Candidate grid exceeds the enumeration guard."""


@dataclass(frozen=True)
class GridSpec:
    """Exhaustive search space: per-vehicle candidate window sets.

    ``candidates[i]`` lists the admissible minimum contention windows of
    vehicle i+1. The cross product must stay enumerable (<= GRID_GUARD).
    """

    sim: SimConfig
    candidates: tuple[tuple[int, ...], ...]
    target_us: float

    def __post_init__(self):
        if len(self.candidates) != self.sim.topo.n:
            raise ValueError("need one candidate set per vehicle")
        size = 1
        for cands in self.candidates:
            if not cands:
                raise ValueError("empty candidate set")
            size *= len(cands)
            if size > GRID_GUARD:
                raise GridTooLargeError(
                    f"grid larger than the {GRID_GUARD}-combination guard"
                )

    @classmethod
    def uniform(cls, sim: SimConfig, candidates: Sequence[int], target_us: float) -> "GridSpec":
        """Same candidate set for every vehicle."""
        per_node = tuple(tuple(sorted(candidates)) for _ in range(sim.topo.n))
        return cls(sim=sim, candidates=per_node, target_us=target_us)

    @property
    def size(self) -> int:
        return math.prod(len(c) for c in self.candidates)


def analytic_single_sender_delay(p: MacParams, w0: int) -> float:
    """Expected one-hop delay of a lone saturated sender, in microseconds.

    Renewal argument over retry stages: attempt k costs the mean backoff
    ((w0 * 2**k - 1) / 2 slots) plus one full exchange, is reached with
    probability p_error**k and succeeds with probability 1 - p_error. The
    delay per delivered packet is the expected service time of one packet
    divided by the probability it ever gets through; with p_error = 1 no
    packet survives and the delay is infinite.
    """
    if w0 < 1:
        raise ValueError("minimum contention window must be >= 1")
    durations = frame_durations(p)
    survive = 1.0 - p.p_error ** (p.retry_limit + 1)
    if survive <= 0.0:
        return math.inf
    expected_service = 0.0
    for k in range(p.retry_limit + 1):
        mean_backoff = (w0 * (2**k) - 1) / 2.0 * p.slot_us
        expected_service += p.p_error**k * (mean_backoff + durations.t_success_us)
    return expected_service / survive


def grid_search(
    spec: GridSpec,
    evaluator: Callable[[tuple[int, ...]], Sequence[float]] | None = None,
) -> tuple[tuple[int, ...], float]:
    """Exhaustively evaluate every combination and return the strict minimum.

    Ties go to the lexicographically smallest vector, so the result does not
    depend on enumeration order. ``evaluator`` must be the same deterministic
    combination -> delays map the swarm uses; when omitted, a fresh
    common-random-numbers evaluator is built from ``spec.sim``.
    """
    if evaluator is None:
        from .pipeline import CrnEvaluator

        evaluator = CrnEvaluator(spec.sim)

    best_cw: tuple[int, ...] | None = None
    best_value = math.inf
    ordered = tuple(tuple(sorted(c)) for c in spec.candidates)
    for combo in itertools.product(*ordered):
        value = objective(evaluator(combo), spec.target_us)
        if value < best_value or (value == best_value and best_cw is not None and combo < best_cw):
            best_value = value
            best_cw = combo
    assert best_cw is not None
    return best_cw, best_value


def grid_rows(
    spec: GridSpec,
    evaluator: Callable[[tuple[int, ...]], Sequence[float]] | None = None,
):
    """Full enumeration as (combination, objective, mean delay) rows."""
    if evaluator is None:
        from .pipeline import CrnEvaluator

        evaluator = CrnEvaluator(spec.sim)
    ordered = tuple(tuple(sorted(c)) for c in spec.candidates)
    rows = []
    for combo in itertools.product(*ordered):
        delays = evaluator(combo)
        value = objective(delays, spec.target_us)
        mean_delay = sum(delays) / len(delays) if all(math.isfinite(d) for d in delays) else math.inf
        rows.append((combo, value, mean_delay))
    return rows
