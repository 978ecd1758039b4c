"""Independent two-vehicle slot model used as a collision oracle.

With two mutually-sensing saturated vehicles and no channel errors, both
share every eligible slot: they decrement in lockstep, the smaller counter
wins the round, an equal expiry collides, and both resume one full exchange
cycle later. That makes the system a simple round-based process, written
here from scratch so it shares nothing with the production kernel.
"""

from __future__ import annotations

import random


def two_node_lockstep(
    w0_a: int,
    w0_b: int,
    retry_limit: int,
    cycle_slots: int,
    total_slots: int,
    seed: int,
):
    """Counts (attempts, collisions, successes) per vehicle over total_slots."""
    rng = random.Random(seed)
    w0 = (w0_a, w0_b)
    stage = [0, 0]
    backoff = [rng.randrange(w0[0]), rng.randrange(w0[1])]
    attempts = [0, 0]
    collisions = [0, 0]
    successes = [0, 0]

    t = 0
    while True:
        step = min(backoff)
        t += step
        if t >= total_slots:
            break
        backoff = [b - step for b in backoff]
        if backoff[0] == 0 and backoff[1] == 0:
            for i in (0, 1):
                attempts[i] += 1
                collisions[i] += 1
                stage[i] += 1
                if stage[i] > retry_limit:
                    stage[i] = 0  # drop, fetch a fresh packet
                backoff[i] = rng.randrange(w0[i] << stage[i])
        else:
            i = 0 if backoff[0] == 0 else 1
            attempts[i] += 1
            successes[i] += 1
            stage[i] = 0
            backoff[i] = rng.randrange(w0[i])
        t += cycle_slots
    return attempts, collisions, successes
