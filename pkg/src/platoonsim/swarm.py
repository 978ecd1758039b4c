"""Swarm search over combinations of per-vehicle minimum contention windows.

A combination is one candidate assignment of minimum windows to the n
vehicles. The swarm keeps m of them, remembers each combination's best past
version and the best combination seen anywhere, and pulls every member
toward both. Positions live in continuous space and are rounded to the
nearest integer for evaluation; velocities are clamped componentwise and
positions are clamped into the admissible window range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .metrics import objective


@dataclass(frozen=True)
class SwarmParams:
    """Search constants: swarm size, learning/inertia coefficients, the
    velocity clamp, iteration budget and stop threshold."""

    m: int = 15
    c1: float = 1.5
    c2: float = 1.5
    w: float = 0.8
    dcw_max: float = 10.0
    iter_limit: int = 300
    threshold: float = 0.0
    cw_lo: int = 1
    cw_hi: int = 64
    # r1/r2 are normally drawn once per combination per iteration and shared
    # across components; set True to draw per component instead.
    per_component_r: bool = False

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least 2 combinations")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("learning coefficients must be non-negative")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("inertia coefficient must lie in [0, 1]")
        if self.dcw_max <= 0:
            raise ValueError("velocity clamp must be positive")
        if self.iter_limit < 1:
            raise ValueError("iteration limit must be >= 1")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        if not 1 <= self.cw_lo <= self.cw_hi:
            raise ValueError("need 1 <= cw_lo <= cw_hi")


@dataclass
class Particle:
    """One combination: continuous position, velocity, and its best past."""

    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray | None = None
    pbest_value: float = math.inf
    delays: tuple[float, ...] | None = None

    def combination(self, lo: int, hi: int) -> tuple[int, ...]:
        """Integer combination this particle stands for right now."""
        clipped = np.clip(self.position, lo, hi)
        return tuple(int(v) for v in np.rint(clipped))


@dataclass
class SwarmState:
    particles: list[Particle]
    iteration: int = 1
    gbest_position: np.ndarray | None = None
    gbest_value: float = math.inf
    gbest_delays: tuple[float, ...] | None = None
    trace: list[tuple[int, float, tuple[int, ...]]] = field(default_factory=list)
    max_abs_velocity: float = 0.0

    def gbest_combination(self) -> tuple[int, ...]:
        if self.gbest_position is None:
            raise RuntimeError("no evaluation recorded yet")
        return tuple(int(v) for v in np.rint(self.gbest_position))


@dataclass(frozen=True)
class SwarmResult:
    gbest_cw: tuple[int, ...]
    gbest_value: float
    gbest_delays: tuple[float, ...]
    trace: tuple[tuple[int, float, tuple[int, ...]], ...]
    max_abs_velocity: float


def init_swarm(n: int, params: SwarmParams, rng: np.random.Generator) -> SwarmState:
    """m combinations with integer positions uniform on [cw_lo, cw_hi]^n and
    velocities uniform on [0, 1]^n; bests stay unset until the first
    evaluation."""
    if n < 2:
        raise ValueError("need at least 2 vehicles")
    positions = rng.integers(params.cw_lo, params.cw_hi + 1, size=(params.m, n))
    velocities = rng.uniform(0.0, 1.0, size=(params.m, n))
    particles = [
        Particle(position=positions[j].astype(float), velocity=velocities[j].copy())
        for j in range(params.m)
    ]
    return SwarmState(particles=particles)


def update_bests(
    state: SwarmState,
    values: Sequence[float],
    delays: Sequence[tuple[float, ...]],
    params: SwarmParams,
) -> SwarmState:
    """Fold this iteration's objective values into the per-combination and
    global bests.

    Replacement is strict: a tie keeps the incumbent. On the first iteration
    every combination becomes its own best and the global best is the
    minimiser. Stored values are the evaluated ones; nothing is re-evaluated.
    """
    if len(values) != len(state.particles):
        raise ValueError("one objective value per combination required")
    first = state.iteration == 1
    for j, particle in enumerate(state.particles):
        evaluated = np.asarray(
            particle.combination(params.cw_lo, params.cw_hi), dtype=float
        )
        particle.delays = tuple(delays[j])
        if first or values[j] < particle.pbest_value:
            particle.pbest_position = evaluated
            particle.pbest_value = values[j]
        if values[j] < state.gbest_value or (first and state.gbest_position is None):
            state.gbest_value = values[j]
            state.gbest_position = evaluated
            state.gbest_delays = tuple(delays[j])
    state.trace.append((state.iteration, state.gbest_value, state.gbest_combination()))
    return state


def update_positions(
    state: SwarmState, params: SwarmParams, rng: np.random.Generator
) -> SwarmState:
    """Move every combination for the next iteration.

    After the first evaluation the initial random velocity is applied as-is;
    from then on the velocity blends inertia with pulls toward the
    combination's own best and the global best, clamped into
    [-dcw_max, +dcw_max]. Positions are clamped into [cw_lo, cw_hi].
    """
    if state.gbest_position is None:
        raise RuntimeError("bests must be populated before updating positions")
    first = state.iteration == 1
    for particle in state.particles:
        if first:
            delta = particle.velocity
        else:
            if params.per_component_r:
                r1 = rng.uniform(0.0, 1.0, size=particle.position.shape)
                r2 = rng.uniform(0.0, 1.0, size=particle.position.shape)
            else:
                r1 = rng.uniform(0.0, 1.0)
                r2 = rng.uniform(0.0, 1.0)
            delta = (
                params.w * particle.velocity
                + params.c1 * r1 * (state.gbest_position - particle.position)
                + params.c2 * r2 * (particle.pbest_position - particle.position)
            )
        delta = np.clip(delta, -params.dcw_max, params.dcw_max)
        particle.velocity = delta
        particle.position = np.clip(
            particle.position + delta, params.cw_lo, params.cw_hi
        )
        peak = float(np.max(np.abs(delta)))
        if peak > state.max_abs_velocity:
            state.max_abs_velocity = peak
    return state


Evaluator = Callable[[tuple[int, ...]], Sequence[float]]


def _evaluate(evaluator: Evaluator, combos: list[tuple[int, ...]]) -> dict:
    """Evaluate the distinct combinations, batching when the evaluator can."""
    distinct = list(dict.fromkeys(combos))
    many = getattr(evaluator, "evaluate_many", None)
    if many is not None:
        return dict(many(distinct))
    return {c: tuple(evaluator(c)) for c in distinct}


def run_swarm(
    n: int,
    target_us: float,
    evaluator: Evaluator,
    params: SwarmParams,
    rng: np.random.Generator,
) -> SwarmResult:
    """Full search loop: evaluate, fold bests, stop-check, move.

    The evaluator maps an integer combination deterministically to the
    per-vehicle delay vector (entries may be inf when a vehicle delivered
    nothing; such combinations score an infinite objective and are never
    adopted as bests over finite ones). Stops when the best objective drops
    below the threshold or the iteration budget is spent.
    """
    state = init_swarm(n, params, rng)
    while True:
        combos = [p.combination(params.cw_lo, params.cw_hi) for p in state.particles]
        delay_map = _evaluate(evaluator, combos)
        delays = [delay_map[c] for c in combos]
        values = [objective(d, target_us) for d in delays]
        update_bests(state, values, delays, params)
        if state.gbest_value < params.threshold or state.iteration >= params.iter_limit:
            return SwarmResult(
                gbest_cw=state.gbest_combination(),
                gbest_value=state.gbest_value,
                gbest_delays=tuple(state.gbest_delays or ()),
                trace=tuple(state.trace),
                max_abs_velocity=state.max_abs_velocity,
            )
        update_positions(state, params, rng)
        state.iteration += 1
