"""Two-step optimization of the per-vehicle minimum contention windows.

Step A hunts for the smallest achievable average one-hop delay by chasing a
deliberately aggressive delay goal; step B reruns the same search with the
achieved average as the goal, which balances every vehicle's delay to it.
All candidate evaluations share replication seeds (common random numbers),
so the objective is a deterministic function of the window combination and
best-so-far bookkeeping is exact rather than statistical.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .chainsim import SimConfig, Topology, run_simulation
from .config import ConfigError
from .metrics import (
    MetricsReport,
    one_hop_throughput,
    report_from_parts,
    transmission_probability,
)
from .seeding import generator, stream_seed
from .swarm import SwarmParams, SwarmResult, run_swarm

DEADLINE_US = 100_000.0  # packet deadline used for the chain-length report
SWEEP_CW = (4, 8, 16, 32, 64)


@dataclass(frozen=True)
class PipelineParams:
    """Knobs of the two-step procedure itself."""

    d_avg_factor: float = 0.8
    balance_rms_frac: float = 0.05
    replications: int = 3
    sweep_cw: tuple[int, ...] = SWEEP_CW
    jobs: int = 1

    def __post_init__(self):
        if not 0 < self.d_avg_factor <= 1:
            raise ValueError("d_avg_factor must lie in (0, 1]")
        if self.balance_rms_frac <= 0:
            raise ValueError("balance_rms_frac must be positive")
        if self.replications < 1:
            raise ValueError("need at least one replication")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def _rep_seeds(cfg: SimConfig, replications: int) -> tuple[int, ...]:
    return tuple(stream_seed(cfg.seed, "rep", r) for r in range(replications))


class CrnEvaluator:
    """Deterministic combination -> per-vehicle delay map.

    Every combination is simulated with the same replication seeds and the
    per-vehicle delays are averaged across replications. Results are
    memoised, so a combination revisited by the swarm (or enumerated by the
    grid oracle) always reports the value first recorded. A vehicle that
    delivers nothing in any replication gets an infinite delay.
    """

    def __init__(self, cfg: SimConfig, replications: int = 3, jobs: int = 1):
        self.cfg = cfg
        self.replications = replications
        self.jobs = jobs
        self.rep_seeds = _rep_seeds(cfg, replications)
        self._memo: dict[tuple[int, ...], tuple[float, ...]] = {}

    def __call__(self, cw) -> tuple[float, ...]:
        combo = tuple(int(c) for c in cw)
        cached = self._memo.get(combo)
        if cached is None:
            cached = self._evaluate(combo)
            self._memo[combo] = cached
        return cached

    def evaluate_many(self, combos: Iterable) -> dict:
        """Evaluate distinct combinations, concurrently when jobs > 1.

        Results are keyed by combination, so the outcome is independent of
        scheduling order.
        """
        ordered = list(dict.fromkeys(tuple(int(c) for c in cw) for cw in combos))
        todo = [c for c in ordered if c not in self._memo]
        if self.jobs > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                for combo, value in zip(todo, pool.map(self._evaluate, todo)):
                    self._memo[combo] = value
        else:
            for combo in todo:
                self._memo[combo] = self._evaluate(combo)
        return {c: self._memo[c] for c in ordered}

    @property
    def evaluated(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self._memo)

    def _evaluate(self, combo: tuple[int, ...]) -> tuple[float, ...]:
        n = self.cfg.topo.n
        per_rep = []
        for seed in self.rep_seeds:
            outcome = run_simulation(replace(self.cfg, seed=seed), combo)
            per_rep.append(
                [
                    outcome.window_us / s.successes if s.successes > 0 else math.inf
                    for s in outcome.per_node
                ]
            )
        delays = []
        for i in range(n):
            values = [rep[i] for rep in per_rep]
            if all(math.isfinite(v) for v in values):
                delays.append(sum(values) / len(values))
            else:
                delays.append(math.inf)
        return tuple(delays)


def averaged_report(
    cfg: SimConfig, cw: Sequence[int], pipe: PipelineParams
) -> MetricsReport:
    """Per-vehicle metrics averaged over the common replication seeds."""
    n = cfg.topo.n
    delays = [0.0] * n
    throughput = [0.0] * n
    tx_prob = [0.0] * n
    seeds = _rep_seeds(cfg, pipe.replications)
    for seed in seeds:
        outcome = run_simulation(replace(cfg, seed=seed), cw)
        for i, stats in enumerate(outcome.per_node):
            if stats.successes <= 0:
                raise ConfigError(
                    f"vehicle {i + 1} delivered nothing under cw={tuple(cw)}"
                )
            delays[i] += outcome.window_us / stats.successes
            throughput[i] += one_hop_throughput(
                stats, cfg.mac.payload_bits, outcome.window_us
            )
            tx_prob[i] += transmission_probability(stats)
    r = len(seeds)
    return report_from_parts(
        [d / r for d in delays],
        [x / r for x in throughput],
        [x / r for x in tx_prob],
    )


def choose_d_avg(
    cfg: SimConfig,
    pipe: PipelineParams,
    evaluator: CrnEvaluator | None = None,
) -> float:
    """Pick the step-A delay goal from a coarse uniform-window sweep.

    Every vehicle gets the same window, the sweep covers ``pipe.sweep_cw``,
    and the goal is ``d_avg_factor`` times the smallest observed average
    one-hop delay: low enough to keep the minimisation pulling, close enough
    not to distort the landscape.
    """
    evaluator = evaluator or CrnEvaluator(cfg, pipe.replications, pipe.jobs)
    n = cfg.topo.n
    best = math.inf
    for w in pipe.sweep_cw:
        delays = evaluator((w,) * n)
        if not all(math.isfinite(d) for d in delays):
            raise ConfigError(
                f"uniform cw={w} sweep run had a vehicle with zero successes"
            )
        best = min(best, sum(delays) / n)
    return pipe.d_avg_factor * best


def _step_swarm_params(
    base: SwarmParams, cfg: SimConfig, threshold: float
) -> SwarmParams:
    return replace(
        base,
        threshold=threshold,
        cw_lo=cfg.mac.cw_lo,
        cw_hi=cfg.mac.cw_hi,
    )


def step_a(
    cfg: SimConfig,
    swarm_params: SwarmParams,
    pipe: PipelineParams,
    evaluator: CrnEvaluator,
    d_avg_us: float,
) -> tuple[float, SwarmResult]:
    """Find the minimum average one-hop delay reachable by tuning windows.

    Returns the average of the best combination's delays (the step output)
    along with the full search result.
    """
    n = cfg.topo.n
    threshold = n * (pipe.balance_rms_frac * d_avg_us) ** 2
    result = run_swarm(
        n,
        d_avg_us,
        evaluator,
        _step_swarm_params(swarm_params, cfg, threshold),
        generator(cfg.seed, "swarm-a"),
    )
    if not all(math.isfinite(d) for d in result.gbest_delays):
        raise ConfigError("step A never found a combination serving every vehicle")
    d_star = sum(result.gbest_delays) / n
    return d_star, result


def step_b(
    cfg: SimConfig,
    swarm_params: SwarmParams,
    pipe: PipelineParams,
    evaluator: CrnEvaluator,
    d_star_us: float,
) -> SwarmResult:
    """Balance every vehicle's delay to the step-A minimum average.

    The stop threshold caps the per-vehicle RMS deviation at
    ``balance_rms_frac`` of the goal.
    """
    n = cfg.topo.n
    threshold = n * (pipe.balance_rms_frac * d_star_us) ** 2
    return run_swarm(
        n,
        d_star_us,
        evaluator,
        _step_swarm_params(swarm_params, cfg, threshold),
        generator(cfg.seed, "swarm-b"),
    )


@dataclass(frozen=True)
class OptimizationResult:
    """Everything the two-step procedure produced for one chain."""

    d_avg_target_us: float
    d_star_us: float
    optimal_cw: tuple[int, ...]
    balanced_delays_us: tuple[float, ...]
    step_a_trace: tuple[tuple[int, float, tuple[int, ...]], ...]
    step_b_trace: tuple[tuple[int, float, tuple[int, ...]], ...]
    baseline_cw: tuple[int, ...]
    baseline_report: MetricsReport
    optimized_report: MetricsReport
    step_a_max_abs_velocity: float
    step_b_max_abs_velocity: float

    def to_dict(self) -> dict:
        def report(r: MetricsReport) -> dict:
            return {
                "delays_us": list(r.delays_us),
                "avg_delay_us": r.avg_delay_us,
                "throughput_bps": list(r.throughput_bps),
                "tx_probability": list(r.tx_probability),
                "e2e_delay_us": list(r.e2e_delay_us),
            }

        return {
            "d_avg_target_us": self.d_avg_target_us,
            "d_star_us": self.d_star_us,
            "optimal_cw": list(self.optimal_cw),
            "balanced_delays_us": list(self.balanced_delays_us),
            "baseline_cw": list(self.baseline_cw),
            "baseline_report": report(self.baseline_report),
            "optimized_report": report(self.optimized_report),
            "step_a_trace": [
                {"iteration": t, "objective_us2": f, "cw": list(cw)}
                for t, f, cw in self.step_a_trace
            ],
            "step_b_trace": [
                {"iteration": t, "objective_us2": f, "cw": list(cw)}
                for t, f, cw in self.step_b_trace
            ],
            "step_a_max_abs_velocity": self.step_a_max_abs_velocity,
            "step_b_max_abs_velocity": self.step_b_max_abs_velocity,
        }


def two_step_optimize(
    cfg: SimConfig,
    swarm_params: SwarmParams,
    pipe: PipelineParams,
    evaluator: CrnEvaluator | None = None,
) -> OptimizationResult:
    """Goal selection, step A, step B, then baseline-vs-optimized reports
    computed under the same replication seeds."""
    evaluator = evaluator or CrnEvaluator(cfg, pipe.replications, pipe.jobs)
    d_avg = choose_d_avg(cfg, pipe, evaluator)
    d_star, a_result = step_a(cfg, swarm_params, pipe, evaluator, d_avg)
    b_result = step_b(cfg, swarm_params, pipe, evaluator, d_star)
    baseline_cw = (cfg.mac.cw_standard,) * cfg.topo.n
    return OptimizationResult(
        d_avg_target_us=d_avg,
        d_star_us=d_star,
        optimal_cw=b_result.gbest_cw,
        balanced_delays_us=b_result.gbest_delays,
        step_a_trace=a_result.trace,
        step_b_trace=b_result.trace,
        baseline_cw=baseline_cw,
        baseline_report=averaged_report(cfg, baseline_cw, pipe),
        optimized_report=averaged_report(cfg, b_result.gbest_cw, pipe),
        step_a_max_abs_velocity=a_result.max_abs_velocity,
        step_b_max_abs_velocity=b_result.max_abs_velocity,
    )


@dataclass(frozen=True)
class SweepRow:
    n: int
    optimal_cw: tuple[int, ...]
    optimized_e2e_us: float
    baseline_e2e_us: float


@dataclass(frozen=True)
class SweepResult:
    """Per-chain-length optima plus the baseline end-to-end delay curve."""

    rows: tuple[SweepRow, ...]
    baseline_series: tuple[tuple[int, float], ...]
    deadline_crossing_n: int | None
    results: tuple[OptimizationResult, ...]


def _validate_sweep_n(n_list: Sequence[int]) -> list[int]:
    ns = sorted(set(int(n) for n in n_list))
    for n in ns:
        if n % 2 != 0:
            raise ValueError(
                f"n={n} rejected: each platoon contributes two backbone vehicles, "
                "so the chain length must be even"
            )
        if not 4 <= n <= 24:
            raise ValueError(f"n={n} outside the supported sweep range 4..24")
    return ns


def _baseline_e2e(cfg: SimConfig, pipe: PipelineParams) -> float:
    cw = (cfg.mac.cw_standard,) * cfg.topo.n
    report = averaged_report(cfg, cw, pipe)
    return report.e2e_delay_us[-1]


def sweep_n(
    cfg_template: SimConfig,
    n_list: Sequence[int],
    swarm_params: SwarmParams,
    pipe: PipelineParams,
    baseline_extend_limit: int = 40,
) -> SweepResult:
    """Run the whole two-step procedure for each chain length.

    The baseline (standard-window) end-to-end delay series continues past
    the requested lengths until it crosses the packet deadline, so the
    longest admissible chain can be reported.
    """
    ns = _validate_sweep_n(n_list)
    rows = []
    results = []
    baseline_series: list[tuple[int, float]] = []
    for n in ns:
        cfg = replace(cfg_template, topo=Topology(n=n, a=cfg_template.topo.a))
        result = two_step_optimize(cfg, swarm_params, pipe)
        baseline_e2e = result.baseline_report.e2e_delay_us[-1]
        optimized_e2e = result.optimized_report.e2e_delay_us[-1]
        rows.append(
            SweepRow(
                n=n,
                optimal_cw=result.optimal_cw,
                optimized_e2e_us=optimized_e2e,
                baseline_e2e_us=baseline_e2e,
            )
        )
        results.append(result)
        baseline_series.append((n, baseline_e2e))

    crossing = next((n for n, e2e in baseline_series if e2e > DEADLINE_US), None)
    n = max(ns)
    while crossing is None and n + 2 <= baseline_extend_limit:
        n += 2
        cfg = replace(cfg_template, topo=Topology(n=n, a=cfg_template.topo.a))
        e2e = _baseline_e2e(cfg, pipe)
        baseline_series.append((n, e2e))
        if e2e > DEADLINE_US:
            crossing = n

    return SweepResult(
        rows=tuple(rows),
        baseline_series=tuple(baseline_series),
        deadline_crossing_n=crossing,
        results=tuple(results),
    )
