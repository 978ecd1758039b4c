"""Saturated DCF chain simulator and swarm-based contention-window tuner
for platoon backbone networks."""

from .chainsim import (
    NodeStats,
    SimConfig,
    SimOutcome,
    Topology,
    run_simulation,
    sample_destination,
    slot_timing,
)
from .mac import FrameDurations, MacParams, contention_window, frame_durations
from .metrics import (
    MetricsReport,
    UndefinedDelayError,
    build_report,
    end_to_end_delay,
    objective,
    one_hop_delay,
    one_hop_throughput,
    transmission_probability,
)
from .oracle import GridSpec, analytic_single_sender_delay, grid_search
from .pipeline import (
    CrnEvaluator,
    OptimizationResult,
    PipelineParams,
    choose_d_avg,
    step_a,
    step_b,
    sweep_n,
    two_step_optimize,
)
from .swarm import (
    SwarmParams,
    SwarmResult,
    SwarmState,
    init_swarm,
    run_swarm,
    update_bests,
    update_positions,
)

__version__ = "0.1.0"

__all__ = [
    "FrameDurations",
    "MacParams",
    "contention_window",
    "frame_durations",
    "NodeStats",
    "SimConfig",
    "SimOutcome",
    "Topology",
    "run_simulation",
    "sample_destination",
    "slot_timing",
    "MetricsReport",
    "UndefinedDelayError",
    "build_report",
    "end_to_end_delay",
    "objective",
    "one_hop_delay",
    "one_hop_throughput",
    "transmission_probability",
    "GridSpec",
    "analytic_single_sender_delay",
    "grid_search",
    "CrnEvaluator",
    "OptimizationResult",
    "PipelineParams",
    "choose_d_avg",
    "step_a",
    "step_b",
    "sweep_n",
    "two_step_optimize",
    "SwarmParams",
    "SwarmResult",
    "SwarmState",
    "init_swarm",
    "run_swarm",
    "update_bests",
    "update_positions",
    "__version__",
]
