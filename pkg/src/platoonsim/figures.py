"""Matplotlib renderings of the report CSVs, written next to them."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import MetricsReport

_BASELINE_STYLE = dict(color="tab:gray", marker="s", linestyle="--")
_OPTIMIZED_STYLE = dict(color="tab:blue", marker="o", linestyle="-")


def _new_axes(xlabel: str, ylabel: str):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.35)
    return fig, ax


def _finish(fig, ax, path: Path) -> Path:
    handles, labels = ax.get_legend_handles_labels()
    if labels:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def per_node_metrics(report: MetricsReport, out: Path, stem: str = "per_node") -> list[Path]:
    """One figure per metric for a single run."""
    idx = range(1, report.n + 1)
    written = []

    fig, ax = _new_axes("backbone vehicle index", "one-hop delay (ms)")
    ax.plot(idx, [d / 1000 for d in report.delays_us], **_OPTIMIZED_STYLE)
    written.append(_finish(fig, ax, out / f"{stem}_one_hop_delay.png"))

    fig, ax = _new_axes("backbone vehicle index", "one-hop throughput (Mbps)")
    ax.plot(idx, [t / 1e6 for t in report.throughput_bps], **_OPTIMIZED_STYLE)
    written.append(_finish(fig, ax, out / f"{stem}_throughput.png"))

    fig, ax = _new_axes("backbone vehicle index", "transmission probability")
    ax.plot(idx, report.tx_probability, **_OPTIMIZED_STYLE)
    written.append(_finish(fig, ax, out / f"{stem}_tx_probability.png"))

    fig, ax = _new_axes("backbone vehicle index", "end-to-end delay (ms)")
    ax.plot(idx, [d / 1000 for d in report.e2e_delay_us], **_OPTIMIZED_STYLE)
    written.append(_finish(fig, ax, out / f"{stem}_e2e_delay.png"))

    return written


def comparison_metrics(
    baseline: MetricsReport,
    optimized: MetricsReport,
    baseline_cw: Sequence[int],
    optimized_cw: Sequence[int],
    out: Path,
) -> list[Path]:
    """Baseline-vs-optimized comparison figures for one chain."""
    idx = range(1, baseline.n + 1)
    written = []

    fig, ax = _new_axes("backbone vehicle index", "minimum contention window")
    ax.plot(idx, list(baseline_cw), label="standard", **_BASELINE_STYLE)
    ax.plot(idx, list(optimized_cw), label="optimized", **_OPTIMIZED_STYLE)
    written.append(_finish(fig, ax, out / "cw_vs_index.png"))

    pairs = [
        ("one_hop_delay", "one-hop delay (ms)",
         [d / 1000 for d in baseline.delays_us], [d / 1000 for d in optimized.delays_us]),
        ("e2e_delay", "end-to-end delay (ms)",
         [d / 1000 for d in baseline.e2e_delay_us], [d / 1000 for d in optimized.e2e_delay_us]),
        ("throughput", "one-hop throughput (Mbps)",
         [t / 1e6 for t in baseline.throughput_bps], [t / 1e6 for t in optimized.throughput_bps]),
        ("tx_probability", "transmission probability",
         list(baseline.tx_probability), list(optimized.tx_probability)),
    ]
    for stem, ylabel, base_vals, opt_vals in pairs:
        fig, ax = _new_axes("backbone vehicle index", ylabel)
        ax.plot(idx, base_vals, label="standard", **_BASELINE_STYLE)
        ax.plot(idx, opt_vals, label="optimized", **_OPTIMIZED_STYLE)
        written.append(_finish(fig, ax, out / f"{stem}_vs_index.png"))

    return written


def objective_traces(
    step_a: Sequence[tuple[int, float, tuple[int, ...]]],
    step_b: Sequence[tuple[int, float, tuple[int, ...]]],
    out: Path,
) -> Path:
    fig, ax = _new_axes("iteration", "best objective (us^2)")
    ax.plot([t for t, _, _ in step_a], [f for _, f, _ in step_a], label="step A",
            color="tab:orange")
    ax.plot([t for t, _, _ in step_b], [f for _, f, _ in step_b], label="step B",
            color="tab:blue")
    ax.set_yscale("log")
    return _finish(fig, ax, out / "objective_trace.png")


def e2e_vs_chain_length(
    baseline_series: Sequence[tuple[int, float]],
    optimized_points: Sequence[tuple[int, float]],
    deadline_us: float,
    out: Path,
) -> Path:
    fig, ax = _new_axes("number of backbone vehicles", "end-to-end delay (ms)")
    ax.plot(
        [n for n, _ in baseline_series],
        [e / 1000 for _, e in baseline_series],
        label="standard",
        **_BASELINE_STYLE,
    )
    if optimized_points:
        ax.plot(
            [n for n, _ in optimized_points],
            [e / 1000 for _, e in optimized_points],
            label="optimized",
            **_OPTIMIZED_STYLE,
        )
    ax.axhline(deadline_us / 1000, color="tab:red", linestyle=":", label="deadline")
    return _finish(fig, ax, out / "e2e_vs_n.png")
