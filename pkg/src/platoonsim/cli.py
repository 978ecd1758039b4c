"""Command-line entry point: experiment commands with CSV + figure outputs.

Every command writes a ``manifest.json`` describing exactly how to
regenerate its outputs; given the same manifest, reruns are byte-identical
(the manifest's own timestamp aside), whatever ``--jobs`` is used.

Exit codes: 0 success, 2 usage error, 3 configuration error, 4 runtime
failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import __version__
from .chainsim import SimConfig, Topology, run_simulation
from .config import (
    ConfigError,
    PROFILES,
    Settings,
    apply_profile,
    load_config,
    settings_mapping,
)
from .mac import MacParams
from .metrics import MetricsReport, build_report
from .oracle import GridSpec, GridTooLargeError, grid_rows
from .pipeline import (
    DEADLINE_US,
    CrnEvaluator,
    PipelineParams,
    choose_d_avg,
    two_step_optimize,
    sweep_n,
)
from .swarm import SwarmParams

OUTDIR_ENV = "PLATOONSIM_OUTDIR"


class UsageError(Exception):
    """Bad command line that argparse itself cannot catch."""


def build_mac(s: Settings) -> MacParams:
    return MacParams(
        slot_us=s.mac_slot_us,
        sifs_us=s.mac_sifs_us,
        difs_us=s.mac_difs_us,
        ack_bits=s.mac_ack_bits,
        payload_bits=s.mac_payload_bits,
        bitrate_bps=s.mac_bitrate_bps,
        p_error=s.mac_p_error,
        retry_limit=s.mac_retry_limit,
        cw_standard=s.mac_cw_standard,
        cw_lo=s.mac_cw_lo,
        cw_hi=s.mac_cw_hi,
    )


def build_sim_config(s: Settings) -> SimConfig:
    return SimConfig(
        mac=build_mac(s),
        topo=Topology(n=s.topo_n, a=s.topo_a),
        window_us=s.sim_window_us,
        warmup_us=s.sim_warmup_us,
        seed=s.seed,
    )


def build_swarm_params(s: Settings) -> SwarmParams:
    return SwarmParams(
        m=s.swarm_m,
        c1=s.swarm_c1,
        c2=s.swarm_c2,
        w=s.swarm_w,
        dcw_max=s.swarm_dcw_max,
        iter_limit=s.swarm_iter_limit,
        cw_lo=s.mac_cw_lo,
        cw_hi=s.mac_cw_hi,
        per_component_r=s.swarm_per_component_r,
    )


def build_pipeline_params(s: Settings, jobs: int) -> PipelineParams:
    return PipelineParams(
        d_avg_factor=s.pipeline_d_avg_factor,
        balance_rms_frac=s.pipeline_balance_rms_frac,
        replications=s.pipeline_replications,
        jobs=jobs,
    )


def reference_cw_table() -> dict[int, tuple[int, ...]]:
    """Bundled reference window sizes, for report columns only."""
    text = (
        resources.files("platoonsim").joinpath("data/reference_cw.csv").read_text()
    )
    table = {}
    for row in csv.DictReader(io.StringIO(text)):
        table[int(row["n"])] = tuple(int(v) for v in row["reference_cw"].split(";"))
    return table


def _parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad {what} {text!r}: {exc}") from exc


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _cw_text(cw: Sequence[int]) -> str:
    return ";".join(str(int(c)) for c in cw)


class OutputWriter:
    """Collects output files and writes them at the end of a command, so a
    failure part-way leaves nothing behind."""

    def __init__(self, outdir: Path, force: bool):
        self.outdir = outdir
        self.force = force
        self._files: list[tuple[str, bytes]] = []

    def prepare(self) -> None:
        if self.outdir.exists():
            occupied = any(self.outdir.iterdir()) if self.outdir.is_dir() else True
            if occupied and not self.force:
                raise UsageError(
                    f"output directory {self.outdir} is not empty; pass --force to overwrite"
                )

    def add_text(self, name: str, text: str) -> None:
        self._files.append((name, text.encode()))

    def add_json(self, name: str, payload) -> None:
        self.add_text(name, json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def add_csv(self, name: str, header: Sequence[str], rows) -> None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        self.add_text(name, buf.getvalue())

    def commit(self) -> list[Path]:
        self.outdir.mkdir(parents=True, exist_ok=True)
        written = []
        try:
            for name, payload in self._files:
                path = self.outdir / name
                path.write_bytes(payload)
                written.append(path)
        except BaseException:
            for path in written:
                path.unlink(missing_ok=True)
            raise
        return written


def _manifest(args, settings: Settings, extra: dict) -> dict:
    return {
        "command": args.command,
        "config_path": str(args.config) if args.config else None,
        "seed": settings.seed,
        "output_dir": str(args.resolved_out),
        "profile": args.profile,
        "jobs": args.jobs,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "version": __version__,
        "settings": settings_mapping(settings),
        "args": extra,
    }


def _load_settings(args) -> Settings:
    settings = load_config(args.config) if args.config else Settings()
    settings = apply_profile(settings, args.profile)
    if args.seed is not None:
        from dataclasses import replace

        settings = replace(settings, seed=args.seed)
    return settings


def _report_csv_rows(report: MetricsReport):
    for i in range(report.n):
        yield [
            i + 1,
            _fmt(report.delays_us[i] / 1000),
            _fmt(report.throughput_bps[i] / 1e6),
            _fmt(report.tx_probability[i]),
            _fmt(report.e2e_delay_us[i] / 1000),
        ]


def cmd_simulate(args) -> int:
    settings = _load_settings(args)
    cfg = build_sim_config(settings)
    n = cfg.topo.n
    if args.cw:
        cw = _parse_int_list(args.cw, "--cw")
        if len(cw) != n:
            raise UsageError(f"--cw needs {n} entries for topo.n={n}, got {len(cw)}")
    else:
        cw = [cfg.mac.cw_standard] * n

    writer = OutputWriter(args.resolved_out, args.force)
    writer.prepare()

    outcome = run_simulation(cfg, cw)
    report = build_report(outcome, cfg.mac.payload_bits)

    writer.add_json("manifest.json", _manifest(args, settings, {"cw": list(cw)}))
    writer.add_csv(
        "per_node.csv",
        ["index", "one_hop_delay_ms", "throughput_mbps", "tx_probability", "e2e_ms"],
        _report_csv_rows(report),
    )
    writer.add_json(
        "summary.json",
        {
            "cw": list(cw),
            "avg_one_hop_delay_ms": report.avg_delay_us / 1000,
            "e2e_delay_ms": report.e2e_delay_us[-1] / 1000,
            "per_node": [
                {
                    "index": i + 1,
                    "successes": s.successes,
                    "attempts": s.attempts,
                    "collisions": s.collisions,
                    "channel_errors": s.channel_errors,
                    "drops": s.drops,
                    "decision_slots": s.decision_slots,
                    "airtime_us": s.airtime_us,
                }
                for i, s in enumerate(outcome.per_node)
            ],
            "version": __version__,
        },
    )
    written = writer.commit()
    if not args.no_figures:
        from . import figures

        written += figures.per_node_metrics(report, args.resolved_out)
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_optimize(args) -> int:
    settings = _load_settings(args)
    cfg = build_sim_config(settings)
    swarm_params = build_swarm_params(settings)
    pipe = build_pipeline_params(settings, args.jobs)

    writer = OutputWriter(args.resolved_out, args.force)
    writer.prepare()

    result = two_step_optimize(cfg, swarm_params, pipe)

    writer.add_json("manifest.json", _manifest(args, settings, {}))
    doc = result.to_dict()
    doc["config"] = settings_mapping(settings)
    doc["version"] = __version__
    writer.add_json("result.json", doc)

    base, opt = result.baseline_report, result.optimized_report
    writer.add_csv(
        "per_node_comparison.csv",
        [
            "index",
            "baseline_cw",
            "optimized_cw",
            "baseline_delay_ms",
            "optimized_delay_ms",
            "baseline_e2e_ms",
            "optimized_e2e_ms",
            "baseline_throughput_mbps",
            "optimized_throughput_mbps",
            "baseline_tx_probability",
            "optimized_tx_probability",
        ],
        (
            [
                i + 1,
                result.baseline_cw[i],
                result.optimal_cw[i],
                _fmt(base.delays_us[i] / 1000),
                _fmt(opt.delays_us[i] / 1000),
                _fmt(base.e2e_delay_us[i] / 1000),
                _fmt(opt.e2e_delay_us[i] / 1000),
                _fmt(base.throughput_bps[i] / 1e6),
                _fmt(opt.throughput_bps[i] / 1e6),
                _fmt(base.tx_probability[i]),
                _fmt(opt.tx_probability[i]),
            ]
            for i in range(base.n)
        ),
    )
    for name, trace in (
        ("trace_step_a.csv", result.step_a_trace),
        ("trace_step_b.csv", result.step_b_trace),
    ):
        writer.add_csv(
            name,
            ["iteration", "objective_us2", "cw"],
            ([t, _fmt(f), _cw_text(cw)] for t, f, cw in trace),
        )
    written = writer.commit()
    if not args.no_figures:
        from . import figures

        written += figures.comparison_metrics(
            base, opt, result.baseline_cw, result.optimal_cw, args.resolved_out
        )
        written.append(
            figures.objective_traces(
                result.step_a_trace, result.step_b_trace, args.resolved_out
            )
        )
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_sweep(args) -> int:
    settings = _load_settings(args)
    cfg = build_sim_config(settings)
    swarm_params = build_swarm_params(settings)
    pipe = build_pipeline_params(settings, args.jobs)
    n_list = _parse_int_list(args.n_list, "--n-list")
    for n in n_list:
        if n % 2 != 0:
            raise UsageError(
                f"n={n} rejected: chains are built from platoons contributing two "
                "backbone vehicles each, so the length must be even"
            )
        if not 4 <= n <= 24:
            raise UsageError(f"n={n} outside the supported range 4..24")

    writer = OutputWriter(args.resolved_out, args.force)
    writer.prepare()

    sweep = sweep_n(cfg, n_list, swarm_params, pipe)
    reference = reference_cw_table()

    writer.add_json(
        "manifest.json", _manifest(args, settings, {"n_list": sorted(set(n_list))})
    )
    writer.add_csv(
        "sweep.csv",
        [
            "n",
            "optimized_cw",
            "reference_cw",
            "baseline_e2e_ms",
            "optimized_e2e_ms",
        ],
        (
            [
                row.n,
                _cw_text(row.optimal_cw),
                _cw_text(reference.get(row.n, ())),
                _fmt(row.baseline_e2e_us / 1000),
                _fmt(row.optimized_e2e_us / 1000),
            ]
            for row in sweep.rows
        ),
    )
    writer.add_csv(
        "e2e_vs_n.csv",
        ["n", "baseline_e2e_ms"],
        ([n, _fmt(e / 1000)] for n, e in sweep.baseline_series),
    )
    writer.add_json(
        "summary.json",
        {
            "deadline_ms": DEADLINE_US / 1000,
            "first_n_over_deadline": sweep.deadline_crossing_n,
            "version": __version__,
        },
    )
    written = writer.commit()
    if not args.no_figures:
        from . import figures

        written.append(
            figures.e2e_vs_chain_length(
                sweep.baseline_series,
                [(row.n, row.optimized_e2e_us) for row in sweep.rows],
                DEADLINE_US,
                args.resolved_out,
            )
        )
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_oracle(args) -> int:
    settings = _load_settings(args)
    cfg = build_sim_config(settings)
    pipe = build_pipeline_params(settings, args.jobs)
    candidates = _parse_int_list(args.candidates, "--candidates")
    if not candidates:
        raise UsageError("--candidates must list at least one window size")

    writer = OutputWriter(args.resolved_out, args.force)
    writer.prepare()

    evaluator = CrnEvaluator(cfg, pipe.replications, pipe.jobs)
    target = args.target_us
    if target is None:
        target = choose_d_avg(cfg, pipe, evaluator)
    spec = GridSpec.uniform(cfg, candidates, target)

    rows = grid_rows(spec, evaluator)
    best = min(rows, key=lambda r: (r[1], r[0]))
    writer.add_json(
        "manifest.json",
        _manifest(
            args,
            settings,
            {"candidates": sorted(set(candidates)), "target_us": target},
        ),
    )
    writer.add_csv(
        "grid.csv",
        ["cw", "objective_us2", "mean_delay_us"],
        ([_cw_text(cw), _fmt(value), _fmt(mean)] for cw, value, mean in rows),
    )
    writer.add_json(
        "best.json",
        {
            "cw": list(best[0]),
            "objective_us2": best[1],
            "mean_delay_us": best[2],
            "target_us": target,
            "combinations": len(rows),
        },
    )
    for path in writer.commit():
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platoonsim",
        description=(
            "Chain simulator and contention-window optimizer for platoon "
            "backbone communication experiments"
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, default=None, help="config file (key = value lines)")
        p.add_argument("--seed", type=int, default=None, help="override the configured master seed")
        p.add_argument("--out", type=Path, default=None, required=False,
                       help=f"output directory (env {OUTDIR_ENV} overrides)")
        p.add_argument("--profile", choices=PROFILES, default="full",
                       help="run profile: full windows or CI-scale fast windows")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="parallel simulation evaluations (results are identical for any value)")
        p.add_argument("--force", action="store_true",
                       help="overwrite a non-empty output directory")
        p.add_argument("--no-figures", action="store_true",
                       help="skip figure rendering, write CSV/JSON only")

    p_sim = sub.add_parser("simulate", help="one run under a fixed window combination")
    common(p_sim)
    p_sim.add_argument("--cw", default=None,
                       help="comma-separated per-vehicle minimum windows (default: all standard)")
    p_sim.set_defaults(func=cmd_simulate)

    p_opt = sub.add_parser("optimize", help="two-step window optimization for one chain")
    common(p_opt)
    p_opt.set_defaults(func=cmd_optimize)

    p_sweep = sub.add_parser("sweep", help="optimize across chain lengths")
    common(p_sweep)
    p_sweep.add_argument("--n-list", default="4,6,8,10,12,14,16,18,20,22,24",
                         help="comma-separated even chain lengths in 4..24")
    p_sweep.set_defaults(func=cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="exhaustive grid search over uniform candidate windows")
    common(p_oracle)
    p_oracle.add_argument("--candidates", default="8,16,32,64",
                          help="comma-separated candidate windows, same set for every vehicle")
    p_oracle.add_argument("--target-us", type=float, default=None,
                          help="objective target delay (default: derived from a uniform sweep)")
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    out = os.environ.get(OUTDIR_ENV) or args.out
    if out is None:
        parser.error(f"--out is required (or set {OUTDIR_ENV})")
    args.resolved_out = Path(out)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")

    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GridTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
