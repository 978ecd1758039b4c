"""Flat key = value run configuration with documented keys.

Unknown keys are rejected so typos fail loudly. Values not present fall
back to the defaults below, which match the standard experiment setup.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path


class ConfigError(Exception):
    """Bad run configuration (file syntax, unknown key, unusable value)."""


@dataclass(frozen=True)
class Settings:
    """Every tunable of a run, as primitives."""

    mac_slot_us: float = 13.0
    mac_sifs_us: float = 28.0
    mac_difs_us: float = 54.0
    mac_ack_bits: int = 240
    mac_payload_bits: int = 2048
    mac_bitrate_bps: float = 6e6
    mac_p_error: float = 0.1
    mac_retry_limit: int = 5
    mac_cw_standard: int = 64
    mac_cw_lo: int = 1
    mac_cw_hi: int = 64
    topo_n: int = 6
    topo_a: float = 0.5
    sim_window_us: float = 2_000_000.0
    sim_warmup_us: float = 1_000_000.0
    swarm_m: int = 15
    swarm_c1: float = 1.5
    swarm_c2: float = 1.5
    swarm_w: float = 0.8
    swarm_dcw_max: float = 10.0
    swarm_iter_limit: int = 300
    swarm_per_component_r: bool = False
    pipeline_d_avg_factor: float = 0.8
    pipeline_balance_rms_frac: float = 0.05
    pipeline_replications: int = 3
    seed: int = 1


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# config key -> (Settings attribute, converter)
KEYS = {
    "mac.slot_us": ("mac_slot_us", float),
    "mac.sifs_us": ("mac_sifs_us", float),
    "mac.difs_us": ("mac_difs_us", float),
    "mac.ack_bits": ("mac_ack_bits", int),
    "mac.payload_bits": ("mac_payload_bits", int),
    "mac.bitrate_bps": ("mac_bitrate_bps", float),
    "mac.p_error": ("mac_p_error", float),
    "mac.retry_limit": ("mac_retry_limit", int),
    "mac.cw_standard": ("mac_cw_standard", int),
    "mac.cw_lo": ("mac_cw_lo", int),
    "mac.cw_hi": ("mac_cw_hi", int),
    "topo.n": ("topo_n", int),
    "topo.a": ("topo_a", float),
    "sim.window_us": ("sim_window_us", float),
    "sim.warmup_us": ("sim_warmup_us", float),
    "swarm.m": ("swarm_m", int),
    "swarm.c1": ("swarm_c1", float),
    "swarm.c2": ("swarm_c2", float),
    "swarm.w": ("swarm_w", float),
    "swarm.dcw_max": ("swarm_dcw_max", float),
    "swarm.iter_limit": ("swarm_iter_limit", int),
    "swarm.per_component_r": ("swarm_per_component_r", _to_bool),
    "pipeline.d_avg_factor": ("pipeline_d_avg_factor", float),
    "pipeline.balance_rms_frac": ("pipeline_balance_rms_frac", float),
    "pipeline.replications": ("pipeline_replications", int),
    "seed": ("seed", int),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in KEYS.items()}

PROFILES = ("full", "fast")


def parse_config(text: str, source: str = "<config>") -> Settings:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        attr, convert = KEYS[key]
        try:
            overrides[attr] = convert(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
    return replace(Settings(), **overrides)


def load_config(path: str | Path) -> Settings:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))


def settings_mapping(settings: Settings) -> dict:
    """Settings as the flat key -> value mapping used in config echoes."""
    return {
        _ATTR_TO_KEY[f.name]: getattr(settings, f.name) for f in fields(settings)
    }


def dump_config(settings: Settings) -> str:
    lines = [f"{key} = {value}" for key, value in settings_mapping(settings).items()]
    return "\n".join(lines) + "\n"


def apply_profile(settings: Settings, profile: str) -> Settings:
    """Resolve a named run profile.

    ``full`` keeps the configured measurement window and iteration budget;
    ``fast`` shrinks them for CI-scale runs (0.5 s window, 0.2 s warmup,
    60 iterations).
    """
    if profile == "full":
        return settings
    if profile == "fast":
        return replace(
            settings,
            sim_window_us=500_000.0,
            sim_warmup_us=200_000.0,
            swarm_iter_limit=min(settings.swarm_iter_limit, 60),
        )
    raise ConfigError(f"unknown profile {profile!r} (expected one of {PROFILES})")
