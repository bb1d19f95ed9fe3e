"""Experiment configuration: nested frozen dataclasses, built from YAML/JSON with field-path errors."""
import dataclasses
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import yaml

from ..controller import ControllerConfig
from ..endpoints import DEFAULT_DEADLINE, StageDelays
from ..models import DistortionParams, MtpParams
from ..netlab import CANONICAL_SEED, LinkConfig, fixed_link, canonical_trace, read_trace, GilbertParams

MODES = ("frame_fec", "gop_fec", "fixed")
OUTPUT_ROOT_ENV = "FRAMEFEC_OUTPUT_ROOT"
CANONICAL = "canonical"


class ConfigError(ValueError):
    def __init__(self, path, msg):
        super().__init__(f"{path or '<root>'}: {msg}")
        self.path = path


@dataclass(frozen=True)
class LinkSpec:
    trace: str = CANONICAL  # "canonical" or a CSV path (time_s, bandwidth_mbps)
    fixed_bandwidth: Optional[float] = None  # Mb/s, overrides the trace
    loss: float = 0.01
    p_bb: float = 0.25
    one_way_delay: float = 0.010
    queue_capacity: int = 150_000

    def __post_init__(self):
        if not 0 <= self.loss < 1:
            raise ValueError("loss must be in [0, 1)")
        if not 0 <= self.p_bb <= 1:
            raise ValueError("p_bb must be in [0, 1]")
        if self.fixed_bandwidth is not None and not self.fixed_bandwidth > 0:
            raise ValueError("fixed_bandwidth must be > 0")
        if self.fixed_bandwidth is None and self.trace != CANONICAL and not Path(self.trace).is_file():
            raise ValueError(f"trace file {self.trace!r} does not exist")

    def schedule(self):
        if self.fixed_bandwidth is not None:
            return ((0.0, float(self.fixed_bandwidth)),)
        if self.trace == CANONICAL:
            return canonical_trace(CANONICAL_SEED).bandwidth_schedule
        return read_trace(self.trace)

    def build(self, seed):
        if self.fixed_bandwidth is not None:
            return fixed_link(self.fixed_bandwidth, self.one_way_delay, self.loss, self.p_bb,
                              self.queue_capacity, seed)
        return LinkConfig(self.schedule(), self.one_way_delay, GilbertParams.for_loss(self.loss, self.p_bb),
                          self.queue_capacity, seed)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = "frame_fec"
    duration: float = 60.0
    seed: int = 0
    link: LinkSpec = field(default_factory=LinkSpec)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    distortion: DistortionParams = field(default_factory=DistortionParams)
    mtp: MtpParams = field(default_factory=MtpParams)
    delays: StageDelays = field(default_factory=StageDelays)
    deadline: float = DEFAULT_DEADLINE
    event_rate: float = 2.0  # Hz
    initial_level: int = 0
    fixed_level: Optional[int] = None  # fixed mode; None = top of the ladder
    pacing: float = 0.0  # fraction of the frame interval used to spread a frame
    gop_pacing_gain: float = 1.25
    drain: float = 1.0  # seconds simulated past `duration` so in-flight frames land
    output: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not self.duration > 0:
            raise ValueError("duration must be > 0")
        if not self.deadline > 0 or not self.event_rate > 0:
            raise ValueError("deadline and event_rate must be > 0")
        if self.mode == "frame_fec" and self.controller.fec_mode == "gop_level":
            raise ValueError("frame_fec mode needs a per-frame fec_mode (cut_dd or uniform)")

    @property
    def effective_controller(self):
        if self.mode == "gop_fec":
            return replace(self.controller, fec_mode="gop_level")
        return self.controller

    @property
    def block_mode(self):
        return "gop" if self.mode == "gop_fec" else "frame"

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def to_dict(self):
        return dataclasses.asdict(self)


def _build(cls, data, path):
    if isinstance(data, cls):
        return data
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected a mapping for {cls.__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, val in data.items():
        sub = f"{path}.{key}" if path else key
        if key not in known:
            raise ConfigError(sub, "unknown field")
        ftype = _NESTED.get((cls, key))
        kwargs[key] = _build(ftype, val, sub) if ftype else val
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as e:
        bad = [k for k in kwargs if k in str(e)]
        where = f"{path}.{bad[0]}" if path and bad else (bad[0] if bad else path)
        raise ConfigError(where, str(e)) from None


_NESTED = {
    (ExperimentConfig, "link"): LinkSpec,
    (ExperimentConfig, "controller"): ControllerConfig,
    (ExperimentConfig, "distortion"): DistortionParams,
    (ExperimentConfig, "mtp"): MtpParams,
    (ExperimentConfig, "delays"): StageDelays,
}


def set_path(d, dotted, value):
    """Apply one `a.b.c=value` override to a nested dict."""
    keys = dotted.split(".")
    cur = d
    for k in keys[:-1]:
        cur = cur.setdefault(k, {})
        if not isinstance(cur, dict):
            raise ConfigError(dotted, "cannot set a field below a scalar")
    cur[keys[-1]] = value


def parse_override(text):
    if "=" not in text:
        raise ConfigError(text, "override must look like field.path=value")
    key, raw = text.split("=", 1)
    return key.strip(), yaml.safe_load(raw)


def config_from_dict(data, overrides=()):
    data = json.loads(json.dumps(data or {}))  # deep copy, plain types
    for item in overrides:
        set_path(data, *parse_override(item))
    return _build(ExperimentConfig, data, "")


def load_config(path=None, overrides=()):
    data = {}
    if path is not None:
        text = Path(path).read_text()
        data = yaml.safe_load(text) or {}
    return config_from_dict(data, overrides)


def output_root():
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))
