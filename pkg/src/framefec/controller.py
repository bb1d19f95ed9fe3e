"""Parameter tuner: per-frame FEC sizing, redundancy rate and ladder level selection."""
import math
from dataclasses import dataclass, field
from typing import Optional

FEC_MODES = ("cut_dd", "uniform", "gop_level")

DEFAULT_LADDER_LEVELS = (
    ("144p", 0.2),
    ("288p", 0.6),
    ("270p", 1.0),
    ("376p", 1.2),
    ("360p", 1.8),
    ("540p", 2.0),
    ("480p", 3.0),
    ("720p", 4.5),
    ("1080p", 6.5),
)


@dataclass(frozen=True)
class RateLadder:
    levels: tuple = DEFAULT_LADDER_LEVELS

    def __post_init__(self):
        rates = [r for _, r in self.levels]
        if not rates:
            raise ValueError("ladder needs at least one level")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError("ladder bitrates must be strictly ascending")

    @classmethod
    def from_rates(cls, rates):
        return cls(tuple((f"L{i}", float(r)) for i, r in enumerate(rates)))

    @property
    def rates(self):
        return [r for _, r in self.levels]

    def __len__(self):
        return len(self.levels)

    def index_of(self, rate):
        return self.rates.index(rate)


@dataclass(frozen=True)
class ControllerConfig:
    gop_len: int = 10
    fps: float = 30.0
    packet_payload: int = 1500
    omega: float = 0.10
    td: float = 0.130
    report_interval: float = 1.0
    fec_mode: str = "cut_dd"
    min_redundancy_when_lossy: bool = True
    adaptive_omega: bool = False

    def __post_init__(self):
        if not 0 < self.omega < 0.4:
            raise ValueError(f"omega must be in (0, 0.4), got {self.omega}")
        if self.gop_len < 1:
            raise ValueError("gop_len must be >= 1")
        if not self.td > 0:
            raise ValueError("td must be > 0")
        if self.packet_payload < 64:
            raise ValueError("packet_payload must be >= 64")
        if self.fps <= 0 or self.report_interval <= 0:
            raise ValueError("fps and report_interval must be > 0")
        if self.fec_mode not in FEC_MODES:
            raise ValueError(f"fec_mode must be one of {FEC_MODES}")

    @property
    def beta(self):
        """I-frames (GoPs) per second."""
        return self.fps / self.gop_len


def effective_omega(pi, cfg: ControllerConfig):
    if cfg.adaptive_omega:
        return min(max(5.0 * pi, 0.05), 0.39)
    return cfg.omega


def _ceil(x):
    # guards against 47.99999999 / 48.00000001 style float noise
    return math.ceil(round(x, 9))


def fec_packet_count(k, pi, f, cfg: ControllerConfig, mode=None):
    """Total packets n for a frame of k source packets at GoP position f."""
    mode = mode or cfg.fec_mode
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 <= pi <= 1:
        raise ValueError("pi must be in [0, 1]")
    if mode != "gop_level" and not 0 <= f < cfg.gop_len:
        raise ValueError(f"frame index {f} outside 0..{cfg.gop_len - 1}")
    if pi == 0:
        return k
    floor = k + 1 if cfg.min_redundancy_when_lossy else k
    if mode == "cut_dd":
        w = effective_omega(pi, cfg)
        return max(floor, _ceil(k * (1 + w * (cfg.gop_len - f) * pi)))
    return max(floor, _ceil(k * (1 + pi)))


def redundancy_rate(r, cfg: ControllerConfig):
    """Redundant packets per frame -> Mb/s (1 Mb = 1024*1024 bits here)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return r * cfg.packet_payload * cfg.gop_len * cfg.beta * 8 / (1024 * 1024)


def packets_for(size, cfg: ControllerConfig):
    return max(1, math.ceil(size / cfg.packet_payload))


def cold_start_frame_size(rate, cfg: ControllerConfig):
    """Mean frame size in bytes at `rate` Mb/s."""
    return rate * 1e6 / 8 / cfg.fps


def mean_redundant_packets(frame_size, pi, cfg: ControllerConfig, mode=None):
    """Per-frame redundant packet count averaged over one GoP."""
    mode = mode or cfg.fec_mode
    F = cfg.gop_len
    if mode == "gop_level":
        K = packets_for(F * frame_size, cfg)
        return (fec_packet_count(K, pi, 0, cfg, mode) - K) / F
    k = packets_for(frame_size, cfg)
    return sum(fec_packet_count(k, pi, f, cfg, mode) - k for f in range(F)) / F


def gop_redundancy_rate(frame_size, pi, cfg: ControllerConfig, mode=None):
    return redundancy_rate(mean_redundant_packets(frame_size, pi, cfg, mode), cfg)


def clamp_qd(qd):
    return min(max(qd, 0.0), 1.0)


def select_level(state, last_re, rr, ladder: RateLadder, cfg: ControllerConfig):
    """Ladder index for the next interval.

    Highest level whose rate plus `rr` stays strictly below mu*(1 - Q_d),
    stepped down once when it is not a decrease and measured MTP exceeds T_d.
    """
    rates = ladder.rates
    qd = clamp_qd(state.qd)
    if 1 - qd <= 0:
        return 0
    cap = state.mu * (1 - qd)
    level = len(rates) - 1
    for i, rate in enumerate(rates):
        if rate + rr >= cap:
            level = i - 1
            break
    if level >= 0 and last_re is not None and rates[level] >= last_re and state.mtp > cfg.td:
        level -= 1
    return max(level, 0)


@dataclass(frozen=True)
class RatePlan:
    level: int
    re: float
    rr: float
    pi: float
    cfg: ControllerConfig = field(repr=False)
    timestamp: float = 0.0
    cap: Optional[float] = None  # mu*(1-Q_d) at plan time, None when 1-Q_d <= 0
    fec: bool = True

    def n_for(self, k, f):
        if not self.fec:
            return k
        return fec_packet_count(k, self.pi, f, self.cfg)

    @property
    def total(self):
        return self.re + self.rr

    @property
    def within_cap(self):
        return self.cap is None or self.total <= self.cap


def tune(state, last_plan: Optional[RatePlan], mean_frame_size, ladder: RateLadder, cfg: ControllerConfig, now=0.0):
    """One pass of the heuristic: size the FEC, derive R_r, pick the level."""
    if mean_frame_size is None:
        lvl = last_plan.level if last_plan is not None else len(ladder) - 1
        mean_frame_size = cold_start_frame_size(ladder.rates[lvl], cfg)
    rr = gop_redundancy_rate(mean_frame_size, state.pi, cfg)
    last_re = last_plan.re if last_plan is not None else None
    level = select_level(state, last_re, rr, ladder, cfg)
    qd = clamp_qd(state.qd)
    cap = state.mu * (1 - qd) if 1 - qd > 0 else None
    return RatePlan(level, ladder.rates[level], rr, state.pi, cfg, now, cap)


class ParameterTuner:
    """Stateful wrapper: keeps the latest network state and plan, logs every plan."""

    def __init__(self, ladder: RateLadder, cfg: ControllerConfig, initial_level=0):
        self.ladder = ladder
        self.cfg = cfg
        self.state = None
        self.frame_size = None  # mean frame size of the last complete GoP
        self._size_level = None
        self.plan = RatePlan(initial_level, ladder.rates[initial_level], 0.0, 0.0, cfg)
        self.log = [self.plan]

    def observe_gop(self, level, sizes):
        self.frame_size = sum(sizes) / len(sizes)
        self._size_level = level

    def update(self, state, now):
        self.state = state
        size = self.frame_size if self._size_level == self.plan.level else None
        if size is None:
            size = cold_start_frame_size(self.plan.re, self.cfg)
        self.plan = tune(state, self.plan, size, self.ladder, self.cfg, now)
        self.log.append(self.plan)
        return self.plan


class FixedRateTuner:
    """Baseline: constant level, no redundancy, ignores feedback."""

    def __init__(self, ladder: RateLadder, cfg: ControllerConfig, level=None):
        self.ladder = ladder
        self.cfg = cfg
        level = len(ladder) - 1 if level is None else level
        self.plan = RatePlan(level, ladder.rates[level], 0.0, 0.0, cfg, fec=False)
        self.state = None
        self.log = [self.plan]

    def observe_gop(self, level, sizes):
        pass

    def update(self, state, now):
        self.state = state
        return self.plan
