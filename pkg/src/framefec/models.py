"""Distortion, quality and motion-to-photon models, plus the exhaustive joint optimizer.

Unit conventions: the encoder-distortion term works in kb/s; the MTP model
and the throughput constraint work in Mb/s. `solve_joint_grid` converts.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .controller import cold_start_frame_size, gop_redundancy_rate


@dataclass(frozen=True)
class DistortionParams:
    theta1: float = 20000.0  # kb/s * MSE
    R0: float = 100.0  # kb/s
    theta2: float = 500.0
    theta3: float = 4500.0
    max_pixel: float = 255.0

    def __post_init__(self):
        if not self.theta1 > 0:
            raise ValueError("theta1 must be > 0")
        if self.theta2 < 0 or self.theta3 < 0 or self.R0 < 0:
            raise ValueError("theta2, theta3 and R0 must be >= 0")
        if not self.max_pixel > 0:
            raise ValueError("max_pixel must be > 0")


@dataclass(frozen=True)
class MtpParams:
    # frozen output of harness.calibrate.fit_mtp(mtp_sweep()); seconds, Mb/s
    alpha1: float = 0.1498
    alpha2: float = -0.03714  # bigger frames serialize longer, so MTP grows with R
    alpha3: float = 1.232
    alpha4: float = 0.07637
    phi: float = 100.0

    def __post_init__(self):
        vals = (self.alpha1, self.alpha2, self.alpha3, self.alpha4, self.phi)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("MTP coefficients must be finite")
        if self.alpha4 < 0:
            raise ValueError("alpha4 must be >= 0")


@dataclass(frozen=True)
class NetworkState:
    """Smoothed client-side measurements. Rates in Mb/s, times in seconds."""

    mu: float
    pi: float
    rtt: float
    rtt_min: float
    mtp: float = 0.0

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        if not 0 <= self.pi <= 1:
            raise ValueError("pi must be in [0, 1]")
        if not self.rtt >= self.rtt_min >= 0:
            raise ValueError("need rtt >= rtt_min >= 0")

    @property
    def qd(self):
        return self.rtt - self.rtt_min


class Distortion(NamedTuple):
    encoder: float
    channel: float
    decoder: float

    @property
    def total(self):
        return self.encoder + self.channel + self.decoder


def distortion_components(re, pi, beta, p: DistortionParams):
    if re <= p.R0:
        raise ValueError(f"source rate {re} kb/s must exceed R0={p.R0}")
    if beta <= 0:
        raise ValueError("beta must be > 0")
    return Distortion(p.theta1 / (re - p.R0), p.theta2 * pi, p.theta3 * pi / beta)


def end_to_end_distortion(re, pi, beta, p: DistortionParams):
    """Encoder + channel + decoder-propagation distortion (MSE); `re` in kb/s."""
    return distortion_components(re, pi, beta, p).total


def model_psnr(d, p: DistortionParams = DistortionParams()):
    if d <= 0:
        raise ValueError("distortion must be > 0")
    return 20 * math.log10(p.max_pixel) - 10 * math.log10(d)


def frame_loss_probability(pi, re, packet_size=1500, fps=30):
    """Probability a frame loses at least one packet, with `re` in kb/s.

    A frame at `re` spans re*1000/(8*S*fps) packets on average (fractional
    packet counts are kept so the curve is smooth in the rate).
    """
    packets = re * 1000.0 / (8.0 * packet_size * fps)
    return 1.0 - (1.0 - pi) ** packets


def loss_aware_distortion(re, pi, beta, p: DistortionParams, packet_size=1500, fps=30):
    """Distortion with the packet loss rate mapped to a per-frame loss rate.

    Larger frames span more packets and so are hit more often; this is what
    makes the end-to-end distortion turn upward at high source rates.
    """
    return end_to_end_distortion(re, frame_loss_probability(pi, re, packet_size, fps), beta, p)


def mtp_estimate(mu, r_total, qd, p: MtpParams):
    """Linear MTP model in seconds; `mu` and `r_total` in Mb/s, `qd` in seconds."""
    if mu <= 0 or r_total <= 0:
        raise ValueError("mu and r_total must be > 0")
    return p.alpha1 / mu + p.alpha2 / r_total + p.alpha3 * qd + p.alpha4


class GridSolution(NamedTuple):
    level: int
    re: float
    rr: float
    objective: float
    distortion: float
    mtp: float


def redundancy_choices(level_rate, pi, cfg):
    """Candidate redundancy rates (Mb/s) at one ladder level, one per FEC sizing rule."""
    if pi == 0:
        return [0.0]
    size = cold_start_frame_size(level_rate, cfg)
    return sorted({gop_redundancy_rate(size, pi, cfg, mode) for mode in ("cut_dd", "uniform")})


def objective(re, rr, state: NetworkState, dp, mp, cfg):
    d = end_to_end_distortion(re * 1000.0, state.pi, cfg.beta, dp)
    m = mtp_estimate(state.mu, re + rr, state.qd, mp)
    return d + mp.phi * m, d, m


def solve_joint_grid(state: NetworkState, ladder, dp: DistortionParams, mp: MtpParams, cfg) -> Optional[GridSolution]:
    """Exhaustive minimiser of D + phi*MTP over ladder x redundancy choices.

    Returns None when no point satisfies both MTP <= T_d and R_e + R_r <= mu.
    Ties go to the lower source rate, then the lower redundancy rate.
    """
    if not len(ladder):
        raise ValueError("empty ladder")
    best = None
    for level, re in enumerate(ladder.rates):
        if re * 1000.0 <= dp.R0 or state.mu <= 0:
            continue
        for rr in redundancy_choices(re, state.pi, cfg):
            if re + rr > state.mu:
                continue
            obj, d, m = objective(re, rr, state, dp, mp, cfg)
            if m > cfg.td:
                continue
            if best is None or obj < best.objective:
                best = GridSolution(level, re, rr, obj, d, m)
    return best
