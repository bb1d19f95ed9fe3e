"""Discrete-event experiment runner: encoder -> tuner -> RLNC -> link -> client."""
import math
from dataclasses import dataclass

import numpy as np

from ..controller import FixedRateTuner, ParameterTuner, RateLadder
from ..endpoints import Client, EmulatedPath, Server, SyntheticEncoder
from ..netlab import Link, fixed_link
from ..sim import EventLoop
from .config import ExperimentConfig
from .metrics import frame_rows, second_rows, summarize


@dataclass
class RunResult:
    config: ExperimentConfig
    frames: list
    seconds: list
    summary: dict
    server: Server
    client: Client
    downlink: Link


def make_tuner(cfg: ExperimentConfig, ladder):
    ccfg = cfg.effective_controller
    if cfg.mode == "fixed":
        return FixedRateTuner(ladder, ccfg, cfg.fixed_level)
    return ParameterTuner(ladder, ccfg, cfg.initial_level)


def simulate(cfg: ExperimentConfig, ladder=None):
    """Run one experiment on the virtual clock; returns a `RunResult` (no files written)."""
    ladder = ladder or RateLadder()
    ccfg = cfg.effective_controller
    fps, dt = ccfg.fps, ccfg.report_interval
    session_seed = cfg.seed

    loop = EventLoop()
    link_cfg = cfg.link.build(cfg.seed)
    downlink = Link(link_cfg)
    uplink = Link(fixed_link(math.inf, cfg.link.one_way_delay, 0.0))

    tuner = make_tuner(cfg, ladder)
    encoder = SyntheticEncoder(fps=fps, gop_len=ccfg.gop_len, seed=cfg.seed)
    paths = {}
    server = Server(tuner, encoder, ccfg, lambda d, at: paths["down"].send(d, at), cfg.delays,
                    session_seed, cfg.block_mode, cfg.pacing, cfg.gop_pacing_gain)
    client = Client(lambda d, at: paths["up"].send(d, at), ccfg.packet_payload, session_seed,
                    cfg.delays, cfg.deadline, cfg.block_mode, fps)
    paths["down"] = EmulatedPath(loop, downlink, client.on_datagram)
    paths["up"] = EmulatedPath(loop, uplink, server.on_datagram)

    n_frames = int(round(cfg.duration * fps))
    for i in range(n_frames):
        loop.at(i / fps, server.capture, i, i / fps)
    loop.every(dt, client.report)
    loop.every(dt, server.retune, start=dt)
    loop.every(dt, server.probe, start=0.25 * dt)
    loop.every(dt, client.probe, start=0.75 * dt)
    phase = np.random.default_rng([cfg.seed, 0xE7]).uniform(0, 1 / cfg.event_rate)
    ev_times = np.arange(phase, cfg.duration, 1 / cfg.event_rate)
    for t in ev_times:
        loop.at(float(t), client.input_event, float(t))

    end = cfg.duration + cfg.drain
    loop.run(end)
    client.expire(math.inf)

    frames = frame_rows(cfg, server, client, link_cfg, ladder)
    seconds = second_rows(cfg, frames)
    summary = summarize(cfg, frames, server, client, downlink, tuner)
    return RunResult(cfg, frames, seconds, summary, server, client, downlink)
