"""Deterministic in-process link emulator.

A `Link` is a FIFO bottleneck with a piecewise-constant bandwidth schedule,
a byte-limited tail-drop queue, fixed propagation delay and Gilbert burst
loss applied as packets leave the queue. Transit is resolved at enqueue
time, which is exact for FIFO service and keeps the event loop small.
"""
import bisect
import csv
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CANONICAL_SEED = 8
TRACE_PERIOD = 5.0
TRACE_SEGMENTS = 12


@dataclass(frozen=True)
class GilbertParams:
    p_gb: float = 0.0075 / 0.99
    p_bb: float = 0.25

    def __post_init__(self):
        for v in (self.p_gb, self.p_bb):
            if not 0 <= v <= 1:
                raise ValueError("Gilbert probabilities must lie in [0, 1]")

    @classmethod
    def for_loss(cls, loss, p_bb=0.25):
        """Chain with stationary loss `loss` and burst persistence `p_bb`."""
        if loss <= 0:
            return cls(0.0, p_bb)
        return cls(loss * (1 - p_bb) / (1 - loss), p_bb)

    @property
    def stationary_loss(self):
        den = self.p_gb + 1 - self.p_bb
        return self.p_gb / den if den > 0 else 1.0


def gilbert_step(bad, u, params: GilbertParams):
    """Advance the chain with uniform draw `u`; returns (new_state, lost)."""
    bad = u < (params.p_bb if bad else params.p_gb)
    return bad, bad


def gilbert_losses(n, params: GilbertParams, rng):
    out = np.empty(n, dtype=bool)
    bad = False
    for i, u in enumerate(rng.random(n)):
        bad, out[i] = gilbert_step(bad, u, params)
    return out


@dataclass(frozen=True)
class LinkConfig:
    bandwidth_schedule: tuple = ((0.0, 10.0),)  # (start s, Mb/s)
    one_way_delay: float = 0.010
    loss: GilbertParams = field(default_factory=GilbertParams)
    queue_capacity: int = 150_000  # bytes
    seed: int = 0

    def __post_init__(self):
        times = [t for t, _ in self.bandwidth_schedule]
        if not times:
            raise ValueError("bandwidth schedule is empty")
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("bandwidth schedule times must be ascending")
        if any(bw < 0 for _, bw in self.bandwidth_schedule):
            raise ValueError("bandwidth must be >= 0")
        if self.one_way_delay < 0:
            raise ValueError("one_way_delay must be >= 0")
        if self.queue_capacity <= 0:
            raise ValueError("queue_capacity must be > 0")

    def bandwidth_at(self, t):
        i = bisect.bisect_right([s for s, _ in self.bandwidth_schedule], t) - 1
        return self.bandwidth_schedule[max(i, 0)][1]


@dataclass
class LinkStats:
    offered: int = 0
    delivered: int = 0
    lost: int = 0
    overflow: int = 0
    offered_bytes: int = 0
    delivered_bytes: int = 0


class Link:
    def __init__(self, cfg: LinkConfig, log=False):
        self.cfg = cfg
        self._starts = [t for t, _ in cfg.bandwidth_schedule]
        self._rates = [bw * 1e6 for _, bw in cfg.bandwidth_schedule]
        self._rng = np.random.default_rng(cfg.seed)
        self._uniforms = np.empty(0)
        self._ui = 0
        self._bad = False
        self._busy_until = 0.0
        self._queue = deque()  # (finish_time, nbytes)
        self._queued = 0
        self.stats = LinkStats()
        self.log = [] if log else None

    def _draw(self):
        if self._ui >= len(self._uniforms):
            self._uniforms = self._rng.random(4096)
            self._ui = 0
        u = self._uniforms[self._ui]
        self._ui += 1
        return u

    def finish_time(self, start, nbytes):
        """Time at which `nbytes` started at `start` are fully serialized."""
        bits = nbytes * 8.0
        i = max(bisect.bisect_right(self._starts, start) - 1, 0)
        t = start
        while True:
            rate = self._rates[i]
            end = self._starts[i + 1] if i + 1 < len(self._starts) else math.inf
            if math.isinf(rate):
                return t
            if rate > 0:
                need = bits / rate
                if t + need <= end:
                    return t + need
                bits -= rate * (end - t)
            if math.isinf(end):
                return math.inf
            t = end
            i += 1

    def queued_bytes(self, t):
        while self._queue and self._queue[0][0] <= t:
            self._queued -= self._queue.popleft()[1]
        return self._queued

    def transit(self, nbytes, t):
        """Offer a packet at time t; returns its delivery time, or None if dropped."""
        st = self.stats
        st.offered += 1
        st.offered_bytes += nbytes
        if self.queued_bytes(t) + nbytes > self.cfg.queue_capacity:
            st.overflow += 1
            self._record(t, nbytes, "overflow", None)
            return None
        start = max(t, self._busy_until)
        done = self.finish_time(start, nbytes)
        self._busy_until = done
        self._queue.append((done, nbytes))
        self._queued += nbytes
        self._bad, lost = gilbert_step(self._bad, self._draw(), self.cfg.loss)
        if lost:
            st.lost += 1
            self._record(t, nbytes, "lost", None)
            return None
        st.delivered += 1
        st.delivered_bytes += nbytes
        arrival = done + self.cfg.one_way_delay
        self._record(t, nbytes, "delivered", arrival)
        return arrival

    def _record(self, t, nbytes, outcome, arrival):
        if self.log is not None:
            self.log.append((t, nbytes, outcome, arrival))

    def write_log(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["offer_time_s", "bytes", "outcome", "delivery_time_s"])
            for t, nb, outcome, arr in self.log or ():
                w.writerow([repr(t), nb, outcome, "" if arr is None else repr(arr)])


def canonical_trace(seed=CANONICAL_SEED, duration=TRACE_PERIOD * TRACE_SEGMENTS, loss=0.01, p_bb=0.25,
                    one_way_delay=0.010, queue_capacity=150_000, link_seed=None):
    """Variable-bandwidth scenario: 2..10 Mb/s redrawn every 5 s, 20 ms RTT, 1% bursty loss."""
    n = int(math.ceil(duration / TRACE_PERIOD))
    bws = np.random.default_rng(seed).integers(2, 11, size=n)
    schedule = tuple((i * TRACE_PERIOD, float(b)) for i, b in enumerate(bws))
    return LinkConfig(
        bandwidth_schedule=schedule,
        one_way_delay=one_way_delay,
        loss=GilbertParams.for_loss(loss, p_bb),
        queue_capacity=queue_capacity,
        seed=seed if link_seed is None else link_seed,
    )


def fixed_link(mbps, one_way_delay=0.010, loss=0.0, p_bb=0.25, queue_capacity=150_000, seed=0):
    return LinkConfig(((0.0, float(mbps)),), one_way_delay, GilbertParams.for_loss(loss, p_bb), queue_capacity, seed)


def write_trace(path, schedule):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time_s", "bandwidth_mbps"])
        for t, bw in schedule:
            w.writerow([repr(float(t)), repr(float(bw))])


def read_trace(path):
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty trace")
    return tuple((float(r["time_s"]), float(r["bandwidth_mbps"])) for r in rows)
