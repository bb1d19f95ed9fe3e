"""Client-side network performance monitor and the RTT prober."""
from collections import deque
from dataclasses import dataclass
from typing import Optional

from ..protocol import RttpPacket

SMOOTH_WINDOW = 5


class Ring:
    """Last `size` samples; `value` is their arithmetic mean."""

    def __init__(self, size=SMOOTH_WINDOW):
        self._buf = deque(maxlen=size)

    def push(self, x):
        self._buf.append(float(x))

    def __len__(self):
        return len(self._buf)

    @property
    def value(self):
        return smooth(self._buf)


def smooth(samples):
    samples = list(samples)[-SMOOTH_WINDOW:]
    if not samples:
        raise ValueError("no samples to smooth")
    return sum(samples) / len(samples)


def measure_throughput(records):
    """Mb/s from per-frame (bytes after the first packet, seconds since first packet).

    Returns None when no frame in the window spans two or more packets.
    """
    nbytes = sum(b for b, t in records if t > 0)
    elapsed = sum(t for _, t in records if t > 0)
    if elapsed <= 0:
        return None
    return nbytes * 8 / elapsed / 1e6


def count_missing(received, upto=None):
    """Gaps in the index sequence up to the highest index seen (or `upto`)."""
    if not received:
        return 0
    top = max(received) if upto is None else upto
    return top + 1 - sum(1 for i in received if i <= top)


def measure_loss(received, k):
    return count_missing(received) / k


def compute_mtp(event_sent_ts, frame_displayed_ts):
    return frame_displayed_ts - event_sent_ts


class NpmState:
    """Windowed raw measurements, folded into 5-sample rings once per report."""

    def __init__(self):
        self.frames = []  # (bytes, seconds) for this window
        self.missing = 0
        self.k_total = 0
        self.mu = Ring()
        self.pi = Ring()
        self.rtt = Ring()
        self.mtp = Ring()
        self.rtt_min = None
        self.stale = True
        self.last_raw = (None, None)

    def add_frame(self, nbytes, elapsed):
        self.frames.append((nbytes, elapsed))

    def add_loss(self, missing, k):
        self.missing += missing
        self.k_total += k

    def add_rtt(self, rtt):
        self.rtt.push(rtt)
        self.rtt_min = rtt if self.rtt_min is None else min(self.rtt_min, rtt)

    def add_mtp(self, mtp):
        self.mtp.push(mtp)

    def close_window(self):
        """Push this window's raw mu and loss; returns them (None where empty)."""
        mu = measure_throughput(self.frames)
        self.stale = mu is None
        if mu is not None:
            self.mu.push(mu)
        pi = self.missing / self.k_total if self.k_total else None
        if pi is not None:
            self.pi.push(pi)
        self.frames, self.missing, self.k_total = [], 0, 0
        self.last_raw = (mu, pi)
        return mu, pi

    @staticmethod
    def _get(ring):
        return ring.value if len(ring) else 0.0

    def smoothed(self):
        """(mu Mb/s, pi, rtt s, mtp s); zeros for quantities with no samples yet."""
        return tuple(self._get(r) for r in (self.mu, self.pi, self.rtt, self.mtp))


class RttProber:
    """Issues one RTTP request per call to `probe`; turns replies into RTT samples."""

    def __init__(self):
        self.seq = 0
        self.outstanding = {}
        self.rtt: Optional[float] = None
        self.rtt_min: Optional[float] = None
        self.samples = []

    def probe(self, now):
        self.seq += 1
        self.outstanding[self.seq] = now
        return RttpPacket(self.seq, int(round(now * 1e6)))

    def on_reply(self, pkt: RttpPacket, now):
        if self.outstanding.pop(pkt.probe_seq, None) is None:
            return None  # duplicate or unknown
        rtt = now - pkt.origin_ts_us / 1e6
        self.rtt = rtt
        self.rtt_min = rtt if self.rtt_min is None else min(self.rtt_min, rtt)
        self.samples.append((now, rtt))
        return rtt

    @property
    def qd(self):
        return 0.0 if self.rtt is None else self.rtt - self.rtt_min


@dataclass(frozen=True)
class StageDelays:
    """Simulated per-stage pipeline charges in seconds."""

    capture: float = 0.0021
    video_encode: float = 0.0208
    fec_encode: float = 0.0008
    fec_decode: float = 0.0011
    video_decode: float = 0.0091
    display: float = 0.0021

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if not v >= 0:
                raise ValueError(f"stage delay {k} must be >= 0, got {v}")

    @property
    def sender(self):
        return self.capture + self.video_encode + self.fec_encode

    @property
    def receiver(self):
        return self.fec_decode + self.video_decode + self.display
