"""Synthetic stand-in for a rate-controlled video encoder.

Frame sizes follow a fixed I:P ratio inside each GoP with seeded +/-10%
jitter. Jitter weights are renormalised per GoP, so a GoP encoded at one
bitrate totals exactly its byte budget (up to integer rounding).
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class SyntheticEncoder:
    fps: float = 30.0
    gop_len: int = 10
    i_frame_ratio: float = 4.0
    jitter: float = 0.10
    seed: int = 0

    def gop_budget(self, bitrate):
        """Bytes per GoP at `bitrate` Mb/s."""
        return bitrate * 1e6 / 8 * self.gop_len / self.fps

    def nominal_sizes(self, bitrate):
        """(I-frame bytes, P-frame bytes) before jitter."""
        p = self.gop_budget(bitrate) / (self.i_frame_ratio + self.gop_len - 1)
        return self.i_frame_ratio * p, p

    def _weights(self, gop):
        return _gop_weights(self.seed, gop, self.gop_len, self.i_frame_ratio, self.jitter)

    def frame_size(self, frame_index, bitrate):
        gop, f = divmod(frame_index, self.gop_len)
        return max(1, int(round(self._weights(gop)[f] * self.gop_budget(bitrate))))

    def next_frame(self, frame_index, bitrate):
        """(frame bytes, is_iframe, size) for the frame at `frame_index`."""
        size = self.frame_size(frame_index, bitrate)
        return frame_payload(self.seed, frame_index, size), frame_index % self.gop_len == 0, size


@lru_cache(maxsize=64)
def _gop_weights(seed, gop, gop_len, ratio, jitter):
    rng = np.random.default_rng([seed, gop])
    share = np.ones(gop_len)
    share[0] = ratio
    w = share * rng.uniform(1 - jitter, 1 + jitter, gop_len)
    return tuple(w / w.sum())


def frame_payload(seed, frame_index, size):
    """Deterministic stand-in bitstream for one frame."""
    return np.random.default_rng([seed, frame_index, 0xF]).bytes(size)
