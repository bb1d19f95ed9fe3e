"""Systematic random linear network coding over GF(2^8), one block per frame.

The first ``k`` packets of a block are the source symbols verbatim; the
remaining ``n - k`` are random linear combinations. Coefficient vectors are
derived from ``(seed, block_id, index)`` with SplitMix64, so a receiver that
knows the session seed can rebuild them without carrying them on the wire.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gf256

MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 (Steele, Lea & Flood 2014): 64-bit state, golden-ratio increment."""

    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_bytes(self, n):
        out = bytearray()
        while len(out) < n:
            out += self.next_u64().to_bytes(8, "little")
        return bytes(out[:n])


def _stream_seed(seed, block_id, index):
    g = SplitMix64(seed)
    s = g.next_u64() ^ ((block_id & 0xFFFFFFFF) << 16) ^ (index & 0xFFFF)
    return SplitMix64(s).next_u64()


def coefficient_vector(seed, block_id, index, k):
    """Nonzero GF(256) coefficient vector of length k for coded packet `index`."""
    rng = SplitMix64(_stream_seed(seed, block_id, index))
    while True:
        v = rng.next_bytes(k)
        if any(v):
            return v


class FecError(ValueError):
    pass


class FrameTooLargeError(FecError):
    pass


class BlockMismatchError(FecError):
    pass


class InsufficientRankError(FecError):
    def __init__(self, rank, k):
        super().__init__(f"rank {rank} < k={k}, block not recoverable")
        self.rank = rank
        self.k = k


@dataclass(frozen=True)
class FecBlockSpec:
    block_id: int
    k: int
    n: int
    symbol_size: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.n < self.k:
            raise ValueError(f"n={self.n} < k={self.k}")
        if self.n - self.k > 255:
            raise ValueError(f"n - k = {self.n - self.k} exceeds 255")
        if self.symbol_size < 1:
            raise ValueError("symbol_size must be >= 1")
        if not 0 <= self.block_id <= 0xFFFFFFFF:
            raise ValueError("block_id must fit in 32 bits")

    @property
    def r(self):
        return self.n - self.k


@dataclass(frozen=True)
class CodedPacket:
    block_id: int
    index: int
    payload: bytes
    coefficients: Optional[bytes] = None  # None for systematic packets

    @property
    def systematic(self):
        return self.coefficients is None


def rlnc_encode(frame_bytes, spec: FecBlockSpec, rng_seed):
    """Encode one frame into ``spec.n`` packets (``k`` systematic then ``n-k`` coded)."""
    k, S = spec.k, spec.symbol_size
    if len(frame_bytes) > k * S:
        raise FrameTooLargeError(f"{len(frame_bytes)} bytes do not fit k*S = {k * S}")
    padded = np.zeros(k * S, dtype=np.uint8)
    padded[: len(frame_bytes)] = np.frombuffer(bytes(frame_bytes), dtype=np.uint8)
    source = padded.reshape(k, S)
    packets = [CodedPacket(spec.block_id, i, source[i].tobytes()) for i in range(k)]
    if spec.n > k:
        coefs = [coefficient_vector(rng_seed, spec.block_id, i, k) for i in range(k, spec.n)]
        cmat = np.frombuffer(b"".join(coefs), dtype=np.uint8).reshape(-1, k)
        coded = gf256.matmul(cmat, source)
        for j, i in enumerate(range(k, spec.n)):
            packets.append(CodedPacket(spec.block_id, i, coded[j].tobytes(), coefs[j]))
    return packets


class DecoderState:
    """Progressive Gaussian-elimination decoder for one block.

    Absorbed rows are kept in fully reduced row-echelon form, so once the
    rank reaches ``k`` the payload rows are the source symbols in pivot order.
    """

    def __init__(self, spec: FecBlockSpec):
        self.spec = spec
        self._coef = np.zeros((spec.k, spec.k), dtype=np.uint8)
        self._data = np.zeros((spec.k, spec.symbol_size), dtype=np.uint8)
        self._pivots = []

    @property
    def rank(self):
        return len(self._pivots)

    @property
    def complete(self):
        return self.rank == self.spec.k

    def absorb(self, pkt: CodedPacket):
        """Fold a packet into the basis; returns True iff it raised the rank."""
        k, S = self.spec.k, self.spec.symbol_size
        if pkt.block_id != self.spec.block_id:
            raise BlockMismatchError(f"packet block {pkt.block_id} != {self.spec.block_id}")
        if len(pkt.payload) != S:
            raise FecError(f"payload length {len(pkt.payload)} != symbol size {S}")
        if pkt.coefficients is None:
            if not 0 <= pkt.index < k:
                raise FecError(f"systematic index {pkt.index} outside 0..{k - 1}")
            v = np.zeros(k, dtype=np.uint8)
            v[pkt.index] = 1
        else:
            if len(pkt.coefficients) != k:
                raise FecError(f"coefficient length {len(pkt.coefficients)} != k={k}")
            v = np.frombuffer(pkt.coefficients, dtype=np.uint8).copy()
        if self.complete:
            return False
        p = np.frombuffer(pkt.payload, dtype=np.uint8).copy()

        r = self.rank
        if r:
            f = v[self._pivots]
            nz = f != 0
            if nz.any():
                v ^= gf256.combine(f[nz], self._coef[:r][nz])
                p ^= gf256.combine(f[nz], self._data[:r][nz])
        nzc = np.flatnonzero(v)
        if nzc.size == 0:
            return False
        c = int(nzc[0])
        s = gf256.INV[v[c]]
        v = gf256.MUL[s][v]
        p = gf256.MUL[s][p]
        if r:
            col = self._coef[:r, c].copy()
            nz = col != 0
            if nz.any():
                self._coef[:r][nz] ^= gf256.MUL[col[nz][:, None], v[None, :]]
                self._data[:r][nz] ^= gf256.MUL[col[nz][:, None], p[None, :]]
        self._coef[r] = v
        self._data[r] = p
        self._pivots.append(c)
        return True

    def recover(self):
        """Return the k*S padded source bytes; raises InsufficientRankError below rank k."""
        if not self.complete:
            raise InsufficientRankError(self.rank, self.spec.k)
        out = np.empty_like(self._data)
        out[self._pivots] = self._data
        return out.tobytes()


def rlnc_absorb(state: DecoderState, pkt: CodedPacket):
    state.absorb(pkt)
    return state


def rlnc_recover(state: DecoderState):
    return state.recover()
