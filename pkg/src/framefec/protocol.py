"""Wire formats for the media (FRTP), feedback (NPR), probe (RTTP) and input (Event) packets.

Every datagram starts with a 5-byte header: magic 0x4E, version, type, and a
big-endian u16 holding the number of bytes that follow. See docs/PROTOCOL.md
for byte offsets.
"""
import struct
from dataclasses import dataclass
from typing import Union

MAGIC = 0x4E
VERSION = 1

T_FRTP = 0x01
T_NPR = 0x02
T_RTTP_REQUEST = 0x03
T_RTTP_REPLY = 0x04
T_EVENT = 0x05

HEADER = struct.Struct(">BBBH")
FRTP_FIXED = struct.Struct(">IBHHHIIQB")
NPR_BODY = struct.Struct(">IIIIIQ")
RTTP_BODY = struct.Struct(">IQ")
EVENT_BODY = struct.Struct(">IHQ")

HEADER_SIZE = HEADER.size
FRTP_HEADER_SIZE = HEADER.size + FRTP_FIXED.size

_U32 = 0xFFFFFFFF
_MU_SCALE = 1 << 16
_PI_SCALE = 1 << 32


class ProtocolError(ValueError):
    """Decode/encode failure; `kind` is one of bad_magic, bad_version, bad_type,
    truncated, bad_length, bad_field."""

    def __init__(self, kind, msg=""):
        super().__init__(f"{kind}: {msg}" if msg else kind)
        self.kind = kind


@dataclass(frozen=True)
class FrtpPacket:
    frame_id: int
    gop_index: int
    k: int
    n: int
    packet_index: int
    frame_len: int
    event_seq: int  # 0 = no event echoed
    send_ts_us: int
    level: int
    payload: bytes = b""


@dataclass(frozen=True)
class NprPacket:
    """Client report. `mu` (Mb/s) and `pi` are snapped to their 16.16 and 0.32 fixed-point grids."""

    report_seq: int
    mu: float
    pi: float
    rtt_us: int
    mtp_us: int
    client_ts_us: int

    def __post_init__(self):
        if not (0 <= self.pi <= 1) or self.mu != self.mu or self.mu < 0:
            raise ProtocolError("bad_field", f"mu={self.mu} pi={self.pi}")
        object.__setattr__(self, "mu", _mu_fixed(self.mu) / _MU_SCALE)
        object.__setattr__(self, "pi", _pi_fixed(self.pi) / _PI_SCALE)


def _mu_fixed(mu):
    return min(int(round(mu * _MU_SCALE)), _U32)


def _pi_fixed(pi):
    return min(int(round(pi * _PI_SCALE)), _U32)


@dataclass(frozen=True)
class RttpPacket:
    probe_seq: int
    origin_ts_us: int
    reply: bool = False

    def echo(self):
        return RttpPacket(self.probe_seq, self.origin_ts_us, True)


@dataclass(frozen=True)
class EventPacket:
    event_seq: int
    event_id: int
    client_ts_us: int


WirePacket = Union[FrtpPacket, NprPacket, RttpPacket, EventPacket]


def _body(p):
    if isinstance(p, FrtpPacket):
        if p.packet_index >= p.n or not 1 <= p.k <= p.n:
            raise ProtocolError("bad_field", "need packet_index < n and 1 <= k <= n")
        fixed = FRTP_FIXED.pack(
            p.frame_id, p.gop_index, p.k, p.n, p.packet_index,
            p.frame_len, p.event_seq, p.send_ts_us, p.level,
        )
        return T_FRTP, fixed + bytes(p.payload)
    if isinstance(p, NprPacket):
        return T_NPR, NPR_BODY.pack(
            p.report_seq, _mu_fixed(p.mu), _pi_fixed(p.pi), p.rtt_us, p.mtp_us, p.client_ts_us
        )
    if isinstance(p, RttpPacket):
        return (T_RTTP_REPLY if p.reply else T_RTTP_REQUEST), RTTP_BODY.pack(p.probe_seq, p.origin_ts_us)
    if isinstance(p, EventPacket):
        return T_EVENT, EVENT_BODY.pack(p.event_seq, p.event_id, p.client_ts_us)
    raise TypeError(f"not a wire packet: {type(p).__name__}")


def encode_packet(p: WirePacket) -> bytes:
    try:
        ptype, body = _body(p)
    except struct.error as e:
        raise ProtocolError("bad_field", str(e)) from None
    if len(body) > 0xFFFF:
        raise ProtocolError("bad_length", f"body of {len(body)} bytes exceeds 65535")
    return HEADER.pack(MAGIC, VERSION, ptype, len(body)) + body


def _exact(body, st, name):
    if len(body) != st.size:
        raise ProtocolError("bad_length", f"{name} body is {len(body)} bytes, expected {st.size}")
    return st.unpack(body)


def decode_packet(data) -> WirePacket:
    data = bytes(data)
    if len(data) < HEADER_SIZE:
        raise ProtocolError("truncated", f"{len(data)} bytes < header")
    magic, version, ptype, length = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ProtocolError("bad_magic", hex(magic))
    if version != VERSION:
        raise ProtocolError("bad_version", str(version))
    body = data[HEADER_SIZE:]
    if len(body) < length:
        raise ProtocolError("truncated", f"length field {length}, got {len(body)}")
    if len(body) > length:
        raise ProtocolError("bad_length", f"{len(body) - length} trailing bytes")

    if ptype == T_FRTP:
        if len(body) < FRTP_FIXED.size:
            raise ProtocolError("bad_length", "FRTP body shorter than fixed fields")
        fields = FRTP_FIXED.unpack_from(body)
        p = FrtpPacket(*fields, payload=body[FRTP_FIXED.size:])
        if p.packet_index >= p.n or not 1 <= p.k <= p.n:
            raise ProtocolError("bad_field", "need packet_index < n and 1 <= k <= n")
        return p
    if ptype == T_NPR:
        seq, mu, pi, rtt, mtp, ts = _exact(body, NPR_BODY, "NPR")
        return NprPacket(seq, mu / _MU_SCALE, pi / _PI_SCALE, rtt, mtp, ts)
    if ptype in (T_RTTP_REQUEST, T_RTTP_REPLY):
        seq, ts = _exact(body, RTTP_BODY, "RTTP")
        return RttpPacket(seq, ts, ptype == T_RTTP_REPLY)
    if ptype == T_EVENT:
        return EventPacket(*_exact(body, EVENT_BODY, "Event"))
    raise ProtocolError("bad_type", hex(ptype))
