"""Frame <-> FEC block <-> FRTP packet mapping shared by server and client."""
import struct

from ..protocol import FrtpPacket
from ..rlnc import CodedPacket, FecBlockSpec, coefficient_vector

_COUNT = struct.Struct(">H")
_ENTRY = struct.Struct(">II")  # frame length, echoed event_seq


def pack_gop_block(frames):
    """[(frame bytes, event_seq), ...] -> one block with a small length/event table in front."""
    head = _COUNT.pack(len(frames)) + b"".join(_ENTRY.pack(len(b), e) for b, e in frames)
    return head + b"".join(b for b, _ in frames)


def unpack_gop_block(data):
    (count,) = _COUNT.unpack_from(data)
    entries = [_ENTRY.unpack_from(data, _COUNT.size + i * _ENTRY.size) for i in range(count)]
    off = _COUNT.size + count * _ENTRY.size
    out = []
    for length, ev in entries:
        out.append((data[off: off + length], ev))
        off += length
    return out


def to_wire(pkt: CodedPacket, spec: FecBlockSpec, block_len, **fields):
    """FRTP packet for one coded symbol; the last systematic symbol is cut to the real length."""
    payload = pkt.payload
    if pkt.index == spec.k - 1:
        payload = payload[: block_len - pkt.index * spec.symbol_size]
    return FrtpPacket(
        frame_id=spec.block_id, k=spec.k, n=spec.n, packet_index=pkt.index,
        frame_len=block_len, payload=payload, **fields,
    )


def from_wire(frtp: FrtpPacket, symbol_size, session_seed):
    """Inverse of `to_wire`: re-pads the payload and regenerates coefficients."""
    payload = bytes(frtp.payload)
    if len(payload) < symbol_size:
        payload += bytes(symbol_size - len(payload))
    coefs = None
    if frtp.packet_index >= frtp.k:
        coefs = coefficient_vector(session_seed, frtp.frame_id, frtp.packet_index, frtp.k)
    return CodedPacket(frtp.frame_id, frtp.packet_index, payload, coefs)
