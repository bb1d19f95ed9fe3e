"""Receiver pipeline: FRTP -> RLNC decode -> display accounting, NPR/RTTP/Event generation."""
import zlib
from dataclasses import dataclass, field
from typing import Optional

from ..protocol import (
    EventPacket, FrtpPacket, NprPacket, ProtocolError, RttpPacket, decode_packet, encode_packet,
)
from ..rlnc import DecoderState, FecBlockSpec
from .framing import from_wire, unpack_gop_block
from .monitor import NpmState, RttProber, StageDelays, compute_mtp, count_missing

DEFAULT_DEADLINE = 0.330


@dataclass
class FrameAssembly:
    """Decoder state for one FEC block (a frame, or a whole GoP in gop mode)."""

    decoder: DecoderState
    first_arrival: float
    deadline: float
    frame_len: int
    received: set = field(default_factory=set)
    bytes_after_first: int = 0
    recovered_at: Optional[float] = None
    missing_at_recovery: int = 0
    event_seq: int = 0

    def absorb(self, index, coded, wire_len, now):
        if index in self.received:
            return False
        if self.received:
            self.bytes_after_first += wire_len
        self.received.add(index)
        self.decoder.absorb(coded)
        if self.decoder.complete and self.recovered_at is None:
            self.recovered_at = now
            self.missing_at_recovery = count_missing(self.received)
        return self.recovered_at is not None

    def gaps(self):
        return count_missing(self.received)


class Client:
    """Transport-agnostic receiver; `send(data, at)` goes to the uplink."""

    def __init__(self, send, symbol_size=1500, session_seed=0, delays=StageDelays(),
                 deadline=DEFAULT_DEADLINE, block_mode="frame", fps=30.0):
        self.send = send
        self.S = symbol_size
        self.seed = session_seed
        self.delays = delays
        self.deadline = deadline
        self.block_mode = block_mode
        self.fps = fps
        self.npm = NpmState()
        self.prober = RttProber()
        self.assemblies = {}
        self.done_blocks = set()
        self.last_displayed = -1
        self.decoder_free = 0.0
        self.events = {}  # event_seq -> client send time
        self.event_seq = 0
        self.report_seq = 0
        self.malformed = 0
        self.display_log = []
        self.npr_log = []
        self.mtp_samples = []

    # media path

    def on_datagram(self, data, now):
        self.expire(now)
        try:
            pkt = decode_packet(data)
        except ProtocolError:
            self.malformed += 1
            return
        if isinstance(pkt, FrtpPacket):
            self._on_frtp(pkt, len(data), now)
        elif isinstance(pkt, RttpPacket):
            if pkt.reply:
                rtt = self.prober.on_reply(pkt, now)
                if rtt is not None:
                    self.npm.add_rtt(rtt)
            else:
                self.send(encode_packet(pkt.echo()), now)

    def _block_deadline(self, now, pkt):
        extra = pkt.gop_index / self.fps if self.block_mode == "gop" else 0.0
        return now + self.deadline + extra

    def _on_frtp(self, pkt, wire_len, now):
        bid = pkt.frame_id
        if bid in self.done_blocks:
            return
        asm = self.assemblies.get(bid)
        if asm is None:
            try:
                spec = FecBlockSpec(bid, pkt.k, pkt.n, self.S)
            except ValueError:
                self.malformed += 1
                return
            asm = FrameAssembly(DecoderState(spec), now, self._block_deadline(now, pkt), pkt.frame_len)
            self.assemblies[bid] = asm
        spec = asm.decoder.spec
        asm.event_seq = asm.event_seq or pkt.event_seq
        if (pkt.k, pkt.n) != (spec.k, spec.n) or len(pkt.payload) > self.S:
            self.malformed += 1
            return
        if asm.absorb(pkt.packet_index, from_wire(pkt, self.S, self.seed), wire_len, now):
            self._finish(bid, asm, now)

    def _finish(self, bid, asm, now):
        del self.assemblies[bid]
        self.done_blocks.add(bid)
        k = asm.decoder.spec.k
        self.npm.add_loss(asm.missing_at_recovery, k)
        self.npm.add_frame(asm.bytes_after_first, now - asm.first_arrival)
        data = asm.decoder.recover()[: asm.frame_len]
        if self.block_mode == "gop":
            frames = unpack_gop_block(data)
        else:
            frames = [(data, asm.event_seq)]
        ready = now + self.delays.fec_decode
        for j, (fb, ev) in enumerate(frames):
            fid = bid + j
            row = dict(frame_id=fid, block_id=bid, first_arrival=asm.first_arrival,
                       recovered_at=now, displayed_at=None, status="displayed",
                       event_seq=0, mtp=None, crc=zlib.crc32(fb))
            if fid <= self.last_displayed or now > asm.deadline:
                row["status"] = "late"
            else:
                start = max(ready, self.decoder_free)
                self.decoder_free = start + self.delays.video_decode
                shown = self.decoder_free + self.delays.display
                row["displayed_at"] = shown
                self.last_displayed = fid
                if ev:
                    row["event_seq"] = ev
                    sent = self.events.pop(ev, None)
                    if sent is not None:
                        row["mtp"] = compute_mtp(sent, shown)
                        self.npm.add_mtp(row["mtp"])
                        self.mtp_samples.append((shown, row["mtp"]))
            self.display_log.append(row)

    def expire(self, now):
        for bid in [b for b, a in self.assemblies.items() if a.deadline < now]:
            asm = self.assemblies.pop(bid)
            self.done_blocks.add(bid)
            self.npm.add_loss(asm.gaps(), asm.decoder.spec.k)
            self.display_log.append(dict(
                frame_id=bid, block_id=bid, first_arrival=asm.first_arrival, recovered_at=None,
                displayed_at=None, status="dropped", event_seq=0, mtp=None, crc=None,
            ))

    # feedback path

    def report(self, now):
        self.expire(now)
        raw_mu, raw_pi = self.npm.close_window()
        mu, pi, rtt, mtp = self.npm.smoothed()
        self.report_seq += 1
        npr = NprPacket(self.report_seq, mu, min(pi, 1.0), int(round(rtt * 1e6)),
                        int(round(mtp * 1e6)), int(round(now * 1e6)))
        self.npr_log.append(dict(time=now, report_seq=self.report_seq, mu=mu, pi=pi, rtt=rtt, mtp=mtp,
                                 raw_mu=raw_mu, raw_pi=raw_pi, stale=self.npm.stale))
        self.send(encode_packet(npr), now)

    def probe(self, now):
        self.send(encode_packet(self.prober.probe(now)), now)

    def input_event(self, now, event_id=1):
        self.event_seq += 1
        self.events[self.event_seq] = now
        self.send(encode_packet(EventPacket(self.event_seq, event_id, int(round(now * 1e6)))), now)
