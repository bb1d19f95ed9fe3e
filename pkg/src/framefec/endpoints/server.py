"""Sender pipeline: synthetic encode -> RLNC -> FRTP, plus feedback handling."""
import zlib

from ..controller import ControllerConfig
from ..models import NetworkState
from ..protocol import FRTP_HEADER_SIZE, EventPacket, NprPacket, ProtocolError, RttpPacket, decode_packet, encode_packet
from ..rlnc import FecBlockSpec, rlnc_encode
from .encoder import SyntheticEncoder
from .framing import pack_gop_block, to_wire
from .monitor import RttProber, StageDelays

BLOCK_MODES = ("frame", "gop")


class Server:
    """Transport-agnostic sender.

    `send(data, at)` hands a datagram to the transport for departure at
    virtual time `at`. In "frame" mode each frame is its own FEC block and
    goes out back-to-back once encoded; in "gop" mode frames are held until
    the GoP is complete, coded as one block and paced at `gop_pacing_gain`
    times the last reported throughput.
    """

    def __init__(self, tuner, encoder: SyntheticEncoder, cfg: ControllerConfig, send,
                 delays=StageDelays(), session_seed=0, block_mode="frame",
                 pacing=0.0, gop_pacing_gain=1.25):
        if block_mode not in BLOCK_MODES:
            raise ValueError(f"block_mode must be one of {BLOCK_MODES}")
        self.tuner = tuner
        self.encoder = encoder
        self.cfg = cfg
        self.send = send
        self.delays = delays
        self.seed = session_seed
        self.block_mode = block_mode
        self.pacing = pacing
        self.gop_gain = gop_pacing_gain
        self.prober = RttProber()
        self.pending_event = 0
        self.last_npr = None
        self.malformed = 0
        self.log = []  # one dict per captured frame
        self._gop = []  # (row, frame bytes, event_seq) awaiting the GoP block
        self._gop_sizes = []

    # frame path

    def capture(self, frame_index, now):
        plan = self.tuner.plan
        data, _, size = self.encoder.next_frame(frame_index, plan.re)
        ev, self.pending_event = self.pending_event, 0
        f = frame_index % self.cfg.gop_len
        row = dict(
            frame_id=frame_index, capture_time=now, send_time=None, level=plan.level,
            re=plan.re, rr=plan.rr, plan_pi=plan.pi,
            mu_report=self.last_npr.mu if self.last_npr else 0.0,
            pi_report=self.last_npr.pi if self.last_npr else 0.0,
            block_id=None, k=0, n=0,
            frame_bytes=size, wire_bytes=0, redundant_bytes=0, event_seq=ev,
            crc=zlib.crc32(data),
        )
        self.log.append(row)
        self._track_gop(f, plan.level, size)
        t_send = now + self.delays.sender
        if self.block_mode == "frame":
            n = min(plan.n_for(self._k(size), f), self._k(size) + 255)
            self._emit(frame_index, data, n, t_send, f, ev, plan.level, [row], self.pacing / self.cfg.fps)
            return
        self._gop.append((row, data, ev))
        if f == self.cfg.gop_len - 1:
            self.flush_gop(t_send)

    def flush_gop(self, t_send):
        if not self._gop:
            return
        plan = self.tuner.plan
        rows = [r for r, _, _ in self._gop]
        block = pack_gop_block([(d, e) for _, d, e in self._gop])
        self._gop = []
        k = self._k(len(block))
        n = min(plan.n_for(k, 0), k + 255)
        spread = 0.0
        if self.last_npr is not None and self.last_npr.mu > 0:
            wire = len(block) + (n - k) * self.cfg.packet_payload + n * FRTP_HEADER_SIZE
            spread = wire * 8 / (self.gop_gain * self.last_npr.mu * 1e6)
        self._emit(rows[0]["frame_id"], block, n, t_send, len(rows) - 1, 0, rows[-1]["level"], rows, spread)

    def _k(self, nbytes):
        return max(1, -(-nbytes // self.cfg.packet_payload))

    def _emit(self, block_id, data, n, t_send, gop_index, ev, level, rows, spread):
        spec = FecBlockSpec(block_id, self._k(len(data)), n, self.cfg.packet_payload)
        packets = rlnc_encode(data, spec, self.seed)
        gap = spread / len(packets)
        wire_total = redundant = 0
        for j, pkt in enumerate(packets):
            t = t_send + j * gap
            frtp = to_wire(pkt, spec, len(data), gop_index=gop_index, event_seq=ev,
                           send_ts_us=int(round(t * 1e6)), level=level)
            datagram = encode_packet(frtp)
            wire_total += len(datagram)
            if pkt.index >= spec.k:
                redundant += len(pkt.payload)
            self.send(datagram, t)
        for r in rows:
            r.update(send_time=t_send, block_id=block_id, k=spec.k, n=spec.n)
        rows[-1].update(wire_bytes=wire_total, redundant_bytes=redundant)

    def _track_gop(self, f, level, size):
        if f == 0:
            self._gop_sizes = []
        self._gop_sizes.append((level, size))
        if f == self.cfg.gop_len - 1:
            levels = {lv for lv, _ in self._gop_sizes}
            if len(levels) == 1 and len(self._gop_sizes) == self.cfg.gop_len:
                self.tuner.observe_gop(level, [s for _, s in self._gop_sizes])

    # feedback path

    def on_datagram(self, data, now):
        try:
            pkt = decode_packet(data)
        except ProtocolError:
            self.malformed += 1
            return
        if isinstance(pkt, NprPacket):
            if self.last_npr is None or pkt.report_seq > self.last_npr.report_seq:
                self.last_npr = pkt
                self.retune(now)
        elif isinstance(pkt, RttpPacket):
            if pkt.reply:
                self.prober.on_reply(pkt, now)
            else:
                self.send(encode_packet(pkt.echo()), now)
        elif isinstance(pkt, EventPacket):
            self.pending_event = pkt.event_seq

    def probe(self, now):
        self.send(encode_packet(self.prober.probe(now)), now)

    def network_state(self):
        npr = self.last_npr
        if npr is None or npr.mu <= 0:
            return None
        if self.prober.rtt is not None:
            rtt, rtt_min = self.prober.rtt, self.prober.rtt_min
        else:
            rtt = rtt_min = npr.rtt_us / 1e6
        return NetworkState(npr.mu, npr.pi, rtt, rtt_min, npr.mtp_us / 1e6)

    def retune(self, now):
        state = self.network_state()
        if state is not None:
            self.tuner.update(state, now)
