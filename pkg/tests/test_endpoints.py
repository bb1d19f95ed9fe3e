import itertools
import math
import random

import numpy as np
import pytest

from framefec.controller import ControllerConfig, RatePlan, gop_redundancy_rate, cold_start_frame_size
from framefec.endpoints import (
    Client, NpmState, Ring, RttProber, Server, StageDelays, SyntheticEncoder, UdpTransport,
    compute_mtp, count_missing, measure_loss, measure_throughput, smooth,
)
from framefec.endpoints.framing import pack_gop_block, unpack_gop_block
from framefec.protocol import FrtpPacket, RttpPacket, decode_packet, encode_packet


# encoder

def test_encoder_budget_split_closed_form():
    enc = SyntheticEncoder(i_frame_ratio=4.0)
    budget = 6.5e6 / 8 / 3
    assert enc.gop_budget(6.5) == pytest.approx(budget)
    assert budget == pytest.approx(270_833, abs=1)
    i_size, p_size = enc.nominal_sizes(6.5)
    assert p_size == pytest.approx(budget / 13)
    assert p_size == pytest.approx(20_833, abs=1)
    assert i_size == pytest.approx(83_333, abs=1)


@pytest.mark.parametrize("rate", [0.2, 1.0, 2.0, 6.5])
def test_gop_total_within_one_percent(rate):
    enc = SyntheticEncoder(seed=3)
    for g in range(20):
        sizes = [enc.frame_size(g * 10 + f, rate) for f in range(10)]
        assert sum(sizes) == pytest.approx(enc.gop_budget(rate), rel=0.01)


def test_jitter_bounds_and_iframe_structure():
    enc = SyntheticEncoder(seed=1)
    i_nom, p_nom = enc.nominal_sizes(4.5)
    lo, hi = 0.9 / 1.1, 1.1 / 0.9  # worst case after per-GoP renormalisation
    for idx in range(300):
        s = enc.frame_size(idx, 4.5)
        nom = i_nom if idx % 10 == 0 else p_nom
        assert lo - 1e-3 <= s / nom <= hi + 1e-3
    _, is_i, _ = enc.next_frame(20, 4.5)
    assert is_i and not enc.next_frame(21, 4.5)[1]


def test_ratio_one_no_jitter_is_uniform():
    enc = SyntheticEncoder(i_frame_ratio=1.0, jitter=0.0)
    assert {enc.frame_size(i, 2.4) for i in range(30)} == {round(2.4e6 / 8 / 30)}


def test_encoder_deterministic():
    a, b = SyntheticEncoder(seed=9), SyntheticEncoder(seed=9)
    assert [a.next_frame(i, 3.0) for i in range(25)] == [b.next_frame(i, 3.0) for i in range(25)]
    c = SyntheticEncoder(seed=10)
    assert [a.frame_size(i, 3.0) for i in range(25)] != [c.frame_size(i, 3.0) for i in range(25)]


# monitor

def test_throughput_examples():
    assert measure_throughput([(2 * 1500, 0.010)]) == pytest.approx(2.4)
    assert measure_throughput([(1500, 0.005), (2 * 1500, 0.010)]) == pytest.approx(2.4)
    assert measure_throughput([(0, 0.0)]) is None
    assert measure_throughput([]) is None


def test_stale_window_holds_previous_value():
    npm = NpmState()
    npm.add_frame(3000, 0.01)
    npm.close_window()
    assert not npm.stale
    npm.add_frame(0, 0.0)  # single-packet frame
    npm.close_window()
    assert npm.stale
    assert npm.smoothed()[0] == pytest.approx(2.4)


def test_loss_examples():
    assert measure_loss({0, 1, 3, 4, 5}, 5) == pytest.approx(0.2)
    assert measure_loss(set(range(7)), 5) == 0
    assert count_missing({0, 4}) == 3
    assert count_missing(set()) == 0


def test_mtp_subtraction():
    assert compute_mtp(1.000, 1.138) == pytest.approx(0.138)


def test_smoothing_examples():
    assert smooth([7]) == 7
    r = Ring()
    for x in range(1, 6):
        r.push(x)
    assert r.value == 3
    r.push(6)
    assert r.value == 4
    c = Ring()
    for _ in range(9):
        c.push(2.5)
        assert c.value == 2.5
    with pytest.raises(ValueError):
        smooth([])


def test_rtt_prober_running_minimum():
    pr = RttProber()
    for i, rtt in enumerate([0.020, 0.020, 0.035]):
        t = float(i)
        p = pr.probe(t)
        got = pr.on_reply(decode_packet(encode_packet(p.echo())), t + rtt)
        assert got == pytest.approx(rtt, abs=2e-6)
        if i == 0:
            assert pr.rtt_min == pytest.approx(0.020, abs=2e-6) and pr.qd == pytest.approx(0)
    assert pr.rtt_min == pytest.approx(0.020, abs=2e-6)
    assert pr.qd == pytest.approx(0.015, abs=2e-6)
    assert pr.on_reply(p.echo(), 5.0) is None  # duplicate


def test_stage_delays_validation():
    d = StageDelays()
    assert d.capture + d.display == pytest.approx(0.0042)
    with pytest.raises(ValueError):
        StageDelays(video_encode=-1.0)


# server / client without a link

class StubTuner:
    def __init__(self, plan):
        self.plan = plan
        self.log = [plan]

    def observe_gop(self, level, sizes):
        pass

    def update(self, state, now):
        return self.plan


def make_plan(re, pi, cfg=ControllerConfig(), level=0):
    rr = gop_redundancy_rate(cold_start_frame_size(re, cfg), pi, cfg) if pi else 0.0
    return RatePlan(level, re, rr, pi, cfg)


def capture_frames(n_frames, plan, cfg=ControllerConfig(), block_mode="frame", seed=5, events=()):
    out = []
    srv = Server(StubTuner(plan), SyntheticEncoder(seed=seed), cfg, lambda d, at: out.append((at, d)),
                 session_seed=seed, block_mode=block_mode)
    for i in range(n_frames):
        if i in events:
            srv.on_datagram(encode_packet(events[i]), i / cfg.fps - 1e-3)
        srv.capture(i, i / cfg.fps)
    return srv, out


def by_block(datagrams):
    blocks = {}
    for at, d in datagrams:
        p = decode_packet(d)
        blocks.setdefault(p.frame_id, []).append((at, d, p))
    return blocks


def test_lossless_plan_emits_no_redundancy():
    srv, out = capture_frames(30, make_plan(2.0, 0.0))
    for rows in by_block(out).values():
        p = rows[0][2]
        assert p.n == p.k and len(rows) == p.k
    assert all(r["redundant_bytes"] == 0 for r in srv.log)


def test_event_echo_on_next_frame():
    from framefec.protocol import EventPacket
    srv, out = capture_frames(5, make_plan(1.0, 0.0), events={3: EventPacket(7, 1, 0)})
    blocks = by_block(out)
    assert {p.event_seq for _, _, p in blocks[3]} == {7}
    assert all(p.event_seq == 0 for b in (0, 1, 2, 4) for _, _, p in blocks[b])


def test_emitted_byte_rate_audit():
    cfg = ControllerConfig()
    plan = make_plan(2.0, 0.01, cfg)
    srv, out = capture_frames(int(60 * cfg.fps), plan, cfg)
    emitted = sum(len(d) for _, d in out) * 8 / 60 / 1e6
    assert emitted == pytest.approx(plan.re + plan.rr, rel=0.12)


def feed(client, datagrams, t0=0.0):
    for j, (at, d) in enumerate(datagrams):
        client.on_datagram(d, max(at, t0) + 0.001 * j)


def test_every_n_minus_k_erasure_pattern_recovers():
    cfg = ControllerConfig()
    plan = make_plan(0.6, 0.3, cfg)
    _, out = capture_frames(3, plan, cfg)
    for bid, rows in by_block(out).items():
        n, k = rows[0][2].n, rows[0][2].k
        assert n > k
        for erased in itertools.combinations(range(n), n - k):
            cl = Client(lambda d, at: None, cfg.packet_payload, session_seed=5)
            feed(cl, [(at, d) for at, d, p in rows if p.packet_index not in erased])
            shown = [r for r in cl.display_log if r["status"] == "displayed"]
            assert [r["frame_id"] for r in shown] == [bid]


def test_one_erasure_too_many_drops_exactly_that_frame():
    cfg = ControllerConfig()
    plan = make_plan(1.0, 0.05, cfg)
    srv, out = capture_frames(10, plan, cfg)
    victim = 4
    keep = []
    for at, d in out:
        p = decode_packet(d)
        if p.frame_id == victim and p.packet_index < (p.n - p.k + 1):
            continue
        keep.append((at, d))
    cl = Client(lambda d, at: None, cfg.packet_payload, session_seed=5)
    feed(cl, keep)
    cl.expire(math.inf)
    status = {r["frame_id"]: r["status"] for r in cl.display_log}
    assert status.pop(victim) == "dropped"
    assert set(status) == set(range(10)) - {victim}
    assert set(status.values()) == {"displayed"}
    crc = {r["frame_id"]: r["crc"] for r in srv.log}
    assert all(r["crc"] == crc[r["frame_id"]] for r in cl.display_log if r["status"] == "displayed")


def test_gop_block_roundtrip_and_display():
    cfg = ControllerConfig(fec_mode="gop_level")
    srv, out = capture_frames(20, make_plan(1.0, 0.02, cfg), cfg, block_mode="gop")
    assert sorted(by_block(out)) == [0, 10]
    cl = Client(lambda d, at: None, cfg.packet_payload, session_seed=5, block_mode="gop")
    drop_first = [(at, d) for at, d in out if decode_packet(d).packet_index != 0]
    feed(cl, drop_first)
    shown = [r for r in cl.display_log if r["status"] == "displayed"]
    assert [r["frame_id"] for r in shown] == list(range(20))
    crc = {r["frame_id"]: r["crc"] for r in srv.log}
    assert all(r["crc"] == crc[r["frame_id"]] for r in shown)
    times = [r["displayed_at"] for r in shown]
    assert times == sorted(times)


def test_pack_gop_block_roundtrip():
    frames = [(bytes([i]) * (i * 7), i * 3) for i in range(6)]
    assert unpack_gop_block(pack_gop_block(frames)) == frames


def test_out_of_order_echoes_use_their_own_event_time():
    cfg = ControllerConfig()
    cl = Client(lambda d, at: None, cfg.packet_payload, session_seed=1)
    ev_time = {}
    for s in range(1, 9):
        cl.input_event(0.1 * s)
        ev_time[s] = 0.1 * s
    order = list(range(1, 9))
    random.Random(4).shuffle(order)
    expected = {}
    for fid, ev in enumerate(order):
        t = 1.0 + fid / 30
        p = FrtpPacket(fid, fid % 10, 1, 1, 0, 10, ev, 0, 0, bytes(10))
        cl.on_datagram(encode_packet(p), t)
        row = cl.display_log[-1]
        expected[ev] = row["displayed_at"] - ev_time[ev]
        assert row["mtp"] == pytest.approx(expected[ev], abs=1e-12)
    assert len(cl.mtp_samples) == 8


def test_malformed_and_event_zero():
    cl = Client(lambda d, at: None)
    cl.on_datagram(b"\x00garbage", 0.0)
    cl.on_datagram(encode_packet(FrtpPacket(1, 0, 1, 1, 0, 4, 0, 0, 0, b"abcd")), 0.1)
    assert cl.malformed == 1
    assert cl.display_log[-1]["status"] == "displayed" and cl.display_log[-1]["mtp"] is None


def test_display_monotone_no_duplicates():
    cfg = ControllerConfig()
    _, out = capture_frames(30, make_plan(2.0, 0.02, cfg), cfg)
    rnd = random.Random(8)
    noisy = [x for x in out if rnd.random() > 0.03]
    noisy += [x for x in out if rnd.random() < 0.05]  # duplicates, delivered late
    cl = Client(lambda d, at: None, cfg.packet_payload, session_seed=5)
    feed(cl, noisy)
    ids = [r["frame_id"] for r in cl.display_log if r["status"] == "displayed"]
    assert ids == sorted(set(ids))


# real sockets carry the same bytes

def test_udp_loopback_same_wire_bytes():
    with UdpTransport() as a, UdpTransport() as b:
        a.peer, b.peer = b.address, a.address
        pkts = [RttpPacket(3, 12345), FrtpPacket(9, 1, 2, 3, 2, 2000, 0, 7, 4, bytes(range(200)))]
        for p in pkts:
            a.send(encode_packet(p))
        got = [b.recv() for _ in pkts]
    assert [decode_packet(d) for d, _ in got] == pkts
