import math

import numpy as np
import pytest

from framefec.netlab import (
    CANONICAL_SEED,
    GilbertParams,
    Link,
    LinkConfig,
    fixed_link,
    gilbert_losses,
    gilbert_step,
    canonical_trace,
    read_trace,
    write_trace,
)
from framefec import netlab


def test_absorbing_good_state():
    rng = np.random.default_rng(0)
    assert not gilbert_losses(10_000, GilbertParams(0.0, 0.25), rng).any()


def test_for_loss_matches_stationary_formula():
    g = GilbertParams.for_loss(0.01, 0.25)
    assert g.p_gb == pytest.approx(0.0075 / 0.99, rel=1e-12)
    assert g.p_gb == pytest.approx(0.0075758, abs=1e-7)
    assert g.stationary_loss == pytest.approx(0.01, rel=1e-12)


def test_gilbert_monte_carlo():
    lost = gilbert_losses(1_000_000, GilbertParams.for_loss(0.01, 0.25), np.random.default_rng(1))
    assert abs(lost.mean() - 0.01) <= 0.001
    cond = lost[1:][lost[:-1]].mean()
    assert abs(cond - 0.25) <= 0.02


def test_step_semantics():
    g = GilbertParams(0.1, 0.6)
    assert gilbert_step(False, 0.05, g) == (True, True)
    assert gilbert_step(False, 0.15, g) == (False, False)
    assert gilbert_step(True, 0.5, g) == (True, True)
    assert gilbert_step(True, 0.7, g) == (False, False)


def test_serialization_arithmetic():
    link = Link(fixed_link(2.0, one_way_delay=0.010))
    assert link.transit(1500, 1.0) == pytest.approx(1.0 + 0.006 + 0.010, abs=1e-12)


def test_infinite_bandwidth():
    link = Link(fixed_link(math.inf, one_way_delay=0.010))
    assert link.transit(1500, 2.0) == pytest.approx(2.010)


def test_serialization_across_rate_change():
    cfg = LinkConfig(((0.0, 1.0), (1.0, 2.0)), one_way_delay=0.0, loss=GilbertParams(0.0))
    link = Link(cfg)
    # 1,000,000 bits from t=0.5: 500k at 1 Mb/s then 500k at 2 Mb/s
    assert link.finish_time(0.5, 125_000) == pytest.approx(1.25)


def test_fifo_nondecreasing_and_conservation():
    link = Link(canonical_trace(), log=True)
    rng = np.random.default_rng(2)
    t, last = 0.0, -1.0
    for _ in range(20_000):
        t += rng.exponential(0.0015)
        d = link.transit(int(rng.integers(100, 1500)), t)
        if d is not None:
            assert d >= last
            last = d
    s = link.stats
    assert s.delivered + s.lost + s.overflow == s.offered == 20_000
    assert len(link.log) == s.offered


def test_overload_tail_drop_half():
    link = Link(fixed_link(2.0, loss=0.0, queue_capacity=30_000))
    gap = 1500 * 8 / 4e6  # offered at 4 Mb/s
    n = 20_000
    for i in range(n):
        link.transit(1500, i * gap)
    assert link.stats.overflow / n == pytest.approx(0.5, abs=0.01)


def test_canonical_trace_bounds_and_determinism():
    cfg = canonical_trace()
    assert len(cfg.bandwidth_schedule) == 12
    assert all(2 <= bw <= 10 for _, bw in cfg.bandwidth_schedule)
    assert [t for t, _ in cfg.bandwidth_schedule] == [5.0 * i for i in range(12)]
    assert cfg.bandwidth_at(7.0) == 4.0
    assert cfg.loss.stationary_loss == pytest.approx(0.01)
    a, b = Link(canonical_trace()), Link(canonical_trace())
    outs = [(a.transit(1200, i * 0.002), b.transit(1200, i * 0.002)) for i in range(5000)]
    assert all(x == y for x, y in outs)


def test_canonical_trace_matches_shipped_csv():
    shipped = read_trace(netlab.Path(netlab.__file__).parent / "data" / "canonical_trace.csv")
    assert shipped == canonical_trace(CANONICAL_SEED).bandwidth_schedule


def test_idle_rtt_is_20ms():
    cfg = canonical_trace()
    down, up = Link(cfg), Link(fixed_link(math.inf, loss=0.0))
    rtts = []
    for i in range(60):
        t = i * 1.0
        arr = down.transit(17, t)
        if arr is not None:
            rtts.append(up.transit(17, arr) - t)
    assert np.mean(rtts) == pytest.approx(0.020, abs=2e-4)


def test_trace_csv_roundtrip(tmp_path):
    sched = ((0.0, 2.0), (5.0, 7.5))
    write_trace(tmp_path / "t.csv", sched)
    assert read_trace(tmp_path / "t.csv") == sched


def test_link_config_validation():
    with pytest.raises(ValueError):
        LinkConfig(((5.0, 1.0), (0.0, 2.0)))
    with pytest.raises(ValueError):
        LinkConfig(one_way_delay=-1)
    with pytest.raises(ValueError):
        LinkConfig(queue_capacity=0)
