import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from framefec.controller import ControllerConfig, RateLadder
from framefec.models import (
    DistortionParams,
    MtpParams,
    NetworkState,
    distortion_components,
    end_to_end_distortion,
    loss_aware_distortion,
    model_psnr,
    mtp_estimate,
    redundancy_choices,
    solve_joint_grid,
)

P = DistortionParams(theta1=1000, R0=100, theta2=500, theta3=3000)


def test_lossless_distortion_is_encoder_term():
    for re in (150.0, 1000.0, 6500.0):
        assert end_to_end_distortion(re, 0.0, 3.0, P) == 1000 / (re - 100)


def test_distortion_worked_example():
    want = Fraction(1000, 900) + Fraction(500) * Fraction(1, 100) + Fraction(3000) * Fraction(1, 100) / 3
    got = end_to_end_distortion(1000, 0.01, 3, P)
    assert got == pytest.approx(float(want), rel=1e-12)
    assert got == pytest.approx(16.1111111111, rel=1e-9)
    c = distortion_components(1000, 0.01, 3, P)
    assert c.channel == pytest.approx(5.0) and c.decoder == pytest.approx(10.0)


def test_distortion_pole():
    with pytest.raises(ValueError):
        end_to_end_distortion(100, 0.0, 3, P)


def test_psnr_values():
    assert model_psnr(255.0**2) == pytest.approx(0.0, abs=1e-12)
    assert model_psnr(42.3) == pytest.approx(31.87, abs=0.005)
    assert model_psnr(42.3) == pytest.approx(20 * math.log10(255) - 10 * math.log10(42.3), rel=1e-12)
    assert model_psnr(5.0) - model_psnr(10.0) == pytest.approx(10 * math.log10(2), rel=1e-12)
    with pytest.raises(ValueError):
        model_psnr(0.0)


def test_mtp_worked_example():
    mp = MtpParams(0.5, 0.3, 1.0, 0.04)
    assert mtp_estimate(10, 5, 0.015, mp) == pytest.approx(0.165, rel=1e-12)
    assert mtp_estimate(1e12, 1e12, 0.0, mp) == pytest.approx(0.04, abs=1e-9)
    assert mtp_estimate(10, 5, 0.035, mp) - mtp_estimate(10, 5, 0.015, mp) == pytest.approx(0.02)
    with pytest.raises(ValueError):
        mtp_estimate(0, 5, 0, mp)


def test_default_profile_curve_turns_upward():
    d = [loss_aware_distortion(r * 1000, 0.001, 3.0, DistortionParams()) for r in RateLadder().rates]
    i = int(np.argmin(d))
    assert 0 < i < len(d) - 1
    assert all(a > b for a, b in zip(d[:i], d[1 : i + 1]))
    assert all(a < b for a, b in zip(d[i:], d[i + 1 :]))


@given(re=st.floats(200, 10000), pi=st.floats(0, 0.5), dpi=st.floats(1e-4, 0.5))
def test_distortion_monotonicity(re, pi, dpi):
    p = DistortionParams()
    assert end_to_end_distortion(re + 1, 0.0, 3, p) < end_to_end_distortion(re, 0.0, 3, p)
    assert end_to_end_distortion(re, pi + dpi, 3, p) > end_to_end_distortion(re, pi, 3, p)
    if pi > 0:
        assert distortion_components(re, pi, 4, p).decoder < distortion_components(re, pi, 3, p).decoder


@given(d=st.floats(1e-3, 1e5), dd=st.floats(1e-3, 1e3))
def test_psnr_decreasing(d, dd):
    assert model_psnr(d + dd) < model_psnr(d)


CFG = ControllerConfig()
LADDER = RateLadder()


def test_grid_infeasible_when_mu_too_small():
    s = NetworkState(mu=0.15, pi=0.01, rtt=0.02, rtt_min=0.02)
    assert solve_joint_grid(s, LADDER, DistortionParams(), MtpParams(), CFG) is None


def test_grid_lossless_picks_top_level():
    s = NetworkState(mu=1000.0, pi=0.0, rtt=0.02, rtt_min=0.02)
    cfg = ControllerConfig(td=10.0)
    sol = solve_joint_grid(s, LADDER, DistortionParams(), MtpParams(), cfg)
    assert sol.level == len(LADDER) - 1 and sol.rr == 0.0


def test_grid_matches_full_rescan():
    rng = np.random.default_rng(11)
    dp, mp = DistortionParams(), MtpParams()
    hits = 0
    for _ in range(100):
        rtt_min = rng.uniform(0.005, 0.05)
        s = NetworkState(
            mu=rng.uniform(0.1, 12),
            pi=float(rng.choice([0.0, rng.uniform(0, 0.1)])),
            rtt=rtt_min + rng.uniform(0, 0.05),
            rtt_min=rtt_min,
        )
        sol = solve_joint_grid(s, LADDER, dp, mp, CFG)
        feasible = []
        for (lvl, re) in enumerate(LADDER.rates):
            for rr in redundancy_choices(re, s.pi, CFG):
                d = dp.theta1 / (re * 1000 - dp.R0) + dp.theta2 * s.pi + dp.theta3 * s.pi * CFG.gop_len / CFG.fps
                m = mp.alpha1 / s.mu + mp.alpha2 / (re + rr) + mp.alpha3 * (s.rtt - s.rtt_min) + mp.alpha4
                obj = d + mp.phi * m
                if re + rr <= s.mu and m <= CFG.td:
                    feasible.append((obj, re, rr))
        if not feasible:
            assert sol is None
            continue
        hits += 1
        assert sol.re + sol.rr <= s.mu and sol.mtp <= CFG.td
        assert all(sol.objective <= obj * (1 + 1e-12) for obj, _, _ in feasible)
        best = min(feasible)
        assert sol.objective == pytest.approx(best[0], rel=1e-12)
        assert (sol.re, sol.rr) == best[1:]
    assert hits >= 10
