"""
How the tuner sizes FEC and picks a ladder level
================================================

Per-frame redundancy shrinks along the GoP: early frames have more
dependants, so losing them costs more. We compare that schedule with a
uniform one, then walk the ladder as the measured throughput changes.
"""

from framefec.controller import ControllerConfig, RateLadder, fec_packet_count, gop_redundancy_rate, tune
from framefec.models import (DistortionParams, MtpParams, NetworkState, loss_aware_distortion, model_psnr,
                             solve_joint_grid)

cfg = ControllerConfig()
k, pi = 40, 0.10
print("frame position :", list(range(cfg.gop_len)))
print("cut_dd n       :", [fec_packet_count(k, pi, f, cfg) for f in range(cfg.gop_len)])
print("uniform n      :", [fec_packet_count(k, pi, f, cfg, mode="uniform") for f in range(cfg.gop_len)])

# %%
# Which schedule spends more depends on omega: the aggregate cut_dd
# redundancy is omega*(F+1)/2 times the uniform one.

for omega in (0.1, 0.2, 0.3):
    c = ControllerConfig(omega=omega)
    a = gop_redundancy_rate(60000, pi, c)
    b = gop_redundancy_rate(60000, pi, c, mode="uniform")
    print(f"omega={omega:.1f}: cut_dd {a:.3f} Mb/s, uniform {b:.3f} Mb/s")

# %%
# Ladder selection against a falling then recovering link.

ladder = RateLadder()
plan = None
for mu in (8.0, 6.0, 4.0, 2.5, 1.5, 3.0, 7.0):
    state = NetworkState(mu=mu, pi=0.01, rtt=0.022, rtt_min=0.020, mtp=0.09)
    plan = tune(state, plan, None, ladder, cfg)
    name = ladder.levels[plan.level][0]
    print(f"mu={mu:4.1f} -> {name:>5} re={plan.re:.1f} rr={plan.rr:.3f} total={plan.total:.2f}")

# %%
# Model quality across the ladder at a few loss rates.

dp = DistortionParams()
for p in (0.0, 0.01, 0.05):
    psnr = [model_psnr(loss_aware_distortion(r * 1000, p, cfg.beta, dp), dp) for r in ladder.rates]
    print(f"pi={p:.2f}: " + " ".join(f"{v:5.1f}" for v in psnr))

# %%
# The exhaustive joint optimizer gives a reference point for the heuristic.

state = NetworkState(mu=5.0, pi=0.02, rtt=0.022, rtt_min=0.020)
sol = solve_joint_grid(state, ladder, dp, MtpParams(), cfg)
heur = tune(state, None, None, ladder, cfg)
print("grid optimum :", None if sol is None else (ladder.levels[sol.level][0], round(sol.rr, 3)))
print("heuristic    :", ladder.levels[heur.level][0], round(heur.rr, 3))
