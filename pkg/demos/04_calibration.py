"""
Fitting the latency and distortion models
=========================================

The MTP coefficients come from a least-squares fit over fixed-level
runs on constant links. The distortion coefficients are fitted with
scipy from (rate, loss, distortion) samples; here we synthesise the
samples from known parameters and check they come back.
"""

import numpy as np

from framefec.harness.calibrate import fit_distortion, fit_mtp, mtp_sweep
from framefec.models import DistortionParams, MtpParams, end_to_end_distortion, mtp_estimate

rows = mtp_sweep(bandwidths=(3.0, 6.0, 10.0), levels=(2, 5, 7), duration=10.0)
fit, resid = fit_mtp(rows)
print(f"{len(rows)} runs, rms residual {1000 * resid:.1f} ms")
print("fitted :", fit)
print("shipped:", MtpParams())

# %%
# Predicted against measured MTP for each sweep point.

for bw, rate, qd, mtp in rows:
    pred = mtp_estimate(bw, rate, qd, fit)
    print(f"bw={bw:4.1f} rate={rate:3.1f}  measured {1000 * mtp:6.1f} ms  model {1000 * pred:6.1f} ms")

# %%
# Distortion fit on noisy synthetic samples.

truth = DistortionParams(theta1=25000, R0=120, theta2=600, theta3=4000)
rng = np.random.default_rng(3)
re = rng.uniform(300, 6500, 300)
pi = rng.uniform(0, 0.08, 300)
beta = rng.choice([1.5, 3.0, 6.0], 300)  # varied GoP rates separate the two loss terms
d = np.array([end_to_end_distortion(a, b, c, truth) for a, b, c in zip(re, pi, beta)])
d *= 1 + 0.01 * rng.standard_normal(d.size)
est, err = fit_distortion(re, pi, d, beta)
print("truth :", truth)
print("fitted:", est, f"rms {err:.3g}")
