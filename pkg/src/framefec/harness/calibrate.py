"""Fitting the MTP coefficients (alpha) and distortion parameters (theta).

alpha: least squares of measured mean MTP against (1/mu, 1/R, Q_d, 1) over a
sweep of fixed-rate runs on fixed links. theta: nonlinear least squares of
the distortion model against (rate, loss, distortion) samples.
"""
import itertools
from dataclasses import replace

import numpy as np
from scipy.optimize import curve_fit

from ..controller import RateLadder
from ..models import DistortionParams, MtpParams, end_to_end_distortion
from .config import ExperimentConfig, LinkSpec
from .runner import simulate

SWEEP_BANDWIDTHS = (3.0, 4.0, 6.0, 8.0, 10.0)
SWEEP_LEVELS = (2, 5, 6, 7)
SWEEP_DURATION = 15.0


def mtp_sweep(base: ExperimentConfig = None, bandwidths=SWEEP_BANDWIDTHS, levels=SWEEP_LEVELS,
              duration=SWEEP_DURATION, ladder=None):
    """One row (mu, R, mean Q_d, mean MTP) per (bandwidth, level) fixed-rate run."""
    ladder = ladder or RateLadder()
    base = base or ExperimentConfig()
    rows = []
    for bw, lvl in itertools.product(bandwidths, levels):
        rate = ladder.rates[lvl]
        if rate > 1.5 * bw:
            continue  # nothing gets through on time
        cfg = replace(base, mode="fixed", fixed_level=lvl, duration=duration,
                      link=replace(base.link, fixed_bandwidth=bw))
        res = simulate(cfg, ladder)
        mtp = res.summary["mean_mtp"]
        pr = res.server.prober
        if mtp is None or not pr.samples:
            continue
        qd = float(np.mean([rtt - pr.rtt_min for _, rtt in pr.samples]))
        rows.append((bw, rate, qd, mtp))
    return np.array(rows)


def fit_mtp(rows, phi=MtpParams().phi):
    """Least-squares alpha from sweep rows; returns (MtpParams, rms residual in s)."""
    rows = np.asarray(rows, dtype=float)
    mu, r, qd, y = rows.T
    X = np.column_stack([1 / mu, 1 / r, qd, np.ones_like(mu)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = float(np.sqrt(np.mean((X @ coef - y) ** 2)))
    a1, a2, a3, a4 = (float(c) for c in coef)
    return MtpParams(a1, a2, a3, max(a4, 0.0), phi), resid


def fit_distortion(re_kbps, pi, distortion, beta=3.0, p0=DistortionParams()):
    """theta1, R0, theta2, theta3 fitted to distortion samples (re in kb/s).

    With a single beta the two loss terms are collinear; their sum is fitted
    and split in p0's proportion. Returns (DistortionParams, rms residual).
    """
    re_kbps, pi, distortion = (np.asarray(a, dtype=float) for a in (re_kbps, pi, distortion))
    beta = np.broadcast_to(np.asarray(beta, dtype=float), re_kbps.shape)
    r0_max = 0.99 * re_kbps.min()
    guess = [p0.theta1, min(p0.R0, 0.5 * re_kbps.min())]
    if np.ptp(beta) > 0:
        def model(x, t1, r0, t2, t3):
            re, p, b = x
            return t1 / (re - r0) + t2 * p + t3 * p / b

        popt, _ = curve_fit(model, (re_kbps, pi, beta), distortion, p0=guess + [p0.theta2, p0.theta3],
                            bounds=([0, 0, 0, 0], [np.inf, r0_max, np.inf, np.inf]))
        t1, r0, t2, t3 = popt
    else:
        b = float(beta[0])
        lin0 = p0.theta2 + p0.theta3 / b

        def model(x, t1, r0, lin):
            re, p = x
            return t1 / (re - r0) + lin * p

        popt, _ = curve_fit(model, (re_kbps, pi), distortion, p0=guess + [lin0],
                            bounds=([0, 0, 0], [np.inf, r0_max, np.inf]))
        t1, r0, lin = popt
        share = p0.theta2 / lin0 if lin0 > 0 else 0.5
        t2, t3 = lin * share, lin * (1 - share) * b
    params = DistortionParams(float(t1), float(r0), float(t2), float(t3), p0.max_pixel)
    pred = np.array([end_to_end_distortion(a, c, bb, params) for a, c, bb in zip(re_kbps, pi, beta)])
    resid = float(np.sqrt(np.mean((pred - distortion) ** 2)))
    return params, resid


def read_distortion_samples(path):
    """CSV with columns re_kbps, pi, distortion and optionally beta."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    beta = data["beta"] if "beta" in data.dtype.names else 3.0
    return data["re_kbps"], data["pi"], data["distortion"], beta
