"""Recompute run summary statistics from frames.csv using only the standard library.

Usage: python tools/recompute_summary.py RUN_DIR
Prints the recomputed values and exits non-zero if they disagree with summary.json.
"""
import csv
import json
import math
import sys
from pathlib import Path

KEYS = ("frames", "displayed", "delivery_ratio", "mtp_samples", "mean_mtp", "p95_mtp",
        "mean_latency", "mean_model_psnr", "redundancy_pct")


def percentile(xs, q):
    # linear interpolation between closest ranks
    xs = sorted(xs)
    pos = (len(xs) - 1) * q / 100.0
    lo, hi = math.floor(pos), math.ceil(pos)
    return xs[lo] + (xs[hi] - xs[lo]) * (pos - lo)


def mean(xs):
    return math.fsum(xs) / len(xs) if xs else None


def recompute(frames_csv):
    with open(frames_csv, newline="") as fh:
        rows = list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))
    mtp = [float(r["mtp"]) for r in rows if r["mtp"]]
    lat = [float(r["latency"]) for r in rows if r["latency"]]
    shown = sum(int(r["displayed"]) for r in rows)
    src = sum(int(r["frame_bytes"]) for r in rows)
    red = sum(int(r["redundant_bytes"]) for r in rows)
    return {
        "frames": len(rows),
        "displayed": shown,
        "delivery_ratio": shown / len(rows) if rows else 0.0,
        "mtp_samples": len(mtp),
        "mean_mtp": mean(mtp),
        "p95_mtp": percentile(mtp, 95) if mtp else None,
        "mean_latency": mean(lat),
        "mean_model_psnr": mean([float(r["model_psnr"]) for r in rows]),
        "redundancy_pct": 100.0 * red / src if src else 0.0,
    }


def main(run_dir):
    run_dir = Path(run_dir)
    got = recompute(run_dir / "frames.csv")
    ref = json.loads((run_dir / "summary.json").read_text())
    bad = []
    for k in KEYS:
        a, b = got[k], ref.get(k)
        same = (a is None and b is None) or (a is not None and b is not None and math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12))
        print(f"{k:>16}  recomputed={a!r:<24} summary={b!r:<24} {'ok' if same else 'MISMATCH'}")
        if not same:
            bad.append(k)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
