"""Per-frame and per-second metric tables, run summaries and their CSV/JSON forms.

Schemas are versioned by SCHEMA_VERSION; column meanings are documented in
docs/METRICS.md.
"""
import csv
import json
import math
from pathlib import Path

import numpy as np

from ..models import loss_aware_distortion, model_psnr

SCHEMA_VERSION = 1

FRAME_COLUMNS = [
    "time", "frame_id", "displayed", "status", "latency", "mtp", "event_seq", "level",
    "re", "rr", "pi", "mu_measured", "mu_actual", "model_psnr", "k", "n",
    "frame_bytes", "wire_bytes", "redundant_bytes", "crc_ok",
]
SECOND_COLUMNS = [
    "time", "frames", "displayed", "delivery", "mean_mtp", "mean_latency", "level", "re", "rr",
    "pi", "mu_measured", "mu_actual", "model_psnr", "source_bytes", "redundant_bytes",
    "wire_bytes", "send_mbps", "redundancy_overhead",
]


def frame_rows(cfg, server, client, link_cfg, ladder):
    ccfg = cfg.effective_controller
    dp = cfg.distortion
    shown = {}
    dropped_blocks = set()
    for r in client.display_log:
        if r["status"] == "dropped":
            dropped_blocks.add(r["block_id"])
        else:
            shown[r["frame_id"]] = r
    rows = []
    for s in server.log:
        fid = s["frame_id"]
        c = shown.get(fid)
        if c is not None:
            status = c["status"]
        elif s["block_id"] in dropped_blocks:
            status = "dropped"
        else:
            status = "lost"
        displayed = status == "displayed"
        d = loss_aware_distortion(s["re"] * 1000, s["pi_report"], ccfg.beta, dp, ccfg.packet_payload, ccfg.fps)
        rows.append(dict(
            time=s["capture_time"],
            frame_id=fid,
            displayed=int(displayed),
            status=status,
            latency=c["displayed_at"] - s["capture_time"] if displayed else None,
            mtp=c["mtp"] if displayed else None,
            event_seq=c["event_seq"] if displayed else 0,
            level=s["level"],
            re=s["re"],
            rr=s["rr"],
            pi=s["pi_report"],
            mu_measured=s["mu_report"],
            mu_actual=link_cfg.bandwidth_at(s["capture_time"]),
            model_psnr=model_psnr(d, dp),
            k=s["k"],
            n=s["n"],
            frame_bytes=s["frame_bytes"],
            wire_bytes=s["wire_bytes"],
            redundant_bytes=s["redundant_bytes"],
            crc_ok=int(c["crc"] == s["crc"]) if c is not None else None,
        ))
    return rows


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return float(np.mean(xs)) if xs else None


def second_rows(cfg, frames):
    out = []
    for s in range(int(math.ceil(cfg.duration))):
        fr = [f for f in frames if s <= f["time"] < s + 1]
        if not fr:
            continue
        src = sum(f["frame_bytes"] for f in fr)
        red = sum(f["redundant_bytes"] for f in fr)
        wire = sum(f["wire_bytes"] for f in fr)
        shown = sum(f["displayed"] for f in fr)
        out.append(dict(
            time=float(s),
            frames=len(fr),
            displayed=shown,
            delivery=shown / len(fr),
            mean_mtp=_mean(f["mtp"] for f in fr),
            mean_latency=_mean(f["latency"] for f in fr),
            level=_mean(f["level"] for f in fr),
            re=_mean(f["re"] for f in fr),
            rr=_mean(f["rr"] for f in fr),
            pi=_mean(f["pi"] for f in fr),
            mu_measured=_mean(f["mu_measured"] for f in fr),
            mu_actual=_mean(f["mu_actual"] for f in fr),
            model_psnr=_mean(f["model_psnr"] for f in fr),
            source_bytes=src,
            redundant_bytes=red,
            wire_bytes=wire,
            send_mbps=wire * 8 / 1e6,
            redundancy_overhead=100.0 * red / src if src else 0.0,
        ))
    return out


def frame_summary(frames):
    """Summary statistics that depend only on frames.csv content."""
    n = len(frames)
    shown = sum(f["displayed"] for f in frames)
    mtps = [f["mtp"] for f in frames if f["mtp"] is not None]
    lats = [f["latency"] for f in frames if f["latency"] is not None]
    src = sum(f["frame_bytes"] for f in frames)
    red = sum(f["redundant_bytes"] for f in frames)
    return dict(
        frames=n,
        displayed=shown,
        delivery_ratio=shown / n if n else 0.0,
        mtp_samples=len(mtps),
        mean_mtp=float(np.mean(mtps)) if mtps else None,
        p95_mtp=float(np.percentile(mtps, 95)) if mtps else None,
        mean_latency=float(np.mean(lats)) if lats else None,
        mean_model_psnr=float(np.mean([f["model_psnr"] for f in frames])) if frames else None,
        source_bytes=src,
        redundant_bytes=red,
        wire_bytes=sum(f["wire_bytes"] for f in frames),
        redundancy_pct=100.0 * red / src if src else 0.0,
    )


def summarize(cfg, frames, server, client, downlink, tuner):
    out = dict(schema_version=SCHEMA_VERSION, mode=cfg.mode, seed=cfg.seed, duration=cfg.duration)
    out.update(frame_summary(frames))
    plans = tuner.log[1:]
    out["mean_send_mbps"] = out["wire_bytes"] * 8 / 1e6 / cfg.duration
    out["plans"] = len(plans)
    out["plan_cap_violations"] = sum(not p.within_cap for p in plans) if cfg.mode != "fixed" else 0
    out["corrupt_frames"] = sum(1 for f in frames if f["crc_ok"] == 0)
    st = downlink.stats
    out["link_offered"] = st.offered
    out["link_lost"] = st.lost
    out["link_overflow"] = st.overflow
    out["malformed"] = server.malformed + client.malformed
    return out


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["# schema_version", SCHEMA_VERSION])
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])


def read_csv(path):
    """Rows of a metrics CSV as dicts of strings (schema comment line skipped)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_run(result, outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_csv(outdir / "frames.csv", result.frames, FRAME_COLUMNS)
    write_csv(outdir / "seconds.csv", result.seconds, SECOND_COLUMNS)
    summary = dict(result.summary, config=result.config.to_dict())
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return outdir
