"""Single runs, seed batches, mode comparisons and the redundancy overhead report."""
import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .metrics import write_run
from .runner import simulate

DEFAULT_SEEDS = (0, 1, 2, 3, 4)
BATCH_KEYS = ("mean_mtp", "p95_mtp", "delivery_ratio", "mean_model_psnr", "redundancy_pct", "mean_latency")


def run_experiment(cfg: ExperimentConfig, outdir=None):
    """Simulate one (config, seed); writes frames.csv, seconds.csv, summary.json when a directory is given."""
    res = simulate(cfg)
    outdir = outdir or cfg.output
    if outdir is not None:
        write_run(res, outdir)
    return res


def _one(args):
    cfg, outdir = args
    return run_experiment(cfg, outdir).summary


def aggregate(summaries, keys=BATCH_KEYS):
    out = {}
    for k in keys:
        vals = [s[k] for s in summaries if s.get(k) is not None]
        out[k] = dict(mean=float(np.mean(vals)) if vals else None,
                      std=float(np.std(vals)) if vals else None, n=len(vals))
    return out


def run_batch(cfg: ExperimentConfig, seeds=DEFAULT_SEEDS, outdir=None, workers=1):
    """Runs over `seeds` (each written to outdir/seed_<s>); returns (per-seed summaries, mean/std table)."""
    outdir = Path(outdir) if outdir is not None else (Path(cfg.output) if cfg.output else None)
    jobs = [(cfg.with_seed(s), outdir / f"seed_{s}" if outdir else None) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            summaries = list(ex.map(_one, jobs))
    else:
        summaries = [_one(j) for j in jobs]
    agg = aggregate(summaries)
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "batch_summary.json").write_text(
            json.dumps(dict(mode=cfg.mode, seeds=list(seeds), aggregate=agg, runs=summaries),
                       indent=2, sort_keys=True) + "\n")
    return summaries, agg


def _scenario(cfg: ExperimentConfig):
    link = cfg.link
    return (link.schedule(), link.loss, link.p_bb, link.one_way_delay, link.queue_capacity, cfg.duration)


def compare_modes(configs, seeds=DEFAULT_SEEDS, outdir=None, workers=1):
    """Aligned mean/std table over modes that share one network scenario and seed set."""
    configs = list(configs)
    if len(configs) < 2:
        raise ConfigError("configs", "need at least two configurations to compare")
    ref = _scenario(configs[0])
    for c in configs[1:]:
        if _scenario(c) != ref:
            raise ConfigError("link", f"mode {c.mode!r} uses a different trace or link setup")
    rows = []
    for c in configs:
        sub = Path(outdir) / _label(c) if outdir else None
        _, agg = run_batch(c, seeds, sub, workers)
        row = {"mode": _label(c)}
        for k, v in agg.items():
            row[k] = v["mean"]
            row[k + "_std"] = v["std"]
        rows.append(row)
    if outdir is not None:
        write_comparison(rows, outdir)
    return rows


def _label(cfg):
    if cfg.mode == "frame_fec" and cfg.controller.fec_mode != "cut_dd":
        return f"frame_fec_{cfg.controller.fec_mode}"
    return cfg.mode


def format_comparison(rows):
    head = f"{'mode':<22}{'MTP ms':>16}{'p95 ms':>10}{'delivery':>16}{'PSNR dB':>10}{'redund %':>10}"
    lines = [head, "-" * len(head)]

    def ms(v):
        return "n/a" if v is None else f"{1000 * v:.1f}"

    for r in rows:
        mtp = f"{ms(r['mean_mtp'])} ± {ms(r['mean_mtp_std'])}"
        dr = f"{r['delivery_ratio']:.3f} ± {r['delivery_ratio_std']:.3f}"
        lines.append(f"{r['mode']:<22}{mtp:>16}{ms(r['p95_mtp']):>10}{dr:>16}"
                     f"{r['mean_model_psnr']:>10.2f}{r['redundancy_pct']:>10.2f}")
    return "\n".join(lines)


def write_comparison(rows, outdir):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "compare.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    (outdir / "compare.txt").write_text(format_comparison(rows) + "\n")


def emit_overhead_report(seconds):
    """Redundant / source bytes per second and over the run (byte-weighted), in percent."""
    per = [(r["time"], float(r["redundancy_overhead"])) for r in seconds]
    src = sum(float(r["source_bytes"]) for r in seconds)
    red = sum(float(r["redundant_bytes"]) for r in seconds)
    return dict(per_second=per, mean=100.0 * red / src if src else 0.0)


def mode_configs(base: ExperimentConfig, modes):
    out = []
    for m in modes:
        if m in ("cut_dd", "uniform"):
            out.append(replace(base, mode="frame_fec", controller=replace(base.controller, fec_mode=m)))
        else:
            out.append(replace(base, mode=m))
    return out
