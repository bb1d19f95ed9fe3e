"""Command line: run | compare | calibrate | trace."""
import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import yaml

from ..netlab import CANONICAL_SEED, TRACE_PERIOD, TRACE_SEGMENTS, canonical_trace, write_trace
from .config import MODES, ConfigError, load_config, output_root
from .experiments import DEFAULT_SEEDS, compare_modes, format_comparison, mode_configs, run_batch, run_experiment


def _config(args, extra=()):
    sets = list(args.set or ()) + list(extra)
    return load_config(args.config, sets)


def _seeds(args):
    if args.seed is not None:
        return [args.seed]
    return list(range(args.seeds)) if args.seeds else list(DEFAULT_SEEDS)


def cmd_run(args):
    extra = [f"mode={args.mode}"] if args.mode else []
    cfg = _config(args, extra)
    out = Path(args.out) if args.out else (Path(cfg.output) if cfg.output else output_root() / cfg.mode)
    seeds = _seeds(args)
    if len(seeds) == 1:
        res = run_experiment(cfg.with_seed(seeds[0]), out)
        print(json.dumps(res.summary, indent=2, sort_keys=True))
    else:
        _, agg = run_batch(cfg, seeds, out, args.workers)
        for k, v in agg.items():
            if v["mean"] is not None:
                print(f"{k:>16}: {v['mean']:.4f} ± {v['std']:.4f}  (n={v['n']})")
    print(f"wrote {out}", file=sys.stderr)
    return 0


def cmd_compare(args):
    cfg = _config(args)
    out = Path(args.out) if args.out else output_root() / "compare"
    rows = compare_modes(mode_configs(cfg, args.modes), _seeds(args), out, args.workers)
    print(format_comparison(rows))
    print(f"wrote {out}", file=sys.stderr)
    return 0


def cmd_calibrate(args):
    from .calibrate import fit_distortion, fit_mtp, mtp_sweep, read_distortion_samples

    cfg = _config(args)
    result = {}
    rows = mtp_sweep(cfg, duration=args.duration)
    mp, resid = fit_mtp(rows, cfg.mtp.phi)
    result["mtp"] = asdict(mp)
    print(f"alpha fit over {len(rows)} runs, rms residual {1000 * resid:.2f} ms", file=sys.stderr)
    if args.samples:
        re, pi, d, beta = read_distortion_samples(args.samples)
        dp, dres = fit_distortion(re, pi, d, beta, cfg.distortion)
        result["distortion"] = asdict(dp)
        print(f"theta fit over {len(re)} samples, rms residual {dres:.3g}", file=sys.stderr)
    text = yaml.safe_dump(result, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0


def cmd_trace(args):
    cfg = canonical_trace(args.seed, args.duration)
    write_trace(args.out, cfg.bandwidth_schedule)
    for t, bw in cfg.bandwidth_schedule:
        print(f"{t:6.1f} s  {bw:5.1f} Mb/s")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="framefec", description="Frame-level FEC streaming testbed")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", "-c", help="YAML or JSON experiment file")
        sp.add_argument("--set", "-s", action="append", metavar="FIELD=VALUE",
                        help="override a config field, e.g. controller.omega=0.2 (repeatable)")

    def seeds(sp):
        sp.add_argument("--seed", type=int, help="single seed")
        sp.add_argument("--seeds", type=int, help="run seeds 0..N-1 (default 5)")
        sp.add_argument("--workers", type=int, default=1, help="parallel seed runs")
        sp.add_argument("--out", "-o", help="output directory")

    r = sub.add_parser("run", help="run one mode over one or more seeds")
    common(r)
    seeds(r)
    r.add_argument("--mode", choices=MODES)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="compare modes on one scenario")
    common(c)
    seeds(c)
    c.add_argument("--modes", nargs="+", default=["frame_fec", "gop_fec", "fixed"],
                   help=f"any of {MODES + ('cut_dd', 'uniform')}")
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("calibrate", help="fit MTP (alpha) and optionally distortion (theta) parameters")
    common(k)
    k.add_argument("--samples", help="CSV of re_kbps,pi,distortion[,beta] for the theta fit")
    k.add_argument("--duration", type=float, default=15.0, help="seconds per sweep run")
    k.add_argument("--out", "-o", help="write fitted parameters as YAML")
    k.set_defaults(func=cmd_calibrate)

    t = sub.add_parser("trace", help="generate a bandwidth trace CSV")
    t.add_argument("--seed", type=int, default=CANONICAL_SEED)
    t.add_argument("--duration", type=float, default=TRACE_PERIOD * TRACE_SEGMENTS)
    t.add_argument("--out", "-o", required=True)
    t.set_defaults(func=cmd_trace)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
