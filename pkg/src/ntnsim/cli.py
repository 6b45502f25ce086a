"""
Command-line front end
======================

    sim erasure     --scenario leo [--devices N] [--runs R] [--duration S]
    sim success     --scenario leo+tn [--devices 100,1000,...] ...
    sim cost        [--bs-counts 10,20]
    sim orbit-trace [--dt 1.0]

Common flags: --config FILE, --seed INT, --workers N, --out-dir DIR,
--set key=value (repeatable config override).  Defaults reproduce the
reference campaign sizes (5000 runs; 24 h erasure windows, 1 h success
windows), so scale down with --runs/--duration/--devices for quick
looks.

Exit codes: 0 success, 2 configuration error, 3 infeasible placement,
4 runtime failure.
"""

import argparse
import sys

from .config import load_config
from .errors import ConfigError, NtnSimError, PlacementInfeasibleError
from .runner import (
    ScenarioSpec,
    fresh_master_seed,
    run_cost_report,
    run_erasure_experiment,
    run_orbit_trace,
    run_success_experiment,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PLACEMENT = 3
EXIT_RUNTIME = 4


def _int_list(text: str):
    try:
        return [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _common_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="FILE", default=None,
                   help="flat key = value configuration file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   dest="overrides", help="override one config key (repeatable)")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: fresh entropy, logged)")
    p.add_argument("--out-dir", default="results", help="output directory")


def _run_flags(p: argparse.ArgumentParser):
    p.add_argument("--scenario", required=True,
                   help="tn, haps, leo, or a union like leo+tn")
    p.add_argument("--runs", type=int, default=5000, help="Monte Carlo runs")
    p.add_argument("--workers", type=int, default=None,
                   help="process pool size (default: machine parallelism)")
    p.add_argument("--fixed-layout", action="store_true",
                   help="reuse one BS layout across runs instead of resampling")
    p.add_argument("--trace", action="store_true",
                   help="also write a per-unit trace of one extra run")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sim",
        description="Monte Carlo simulator and cost analyzer for IoT uplink "
                    "connectivity via HAPS, LEO satellite, and terrestrial "
                    "gateways (LR-FHSS random access).")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("erasure", help="erasure-probability campaign")
    _common_flags(p)
    _run_flags(p)
    p.add_argument("--devices", type=int, default=1000, help="devices per run")
    p.add_argument("--duration", type=float, default=86400.0,
                   help="run duration in seconds")

    p = sub.add_parser("success", help="success-probability campaign")
    _common_flags(p)
    _run_flags(p)
    p.add_argument("--devices", default="100,1000,5000,10000",
                   help="comma-separated device counts to sweep")
    p.add_argument("--duration", type=float, default=3600.0,
                   help="run duration in seconds")

    p = sub.add_parser("cost", help="cost sweep and crossover table")
    _common_flags(p)
    p.add_argument("--bs-counts", default="10,20",
                   help="terrestrial BS counts to tabulate")

    p = sub.add_parser("orbit-trace", help="sample one satellite pass")
    _common_flags(p)
    p.add_argument("--dt", type=float, default=1.0,
                   help="trace time step in seconds")

    return ap


def _parse_overrides(pairs):
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        out[key.strip()] = value.strip()
    return out


def _load(args) -> tuple:
    overrides = _parse_overrides(args.overrides)
    if getattr(args, "fixed_layout", False):
        overrides["fixed_layout"] = "true"
    cfg = load_config(args.config, cli_overrides=overrides)
    seed = args.seed if args.seed is not None else fresh_master_seed()
    return cfg, seed


def _dispatch(args) -> int:
    if args.command == "cost":
        cfg, _ = _load(args)
        summary = run_cost_report(cfg, out_dir=args.out_dir,
                                  m_values=tuple(_int_list(args.bs_counts)))
        for pair, n in summary["scalars"]["crossovers"].items():
            print(f"crossover {pair}: "
                  + ("none within search cap" if n is None else f"N = {n}"))
        print(f"wrote {args.out_dir}/cost_curves.csv, crossovers.csv, summary.json")
        return EXIT_OK

    if args.command == "orbit-trace":
        cfg, seed = _load(args)
        summary = run_orbit_trace(cfg, out_dir=args.out_dir,
                                  master_seed=seed, dt=args.dt)
        s = summary["scalars"]
        print(f"max lap {s['t_max_s']:.2f} s; sampled lap "
              f"{s['lap_duration_s']:.2f} s at azimuth {s['lap_azimuth_deg']:.1f} deg")
        print(f"wrote {args.out_dir}/lap_trace.csv, summary.json")
        return EXIT_OK

    cfg, seed = _load(args)
    if args.command == "erasure":
        spec = ScenarioSpec(scenario=args.scenario, n_devices=args.devices,
                            n_runs=args.runs, run_duration=args.duration,
                            metric="erasure", master_seed=seed)
        summary = run_erasure_experiment(spec, cfg, workers=args.workers,
                                         out_dir=args.out_dir,
                                         write_trace=args.trace)
        s = summary["scalars"]
        print(f"scenario {spec.scenario}: mean erasure {s['mean_erasure']:.4f} "
              f"over {s['n_samples']} device samples ({spec.n_runs} runs)")
        print(f"wrote {args.out_dir}/heatmap.csv, radial_profile.csv, "
              f"erasure_distribution.csv, summary.json")
        return EXIT_OK

    # success
    sweep = _int_list(args.devices)
    if not sweep:
        raise ConfigError("success needs at least one device count")
    spec = ScenarioSpec(scenario=args.scenario, n_devices=sweep[0],
                        n_runs=args.runs, run_duration=args.duration,
                        metric="success", master_seed=seed)
    summary = run_success_experiment(spec, cfg, n_devices_list=sweep,
                                     workers=args.workers,
                                     out_dir=args.out_dir,
                                     write_trace=args.trace)
    for point in summary["scalars"]["points"]:
        ci = point["ci95"]
        ci_txt = "" if ci is None else f" +/- {ci:.4f}"
        print(f"N={point['n_devices']}: success {point['mean_success']:.4f}{ci_txt}")
    print(f"wrote {args.out_dir}/success_curve.csv, summary.json")
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PlacementInfeasibleError as exc:
        print(f"placement infeasible: {exc}", file=sys.stderr)
        return EXIT_PLACEMENT
    except NtnSimError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # anything unexpected still exits cleanly
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
