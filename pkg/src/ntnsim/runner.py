"""
Experiment orchestration
========================

Builds experiments out of engine runs, fans the runs over a process
pool, reduces the results in run-index order (so the aggregate never
depends on worker count or completion order), and writes the exports:
plot-ready CSVs plus one summary.json of scalar results per invocation.

Seeding: every run derives its private stream from the master seed and
a structured spawn key (experiment domain, sweep point, run index), so
any run can be reproduced in isolation and the whole campaign is
reproducible from (config, master seed).

Every output file starts with '# key: value' metadata lines carrying
the artifact version, config hash, scenario, and master seed.
"""

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .config import SimulationConfig, config_hash
from .cost import (
    crossover_devices,
    haps_model,
    leo_model,
    npv_total,
    terrestrial_model,
)
from .engine import RunResult, simulate_erasure_run, simulate_success_run, trace_run
from .errors import ConfigError
from .geometry import deploy_basestations
from .metrics import (
    ErasureSample,
    build_heatmap,
    distribution_summary,
    export_heatmap_csv,
    export_radial_csv,
    export_success_csv,
    export_violin_csv,
    heatmap_weighted_mean,
    radial_profile,
    success_statistics,
)
from .orbit import derive_constants, export_lap_trace_csv, sample_lap
from .scenario import parse_scenario, scenario_kinds

# spawn-key domains: keep distinct so no two purposes share a stream
LAYOUT_DOMAIN = 0
ERASURE_DOMAIN = 1
SUCCESS_DOMAIN = 2
ORBIT_DOMAIN = 3
TRACE_DOMAIN = 4


@dataclass
class ScenarioSpec:
    """Run-control parameters of one experiment."""

    scenario: str
    n_devices: int
    n_runs: int
    run_duration: float      # [s]
    metric: str              # erasure | success
    master_seed: int

    def __post_init__(self):
        self.scenario = parse_scenario(self.scenario)
        if self.n_runs < 1:
            raise ConfigError(f"need at least one run, got {self.n_runs}")
        if self.run_duration <= 0:
            raise ConfigError(f"run duration must be positive, got {self.run_duration}")
        if self.n_devices < 1:
            raise ConfigError(f"need at least one device, got {self.n_devices}")
        if self.metric not in ("erasure", "success"):
            raise ConfigError(f"metric must be erasure or success, got {self.metric!r}")


def run_stream(master_seed: int, domain: int, *indices) -> np.random.Generator:
    """Independent generator for one unit of work.

    Streams are derived by spawn key, not by arithmetic on the seed, so
    they cannot collide across (domain, sweep point, run index).
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(domain, *indices))
    return np.random.default_rng(ss)


def fresh_master_seed() -> int:
    """Entropy-derived master seed, logged in outputs for reproduction."""
    return int(np.random.SeedSequence().entropy)


def _fixed_layout(cfg: SimulationConfig, scenario: str, master_seed: int):
    """One layout shared by all runs when the config pins it."""
    if "tn" not in scenario_kinds(scenario) or not cfg.fixed_layout:
        return None
    rng = run_stream(master_seed, LAYOUT_DOMAIN)
    return deploy_basestations(cfg.n_basestations, cfg.region, rng,
                               max_attempts=cfg.placement_max_attempts)


def metadata_lines(cfg: SimulationConfig, command: str, scenario: str,
                   master_seed, extra=()):
    lines = [
        f"version: {__version__}",
        f"command: {command}",
        f"scenario: {scenario}",
        f"config_hash: {config_hash(cfg)}",
        f"master_seed: {master_seed}",
    ]
    lines.extend(extra)
    return lines


def _write_summary(out_dir, payload: dict):
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# ---------------------------------------------------------------------------
# pool plumbing
# ---------------------------------------------------------------------------


def _erasure_task(args):
    cfg, scenario, n_devices, duration, master_seed, run_idx, layout = args
    rng = run_stream(master_seed, ERASURE_DOMAIN, run_idx)
    return run_idx, simulate_erasure_run(cfg, scenario, n_devices, duration,
                                         rng, layout=layout)


def _success_task(args):
    cfg, scenario, n_devices, duration, master_seed, point_idx, run_idx, layout = args
    rng = run_stream(master_seed, SUCCESS_DOMAIN, point_idx, run_idx)
    return (point_idx, run_idx), simulate_success_run(
        cfg, scenario, n_devices, duration, rng, layout=layout)


def _map_runs(task_fn, arg_list, workers):
    """Run tasks inline or over a process pool; order of completion is
    irrelevant because results are keyed and reduced sorted."""
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(arg_list) <= 1:
        return dict(task_fn(a) for a in arg_list)
    out = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for key, result in pool.map(task_fn, arg_list,
                                    chunksize=max(1, len(arg_list) // (workers * 4))):
            out[key] = result
    return out


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def run_erasure_experiment(spec: ScenarioSpec, cfg: SimulationConfig,
                           workers=None, out_dir=None, write_trace=False) -> dict:
    """Erasure-probability campaign: heatmap, radial profile, violin data.

    Each run redraws devices, the BS layout (unless pinned by config),
    and the satellite lap schedule; collisions are disabled in this
    metric.  Returns the summary dict (also written to summary.json when
    an output directory is given).
    """
    if spec.metric != "erasure":
        raise ConfigError(f"erasure experiment got metric {spec.metric!r}")
    layout = _fixed_layout(cfg, spec.scenario, spec.master_seed)
    args = [(cfg, spec.scenario, spec.n_devices, spec.run_duration,
             spec.master_seed, i, layout) for i in range(spec.n_runs)]
    by_run = _map_runs(_erasure_task, args, workers)

    samples = []
    run_means = []
    for i in sorted(by_run):
        res: RunResult = by_run[i]
        ok = ~np.isnan(res.device_mean_erasure)
        for x, y, v in zip(res.device_xy[ok, 0], res.device_xy[ok, 1],
                           res.device_mean_erasure[ok]):
            samples.append(ErasureSample(float(x), float(y), float(v)))
        if ok.any():
            run_means.append(float(res.device_mean_erasure[ok].mean()))
    if not samples:
        raise ConfigError("no device transmitted in any run; nothing to aggregate")

    grid = build_heatmap(samples, cfg.heatmap_bin_m, cfg.region.radius)
    edges, ring_means, ring_counts = radial_profile(samples, cfg.radial_rings,
                                                    cfg.region.radius)
    dist = distribution_summary([s.mean_erasure for s in samples],
                                n_bins=cfg.violin_bins)

    summary = {
        "command": "erasure",
        "version": __version__,
        "scenario": spec.scenario,
        "config_hash": config_hash(cfg),
        "master_seed": spec.master_seed,
        "n_runs": spec.n_runs,
        "n_devices": spec.n_devices,
        "duration_s": spec.run_duration,
        "scalars": {
            "mean_erasure": float(np.mean([s.mean_erasure for s in samples])),
            "mean_of_run_means": float(np.mean(run_means)),
            "median_erasure": dist.median,
            "q1_erasure": dist.q1,
            "q3_erasure": dist.q3,
            "heatmap_weighted_mean": heatmap_weighted_mean(grid),
            "n_samples": len(samples),
            "ring_means": [None if np.isnan(m) else float(m) for m in ring_means],
        },
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        hdr = metadata_lines(cfg, "erasure", spec.scenario, spec.master_seed,
                             extra=[f"n_runs: {spec.n_runs}",
                                    f"n_devices: {spec.n_devices}",
                                    f"duration_s: {spec.run_duration}"])
        export_heatmap_csv(os.path.join(out_dir, "heatmap.csv"), grid, hdr)
        export_radial_csv(os.path.join(out_dir, "radial_profile.csv"),
                          edges, ring_means, ring_counts, hdr)
        export_violin_csv(os.path.join(out_dir, "erasure_distribution.csv"),
                          dist, hdr)
        if write_trace:
            _write_trace(cfg, spec, out_dir, hdr)
        _write_summary(out_dir, summary)
    return summary


def run_success_experiment(spec: ScenarioSpec, cfg: SimulationConfig,
                           n_devices_list=None, workers=None, out_dir=None,
                           write_trace=False) -> dict:
    """Success-probability campaign over a device-count sweep.

    Full MAC simulation (erasure and destructive collisions) with
    multi-gateway deduplication; one SuccessPoint per sweep value.
    """
    if spec.metric != "success":
        raise ConfigError(f"success experiment got metric {spec.metric!r}")
    sweep = list(n_devices_list) if n_devices_list else [spec.n_devices]
    if any(n < 1 for n in sweep):
        raise ConfigError(f"device counts must be >= 1, got {sweep}")
    layout = _fixed_layout(cfg, spec.scenario, spec.master_seed)

    args = []
    for pi, n in enumerate(sweep):
        args.extend(
            (cfg, spec.scenario, n, spec.run_duration, spec.master_seed,
             pi, ri, layout)
            for ri in range(spec.n_runs)
        )
    by_key = _map_runs(_success_task, args, workers)

    points = []
    dedup = []
    for pi, n in enumerate(sweep):
        means, n_decoded, n_gw_decodes, n_packets = [], 0, 0, 0
        for ri in range(spec.n_runs):
            res: RunResult = by_key[(pi, ri)]
            if res.n_packets == 0:
                continue
            means.append(res.run_mean_success)
            n_decoded += res.n_decoded
            n_gw_decodes += res.n_gateway_decodes
            n_packets += res.n_packets
        if not means:
            raise ConfigError(f"no packets generated at n_devices={n}; "
                              "increase the duration or device count")
        points.append(success_statistics(means, n_devices=n))
        dedup.append({
            "n_devices": n,
            "n_packets": n_packets,
            "n_decoded": n_decoded,
            "gateway_decodes_per_decoded":
                (n_gw_decodes / n_decoded) if n_decoded else None,
        })

    summary = {
        "command": "success",
        "version": __version__,
        "scenario": spec.scenario,
        "config_hash": config_hash(cfg),
        "master_seed": spec.master_seed,
        "n_runs": spec.n_runs,
        "n_devices_sweep": sweep,
        "duration_s": spec.run_duration,
        "scalars": {
            "points": [
                {"n_devices": p.n_devices, "mean_success": p.mean,
                 "ci95": None if np.isnan(p.ci95) else p.ci95}
                for p in points
            ],
            "dedup": dedup,
        },
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        hdr = metadata_lines(cfg, "success", spec.scenario, spec.master_seed,
                             extra=[f"n_runs: {spec.n_runs}",
                                    f"n_devices_sweep: {sweep}",
                                    f"duration_s: {spec.run_duration}"])
        export_success_csv(os.path.join(out_dir, "success_curve.csv"), points, hdr)
        if write_trace:
            _write_trace(cfg, spec, out_dir, hdr)
        _write_summary(out_dir, summary)
    return summary


def _write_trace(cfg, spec: ScenarioSpec, out_dir, header_lines):
    """Per-unit trace of one extra run through the record-level path."""
    import csv

    rng = run_stream(spec.master_seed, TRACE_DOMAIN)
    layout = _fixed_layout(cfg, spec.scenario, spec.master_seed)
    _, rows = trace_run(cfg, spec.scenario, spec.n_devices, spec.run_duration,
                        rng, layout=layout)
    with open(os.path.join(out_dir, "trace.csv"), "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["device_id", "packet_start_s", "gateway_id", "unit_index",
                    "kind", "channel", "erased", "collided", "received"])
        for row in rows:
            dev, t0, gw, u, kind, ch, e, c, r = row
            w.writerow([dev, f"{t0:.6f}", gw, u, kind, ch,
                        int(e), int(c), int(r)])


def run_cost_report(cfg: SimulationConfig, out_dir=None,
                    m_values=(10, 20)) -> dict:
    """Cost sweep over device counts plus the crossover table.

    Emits both the full-horizon NPV and its per-year average, since
    either normalization is a sensible plotting choice.
    """
    p = cfg.cost
    years = max(1, p.horizon_years)
    grid = list(range(0, cfg.cost_n_max + 1, cfg.cost_n_step))
    hm, lm = haps_model(p), leo_model(p)
    tm = terrestrial_model(p)

    rows = []
    for n in grid:
        row = {"n_devices": n,
               "haps_total": npv_total(hm, n, 0),
               "leo_total": npv_total(lm, n, 0)}
        for m in m_values:
            row[f"tn{m}_total"] = npv_total(tm, n, m)
        rows.append(row)

    crossovers = {"leo_vs_haps": crossover_devices(lm, hm)}
    for m in m_values:
        crossovers[f"leo_vs_tn{m}"] = crossover_devices(lm, tm, n_bs_b=m)
        crossovers[f"haps_vs_tn{m}"] = crossover_devices(hm, tm, n_bs_b=m)

    summary = {
        "command": "cost",
        "version": __version__,
        "scenario": "cost",
        "config_hash": config_hash(cfg),
        "master_seed": None,
        "scalars": {
            "haps_total": rows[0]["haps_total"],
            "tn_totals": {str(m): rows[0][f"tn{m}_total"] for m in m_values},
            "leo_total_at_max": rows[-1]["leo_total"],
            "crossovers": crossovers,
        },
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        hdr = metadata_lines(cfg, "cost", "cost", "-")
        import csv

        with open(os.path.join(out_dir, "cost_curves.csv"), "w", newline="") as fh:
            for line in hdr:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            cols = ["n_devices", "haps_total", "leo_total"]
            cols += [f"tn{m}_total" for m in m_values]
            per_year = [c for c in cols if c != "n_devices"]
            w.writerow(cols + [c.replace("_total", "_per_year") for c in per_year])
            for row in rows:
                vals = [row[c] for c in cols[1:]]
                w.writerow([row["n_devices"]]
                           + [f"{v:.2f}" for v in vals]
                           + [f"{v / years:.2f}" for v in vals])
        with open(os.path.join(out_dir, "crossovers.csv"), "w", newline="") as fh:
            for line in hdr:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["pair", "n_devices"])
            for pair, n in crossovers.items():
                w.writerow([pair, "" if n is None else n])
        _write_summary(out_dir, summary)
    return summary


def run_orbit_trace(cfg: SimulationConfig, out_dir=None, master_seed=0,
                    dt: float = 1.0) -> dict:
    """Sample one satellite pass and export its time trace."""
    derived = derive_constants(cfg.orbit)
    rng = run_stream(master_seed, ORBIT_DOMAIN)
    lap = sample_lap(derived, rng)
    summary = {
        "command": "orbit-trace",
        "version": __version__,
        "scenario": "leo",
        "config_hash": config_hash(cfg),
        "master_seed": master_seed,
        "scalars": {
            "t_max_s": derived.t_max,
            "omega_rad_s": derived.omega,
            "gamma0_deg": float(np.degrees(derived.gamma0)),
            "lap_duration_s": lap.duration,
            "lap_azimuth_deg": float(np.degrees(lap.azimuth)),
        },
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        hdr = metadata_lines(cfg, "orbit-trace", "leo", master_seed,
                             extra=[f"lap_duration_s: {lap.duration}"])
        export_lap_trace_csv(os.path.join(out_dir, "lap_trace.csv"), lap,
                             derived, cfg.orbit, dt=dt,
                             form=cfg.central_angle_form,
                             range_mode=cfg.satellite_range_mode,
                             header_lines=hdr)
        _write_summary(out_dir, summary)
    return summary
