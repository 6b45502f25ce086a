"""
Aggregation of per-unit and per-packet outcomes
===============================================

Erasure probability is estimated at the unit level: in a multi-gateway
scenario a header or fragment counts as erased only when its power is
below threshold at every gateway, since reaching any receiver keeps it
alive.  Success probability is packet-level and network-level (a packet
decoded by at least one gateway, duplicates collapsed).

All reductions here are permutation-invariant over runs so that results
do not depend on how the run pool was scheduled.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass
class ErasureSample:
    """One device's average unit erasure in one run, with its position."""

    x: float
    y: float
    mean_erasure: float


@dataclass
class HeatmapGrid:
    bin_size: float
    edges: np.ndarray        # (n_bins+1,) shared by both axes, covers [-R, R]
    mean: np.ndarray         # (n_bins, n_bins), nan where empty
    count: np.ndarray        # (n_bins, n_bins)
    inside: np.ndarray       # bool, bin centre within the disk of radius R

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1


@dataclass
class SuccessPoint:
    n_devices: int
    mean: float
    ci95: float    # normal-approximation half width over run means
    n_runs: int


@dataclass
class DistributionSummary:
    """Quantiles plus a fixed-bin histogram, enough to draw a violin."""

    mean: float
    median: float     # linear-interpolation convention (midpoint for {0,1})
    q1: float
    q3: float
    bin_edges: np.ndarray
    counts: np.ndarray


def erasure_probability(flags) -> float:
    """Fraction of erased units.

    Accepts a flat boolean list (already network-level) or a
    (n_gateways, n_units) matrix, in which case a unit is erased only
    if erased at all gateways.
    """
    arr = np.asarray(flags, dtype=bool)
    if arr.size == 0:
        raise ConfigError("erasure_probability needs at least one unit flag")
    if arr.ndim == 2:
        arr = arr.all(axis=0)
    elif arr.ndim != 1:
        raise ConfigError(f"expected 1-D or 2-D flags, got shape {arr.shape}")
    return float(arr.mean())


def _positions_and_values(samples):
    xs = np.array([s.x for s in samples], dtype=float)
    ys = np.array([s.y for s in samples], dtype=float)
    vs = np.array([s.mean_erasure for s in samples], dtype=float)
    return xs, ys, vs


def radial_profile(samples, n_rings: int, radius: float):
    """Mean erasure per equal-width radius ring.

    Returns (outer_edges, means, counts); an empty ring has count 0 and
    nan mean rather than a fabricated zero.
    """
    if n_rings < 1:
        raise ConfigError(f"need at least one ring, got {n_rings}")
    if not samples:
        raise ConfigError("radial_profile needs at least one sample")
    xs, ys, vs = _positions_and_values(samples)
    r = np.hypot(xs, ys)
    edges = np.linspace(0.0, radius, n_rings + 1)
    idx = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, n_rings - 1)
    counts = np.bincount(idx, minlength=n_rings)
    sums = np.bincount(idx, weights=vs, minlength=n_rings)
    means = np.full(n_rings, np.nan)
    nz = counts > 0
    means[nz] = sums[nz] / counts[nz]
    return edges[1:], means, counts


def build_heatmap(samples, bin_size: float, radius: float) -> HeatmapGrid:
    """Square-bin spatial average of per-device erasure over [-R, R]^2."""
    if bin_size <= 0:
        raise ConfigError(f"bin size must be positive, got {bin_size}")
    if not samples:
        raise ConfigError("build_heatmap needs at least one sample")
    xs, ys, vs = _positions_and_values(samples)
    n_bins = max(1, int(np.ceil(2.0 * radius / bin_size)))
    edges = np.linspace(-radius, radius, n_bins + 1)
    ix = np.clip(np.searchsorted(edges, xs, side="right") - 1, 0, n_bins - 1)
    iy = np.clip(np.searchsorted(edges, ys, side="right") - 1, 0, n_bins - 1)
    flat = ix * n_bins + iy
    count = np.bincount(flat, minlength=n_bins * n_bins).reshape(n_bins, n_bins)
    sums = np.bincount(flat, weights=vs, minlength=n_bins * n_bins).reshape(n_bins, n_bins)
    mean = np.full((n_bins, n_bins), np.nan)
    nz = count > 0
    mean[nz] = sums[nz] / count[nz]
    centres = 0.5 * (edges[:-1] + edges[1:])
    cx, cy = np.meshgrid(centres, centres, indexing="ij")
    inside = np.hypot(cx, cy) <= radius
    return HeatmapGrid(bin_size=float(bin_size), edges=edges, mean=mean,
                       count=count, inside=inside)


def heatmap_weighted_mean(grid: HeatmapGrid) -> float:
    """Count-weighted mean over bins; equals the global sample mean."""
    total = grid.count.sum()
    if total == 0:
        raise ConfigError("heatmap holds no samples")
    nz = grid.count > 0
    return float(np.sum(grid.mean[nz] * grid.count[nz]) / total)


def success_statistics(run_means, n_devices: int = 0) -> SuccessPoint:
    """Mean of per-run success means with a 95% normal-approximation CI."""
    means = np.asarray(run_means, dtype=float)
    if means.size == 0:
        raise ConfigError("success_statistics needs at least one run")
    m = float(means.mean())
    if means.size > 1:
        half = 1.96 * float(means.std(ddof=1)) / np.sqrt(means.size)
    else:
        half = float("nan")
    return SuccessPoint(n_devices=int(n_devices), mean=m, ci95=half,
                        n_runs=int(means.size))


def distribution_summary(values, n_bins: int = 40,
                         value_range=(0.0, 1.0)) -> DistributionSummary:
    """Quantiles and histogram of per-device erasures (violin-ready)."""
    vals = np.asarray(values, dtype=float)
    if vals.size == 0:
        raise ConfigError("distribution_summary needs at least one sample")
    if n_bins < 1:
        raise ConfigError(f"need at least one bin, got {n_bins}")
    q1, med, q3 = np.percentile(vals, [25.0, 50.0, 75.0])
    counts, bin_edges = np.histogram(vals, bins=n_bins, range=value_range)
    return DistributionSummary(mean=float(vals.mean()), median=float(med),
                               q1=float(q1), q3=float(q3),
                               bin_edges=bin_edges, counts=counts)


# ---------------------------------------------------------------------------
# CSV exports (plot-ready data; rendering happens elsewhere)
# ---------------------------------------------------------------------------


def _open_with_header(path, header_lines):
    fh = open(path, "w", newline="")
    for line in header_lines:
        fh.write(f"# {line}\n")
    return fh


def export_heatmap_csv(path, grid: HeatmapGrid, header_lines=()):
    centres = 0.5 * (grid.edges[:-1] + grid.edges[1:])
    with _open_with_header(path, header_lines) as fh:
        w = csv.writer(fh)
        w.writerow(["x_bin_m", "y_bin_m", "mean_erasure", "n"])
        for i in range(grid.n_bins):
            for j in range(grid.n_bins):
                if grid.count[i, j] == 0:
                    continue
                w.writerow([f"{centres[i]:.3f}", f"{centres[j]:.3f}",
                            f"{grid.mean[i, j]:.10g}", int(grid.count[i, j])])


def export_radial_csv(path, outer_edges, means, counts, header_lines=()):
    with _open_with_header(path, header_lines) as fh:
        w = csv.writer(fh)
        w.writerow(["ring_outer_m", "mean_erasure", "n"])
        for edge, mean, n in zip(outer_edges, means, counts):
            mean_txt = "" if np.isnan(mean) else f"{mean:.10g}"
            w.writerow([f"{edge:.3f}", mean_txt, int(n)])


def export_violin_csv(path, summary: DistributionSummary, header_lines=()):
    with _open_with_header(path, header_lines) as fh:
        w = csv.writer(fh)
        w.writerow(["stat", "value"])
        for name in ("mean", "median", "q1", "q3"):
            w.writerow([name, f"{getattr(summary, name):.10g}"])
        w.writerow([])
        w.writerow(["bin_low", "bin_high", "count"])
        for lo, hi, n in zip(summary.bin_edges[:-1], summary.bin_edges[1:],
                             summary.counts):
            w.writerow([f"{lo:.10g}", f"{hi:.10g}", int(n)])


def export_success_csv(path, points, header_lines=()):
    with _open_with_header(path, header_lines) as fh:
        w = csv.writer(fh)
        w.writerow(["n_devices", "mean_success", "ci95", "n_runs"])
        for p in points:
            ci_txt = "" if np.isnan(p.ci95) else f"{p.ci95:.10g}"
            w.writerow([p.n_devices, f"{p.mean:.10g}", ci_txt, p.n_runs])
