import math

import numpy as np
import pytest

from ntnsim.errors import ConfigError, PlacementInfeasibleError
from ntnsim.geometry import (
    HapsConfig,
    RegionConfig,
    deploy_basestations,
    deploy_devices,
    export_layout_csv,
    guard_bs_count,
    haps_distance,
    haps_elevation,
    terrestrial_distance,
)

REGION = RegionConfig()
HAPS = HapsConfig()


def test_region_defaults():
    assert REGION.radius == 80_000.0
    assert REGION.guard_radius == 240_000.0
    assert REGION.min_bs_separation == 20_000.0
    assert REGION.earth_radius == 6_378_100.0


def test_region_validation():
    with pytest.raises(ConfigError):
        RegionConfig(radius=-1.0)
    with pytest.raises(ConfigError):
        RegionConfig(guard_radius=-5.0)
    with pytest.raises(ConfigError):
        RegionConfig(min_bs_separation=-1.0)
    with pytest.raises(ConfigError):
        HapsConfig(altitude=0.0)


# --- device deployment -----------------------------------------------------


def test_devices_inside_disk(rng):
    pts = deploy_devices(10_000, REGION, rng)
    assert pts.shape == (10_000, 2)
    r = np.hypot(pts[:, 0], pts[:, 1])
    assert np.all(r <= REGION.radius + 1e-9)


def test_devices_radius_cdf_uniform_in_area(rng):
    # disk-uniform points: P[r <= x] = (x/R)^2
    n = 100_000
    pts = deploy_devices(n, REGION, rng)
    r = np.sort(np.hypot(pts[:, 0], pts[:, 1])) / REGION.radius
    model = r * r
    grid = (np.arange(1, n + 1)) / n
    ks = max(np.max(np.abs(grid - model)), np.max(np.abs(grid - 1.0 / n - model)))
    assert ks < 0.01


def test_devices_angle_symmetric(rng):
    pts = deploy_devices(50_000, REGION, rng)
    # centroid of a uniform disk sample is near the origin
    assert np.abs(pts.mean(axis=0)).max() < 4 * REGION.radius / math.sqrt(50_000)


def test_devices_deterministic():
    a = deploy_devices(100, REGION, np.random.default_rng(5))
    b = deploy_devices(100, REGION, np.random.default_rng(5))
    assert np.array_equal(a, b)


# --- base station deployment -----------------------------------------------


def test_guard_count_reference_values():
    assert guard_bs_count(10, REGION) == 150
    assert guard_bs_count(20, REGION) == 300


def test_guard_count_density_match():
    # guard density deviates from inner density by at most one BS over the annulus
    for m, guard_radius in [(10, 240e3), (20, 240e3), (7, 100e3), (13, 55e3)]:
        region = RegionConfig(guard_radius=guard_radius)
        mg = guard_bs_count(m, region)
        annulus = math.pi * ((region.radius + guard_radius) ** 2 - region.radius**2)
        inner = math.pi * region.radius**2
        assert abs(mg / annulus - m / inner) <= 1.0 / annulus


def test_guard_count_zero_annulus():
    assert guard_bs_count(10, RegionConfig(guard_radius=0.0)) == 0


def test_bs_layout_geometry(rng):
    layout = deploy_basestations(10, REGION, rng)
    assert layout.inner.shape == (10, 2)
    assert layout.guard.shape == (150, 2)
    assert layout.n_total == 160

    ri = np.hypot(layout.inner[:, 0], layout.inner[:, 1])
    assert np.all(ri <= REGION.radius + 1e-9)

    rg = np.hypot(layout.guard[:, 0], layout.guard[:, 1])
    assert np.all(rg > REGION.radius)
    assert np.all(rg <= REGION.radius + REGION.guard_radius + 1e-9)

    allp = layout.all_positions
    d2 = np.sum((allp[:, None, :] - allp[None, :, :]) ** 2, axis=-1)
    d2[np.diag_indices_from(d2)] = np.inf
    assert math.sqrt(d2.min()) >= REGION.min_bs_separation - 1e-6


def test_bs_layout_deterministic():
    a = deploy_basestations(5, REGION, np.random.default_rng(9))
    b = deploy_basestations(5, REGION, np.random.default_rng(9))
    assert np.array_equal(a.all_positions, b.all_positions)


def test_bs_placement_infeasible_raises():
    # 30 stations with 100 km spacing cannot fit a 80 km disk
    tight = RegionConfig(guard_radius=0.0, min_bs_separation=100_000.0)
    with pytest.raises(PlacementInfeasibleError):
        deploy_basestations(30, tight, np.random.default_rng(0), max_attempts=200)


def test_bs_zero_inner_gives_empty_layout(rng):
    layout = deploy_basestations(0, REGION, rng)
    assert layout.n_total == 0


# --- HAPS geometry ----------------------------------------------------------


def test_haps_distance_values():
    assert haps_distance(np.array([0.0, 0.0]), HAPS) == 30_000.0
    d = haps_distance(np.array([80_000.0, 0.0]), HAPS)
    assert d == pytest.approx(85_440.03745317531, rel=1e-12)
    arr = haps_distance(np.array([[0.0, 0.0], [80_000.0, 0.0]]), HAPS)
    assert arr.shape == (2,)


def test_haps_elevation_nadir_is_vertical():
    assert haps_elevation(np.array([0.0, 0.0]), HAPS, REGION) == pytest.approx(
        math.pi / 2, abs=1e-12
    )


def test_haps_elevation_reference_points():
    # frozen against 40-digit evaluation of the elevation expression
    a30 = haps_elevation(np.array([30_000.0, 0.0]), HAPS, REGION)
    a80 = haps_elevation(np.array([80_000.0, 0.0]), HAPS, REGION)
    assert math.degrees(a30) == pytest.approx(44.7305058387994775, rel=1e-12)
    assert math.degrees(a80) == pytest.approx(19.8374265072600393, rel=1e-12)


def test_haps_elevation_strictly_decreasing_in_range():
    rho = np.linspace(0.0, 80_000.0, 400)
    pts = np.stack([rho, np.zeros_like(rho)], axis=1)
    alpha = haps_elevation(pts, HAPS, REGION)
    assert np.all(np.diff(alpha) < 0.0)


def test_haps_elevation_near_flat_earth():
    # curvature correction grows with range: 0.27 deg at 30 km, 0.72 deg at 80 km
    rho = np.linspace(1_000.0, 80_000.0, 160)
    pts = np.stack([rho, np.zeros_like(rho)], axis=1)
    alpha = np.degrees(haps_elevation(pts, HAPS, REGION))
    flat = np.degrees(np.arctan(HAPS.altitude / rho))
    delta = np.abs(alpha - flat)
    assert np.all(delta[rho <= 50_000.0] < 0.5)
    assert np.all(delta <= 0.75)


def test_haps_elevation_rotation_invariant(rng):
    rho = 40_000.0
    angles = rng.uniform(0, 2 * math.pi, 32)
    pts = np.stack([rho * np.cos(angles), rho * np.sin(angles)], axis=1)
    alpha = haps_elevation(pts, HAPS, REGION)
    assert np.ptp(alpha) < 1e-12


def test_terrestrial_distance():
    dev = np.array([[0.0, 0.0], [3_000.0, 4_000.0]])
    bs = np.array([[0.0, 0.0], [0.0, 8_000.0]])
    d = terrestrial_distance(dev, bs)
    assert d.shape == (2,)
    assert d[0] == 0.0
    assert d[1] == pytest.approx(5_000.0)
    # broadcasting gives the full device-by-station matrix
    m = terrestrial_distance(dev[:, None, :], bs[None, :, :])
    assert m.shape == (2, 2)
    assert m[1, 0] == pytest.approx(5_000.0)
    assert m[1, 1] == pytest.approx(5_000.0)


# --- export ------------------------------------------------------------------


def test_export_layout_csv(tmp_path, rng):
    layout = deploy_basestations(3, REGION, rng)
    devices = deploy_devices(5, REGION, rng)
    path = tmp_path / "layout.csv"
    export_layout_csv(path, devices, layout, header_lines=["seed: 1"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# seed: 1"
    assert lines[1] == "kind,x_m,y_m"
    kinds = [ln.split(",")[0] for ln in lines[2:]]
    assert kinds.count("device") == 5
    assert kinds.count("bs_inner") == 3
    assert kinds.count("bs_guard") == guard_bs_count(3, REGION)
