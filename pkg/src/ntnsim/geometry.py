"""
Spatial deployment model
========================

Devices live at ground level inside a disk of radius R centred on the
origin.  Terrestrial base stations are dropped uniformly in the same disk
with a minimum pairwise separation s, plus extra stations in an annular
guard region (R, R + R_g] that absorbs border effects.  A single HAPS
hovers at fixed altitude directly above the region centre.

Positions are plain float arrays: a point is shape (2,), a set of points
is shape (n, 2), metres throughout.  All angles are radians.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PlacementInfeasibleError

EARTH_RADIUS = 6.3781e6  # mean equatorial radius [m]


@dataclass
class RegionConfig:
    """Service disk plus guard annulus geometry."""

    radius: float = 80e3              # service disk radius R [m]
    guard_radius: float = 240e3       # guard annulus width R_g [m]
    min_bs_separation: float = 20e3   # minimum BS spacing s [m]
    earth_radius: float = EARTH_RADIUS

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigError(f"region radius must be positive, got {self.radius}")
        if self.guard_radius < 0:
            raise ConfigError(f"guard radius must be >= 0, got {self.guard_radius}")
        if self.min_bs_separation < 0:
            raise ConfigError(f"BS separation must be >= 0, got {self.min_bs_separation}")
        if self.earth_radius <= 0:
            raise ConfigError(f"earth radius must be positive, got {self.earth_radius}")


@dataclass
class HapsConfig:
    """Quasi-stationary platform fixed above the region centre."""

    altitude: float = 30e3  # h_H [m]

    def __post_init__(self):
        if self.altitude <= 0:
            raise ConfigError(f"HAPS altitude must be positive, got {self.altitude}")


@dataclass
class BasestationLayout:
    """Inner-disk and guard-annulus BS positions, (n, 2) arrays in metres."""

    inner: np.ndarray
    guard: np.ndarray

    @property
    def all_positions(self) -> np.ndarray:
        return np.vstack([self.inner, self.guard])

    @property
    def n_total(self) -> int:
        return len(self.inner) + len(self.guard)


def deploy_devices(n: int, region: RegionConfig, rng: np.random.Generator) -> np.ndarray:
    """Drop ``n`` devices uniformly over the service disk.

    Uniform in area: radius = R * sqrt(u), angle uniform on [0, 2pi).
    Returns an (n, 2) array.
    """
    if n < 1:
        raise ConfigError(f"device count must be >= 1, got {n}")
    r = region.radius * np.sqrt(rng.random(n))
    phi = rng.random(n) * 2.0 * np.pi
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def guard_bs_count(m: int, region: RegionConfig) -> int:
    """Number of guard-annulus stations matching the inner BS density.

    M_g = round(M * (R_g/R) * (2 + R_g/R)), i.e. inner density scaled by
    the annulus-to-disk area ratio, rounded to the nearest integer.
    """
    if m < 0:
        raise ConfigError(f"BS count must be >= 0, got {m}")
    ratio = region.guard_radius / region.radius
    return int(round(m * ratio * (2.0 + ratio)))


def _sample_disk_point(rng, r_min, r_max):
    # uniform in area over the annulus [r_min, r_max]
    r = math.sqrt(r_min * r_min + rng.random() * (r_max * r_max - r_min * r_min))
    phi = rng.random() * 2.0 * math.pi
    return np.array([r * math.cos(phi), r * math.sin(phi)])


def deploy_basestations(
    m: int,
    region: RegionConfig,
    rng: np.random.Generator,
    max_attempts: int = 10_000,
) -> BasestationLayout:
    """Place ``m`` inner stations and the matching guard stations.

    Rejection sampling: each candidate is redrawn until it clears the
    minimum separation from every already-placed station (inner and
    guard alike).  A station that cannot be placed within
    ``max_attempts`` draws raises :class:`PlacementInfeasibleError`.
    """
    if m < 0:
        raise ConfigError(f"BS count must be >= 0, got {m}")
    m_guard = guard_bs_count(m, region)
    s2 = region.min_bs_separation ** 2
    placed: list[np.ndarray] = []

    def place(r_min, r_max, label):
        for _ in range(max_attempts):
            cand = _sample_disk_point(rng, r_min, r_max)
            if all(np.sum((cand - p) ** 2) >= s2 for p in placed):
                placed.append(cand)
                return
        raise PlacementInfeasibleError(
            f"could not place {label} BS #{len(placed)} after {max_attempts} attempts "
            f"(m={m}, s={region.min_bs_separation} m, R={region.radius} m)"
        )

    for _ in range(m):
        place(0.0, region.radius, "inner")
    for _ in range(m_guard):
        place(region.radius, region.radius + region.guard_radius, "guard")

    inner = np.array(placed[:m]).reshape(m, 2)
    guard = np.array(placed[m:]).reshape(m_guard, 2)
    return BasestationLayout(inner=inner, guard=guard)


def haps_distance(xy, haps: HapsConfig):
    """Slant distance from ground position(s) to the HAPS: sqrt(x^2 + y^2 + h_H^2)."""
    xy = np.asarray(xy, dtype=float)
    r2 = np.sum(xy * xy, axis=-1)
    return np.sqrt(r2 + haps.altitude ** 2)


def haps_elevation(xy, haps: HapsConfig, region: RegionConfig):
    """Elevation angle from ground position(s) to the HAPS, radians.

    alpha_H = arcsin( (h_H R_e - (x^2+y^2)) /
                      sqrt((x^2+y^2+R_e^2)(x^2+y^2+h_H^2)) )

    Evaluates ``pi/2`` at nadir and tracks the flat-earth arctan(h_H/rho)
    to well under a degree across the service disk.
    """
    xy = np.asarray(xy, dtype=float)
    r2 = np.sum(xy * xy, axis=-1)
    re = region.earth_radius
    h = haps.altitude
    num = h * re - r2
    den = np.sqrt((r2 + re * re) * (r2 + h * h))
    return np.arcsin(np.clip(num / den, -1.0, 1.0))


def terrestrial_distance(dev_xy, bs_xy):
    """Ground-plane Euclidean distance between device(s) and base station(s)."""
    dev_xy = np.asarray(dev_xy, dtype=float)
    bs_xy = np.asarray(bs_xy, dtype=float)
    diff = dev_xy - bs_xy
    return np.sqrt(np.sum(diff * diff, axis=-1))


def export_layout_csv(path, devices, layout: BasestationLayout, header_lines=()):
    """Write the deployment as CSV rows (kind, x_m, y_m)."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["kind", "x_m", "y_m"])
        for x, y in np.atleast_2d(devices):
            writer.writerow(["device", repr(float(x)), repr(float(y))])
        for x, y in layout.inner:
            writer.writerow(["bs_inner", repr(float(x)), repr(float(y))])
        for x, y in layout.guard:
            writer.writerow(["bs_guard", repr(float(x)), repr(float(y))])
