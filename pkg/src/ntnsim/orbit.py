"""
Single-satellite pass model
===========================

A constellation dense enough that exactly one LEO satellite is always
above the minimum elevation angle alpha_0 is abstracted into a sequence
of back-to-back "laps".  Each lap has a random duration t_c drawn from
the analytic pass-duration PDF and a random azimuth psi for the pass
direction, and during the lap the elevation seen from the region centre
rises from alpha_0 to a peak at mid-pass and falls back to alpha_0.

Derived constants (for a circular orbit at altitude h_S, inclination i_o):

    omega_s = sqrt(mu_e / r_S^3)          satellite angular rate
    omega_e = 2 pi / T_s                  Earth rotation rate
    omega   = (omega_s - omega_e cos i_o) / 2
    gamma_0 = arccos((R_e/r_S) cos alpha_0) - alpha_0
    T_m     = gamma_0 / omega             longest possible lap

The lap-duration density on (0, T_m] is

    f(t_c) = omega cos(gamma_0) tan(omega t_c)
             / (gamma_0 sqrt(cos^2(omega t_c) - cos^2(gamma_0)))

which integrates to one and has the closed-form CDF
F(t) = 1 - arccos(cos gamma_0 / cos(omega t)) / gamma_0, inverted here
for sampling (the density diverges at T_m, so sampling never evaluates
the PDF pointwise).
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import EARTH_RADIUS

MU_EARTH = 3.986004418e14  # gravitational parameter [m^3/s^2]
SIDEREAL_DAY = 86164.1     # [s]

#: selects the time argument of the central angle; "symmetric" starts
#: and ends the pass at alpha_0 and peaks mid-pass, "asymmetric" is a
#: halved-slope one-sided variant kept for comparison.
CENTRAL_ANGLE_FORMS = ("symmetric", "asymmetric")
RANGE_MODES = ("altitude", "slant")


@dataclass
class OrbitConfig:
    altitude: float = 750e3                      # h_S [m]
    inclination: float = math.radians(60.0)      # i_o [rad]
    min_elevation: float = math.radians(20.0)    # alpha_0 [rad]
    earth_radius: float = EARTH_RADIUS
    mu_earth: float = MU_EARTH
    sidereal_day: float = SIDEREAL_DAY

    def __post_init__(self):
        if self.altitude <= 0:
            raise ConfigError(f"satellite altitude must be positive, got {self.altitude}")
        if not 0.0 < self.min_elevation < math.pi / 2:
            raise ConfigError(
                f"minimum elevation must be in (0, pi/2), got {self.min_elevation} rad"
            )


@dataclass
class OrbitDerived:
    """Constants derived from an :class:`OrbitConfig`."""

    omega_s: float       # satellite angular rate [rad/s]
    omega_e: float       # Earth rotation rate [rad/s]
    omega: float         # effective half relative rate [rad/s]
    gamma0: float        # central angle at minimum elevation [rad]
    t_max: float         # maximum lap duration T_m [s]
    r_orbit: float       # orbit radius r_S = h_S + R_e [m]
    earth_radius: float  # R_e carried along for the elevation mapping [m]


@dataclass
class LapSample:
    """One satellite pass: duration and the azimuth of its central point."""

    duration: float  # t_c in (0, T_m] [s]
    azimuth: float   # psi, uniform on [0, 2 pi) [rad]


@dataclass
class SatelliteState:
    """Satellite position relative to the region centre, plus the
    elevation seen from the centre at the same instant."""

    x: float
    y: float
    z: float
    elevation_origin: float


def derive_constants(cfg: OrbitConfig) -> OrbitDerived:
    """Evaluate the orbital rate, central angle, and maximum lap length."""
    r_orbit = cfg.altitude + cfg.earth_radius
    omega_s = math.sqrt(cfg.mu_earth / r_orbit ** 3)
    omega_e = 2.0 * math.pi / cfg.sidereal_day
    omega = (omega_s - omega_e * math.cos(cfg.inclination)) / 2.0
    if omega <= 0:
        raise ConfigError("effective angular rate omega must be positive")
    cos_arg = (cfg.earth_radius / r_orbit) * math.cos(cfg.min_elevation)
    gamma0 = math.acos(min(1.0, max(-1.0, cos_arg))) - cfg.min_elevation
    if gamma0 < 0:
        raise ConfigError("minimum elevation exceeds the horizon geometry (gamma_0 < 0)")
    return OrbitDerived(
        omega_s=omega_s,
        omega_e=omega_e,
        omega=omega,
        gamma0=gamma0,
        t_max=gamma0 / omega,
        r_orbit=r_orbit,
        earth_radius=cfg.earth_radius,
    )


def lap_pdf(tc, derived: OrbitDerived):
    """Pass-duration density, zero outside (0, T_m].

    Diverges as t_c -> T_m; the value exactly at T_m is reported as
    ``inf``.  Integrate it, do not evaluate it pointwise at the endpoint.
    """
    tc = np.asarray(tc, dtype=float)
    w, g0 = derived.omega, derived.gamma0
    inside = (tc > 0.0) & (tc <= derived.t_max)
    x = np.where(inside, w * tc, 0.0)
    gap = np.cos(x) ** 2 - math.cos(g0) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = w * math.cos(g0) * np.tan(x) / (g0 * np.sqrt(gap))
    dens = np.where(inside, dens, 0.0)
    dens = np.where(inside & (gap <= 0.0), np.inf, dens)
    if np.ndim(tc) == 0:
        return float(dens)
    return dens


def lap_cdf(tc, derived: OrbitDerived):
    """Closed-form CDF of the lap duration (checked against quadrature)."""
    tc = np.asarray(tc, dtype=float)
    w, g0 = derived.omega, derived.gamma0
    t = np.clip(tc, 0.0, derived.t_max)
    ratio = np.clip(math.cos(g0) / np.cos(w * t), -1.0, 1.0)
    out = 1.0 - np.arccos(ratio) / g0
    out = np.where(tc <= 0.0, 0.0, np.where(tc >= derived.t_max, 1.0, out))
    if np.ndim(tc) == 0:
        return float(out)
    return out


def sample_lap_duration(derived: OrbitDerived, rng: np.random.Generator, size=None):
    """Draw lap duration(s) through the inverse CDF.

    t_c = (1/omega) arccos(cos gamma_0 / cos(gamma_0 (1 - u)))

    u is taken from (0, 1], which maps onto durations in (0, T_m].
    """
    if derived.t_max <= 0:
        raise ConfigError("cannot sample laps: T_m is zero")
    u = 1.0 - rng.random(size)  # (0, 1]
    g0, w = derived.gamma0, derived.omega
    arg = np.clip(math.cos(g0) / np.cos(g0 * (1.0 - u)), -1.0, 1.0)
    t = np.arccos(arg) / w
    if size is None:
        return float(t)
    return t


def sample_lap(derived: OrbitDerived, rng: np.random.Generator) -> LapSample:
    """Draw one lap: duration from the pass PDF, azimuth uniform."""
    duration = sample_lap_duration(derived, rng)
    azimuth = rng.random() * 2.0 * math.pi
    return LapSample(duration=duration, azimuth=azimuth)


def central_angle(t, duration_tc, derived: OrbitDerived, form: str = "symmetric"):
    """Earth central angle between satellite and region centre at lap time t.

    symmetric:  theta_c(t) = 2 omega |t - t_c/2| + gamma_0 - omega t_c
                (equals gamma_0 at both ends of the pass, minimal mid-pass,
                and reaches zero for a maximal lap)
    asymmetric: theta_c(t) = |omega t / 2 - omega t_c| + gamma_0 - omega t_c
                (halved-slope one-sided variant, kept for comparison)
    """
    t = np.asarray(t, dtype=float)
    tc = np.asarray(duration_tc, dtype=float)
    w, g0 = derived.omega, derived.gamma0
    if form == "symmetric":
        theta = 2.0 * w * np.abs(t - tc / 2.0) + g0 - w * tc
    elif form == "asymmetric":
        theta = np.abs(w * t / 2.0 - w * tc) + g0 - w * tc
    else:
        raise ConfigError(f"unknown central-angle form {form!r}")
    if np.ndim(t) == 0 and np.ndim(tc) == 0:
        return float(theta)
    return theta


def elevation_from_central_angle(theta, derived: OrbitDerived):
    """Elevation at the region centre for central angle theta.

    alpha = arctan((r_S cos theta - R_e) / (r_S sin theta)); theta = 0 is
    the overhead pass and maps to pi/2 exactly.
    """
    theta = np.asarray(theta, dtype=float)
    rs = derived.r_orbit
    re = derived.earth_radius
    sin_t = np.sin(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.arctan((rs * np.cos(theta) - re) / (rs * sin_t))
    alpha = np.where(theta == 0.0, np.pi / 2.0, alpha)
    if np.ndim(theta) == 0:
        return float(alpha)
    return alpha


def elevation_at_origin(t, lap: LapSample, derived: OrbitDerived, form: str = "symmetric"):
    """Elevation angle at the region centre as a function of lap time."""
    theta = central_angle(t, lap.duration, derived, form=form)
    return elevation_from_central_angle(theta, derived)


def slant_range(alpha, cfg: OrbitConfig):
    """Exact slant distance from the region centre at elevation alpha:
    d = sqrt(r_S^2 - R_e^2 cos^2 alpha) - R_e sin alpha."""
    alpha = np.asarray(alpha, dtype=float)
    rs = cfg.altitude + cfg.earth_radius
    re = cfg.earth_radius
    return np.sqrt(rs * rs - (re * np.cos(alpha)) ** 2) - re * np.sin(alpha)


def satellite_state(
    t,
    lap: LapSample,
    derived: OrbitDerived,
    cfg: OrbitConfig,
    form: str = "symmetric",
    range_mode: str = "altitude",
) -> SatelliteState:
    """Cartesian satellite position during a lap, region centre at origin.

    altitude mode keeps the range pinned at the orbital altitude (a
    sphere of radius h_S around the region centre); slant mode uses the
    exact spherical-earth range at the current elevation instead.

        x = d cos(alpha) cos(psi),  y = d cos(alpha) sin(psi),
        z = d sin(alpha)
    """
    alpha = elevation_at_origin(t, lap, derived, form=form)
    if range_mode == "altitude":
        d = cfg.altitude
    elif range_mode == "slant":
        d = float(slant_range(alpha, cfg))
    else:
        raise ConfigError(f"unknown satellite range mode {range_mode!r}")
    return SatelliteState(
        x=d * math.cos(alpha) * math.cos(lap.azimuth),
        y=d * math.cos(alpha) * math.sin(lap.azimuth),
        z=d * math.sin(alpha),
        elevation_origin=float(alpha),
    )


def device_elevation_and_distance(dev_xy, sat: SatelliteState):
    """Per-device look angle and slant distance to the satellite.

    elevation = arctan2(z, horizontal distance); distance is the full 3-D
    separation.  Accepts a single (2,) point or an (n, 2) array.
    """
    dev_xy = np.asarray(dev_xy, dtype=float)
    dx = sat.x - dev_xy[..., 0]
    dy = sat.y - dev_xy[..., 1]
    horiz = np.hypot(dx, dy)
    elev = np.arctan2(sat.z, horiz)
    dist = np.sqrt(horiz * horiz + sat.z * sat.z)
    if dev_xy.ndim == 1:
        return float(elev), float(dist)
    return elev, dist


@dataclass
class LapSequence:
    """Back-to-back laps tiling a simulation horizon.

    starts[i] is the absolute start time of lap i; the final lap may
    extend past the horizon (it is truncated by the consumer).
    """

    starts: np.ndarray     # (n_laps,) [s]
    durations: np.ndarray  # (n_laps,) [s]
    azimuths: np.ndarray   # (n_laps,) [rad]

    @classmethod
    def generate(cls, derived: OrbitDerived, rng: np.random.Generator, horizon: float):
        starts, durations, azimuths = [], [], []
        t = 0.0
        while t < horizon:
            lap = sample_lap(derived, rng)
            starts.append(t)
            durations.append(lap.duration)
            azimuths.append(lap.azimuth)
            t += lap.duration
        return cls(
            starts=np.array(starts),
            durations=np.array(durations),
            azimuths=np.array(azimuths),
        )

    def locate(self, t):
        """Map absolute time(s) to (lap index, time within lap)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.starts, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.starts) - 1)
        return idx, t - self.starts[idx]


def export_lap_trace_csv(
    path,
    lap: LapSample,
    derived: OrbitDerived,
    cfg: OrbitConfig,
    dt: float = 1.0,
    form: str = "symmetric",
    range_mode: str = "altitude",
    header_lines=(),
):
    """Time series of one lap: (t_s, elevation_origin_deg, xc_m, yc_m, zc_m)."""
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["t_s", "elevation_origin_deg", "xc_m", "yc_m", "zc_m"])
        times = np.arange(0.0, lap.duration + dt / 2.0, dt)
        times = times[times <= lap.duration]
        for t in times:
            st = satellite_state(float(t), lap, derived, cfg, form=form, range_mode=range_mode)
            writer.writerow(
                [f"{t:.3f}", f"{math.degrees(st.elevation_origin):.6f}",
                 f"{st.x:.3f}", f"{st.y:.3f}", f"{st.z:.3f}"]
            )
