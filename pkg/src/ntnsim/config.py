"""
Flat key = value configuration
==============================

One parameter per line, ``key = value``; blank lines and ``#`` comments
are ignored.  Every physical parameter of the system has a default here
(the reference deployment: 80 km region, HAPS at 30 km, LEO at 750 km,
868 MHz LR-FHSS radio, the standard price sheet), so an empty or absent
config file is a complete experiment description.

The resolved key set is hashed (sha256, first 12 hex digits) and echoed
into every output file so a result can be traced back to its exact
configuration.
"""

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction

from .channel import LinkBudgetConfig, TerrestrialChannelConfig
from .cost import CostParameters
from .errors import ConfigError
from .geometry import HapsConfig, RegionConfig
from .lrfhss import LrfhssConfig
from .orbit import CENTRAL_ANGLE_FORMS, RANGE_MODES, OrbitConfig

# key -> (canonical default string, parser kind)
# kinds: f float, i int, b bool, s string, cr coding rate (accepts a/b),
#        pt price table "min_n:price,min_n:price"
DEFAULTS = {
    "region_radius_m": ("80000", "f"),
    "guard_radius_m": ("240000", "f"),
    "min_bs_separation_m": ("20000", "f"),
    "earth_radius_m": ("6378100", "f"),
    "haps_altitude_m": ("30000", "f"),
    "sat_altitude_m": ("750000", "f"),
    "orbit_inclination_deg": ("60", "f"),
    "min_elevation_deg": ("20", "f"),
    "mu_earth_m3s2": ("3.986004418e14", "f"),
    "sidereal_day_s": ("86164.1", "f"),
    "tx_power_dbm": ("14", "f"),
    "carrier_freq_hz": ("868000000", "f"),
    "tx_gain_dbi": ("0", "f"),
    "haps_rx_gain_dbi": ("6", "f"),
    "sat_rx_gain_dbi": ("13.5", "f"),
    "terr_rx_gain_dbi": ("6", "f"),
    "sensitivity_dbm": ("-132", "f"),
    "ref_distance_m": ("1000", "f"),
    "pathloss_ref_db": ("128.96", "f"),
    "pathloss_exponent": ("2.32", "f"),
    "shadow_sigma_db": ("7.8", "f"),
    "n_channels": ("35", "i"),
    "n_header_copies": ("3", "i"),
    "header_duration_ms": ("233.472", "f"),
    "fragment_duration_ms": ("102.4", "f"),
    "coding_rate": ("1/3", "cr"),
    "payload_bytes": ("10", "i"),
    "channel_width_hz": ("488", "f"),
    "mean_tx_interval_s": ("900", "f"),
    "n_basestations": ("10", "i"),
    "placement_max_attempts": ("10000", "i"),
    "satellite_range_mode": ("altitude", "s"),
    "central_angle_form": ("symmetric", "s"),
    "collision_requires_collider_above_gamma": ("false", "b"),
    "fixed_layout": ("false", "b"),
    "heatmap_bin_m": ("8000", "f"),
    "radial_rings": ("8", "i"),
    "violin_bins": ("40", "i"),
    "haps_capex_usd": ("4000000", "f"),
    "haps_opex_usd_per_year": ("30000", "f"),
    "leo_price_per_device_usd_per_year": ("24", "f"),
    "leo_price_table": ("", "pt"),
    "tn_lease_per_bs_usd_per_year": ("12600", "f"),
    "discount_rate": ("0.05", "f"),
    "cost_horizon_years": ("20", "i"),
    "cost_n_max": ("20000", "i"),
    "cost_n_step": ("250", "i"),
}

_TRUE = {"true", "1", "yes", "on"}
_FALSE = {"false", "0", "no", "off"}


def _convert(key: str, raw: str, kind: str, where: str):
    try:
        if kind == "f":
            return float(raw)
        if kind == "i":
            v = float(raw)
            if v != int(v):
                raise ValueError("not an integer")
            return int(v)
        if kind == "b":
            low = raw.strip().lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError("not a boolean")
        if kind == "cr":
            if "/" in raw:
                num, den = raw.split("/")
                return float(Fraction(int(num), int(den)))
            return float(raw)
        if kind == "pt":
            raw = raw.strip()
            if not raw:
                return ()
            steps = []
            for part in raw.split(","):
                n_txt, p_txt = part.split(":")
                steps.append((int(n_txt), float(p_txt)))
            return tuple(sorted(steps))
        return raw.strip()
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: bad value {raw!r} for key {key!r} ({exc})") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Raw key -> value strings from flat config text, with diagnostics."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass
class SimulationConfig:
    """Typed view of one resolved configuration."""

    region: RegionConfig
    haps: HapsConfig
    orbit: OrbitConfig
    link: LinkBudgetConfig
    terrestrial: TerrestrialChannelConfig
    mac: LrfhssConfig
    cost: CostParameters
    mean_tx_interval_s: float
    n_basestations: int
    placement_max_attempts: int
    satellite_range_mode: str
    central_angle_form: str
    collision_requires_collider_above_gamma: bool
    fixed_layout: bool
    heatmap_bin_m: float
    radial_rings: int
    violin_bins: int
    cost_n_max: int
    cost_n_step: int
    resolved: dict           # canonical key -> value strings, for hashing


def _resolve(overrides: dict, source: str):
    vals = {}
    resolved = {}
    for key, (default_raw, kind) in DEFAULTS.items():
        raw = overrides.get(key, default_raw)
        vals[key] = _convert(key, raw, kind, source)
        resolved[key] = raw
    return vals, resolved


def build_config(overrides: dict = None, source: str = "<config>") -> SimulationConfig:
    """Assemble and validate a SimulationConfig from raw string overrides."""
    vals, resolved = _resolve(overrides or {}, source)

    if vals["satellite_range_mode"] not in RANGE_MODES:
        raise ConfigError(
            f"{source}: satellite_range_mode must be one of {RANGE_MODES}, "
            f"got {vals['satellite_range_mode']!r}"
        )
    if vals["central_angle_form"] not in CENTRAL_ANGLE_FORMS:
        raise ConfigError(
            f"{source}: central_angle_form must be one of {CENTRAL_ANGLE_FORMS}, "
            f"got {vals['central_angle_form']!r}"
        )
    if vals["mean_tx_interval_s"] <= 0:
        raise ConfigError(f"{source}: mean_tx_interval_s must be positive")
    if vals["n_basestations"] < 0:
        raise ConfigError(f"{source}: n_basestations must be >= 0")

    region = RegionConfig(
        radius=vals["region_radius_m"],
        guard_radius=vals["guard_radius_m"],
        min_bs_separation=vals["min_bs_separation_m"],
        earth_radius=vals["earth_radius_m"],
    )
    haps = HapsConfig(altitude=vals["haps_altitude_m"])
    orbit = OrbitConfig(
        altitude=vals["sat_altitude_m"],
        inclination=math.radians(vals["orbit_inclination_deg"]),
        min_elevation=math.radians(vals["min_elevation_deg"]),
        earth_radius=vals["earth_radius_m"],
        mu_earth=vals["mu_earth_m3s2"],
        sidereal_day=vals["sidereal_day_s"],
    )
    link = LinkBudgetConfig(
        tx_power_dbm=vals["tx_power_dbm"],
        carrier_hz=vals["carrier_freq_hz"],
        tx_gain_dbi=vals["tx_gain_dbi"],
        haps_rx_gain_dbi=vals["haps_rx_gain_dbi"],
        sat_rx_gain_dbi=vals["sat_rx_gain_dbi"],
        terr_rx_gain_dbi=vals["terr_rx_gain_dbi"],
        sensitivity_dbm=vals["sensitivity_dbm"],
    )
    terrestrial = TerrestrialChannelConfig(
        ref_distance=vals["ref_distance_m"],
        ref_pathloss_db=vals["pathloss_ref_db"],
        exponent=vals["pathloss_exponent"],
        shadow_sigma_db=vals["shadow_sigma_db"],
    )
    mac = LrfhssConfig(
        n_channels=vals["n_channels"],
        n_header_copies=vals["n_header_copies"],
        header_duration=vals["header_duration_ms"] / 1e3,
        fragment_duration=vals["fragment_duration_ms"] / 1e3,
        coding_rate=vals["coding_rate"],
        payload_bytes=vals["payload_bytes"],
        channel_width_hz=vals["channel_width_hz"],
    )
    cost = CostParameters(
        haps_capex=vals["haps_capex_usd"],
        haps_opex=vals["haps_opex_usd_per_year"],
        leo_price_per_device=vals["leo_price_per_device_usd_per_year"],
        tn_lease_per_bs=vals["tn_lease_per_bs_usd_per_year"],
        discount_rate=vals["discount_rate"],
        horizon_years=vals["cost_horizon_years"],
        leo_price_table=vals["leo_price_table"],
    )
    return SimulationConfig(
        region=region, haps=haps, orbit=orbit, link=link,
        terrestrial=terrestrial, mac=mac, cost=cost,
        mean_tx_interval_s=vals["mean_tx_interval_s"],
        n_basestations=vals["n_basestations"],
        placement_max_attempts=vals["placement_max_attempts"],
        satellite_range_mode=vals["satellite_range_mode"],
        central_angle_form=vals["central_angle_form"],
        collision_requires_collider_above_gamma=vals[
            "collision_requires_collider_above_gamma"],
        fixed_layout=vals["fixed_layout"],
        heatmap_bin_m=vals["heatmap_bin_m"],
        radial_rings=vals["radial_rings"],
        violin_bins=vals["violin_bins"],
        cost_n_max=vals["cost_n_max"],
        cost_n_step=vals["cost_n_step"],
        resolved=resolved,
    )


def load_config(path=None, cli_overrides: dict = None) -> SimulationConfig:
    """Read a config file (optional) and apply CLI overrides on top."""
    overrides = {}
    source = "<defaults>"
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        source = str(path)
        overrides.update(parse_config_text(text, source=source))
    for key, value in (cli_overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r} from command line")
        overrides[key] = str(value)
    return build_config(overrides, source=source)


def config_hash(cfg: SimulationConfig) -> str:
    """Stable short hash of the resolved key set."""
    blob = "\n".join(f"{k} = {cfg.resolved[k]}" for k in sorted(cfg.resolved))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
