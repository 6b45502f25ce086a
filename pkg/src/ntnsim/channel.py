"""
Link budget and channel models
==============================

Two propagation regimes share one received-power contract:

terrestrial   empirical log-normal path loss B + 10 eta log10(d/d0) with
              zero-mean Gaussian shadow fading (sigma_SF, dB)

HAPS / LEO    free-space path loss 20 log10(4 pi d / lambda) with
              shadowed-Rice small-scale fading whose power gain |r|^2 is
              approximated by a gamma distribution.  The gamma shape and
              scale derive from the elevation-dependent empirical cubics
              b_0(alpha), m(alpha), Omega(alpha):

                  k     = m (2 b0 + Om)^2 / (4 m b0^2 + 4 m b0 Om + Om^2)
                  theta = (4 m b0^2 + 4 m b0 Om + Om^2) / (m (2 b0 + Om))

              so that k * theta == 2 b0 + Om identically.

The cubics are fits over elevation in DEGREES on roughly 10..90 degrees;
this is the single place where radians are converted to degrees.  Below
10 degrees the parameters are clamped to their 10-degree values instead
of extrapolating the fit.  Noise is not modeled: reception is a pure
power-threshold test against the sensitivity gamma, and collisions are
handled separately by the MAC layer.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParameterRangeError

SPEED_OF_LIGHT = 3.0e8  # m/s

#: lower edge of the elevation fit's validity; inputs below are clamped.
FIT_MIN_ELEVATION_DEG = 10.0

# cubic fit coefficients over elevation in degrees, highest power first
_B0_COEFFS = (-4.7943e-8, 5.5784e-6, -2.1344e-4, 3.2710e-2)
_M_COEFFS = (6.3739e-5, 5.8533e-4, -1.5973e-1, 3.5156)
_OMEGA_COEFFS = (1.4428e-5, -2.3798e-3, 1.2702e-1, -1.4864)

LINK_KINDS = ("terrestrial", "haps", "leo")


@dataclass
class LinkBudgetConfig:
    """Transmit side, antenna gains, and the receiver sensitivity."""

    tx_power_dbm: float = 14.0
    carrier_hz: float = 868e6
    tx_gain_dbi: float = 0.0          # device antenna, isotropic
    haps_rx_gain_dbi: float = 6.0
    sat_rx_gain_dbi: float = 13.5
    terr_rx_gain_dbi: float = 6.0
    sensitivity_dbm: float = -132.0   # erasure threshold gamma

    def __post_init__(self):
        if self.carrier_hz <= 0:
            raise ConfigError(f"carrier frequency must be positive, got {self.carrier_hz}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_hz

    def rx_gain_dbi(self, link_kind: str) -> float:
        if link_kind == "terrestrial":
            return self.terr_rx_gain_dbi
        if link_kind == "haps":
            return self.haps_rx_gain_dbi
        if link_kind == "leo":
            return self.sat_rx_gain_dbi
        raise ConfigError(f"unknown link kind {link_kind!r}")


@dataclass
class TerrestrialChannelConfig:
    """Log-normal path loss parameters (868 MHz empirical fit)."""

    ref_distance: float = 1e3        # d_0 [m]
    ref_pathloss_db: float = 128.96  # B
    exponent: float = 2.32           # eta
    shadow_sigma_db: float = 7.8     # sigma_SF

    def __post_init__(self):
        if self.exponent <= 0:
            raise ConfigError(f"path loss exponent must be positive, got {self.exponent}")
        if self.shadow_sigma_db < 0:
            raise ConfigError(f"shadow sigma must be >= 0, got {self.shadow_sigma_db}")


@dataclass
class NtnFadingParams:
    """Shadowed-Rice parameters and their gamma approximation."""

    b0: float
    m: float
    omega: float
    k: float      # gamma shape
    theta: float  # gamma scale


def terrestrial_pathloss_db(d, cfg: TerrestrialChannelConfig):
    """B + 10 eta log10(d / d0), dB."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ConfigError("terrestrial path loss requires distance > 0")
    out = cfg.ref_pathloss_db + 10.0 * cfg.exponent * np.log10(d / cfg.ref_distance)
    if np.ndim(d) == 0:
        return float(out)
    return out


def fspl_db(d, cfg: LinkBudgetConfig):
    """Free-space path loss 20 log10(4 pi d / lambda), dB (gains excluded)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ConfigError("free-space path loss requires distance > 0")
    out = 20.0 * np.log10(4.0 * np.pi * d / cfg.wavelength)
    if np.ndim(d) == 0:
        return float(out)
    return out


def shadowed_rice_fit(alpha_deg):
    """Raw cubic fits b_0, m, Omega over elevation in degrees.

    No clamping or validation; Omega goes negative below roughly 16
    degrees, which is outside the physically usable part of the fit.
    """
    a = np.asarray(alpha_deg, dtype=float)
    b0 = np.polyval(_B0_COEFFS, a)
    m = np.polyval(_M_COEFFS, a)
    omega = np.polyval(_OMEGA_COEFFS, a)
    return b0, m, omega


def gamma_from_shadowed_rice(b0, m, omega):
    """Moment-matched gamma (shape, scale) for the shadowed-Rice power gain.

    Pure algebra; k * theta == 2 b0 + omega by construction.
    """
    b0 = np.asarray(b0, dtype=float)
    m = np.asarray(m, dtype=float)
    omega = np.asarray(omega, dtype=float)
    mean = 2.0 * b0 + omega
    denom = 4.0 * m * b0 ** 2 + 4.0 * m * b0 * omega + omega ** 2
    k = m * mean ** 2 / denom
    theta = denom / (m * mean)
    return k, theta


def shadowed_rice_params(alpha) -> NtnFadingParams:
    """Validated fading parameters at elevation ``alpha`` (radians).

    Elevations below the fit floor (10 degrees) are clamped to the floor.
    Raises :class:`ParameterRangeError` if any of b0, m, Omega, k, theta
    comes out non-positive, which happens for clamped elevations below
    about 16 degrees where the Omega cubic is negative.
    """
    alpha_deg = max(float(np.degrees(alpha)), FIT_MIN_ELEVATION_DEG)
    b0, m, omega = shadowed_rice_fit(alpha_deg)
    k, theta = gamma_from_shadowed_rice(b0, m, omega)
    values = {"b0": b0, "m": m, "omega": omega, "k": k, "theta": theta}
    bad = [name for name, v in values.items() if not v > 0.0]
    if bad:
        raise ParameterRangeError(
            f"shadowed-Rice fit invalid at elevation {alpha_deg:.2f} deg: "
            + ", ".join(f"{n}={values[n]:.4g}" for n in bad)
        )
    return NtnFadingParams(b0=float(b0), m=float(m), omega=float(omega),
                           k=float(k), theta=float(theta))


def ntn_gamma_params(alpha_rad_array):
    """Vectorized (k, theta) for an array of elevations in radians.

    Same clamping and positivity rules as :func:`shadowed_rice_params`.
    """
    a = np.maximum(np.degrees(np.asarray(alpha_rad_array, dtype=float)),
                   FIT_MIN_ELEVATION_DEG)
    b0, m, omega = shadowed_rice_fit(a)
    k, theta = gamma_from_shadowed_rice(b0, m, omega)
    if not (np.all(b0 > 0) and np.all(m > 0) and np.all(omega > 0)
            and np.all(k > 0) and np.all(theta > 0)):
        worst = float(np.min(a))
        raise ParameterRangeError(
            f"shadowed-Rice fit produced non-positive parameters "
            f"(lowest elevation {worst:.2f} deg)"
        )
    return k, theta


def sample_ntn_fading(params: NtnFadingParams, rng: np.random.Generator, size=None):
    """Draw linear power gain(s) from Gamma(shape k, scale theta)."""
    if params.k <= 0 or params.theta <= 0:
        raise ParameterRangeError(
            f"gamma parameters must be positive, got k={params.k}, theta={params.theta}"
        )
    draw = rng.gamma(params.k, params.theta, size=size)
    if size is None:
        return float(draw)
    return draw


def sample_shadow_fading_db(cfg: TerrestrialChannelConfig, rng: np.random.Generator, size=None):
    """Draw zero-mean Gaussian shadow fading in dB."""
    if cfg.shadow_sigma_db == 0.0:
        return 0.0 if size is None else np.zeros(size)
    draw = rng.normal(0.0, cfg.shadow_sigma_db, size=size)
    if size is None:
        return float(draw)
    return draw


def deterministic_rx_dbm(link_kind, d, link_cfg: LinkBudgetConfig,
                         terr_cfg: TerrestrialChannelConfig = None):
    """Received power before fading: TX power + gains - path loss."""
    base = link_cfg.tx_power_dbm + link_cfg.tx_gain_dbi + link_cfg.rx_gain_dbi(link_kind)
    if link_kind == "terrestrial":
        if terr_cfg is None:
            raise ConfigError("terrestrial link needs a TerrestrialChannelConfig")
        return base - terrestrial_pathloss_db(d, terr_cfg)
    return base - fspl_db(d, link_cfg)


def received_power_dbm(
    link_kind: str,
    d,
    alpha,
    link_cfg: LinkBudgetConfig,
    terr_cfg: TerrestrialChannelConfig = None,
    rng: np.random.Generator = None,
    fading_db=None,
):
    """One received-power realization in dBm.

    terrestrial: p_t + G_t + G_RT - g_T(d) + shadow  (shadow ~ N(0, sigma^2) dB)
    haps / leo:  p_t + G_t + G_R  - FSPL(d) + 10 log10(g), g ~ Gamma(k, theta)
                 with (k, theta) evaluated at elevation ``alpha`` (radians)

    ``fading_db`` overrides the stochastic term (0.0 forces unit gain);
    otherwise ``rng`` must be supplied.
    """
    det = deterministic_rx_dbm(link_kind, d, link_cfg, terr_cfg)
    if fading_db is not None:
        return det + fading_db
    if rng is None:
        raise ConfigError("received_power_dbm needs an rng unless fading_db is given")
    if link_kind == "terrestrial":
        return det + sample_shadow_fading_db(terr_cfg, rng)
    if alpha is None:
        raise ConfigError(f"{link_kind} link requires an elevation angle")
    gain = sample_ntn_fading(shadowed_rice_params(alpha), rng)
    return det + 10.0 * np.log10(gain)
