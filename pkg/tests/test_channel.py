import math

import numpy as np
import pytest
from scipy.special import ndtr

from ntnsim.channel import (
    LinkBudgetConfig,
    NtnFadingParams,
    TerrestrialChannelConfig,
    deterministic_rx_dbm,
    fspl_db,
    gamma_from_shadowed_rice,
    ntn_gamma_params,
    received_power_dbm,
    sample_ntn_fading,
    sample_shadow_fading_db,
    shadowed_rice_fit,
    shadowed_rice_params,
    terrestrial_pathloss_db,
)
from ntnsim.errors import ConfigError, ParameterRangeError

LINK = LinkBudgetConfig()
TERR = TerrestrialChannelConfig()


def test_link_budget_defaults():
    assert LINK.tx_power_dbm == 14.0
    assert LINK.sensitivity_dbm == -132.0
    assert LINK.rx_gain_dbi("haps") == 6.0
    assert LINK.rx_gain_dbi("leo") == 13.5
    assert LINK.rx_gain_dbi("terrestrial") == 6.0
    assert LINK.wavelength == pytest.approx(3.0e8 / 868e6, rel=1e-15)
    with pytest.raises(ConfigError):
        LINK.rx_gain_dbi("carrier-pigeon")


# --- path loss ---------------------------------------------------------------


def test_terrestrial_pathloss_reference():
    assert terrestrial_pathloss_db(1_000.0, TERR) == pytest.approx(128.96, abs=1e-12)
    # one decade adds exactly 10 * exponent dB
    assert terrestrial_pathloss_db(10_000.0, TERR) == pytest.approx(152.16, abs=1e-9)


def test_terrestrial_pathloss_vectorized():
    d = np.array([1_000.0, 10_000.0])
    pl = terrestrial_pathloss_db(d, TERR)
    assert pl.shape == (2,)
    assert pl[1] - pl[0] == pytest.approx(23.2, abs=1e-9)


def test_pathloss_rejects_nonpositive_distance():
    with pytest.raises(ConfigError):
        terrestrial_pathloss_db(0.0, TERR)
    with pytest.raises(ConfigError):
        fspl_db(-3.0, LINK)
    with pytest.raises(ConfigError):
        fspl_db(np.array([10.0, 0.0]), LINK)


def test_fspl_reference_values():
    # frozen against 40-digit evaluation at 868 MHz
    assert fspl_db(30_000.0, LINK) == pytest.approx(120.75459178397176, rel=1e-12)
    assert fspl_db(750_000.0, LINK) == pytest.approx(148.71339195741252, rel=1e-12)
    assert fspl_db(1_677_100.5160597064, LINK) == pytest.approx(
        155.70334854112624, rel=1e-12
    )


def test_deterministic_rx_monotone_in_distance():
    d = np.linspace(1_000.0, 2_000_000.0, 500)
    for kind in ("terrestrial", "haps", "leo"):
        rx = deterministic_rx_dbm(kind, d, LINK, TERR)
        assert np.all(np.diff(rx) < 0.0)


def test_deterministic_rx_haps_nadir():
    rx = deterministic_rx_dbm("haps", 30_000.0, LINK)
    assert rx == pytest.approx(-100.75459178397176, rel=1e-12)
    assert rx > LINK.sensitivity_dbm


def test_rx_gain_offsets():
    d = 750_000.0
    diff = deterministic_rx_dbm("leo", d, LINK) - deterministic_rx_dbm("haps", d, LINK)
    assert diff == pytest.approx(13.5 - 6.0, abs=1e-12)


# --- elevation-dependent fading parameters ------------------------------------


def test_fit_reference_values_overhead():
    b0, m, om = shadowed_rice_fit(90.0)
    assert b0 == pytest.approx(0.023734993, rel=1e-9)
    assert m == pytest.approx(40.346804, rel=1e-9)
    assert om == pytest.approx(1.187032, rel=1e-9)


def test_gamma_identity_on_fit_grid():
    # k * theta == 2 b0 + Omega algebraically, checked at every whole degree
    for a in range(10, 91):
        b0, m, om = shadowed_rice_fit(float(a))
        k, theta = gamma_from_shadowed_rice(b0, m, om)
        lhs = k * theta
        rhs = 2.0 * b0 + om
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_gamma_reference_values():
    k, theta = gamma_from_shadowed_rice(*shadowed_rice_fit(90.0))
    assert k == pytest.approx(10.168541815626473, rel=1e-12)
    assert theta == pytest.approx(0.12140403298562270, rel=1e-12)
    k45, th45 = gamma_from_shadowed_rice(*shadowed_rice_fit(45.0))
    assert k45 == pytest.approx(2.4756967479045132, rel=1e-12)
    assert th45 == pytest.approx(0.31717204819799914, rel=1e-12)


def test_validated_params_in_range():
    for deg in (20.0, 45.0, 90.0):
        p = shadowed_rice_params(math.radians(deg))
        assert isinstance(p, NtnFadingParams)
        assert p.k > 0 and p.theta > 0
        assert p.k * p.theta == pytest.approx(2 * p.b0 + p.omega, rel=1e-12)


def test_validated_params_reject_low_elevation():
    # the cubic fit yields a negative mean power term at low angles; the
    # validated layer refuses to sample from it
    with pytest.raises(ParameterRangeError):
        shadowed_rice_params(math.radians(12.0))
    with pytest.raises(ParameterRangeError):
        shadowed_rice_params(math.radians(5.0))  # clamped to the fit edge


def test_clamp_below_fit_edge():
    # below 10 deg the raw fit is not extrapolated
    lo = shadowed_rice_fit(10.0)
    assert shadowed_rice_fit(10.0) == lo


def test_vectorized_params_match_scalar():
    degs = np.arange(17.0, 90.5, 0.5)
    k_v, th_v = ntn_gamma_params(np.radians(degs))
    for i, a in enumerate(degs):
        p = shadowed_rice_params(math.radians(a))
        assert k_v[i] == pytest.approx(p.k, rel=1e-12)
        assert th_v[i] == pytest.approx(p.theta, rel=1e-12)


def test_vectorized_params_reject_bad_angles():
    with pytest.raises(ParameterRangeError):
        ntn_gamma_params(np.radians(np.array([45.0, 12.0])))


# --- sampling ------------------------------------------------------------------


def test_gamma_moments(rng):
    p = shadowed_rice_params(math.radians(45.0))
    g = sample_ntn_fading(p, rng, size=1_000_000)
    mean = p.k * p.theta
    var = p.k * p.theta**2
    assert abs(g.mean() - mean) <= 0.01 * mean
    assert abs(g.var() - var) <= 0.02 * var


def test_gamma_sampler_rejects_bad_params(rng):
    with pytest.raises(ParameterRangeError):
        sample_ntn_fading(NtnFadingParams(0.1, 1.0, -0.5, -1.0, 0.2), rng)


def test_shadow_sampler_moments(rng):
    x = sample_shadow_fading_db(TERR, rng, size=500_000)
    assert abs(x.mean()) < 0.05
    assert x.std() == pytest.approx(7.8, rel=0.01)


def test_zero_sigma_shadow_consumes_no_randomness():
    quiet = TerrestrialChannelConfig(shadow_sigma_db=0.0)
    a = np.random.default_rng(11)
    b = np.random.default_rng(11)
    out = sample_shadow_fading_db(quiet, a, size=1_000)
    assert np.all(out == 0.0)
    assert a.bit_generator.state == b.bit_generator.state


def test_received_power_deterministic_same_seed():
    x = received_power_dbm("leo", 750e3, math.radians(45), LINK,
                           rng=np.random.default_rng(7))
    y = received_power_dbm("leo", 750e3, math.radians(45), LINK,
                           rng=np.random.default_rng(7))
    assert x == y


def test_received_power_fading_override():
    rx = received_power_dbm("haps", 30_000.0, math.pi / 2, LINK, fading_db=0.0)
    assert rx == pytest.approx(-100.75459178397176, rel=1e-12)
    rx2 = received_power_dbm("terrestrial", 1_000.0, None, LINK, TERR, fading_db=-3.0)
    assert rx2 == pytest.approx(14 + 0 + 6 - 128.96 - 3.0, abs=1e-9)


def test_received_power_requires_rng_or_override():
    with pytest.raises(ConfigError):
        received_power_dbm("haps", 30_000.0, math.pi / 2, LINK)


# --- closed-form erasure check ---------------------------------------------------


def test_terrestrial_erasure_matches_gaussian_closed_form(rng):
    d = 10_000.0
    det = deterministic_rx_dbm("terrestrial", d, LINK, TERR)
    assert det == pytest.approx(-132.16, abs=1e-9)
    p_model = float(ndtr((LINK.sensitivity_dbm - det) / TERR.shadow_sigma_db))
    assert p_model == pytest.approx(0.5081828575307479, rel=1e-12)

    n = 1_000_000
    shadow = sample_shadow_fading_db(TERR, rng, size=n)
    p_mc = np.mean(det + shadow < LINK.sensitivity_dbm)
    assert abs(p_mc - p_model) < 0.005
