"""
Discounted total cost of ownership
==================================

Each connectivity option is an upfront CAPEX plus a yearly OPEX stream
discounted to present value:

    total = CAPEX + sum_{n=1..Y} OPEX / (1 + sigma)^n

Defaults: 20-year horizon, 5% discount rate, HAPS = ($4M, $30k/yr),
LEO service = ($0, $24 per device per year), terrestrial leasing =
($0, $12,600 per base station per year).  The LEO per-device price can
optionally step down with fleet size via a piecewise table.

Money is handled as exact rationals internally (the discount factor
1/1.05 is the rational 20/21) and rounded to whole cents only at the
boundary, so repeated sweeps cannot accumulate float drift.
"""

from dataclasses import dataclass
from fractions import Fraction

from .errors import ConfigError

DEFAULT_DISCOUNT_RATE = 0.05
DEFAULT_HORIZON_YEARS = 20

DEFAULT_HAPS_CAPEX = 4e6
DEFAULT_HAPS_OPEX = 30e3
DEFAULT_LEO_PRICE_PER_DEVICE = 24.0
DEFAULT_TN_LEASE_PER_BS = 12600.0


def _money(x) -> Fraction:
    # snap a config float like 0.05 or 12600.0 to the decimal it denotes
    return Fraction(x).limit_denominator(10 ** 9)


@dataclass
class CostModel:
    """One architecture's cost structure."""

    capex: float
    opex_per_year: callable            # (n_devices, n_bs) -> USD/year
    discount_rate: float = DEFAULT_DISCOUNT_RATE
    horizon_years: int = DEFAULT_HORIZON_YEARS

    def __post_init__(self):
        if self.horizon_years < 0:
            raise ConfigError(f"horizon must be >= 0 years, got {self.horizon_years}")
        if self.discount_rate < 0:
            raise ConfigError(f"discount rate must be >= 0, got {self.discount_rate}")


def annuity_factor(discount_rate: float, years: int) -> Fraction:
    """sum_{n=1..Y} (1 + sigma)^-n as an exact rational."""
    if years < 0:
        raise ConfigError(f"years must be >= 0, got {years}")
    sigma = _money(discount_rate)
    if sigma == 0:
        return Fraction(years)
    one = Fraction(1)
    per = one / (one + sigma)
    # geometric sum: per (1 - per^Y) / (1 - per)
    return per * (one - per ** years) / (one - per)


def npv_total(model: CostModel, n_devices: int = 0, n_bs: int = 0) -> float:
    """CAPEX plus discounted OPEX stream, rounded to cents."""
    opex = _money(model.opex_per_year(n_devices, n_bs))
    total = _money(model.capex) + opex * annuity_factor(model.discount_rate,
                                                        model.horizon_years)
    return float(round(total, 2))


@dataclass
class CostParameters:
    """All tunable prices for the three architectures."""

    haps_capex: float = DEFAULT_HAPS_CAPEX
    haps_opex: float = DEFAULT_HAPS_OPEX
    leo_price_per_device: float = DEFAULT_LEO_PRICE_PER_DEVICE
    tn_lease_per_bs: float = DEFAULT_TN_LEASE_PER_BS
    discount_rate: float = DEFAULT_DISCOUNT_RATE
    horizon_years: int = DEFAULT_HORIZON_YEARS
    # optional volume pricing: sorted (min_devices, price) steps; the
    # bracket containing N prices the whole fleet.  Empty = flat price.
    leo_price_table: tuple = ()

    def leo_unit_price(self, n_devices: int) -> float:
        price = self.leo_price_per_device
        for threshold, p in sorted(self.leo_price_table):
            if n_devices >= threshold:
                price = p
        return price


def haps_model(params: CostParameters = None) -> CostModel:
    p = params or CostParameters()
    return CostModel(capex=p.haps_capex,
                     opex_per_year=lambda n, m: p.haps_opex,
                     discount_rate=p.discount_rate,
                     horizon_years=p.horizon_years)


def leo_model(params: CostParameters = None) -> CostModel:
    p = params or CostParameters()
    return CostModel(capex=0.0,
                     opex_per_year=lambda n, m: p.leo_unit_price(n) * n,
                     discount_rate=p.discount_rate,
                     horizon_years=p.horizon_years)


def terrestrial_model(params: CostParameters = None) -> CostModel:
    # hardware CAPEX deliberately zero: towers are leased, not built
    p = params or CostParameters()
    return CostModel(capex=0.0,
                     opex_per_year=lambda n, m: p.tn_lease_per_bs * m,
                     discount_rate=p.discount_rate,
                     horizon_years=p.horizon_years)


def scenario_costs(n_devices: int, n_bs_terrestrial: int,
                   params: CostParameters = None) -> dict:
    """Total NPV per architecture at one fleet size."""
    p = params or CostParameters()
    return {
        "haps": npv_total(haps_model(p), n_devices, n_bs_terrestrial),
        "leo": npv_total(leo_model(p), n_devices, n_bs_terrestrial),
        "terrestrial": npv_total(terrestrial_model(p), n_devices, n_bs_terrestrial),
    }


def crossover_devices(model_a: CostModel, model_b: CostModel,
                      n_bs_a: int = 0, n_bs_b: int = 0,
                      n_cap: int = 10 ** 8):
    """Smallest device count N where cost_a(N) >= cost_b(N), else None.

    Assumes the comparison flips at most once over N (both costs are
    monotone in N for every model built here); found by exponential
    bracketing plus bisection.  Returns 0 when a already matches b with
    no devices.
    """
    def ge(n):
        return npv_total(model_a, n, n_bs_a) >= npv_total(model_b, n, n_bs_b)

    if ge(0):
        return 0
    lo, hi = 0, 1
    while not ge(hi):
        lo, hi = hi, hi * 2
        if hi > n_cap:
            return None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ge(mid):
            hi = mid
        else:
            lo = mid
    return hi
