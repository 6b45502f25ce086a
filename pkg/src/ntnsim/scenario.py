"""
Scenario wiring: which receivers are listening
==============================================

A scenario is one connectivity architecture or a combination of them:
terrestrial base stations, a single HAPS above the region centre, a
single LEO satellite on repeated passes, or any union (e.g. leo+tn).
GatewaySet flattens whichever receivers are active into one ordered
list so the MAC layer can iterate them uniformly.

Evaluation order is fixed (inner BSs, guard BSs, HAPS, LEO) so that
random draws are reproducible from the configuration and seed alone.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .geometry import BasestationLayout, HapsConfig, RegionConfig
from .orbit import (
    LapSample,
    LapSequence,
    OrbitConfig,
    OrbitDerived,
    SatelliteState,
    satellite_state,
)

#: canonical scenario names; combos are unions of receiver kinds
SCENARIOS = ("tn", "haps", "leo", "haps+tn", "leo+tn", "leo+haps", "leo+haps+tn")

_KIND_ORDER = ("leo", "haps", "tn")
_ALIASES = {"terrestrial": "tn", "sat": "leo", "satellite": "leo"}


def parse_scenario(name: str) -> str:
    """Normalize a scenario name to its canonical form.

    Parts are case-insensitive and order-insensitive: "TN+LEO" and
    "leo+tn" both map to "leo+tn".
    """
    parts = []
    for raw in str(name).lower().split("+"):
        part = _ALIASES.get(raw.strip(), raw.strip())
        if part not in _KIND_ORDER:
            raise ConfigError(
                f"unknown scenario part {raw.strip()!r} in {name!r}; "
                f"expected combinations of {_KIND_ORDER}"
            )
        if part in parts:
            raise ConfigError(f"duplicate scenario part {part!r} in {name!r}")
        parts.append(part)
    if not parts:
        raise ConfigError("empty scenario name")
    return "+".join(k for k in _KIND_ORDER if k in parts)


def scenario_kinds(name: str):
    """Set of receiver kinds active in a scenario."""
    return frozenset(parse_scenario(name).split("+"))


@dataclass
class Gateway:
    gateway_id: str
    kind: str                 # terrestrial | haps | leo
    xy: np.ndarray = None     # ground position, terrestrial only


@dataclass
class LeoContext:
    """Satellite ephemeris for one simulation: lap schedule plus geometry knobs."""

    cfg: OrbitConfig
    derived: OrbitDerived
    laps: LapSequence
    angle_form: str = "symmetric"
    range_mode: str = "altitude"

    def state_at(self, t: float) -> SatelliteState:
        idx, t_in = self.laps.locate(t)
        lap = LapSample(
            duration=float(self.laps.durations[idx]),
            azimuth=float(self.laps.azimuths[idx]),
        )
        return satellite_state(
            float(t_in), lap, self.derived, self.cfg,
            form=self.angle_form, range_mode=self.range_mode,
        )


@dataclass
class GatewaySet:
    """All active receivers for one scenario, in fixed evaluation order."""

    gateways: list
    region: RegionConfig
    haps: HapsConfig = None
    leo: LeoContext = None

    @property
    def n_gateways(self) -> int:
        return len(self.gateways)

    @property
    def ids(self):
        return [g.gateway_id for g in self.gateways]

    @property
    def terrestrial_xy(self) -> np.ndarray:
        """(K, 2) positions of the terrestrial gateways, in order."""
        pts = [g.xy for g in self.gateways if g.kind == "terrestrial"]
        if not pts:
            return np.zeros((0, 2))
        return np.asarray(pts, dtype=float)


def build_gateway_set(
    scenario: str,
    region: RegionConfig,
    layout: BasestationLayout = None,
    haps: HapsConfig = None,
    leo: LeoContext = None,
) -> GatewaySet:
    """Assemble the receiver list for one architecture (or union of them).

    Terrestrial gateways come first (inner then guard), then HAPS, then
    the satellite.  A scenario with a terrestrial part and an empty
    layout is rejected: the receiver set must be non-empty.
    """
    kinds = scenario_kinds(scenario)
    gws = []
    if "tn" in kinds:
        if layout is None:
            raise ConfigError("terrestrial scenario part needs a BasestationLayout")
        if layout.n_total == 0:
            raise ConfigError("terrestrial scenario part has zero base stations")
        for i, xy in enumerate(layout.inner):
            gws.append(Gateway(f"bs_inner_{i}", "terrestrial", np.asarray(xy, dtype=float)))
        for i, xy in enumerate(layout.guard):
            gws.append(Gateway(f"bs_guard_{i}", "terrestrial", np.asarray(xy, dtype=float)))
    if "haps" in kinds:
        if haps is None:
            raise ConfigError("haps scenario part needs a HapsConfig")
        gws.append(Gateway("haps", "haps"))
    if "leo" in kinds:
        if leo is None:
            raise ConfigError("leo scenario part needs a LeoContext")
        gws.append(Gateway("leo", "leo"))
    return GatewaySet(
        gateways=gws,
        region=region,
        haps=haps if "haps" in kinds else None,
        leo=leo if "leo" in kinds else None,
    )
