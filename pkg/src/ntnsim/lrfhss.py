"""
LR-FHSS uplink MAC
==================

Unslotted ALOHA with intra-packet frequency hopping.  A packet is
n_header_copies header replicas followed by f payload fragments, each
unit on its own pseudorandomly chosen channel:

    f = ceil((b + 3) / (6 CR))

A gateway decodes a packet iff it receives at least one header copy and
at least ceil(f CR) fragments.  A unit is lost to erasure (received
power below the sensitivity threshold) or to collision (any nonzero
time-frequency overlap with another transmission; every collision is
destructive, there is no capture).  The network decodes a packet if any
gateway does; duplicates are collapsed upstream.

This module provides the record-level reference implementation: one
object per transmission, explicit per-unit outcomes.  The vectorized
batch engine reuses the array cores defined here (collision_flags,
decode_counts) so both paths share one implementation of the rules.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channel import (
    LinkBudgetConfig,
    TerrestrialChannelConfig,
    deterministic_rx_dbm,
    sample_ntn_fading,
    sample_shadow_fading_db,
    shadowed_rice_params,
)
from .errors import ConfigError
from .geometry import haps_distance, haps_elevation
from .orbit import device_elevation_and_distance
from .scenario import GatewaySet

# ---------------------------------------------------------------------------
# configuration and arithmetic
# ---------------------------------------------------------------------------


def _as_fraction(coding_rate) -> Fraction:
    # snap floats like 0.3333... back to the exact rational they encode
    return Fraction(coding_rate).limit_denominator(1000)


def fragment_count(payload_bytes: int, coding_rate) -> int:
    """Number of payload fragments: ceil((b + 3) / (6 CR))."""
    if payload_bytes < 0:
        raise ConfigError(f"payload size must be >= 0 bytes, got {payload_bytes}")
    cr = _as_fraction(coding_rate)
    if cr <= 0:
        raise ConfigError(f"coding rate must be positive, got {coding_rate}")
    return math.ceil(Fraction(payload_bytes + 3) / (6 * cr))


def fragment_decode_threshold(n_fragments: int, coding_rate) -> int:
    """Minimum received fragments for decode: ceil(f CR)."""
    return math.ceil(n_fragments * _as_fraction(coding_rate))


@dataclass
class LrfhssConfig:
    """Physical-layer frame structure and hopping parameters."""

    n_channels: int = 35
    n_header_copies: int = 3
    header_duration: float = 0.233472   # [s]
    fragment_duration: float = 0.1024   # [s]
    coding_rate: float = 1.0 / 3.0
    payload_bytes: int = 10
    channel_width_hz: float = 488.0     # informational only

    def __post_init__(self):
        if self.n_channels < 1:
            raise ConfigError(f"need at least one channel, got {self.n_channels}")
        if not (0.0 < self.coding_rate <= 1.0):
            raise ConfigError(f"coding rate must be in (0, 1], got {self.coding_rate}")
        if self.n_header_copies < 1:
            raise ConfigError(f"need at least one header copy, got {self.n_header_copies}")
        if self.header_duration <= 0 or self.fragment_duration <= 0:
            raise ConfigError("unit durations must be positive")
        if self.payload_bytes < 0:
            raise ConfigError(f"payload size cannot be negative, got {self.payload_bytes}")

    @property
    def n_fragments(self) -> int:
        return fragment_count(self.payload_bytes, self.coding_rate)

    @property
    def n_units(self) -> int:
        return self.n_header_copies + self.n_fragments

    @property
    def decode_threshold(self) -> int:
        return fragment_decode_threshold(self.n_fragments, self.coding_rate)


def time_on_air(cfg: LrfhssConfig) -> float:
    """Full packet duration: headers plus fragments, back to back [s]."""
    return (cfg.n_header_copies * cfg.header_duration
            + cfg.n_fragments * cfg.fragment_duration)


def unit_durations(cfg: LrfhssConfig) -> np.ndarray:
    return np.concatenate([
        np.full(cfg.n_header_copies, cfg.header_duration),
        np.full(cfg.n_fragments, cfg.fragment_duration),
    ])


def time_edges(start_time: float, durations: np.ndarray):
    """Per-unit (starts, ends) with ends[k] bitwise-equal to starts[k+1].

    Both views are slices of one cumulative-sum edge array, so adjacent
    units of a packet can never register a nonzero overlap under the
    strict comparisons used by collision detection.
    """
    edges = start_time + np.concatenate([[0.0], np.cumsum(durations)])
    return edges[:-1], edges[1:]


# ---------------------------------------------------------------------------
# hop sequences and traffic
# ---------------------------------------------------------------------------


def generate_hop_sequence(cfg: LrfhssConfig, rng: np.random.Generator) -> np.ndarray:
    """Channel index per unit, i.i.d. uniform, consecutive headers distinct.

    A header copy landing on the previous copy's channel is resampled.
    With multiple header copies this requires n_channels >= n_header_copies.
    """
    if cfg.n_header_copies > 1 and cfg.n_channels < cfg.n_header_copies:
        raise ConfigError(
            f"{cfg.n_header_copies} distinct-consecutive header copies need at least "
            f"{cfg.n_header_copies} channels, got {cfg.n_channels}"
        )
    seq = rng.integers(0, cfg.n_channels, size=cfg.n_units)
    for h in range(1, cfg.n_header_copies):
        while seq[h] == seq[h - 1]:
            seq[h] = rng.integers(0, cfg.n_channels)
    return seq


def generate_hop_sequences(cfg: LrfhssConfig, rng: np.random.Generator,
                           n_packets: int) -> np.ndarray:
    """Batch variant: (n_packets, n_units) hop matrix, same rules."""
    if cfg.n_header_copies > 1 and cfg.n_channels < cfg.n_header_copies:
        raise ConfigError(
            f"{cfg.n_header_copies} distinct-consecutive header copies need at least "
            f"{cfg.n_header_copies} channels, got {cfg.n_channels}"
        )
    seq = rng.integers(0, cfg.n_channels, size=(n_packets, cfg.n_units))
    for h in range(1, cfg.n_header_copies):
        clash = np.flatnonzero(seq[:, h] == seq[:, h - 1])
        while clash.size:
            seq[clash, h] = rng.integers(0, cfg.n_channels, size=clash.size)
            clash = clash[seq[clash, h] == seq[clash, h - 1]]
    return seq


@dataclass
class TransmissionRecord:
    """One packet attempt: frame timing plus its hop sequence."""

    device_id: int
    start_time: float
    channels: np.ndarray     # (n_units,)
    unit_starts: np.ndarray  # absolute [s]
    unit_ends: np.ndarray
    n_headers: int

    @property
    def n_units(self) -> int:
        return len(self.channels)

    def unit_kind(self, i: int) -> str:
        return "header" if i < self.n_headers else "fragment"

    def units(self):
        """(kind, channel, start, duration) per unit, in order."""
        return [
            (self.unit_kind(i), int(self.channels[i]),
             float(self.unit_starts[i]),
             float(self.unit_ends[i] - self.unit_starts[i]))
            for i in range(self.n_units)
        ]


def make_transmission(device_id: int, start_time: float, cfg: LrfhssConfig,
                      rng: np.random.Generator) -> TransmissionRecord:
    starts, ends = time_edges(start_time, unit_durations(cfg))
    return TransmissionRecord(
        device_id=device_id,
        start_time=start_time,
        channels=generate_hop_sequence(cfg, rng),
        unit_starts=starts,
        unit_ends=ends,
        n_headers=cfg.n_header_copies,
    )


def schedule_traffic(n_devices: int, horizon: float, mean_interval: float,
                     cfg: LrfhssConfig, rng: np.random.Generator):
    """Poisson arrivals per device; a device never overlaps itself.

    Each next arrival is drawn after the previous packet ends, so the
    inter-start gap is time_on_air plus an exponential of the configured
    mean.  Packets that start before the horizon are kept even when they
    run past it.
    """
    if horizon <= 0:
        raise ConfigError(f"horizon must be positive, got {horizon}")
    toa = time_on_air(cfg)
    records = []
    for dev in range(n_devices):
        t = 0.0
        while True:
            start = t + rng.exponential(mean_interval)
            if not start < horizon:
                break
            records.append(make_transmission(dev, start, cfg, rng))
            t = start + toa
    return records


# ---------------------------------------------------------------------------
# per-unit outcomes
# ---------------------------------------------------------------------------


@dataclass
class UnitOutcome:
    erased: bool
    collided: bool

    @property
    def received(self) -> bool:
        return not self.erased and not self.collided


@dataclass
class LinkSample:
    """One unit's link evaluation at one gateway."""

    gateway_id: str
    unit_index: int
    distance: float        # [m]
    elevation: float       # [rad]; nan for terrestrial links
    pathloss_db: float
    fading_db: float
    rx_power_dbm: float
    erased: bool


@dataclass
class PacketDecision:
    per_gateway_decoded: dict
    network_decoded: bool


def evaluate_links(
    tx: TransmissionRecord,
    dev_xy,
    gateways: GatewaySet,
    link_cfg: LinkBudgetConfig,
    terr_cfg: TerrestrialChannelConfig,
    rng: np.random.Generator,
    detailed: bool = False,
):
    """Per-gateway, per-unit erasure flags for one transmission.

    Every unit draws an independent fading realization at every gateway.
    Satellite geometry is re-evaluated at each unit's start time; HAPS
    and terrestrial geometry are static for the packet.  A unit whose
    instantaneous satellite elevation is at or below the horizon is
    erased outright.

    Returns an (n_gateways, n_units) bool array; with ``detailed`` also
    a parallel list of LinkSample lists.
    """
    dev_xy = np.asarray(dev_xy, dtype=float)
    n_units = tx.n_units
    erased = np.zeros((gateways.n_gateways, n_units), dtype=bool)
    samples = [] if detailed else None
    gamma = link_cfg.sensitivity_dbm

    for gi, gw in enumerate(gateways.gateways):
        row_samples = [] if detailed else None
        if gw.kind == "terrestrial":
            d = float(np.hypot(*(dev_xy - gw.xy)))
            det = deterministic_rx_dbm("terrestrial", d, link_cfg, terr_cfg)
            fad = np.atleast_1d(sample_shadow_fading_db(terr_cfg, rng, size=n_units))
            rx = det + fad
            erased[gi] = rx < gamma
            if detailed:
                pl = link_cfg.tx_power_dbm + link_cfg.tx_gain_dbi + link_cfg.terr_rx_gain_dbi - det
                for u in range(n_units):
                    row_samples.append(LinkSample(gw.gateway_id, u, d, float("nan"),
                                                  pl, float(fad[u]), float(rx[u]),
                                                  bool(erased[gi, u])))
        elif gw.kind == "haps":
            d = float(haps_distance(dev_xy, gateways.haps))
            alpha = float(haps_elevation(dev_xy, gateways.haps, gateways.region))
            det = deterministic_rx_dbm("haps", d, link_cfg)
            params = shadowed_rice_params(alpha)
            gains = np.atleast_1d(sample_ntn_fading(params, rng, size=n_units))
            fad_db = 10.0 * np.log10(gains)
            rx = det + fad_db
            erased[gi] = rx < gamma
            if detailed:
                pl = link_cfg.tx_power_dbm + link_cfg.tx_gain_dbi + link_cfg.haps_rx_gain_dbi - det
                for u in range(n_units):
                    row_samples.append(LinkSample(gw.gateway_id, u, d, alpha, pl,
                                                  float(fad_db[u]), float(rx[u]),
                                                  bool(erased[gi, u])))
        elif gw.kind == "leo":
            leo = gateways.leo
            for u in range(n_units):
                t_u = float(tx.unit_starts[u])
                sat = leo.state_at(t_u)
                alpha, d = device_elevation_and_distance(dev_xy, sat)
                if alpha <= 0.0:
                    # below the local horizon: nothing to receive
                    erased[gi, u] = True
                    if detailed:
                        row_samples.append(LinkSample(gw.gateway_id, u, d, alpha,
                                                      float("nan"), float("nan"),
                                                      float("-inf"), True))
                    continue
                det = deterministic_rx_dbm("leo", d, link_cfg)
                gain = sample_ntn_fading(shadowed_rice_params(alpha), rng)
                fad_db = 10.0 * math.log10(gain)
                rx = det + fad_db
                erased[gi, u] = rx < gamma
                if detailed:
                    pl = (link_cfg.tx_power_dbm + link_cfg.tx_gain_dbi
                          + link_cfg.sat_rx_gain_dbi - det)
                    row_samples.append(LinkSample(gw.gateway_id, u, d, alpha, pl,
                                                  fad_db, rx, bool(erased[gi, u])))
        else:
            raise ConfigError(f"unknown gateway kind {gw.kind!r}")
        if detailed:
            samples.append(row_samples)

    if detailed:
        return erased, samples
    return erased


# ---------------------------------------------------------------------------
# collision detection (array core shared with the batch engine)
# ---------------------------------------------------------------------------


def collision_flags(starts, ends, channels, active=None) -> np.ndarray:
    """Per-unit collided flags over a flat unit population.

    A unit is collided iff some other unit overlaps it with nonzero
    duration on the same channel.  ``active`` optionally restricts which
    units can act as colliders (victims are always all units); this
    supports the mode where only above-threshold interferers destroy a
    unit.  Units of one packet never overlap each other by construction
    (they are back to back in time), so no same-packet exclusion is
    needed.
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    channels = np.asarray(channels)
    n = starts.size
    collided = np.zeros(n, dtype=bool)
    if n < 2:
        return collided

    order = np.lexsort((starts, channels))
    s = starts[order]
    e = ends[order]
    ch = channels[order]
    # contiguous per-channel segments after the sort
    seg_break = np.flatnonzero(ch[1:] != ch[:-1]) + 1
    bounds = np.concatenate([[0], seg_break, [n]])
    out = np.zeros(n, dtype=bool)

    if active is None:
        for a, b in zip(bounds[:-1], bounds[1:]):
            if b - a < 2:
                continue
            ss, ee = s[a:b], e[a:b]
            run_max = np.maximum.accumulate(ee)
            seg = np.zeros(b - a, dtype=bool)
            seg[1:] = ss[1:] < run_max[:-1]   # someone earlier still transmitting
            seg[:-1] |= ss[1:] < ee[:-1]      # immediate successor starts inside me
            out[a:b] = seg
    else:
        act = np.asarray(active, dtype=bool)[order]
        for a, b in zip(bounds[:-1], bounds[1:]):
            ss, ee = s[a:b], e[a:b]
            act_s = np.sort(ss[act[a:b]])
            act_e = np.sort(ee[act[a:b]])
            if act_s.size == 0:
                continue
            # overlapping active intervals: start < my_end minus end <= my_start
            cnt = (np.searchsorted(act_s, ee, side="left")
                   - np.searchsorted(act_e, ss, side="right"))
            cnt = cnt - act[a:b]              # an active victim counts itself once
            out[a:b] = cnt >= 1

    collided[order] = out
    return collided


def detect_collisions(records, active=None):
    """Collision flags for a list of TransmissionRecords.

    Returns one bool array per record.  ``active``, when given, is a
    parallel list of per-unit flags marking which units are visible as
    interferers at the gateway under evaluation.
    """
    if not records:
        return []
    starts = np.concatenate([r.unit_starts for r in records])
    ends = np.concatenate([r.unit_ends for r in records])
    channels = np.concatenate([r.channels for r in records])
    flat_active = None if active is None else np.concatenate(active)
    flat = collision_flags(starts, ends, channels, active=flat_active)
    out = []
    pos = 0
    for r in records:
        out.append(flat[pos:pos + r.n_units])
        pos += r.n_units
    return out


# ---------------------------------------------------------------------------
# decode
# ---------------------------------------------------------------------------


def decode_from_flags(erased, collided, n_headers: int, threshold: int) -> bool:
    """Decode rule on one gateway's unit flags: a header and enough fragments."""
    received = ~(np.asarray(erased, dtype=bool) | np.asarray(collided, dtype=bool))
    return bool(received[:n_headers].any()
                and int(received[n_headers:].sum()) >= threshold)


def decode_packet(outcomes_by_gateway: dict, cfg: LrfhssConfig) -> PacketDecision:
    """Per-gateway and network decode decision from UnitOutcome lists."""
    thr = cfg.decode_threshold
    per_gw = {}
    for gw_id, outcomes in outcomes_by_gateway.items():
        erased = np.array([o.erased for o in outcomes], dtype=bool)
        collided = np.array([o.collided for o in outcomes], dtype=bool)
        per_gw[gw_id] = decode_from_flags(erased, collided, cfg.n_header_copies, thr)
    return PacketDecision(per_gateway_decoded=per_gw,
                          network_decoded=any(per_gw.values()))
