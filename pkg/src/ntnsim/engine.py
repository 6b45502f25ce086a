"""
Batch Monte Carlo engine
========================

One run = one private random stream, one fresh world (device drop, BS
layout unless pinned, satellite lap schedule), one traffic realization,
and the per-unit outcome bookkeeping for every gateway.  Everything is
flat numpy arrays in packet-major unit order: a packet's units occupy a
contiguous block of length n_units, so (P * n_units,) flags reshape to
(P, n_units) views for decode reductions.

Random draw order within a run is fixed and documented: BS layout,
device drop, lap schedule, traffic gaps, hop sequences (success mode
only), then per-gateway fading in the fixed gateway order.  Results are
therefore reproducible from (config, scenario, seed) alone, regardless
of how runs are distributed over workers.

Terrestrial shadowing is realized as the per-unit erasure indicator
drawn directly: erasure under a N(0, sigma) dB shadow is Bernoulli with
q = Phi((gamma - mu)/sigma), so comparing one uniform draw against the
precomputed q per (device, BS) is distributionally identical to drawing
the shadow itself, at a fraction of the cost.  NTN units draw their
gamma-distributed power gains explicitly.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .channel import ntn_gamma_params
from .config import SimulationConfig
from .errors import ConfigError
from .geometry import (
    BasestationLayout,
    deploy_basestations,
    deploy_devices,
    haps_distance,
    haps_elevation,
)
from .lrfhss import (
    collision_flags,
    detect_collisions,
    evaluate_links,
    generate_hop_sequences,
    schedule_traffic,
    unit_durations,
)
from .orbit import (
    LapSequence,
    central_angle,
    derive_constants,
    elevation_from_central_angle,
    slant_range,
)
from .scenario import GatewaySet, LeoContext, build_gateway_set, scenario_kinds


@dataclass
class RunResult:
    """Aggregates of one run; fields are mode-dependent."""

    mode: str                          # erasure | success
    n_devices: int
    n_packets: int
    device_xy: np.ndarray = None       # (n, 2)
    device_mean_erasure: np.ndarray = None   # nan where a device sent nothing
    device_n_units: np.ndarray = None
    run_mean_success: float = float("nan")
    n_decoded: int = 0
    n_gateway_decodes: int = 0         # per-gateway decode count before dedup


# ---------------------------------------------------------------------------
# world construction
# ---------------------------------------------------------------------------


def _packet_span(cfg: SimulationConfig) -> float:
    # cumulative-sum form, bitwise consistent with the unit time edges
    return float(np.cumsum(unit_durations(cfg.mac))[-1])


def _build_world(cfg: SimulationConfig, scenario: str, n_devices: int,
                 duration: float, rng: np.random.Generator,
                 layout: BasestationLayout = None) -> GatewaySet:
    """Deploy receivers for one run, consuming rng in fixed order."""
    kinds = scenario_kinds(scenario)
    if "tn" in kinds and layout is None:
        if cfg.n_basestations < 1:
            raise ConfigError("terrestrial scenario needs n_basestations >= 1")
        layout = deploy_basestations(cfg.n_basestations, cfg.region, rng,
                                     max_attempts=cfg.placement_max_attempts)
    leo_ctx = None
    if "leo" in kinds:
        derived = derive_constants(cfg.orbit)
        laps = LapSequence.generate(derived, rng,
                                    duration + _packet_span(cfg) + 1.0)
        leo_ctx = LeoContext(cfg=cfg.orbit, derived=derived, laps=laps,
                             angle_form=cfg.central_angle_form,
                             range_mode=cfg.satellite_range_mode)
    return build_gateway_set(scenario, cfg.region,
                             layout=layout if "tn" in kinds else None,
                             haps=cfg.haps if "haps" in kinds else None,
                             leo=leo_ctx)


def _traffic_arrays(cfg: SimulationConfig, n_devices: int, duration: float,
                    rng: np.random.Generator):
    """Vectorized per-device Poisson arrivals with no self-overlap.

    Returns (packet_starts, dev_of_packet), grouped by device and
    ascending in time within each device.
    """
    span = _packet_span(cfg)
    mean = cfg.mean_tx_interval_s
    stride = mean + span
    expect = duration / stride
    k0 = int(expect + 8.0 * math.sqrt(expect + 1.0) + 8.0)
    gaps = rng.exponential(mean, size=(n_devices, k0))
    starts = np.cumsum(gaps, axis=1) + span * np.arange(k0)
    valid = starts < duration            # prefix mask: starts rise along axis 1
    counts = valid.sum(axis=1)

    overflow = np.flatnonzero(counts == k0)
    if overflow.size == 0:
        return starts[valid], np.repeat(np.arange(n_devices), counts)

    # rare: a device filled its preallocated block; continue it scalar-wise
    per_dev = [starts[d, :counts[d]].tolist() for d in range(n_devices)]
    for d in overflow:
        t = per_dev[d][-1] + span
        while True:
            s = t + rng.exponential(mean)
            if not s < duration:
                break
            per_dev[d].append(s)
            t = s + span
    dev_of_packet = np.concatenate([
        np.full(len(p), d, dtype=np.int64) for d, p in enumerate(per_dev)
    ]) if per_dev else np.zeros(0, dtype=np.int64)
    packet_starts = np.concatenate([np.asarray(p) for p in per_dev]) \
        if per_dev else np.zeros(0)
    return packet_starts, dev_of_packet


def _unit_grid(cfg: SimulationConfig, packet_starts: np.ndarray):
    """Flat unit start/end arrays; ends[k] is bitwise starts[k+1] in a packet."""
    durs = unit_durations(cfg.mac)
    edges = np.concatenate([[0.0], np.cumsum(durs)])
    starts = (packet_starts[:, None] + edges[None, :-1]).ravel()
    ends = (packet_starts[:, None] + edges[None, 1:]).ravel()
    return starts, ends


# ---------------------------------------------------------------------------
# per-gateway erasure evaluation
# ---------------------------------------------------------------------------


def _terrestrial_q(cfg: SimulationConfig, dev_xy: np.ndarray,
                   bs_xy: np.ndarray) -> np.ndarray:
    """(n_devices, n_bs) per-unit erasure probabilities."""
    d = np.hypot(dev_xy[:, 0:1] - bs_xy[None, :, 0],
                 dev_xy[:, 1:2] - bs_xy[None, :, 1])
    d = np.maximum(d, 1e-9)   # a device exactly on a mast still has a link
    det = (cfg.link.tx_power_dbm + cfg.link.tx_gain_dbi + cfg.link.terr_rx_gain_dbi
           - cfg.terrestrial.ref_pathloss_db
           - 10.0 * cfg.terrestrial.exponent
           * np.log10(d / cfg.terrestrial.ref_distance))
    sigma = cfg.terrestrial.shadow_sigma_db
    if sigma == 0.0:
        return (det < cfg.link.sensitivity_dbm).astype(float)
    return ndtr((cfg.link.sensitivity_dbm - det) / sigma)


def _terrestrial_erased(q_col, dev_of_unit, sigma, rng):
    """One BS column: per-unit Bernoulli erasure indicators."""
    q_units = q_col[dev_of_unit]
    if sigma == 0.0:
        return q_units >= 1.0        # q is exactly 0 or 1 without shadowing
    return rng.random(q_units.size) < q_units


def _ntn_erased(det_dbm, alpha, gamma, rng):
    """Erasure flags for NTN units: gamma-fading power vs threshold.

    Units at or below the horizon are erased outright and draw nothing.
    """
    erased = np.ones(alpha.shape, dtype=bool)
    vis = alpha > 0.0
    if np.any(vis):
        k, theta = ntn_gamma_params(alpha[vis])
        gain = rng.gamma(k, theta)
        erased[vis] = det_dbm[vis] + 10.0 * np.log10(gain) < gamma
    return erased


def _haps_link(cfg: SimulationConfig, dev_xy: np.ndarray):
    """Static per-device deterministic power and elevation toward the HAPS."""
    d = haps_distance(dev_xy, cfg.haps)
    alpha = haps_elevation(dev_xy, cfg.haps, cfg.region)
    det = (cfg.link.tx_power_dbm + cfg.link.tx_gain_dbi + cfg.link.haps_rx_gain_dbi
           - 20.0 * np.log10(4.0 * np.pi * d / cfg.link.wavelength))
    return det, alpha


def _satellite_track(leo: LeoContext, times: np.ndarray):
    """Vectorized satellite positions at absolute times."""
    idx, t_in = leo.laps.locate(times)
    tc = leo.laps.durations[idx]
    az = leo.laps.azimuths[idx]
    theta = central_angle(t_in, tc, leo.derived, form=leo.angle_form)
    alpha = elevation_from_central_angle(theta, leo.derived)
    if leo.range_mode == "altitude":
        d = np.full(alpha.shape, leo.cfg.altitude)
    else:
        d = slant_range(alpha, leo.cfg)
    cos_a = np.cos(alpha)
    return d * cos_a * np.cos(az), d * cos_a * np.sin(az), d * np.sin(alpha)


def _leo_link(cfg: SimulationConfig, leo: LeoContext, dev_xy: np.ndarray,
              dev_of_unit: np.ndarray, unit_starts: np.ndarray):
    """Per-unit deterministic power and device elevation toward the satellite."""
    sx, sy, sz = _satellite_track(leo, unit_starts)
    dx = sx - dev_xy[dev_of_unit, 0]
    dy = sy - dev_xy[dev_of_unit, 1]
    horiz = np.hypot(dx, dy)
    dist = np.hypot(horiz, sz)
    alpha = np.arctan2(sz, horiz)
    det = (cfg.link.tx_power_dbm + cfg.link.tx_gain_dbi + cfg.link.sat_rx_gain_dbi
           - 20.0 * np.log10(4.0 * np.pi * dist / cfg.link.wavelength))
    return det, alpha


# ---------------------------------------------------------------------------
# run drivers
# ---------------------------------------------------------------------------


def simulate_erasure_run(cfg: SimulationConfig, scenario: str, n_devices: int,
                         duration: float, rng: np.random.Generator,
                         layout: BasestationLayout = None) -> RunResult:
    """One erasure-metric run: collisions off, per-unit power threshold only.

    A unit counts as erased when it is below threshold at every gateway.
    Hop sequences are not drawn: channel indices cannot influence pure
    erasure.  Devices that sent nothing carry a nan mean.
    """
    gws = _build_world(cfg, scenario, n_devices, duration, rng, layout)
    dev_xy = deploy_devices(n_devices, cfg.region, rng)
    packet_starts, dev_of_packet = _traffic_arrays(cfg, n_devices, duration, rng)
    n_packets = packet_starts.size
    n_units = cfg.mac.n_units
    dev_of_unit = np.repeat(dev_of_packet, n_units)
    n_flat = n_packets * n_units
    gamma = cfg.link.sensitivity_dbm

    all_erased = np.ones(n_flat, dtype=bool)
    bs_xy = gws.terrestrial_xy
    if bs_xy.shape[0]:
        q = _terrestrial_q(cfg, dev_xy, bs_xy)
    unit_starts = None
    bs_i = 0
    for gw in gws.gateways:
        if gw.kind == "terrestrial":
            erased = _terrestrial_erased(q[:, bs_i], dev_of_unit,
                                         cfg.terrestrial.shadow_sigma_db, rng)
            bs_i += 1
        elif gw.kind == "haps":
            det_dev, alpha_dev = _haps_link(cfg, dev_xy)
            erased = _ntn_erased(det_dev[dev_of_unit], alpha_dev[dev_of_unit],
                                 gamma, rng)
        else:
            if unit_starts is None:
                unit_starts, _ = _unit_grid(cfg, packet_starts)
            det_u, alpha_u = _leo_link(cfg, gws.leo, dev_xy, dev_of_unit,
                                       unit_starts)
            erased = _ntn_erased(det_u, alpha_u, gamma, rng)
        all_erased &= erased

    unit_counts = np.bincount(dev_of_unit, minlength=n_devices)
    erased_sums = np.bincount(dev_of_unit, weights=all_erased.astype(float),
                              minlength=n_devices)
    mean_erasure = np.full(n_devices, np.nan)
    sent = unit_counts > 0
    mean_erasure[sent] = erased_sums[sent] / unit_counts[sent]
    return RunResult(mode="erasure", n_devices=n_devices, n_packets=n_packets,
                     device_xy=dev_xy, device_mean_erasure=mean_erasure,
                     device_n_units=unit_counts)


def simulate_success_run(cfg: SimulationConfig, scenario: str, n_devices: int,
                         duration: float, rng: np.random.Generator,
                         layout: BasestationLayout = None) -> RunResult:
    """One success-metric run: erasure plus destructive collisions.

    A packet succeeds if at least one gateway decodes it (one header and
    enough fragments received); the network collapses duplicates.  The
    run statistic is the mean over devices (that transmitted) of each
    device's decoded fraction.
    """
    gws = _build_world(cfg, scenario, n_devices, duration, rng, layout)
    dev_xy = deploy_devices(n_devices, cfg.region, rng)
    packet_starts, dev_of_packet = _traffic_arrays(cfg, n_devices, duration, rng)
    n_packets = packet_starts.size
    if n_packets == 0:
        return RunResult(mode="success", n_devices=n_devices, n_packets=0)
    mac = cfg.mac
    n_units = mac.n_units
    nh = mac.n_header_copies
    thr = mac.decode_threshold
    dev_of_unit = np.repeat(dev_of_packet, n_units)
    gamma = cfg.link.sensitivity_dbm

    channels = generate_hop_sequences(mac, rng, n_packets)
    unit_starts, unit_ends = _unit_grid(cfg, packet_starts)
    flat_ch = channels.ravel()

    per_gw_collided = cfg.collision_requires_collider_above_gamma
    if not per_gw_collided:
        collided = collision_flags(unit_starts, unit_ends, flat_ch)

    bs_xy = gws.terrestrial_xy
    if bs_xy.shape[0]:
        q = _terrestrial_q(cfg, dev_xy, bs_xy)

    network_decoded = np.zeros(n_packets, dtype=bool)
    n_gateway_decodes = 0
    bs_i = 0
    for gw in gws.gateways:
        if gw.kind == "terrestrial":
            erased = _terrestrial_erased(q[:, bs_i], dev_of_unit,
                                         cfg.terrestrial.shadow_sigma_db, rng)
            bs_i += 1
        elif gw.kind == "haps":
            det_dev, alpha_dev = _haps_link(cfg, dev_xy)
            erased = _ntn_erased(det_dev[dev_of_unit], alpha_dev[dev_of_unit],
                                 gamma, rng)
        else:
            det_u, alpha_u = _leo_link(cfg, gws.leo, dev_xy, dev_of_unit,
                                       unit_starts)
            erased = _ntn_erased(det_u, alpha_u, gamma, rng)
        if per_gw_collided:
            # only interferers above threshold here destroy overlapping units
            col_g = collision_flags(unit_starts, unit_ends, flat_ch,
                                    active=~erased)
        else:
            col_g = collided
        lost = (erased | col_g).reshape(n_packets, n_units)
        header_ok = ~lost[:, :nh].all(axis=1)
        frag_lost = lost[:, nh:].sum(axis=1)
        decoded = header_ok & (frag_lost <= (n_units - nh) - thr)
        network_decoded |= decoded
        n_gateway_decodes += int(decoded.sum())

    pkt_counts = np.bincount(dev_of_packet, minlength=n_devices)
    dec_counts = np.bincount(dev_of_packet,
                             weights=network_decoded.astype(float),
                             minlength=n_devices)
    sent = pkt_counts > 0
    run_mean = float(np.mean(dec_counts[sent] / pkt_counts[sent]))
    return RunResult(mode="success", n_devices=n_devices, n_packets=n_packets,
                     device_xy=dev_xy,
                     run_mean_success=run_mean,
                     n_decoded=int(network_decoded.sum()),
                     n_gateway_decodes=n_gateway_decodes)


# ---------------------------------------------------------------------------
# record-level trace (debug / inspection path)
# ---------------------------------------------------------------------------


def trace_run(cfg: SimulationConfig, scenario: str, n_devices: int,
              duration: float, rng: np.random.Generator,
              layout: BasestationLayout = None):
    """Full per-unit trace of one run through the record-level MAC API.

    Returns (gateway_ids, rows); each row is (device_id, packet_start_s,
    gateway_id, unit_index, kind, channel, erased, collided, received).
    Intended for small configurations; cost grows as gateways x units.
    """
    gws = _build_world(cfg, scenario, n_devices, duration, rng, layout)
    dev_xy = deploy_devices(n_devices, cfg.region, rng)
    records = schedule_traffic(n_devices, duration, cfg.mean_tx_interval_s,
                               cfg.mac, rng)
    erased_per_tx = [
        evaluate_links(tx, dev_xy[tx.device_id], gws, cfg.link,
                       cfg.terrestrial, rng)
        for tx in records
    ]
    rows = []
    shared_collided = None
    if not cfg.collision_requires_collider_above_gamma:
        shared_collided = detect_collisions(records)
    for gi, gw_id in enumerate(gws.ids):
        if shared_collided is None:
            active = [~e[gi] for e in erased_per_tx]
            collided = detect_collisions(records, active=active)
        else:
            collided = shared_collided
        for tx, era, col in zip(records, erased_per_tx, collided):
            for u in range(tx.n_units):
                e, c = bool(era[gi, u]), bool(col[u])
                rows.append((tx.device_id, tx.start_time, gw_id, u,
                             tx.unit_kind(u), int(tx.channels[u]),
                             e, c, not e and not c))
    return gws.ids, rows
