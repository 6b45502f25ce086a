import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ntnsim.channel import LinkBudgetConfig, TerrestrialChannelConfig
from ntnsim.errors import ConfigError
from ntnsim.geometry import HapsConfig, RegionConfig
from ntnsim.lrfhss import (
    LrfhssConfig,
    TransmissionRecord,
    UnitOutcome,
    collision_flags,
    decode_from_flags,
    decode_packet,
    detect_collisions,
    evaluate_links,
    fragment_count,
    fragment_decode_threshold,
    generate_hop_sequence,
    generate_hop_sequences,
    make_transmission,
    schedule_traffic,
    time_edges,
    time_on_air,
    unit_durations,
)
from ntnsim.scenario import Gateway, GatewaySet

from .oracles import brute_decode, pairwise_collisions, record_collisions

CFG = LrfhssConfig()


# --- static frame arithmetic ---------------------------------------------------


def test_fragment_count_values():
    assert fragment_count(10, 1 / 3) == 7
    assert fragment_count(0, 1 / 3) == 2
    assert fragment_count(10, 1) == 3
    assert fragment_count(10, 2 / 3) == 4


def test_fragment_count_is_exact_despite_float_rate():
    # 1/3 is not a float; a naive ceil((b+3)/(6*cr)) can land on the wrong
    # side of an integer boundary
    assert fragment_count(9, 1 / 3) == 6
    assert fragment_count(21, 1 / 3) == 12


def test_decode_threshold():
    assert fragment_decode_threshold(7, 1 / 3) == 3
    assert fragment_decode_threshold(4, 2 / 3) == 3
    assert fragment_decode_threshold(3, 1) == 3


def test_default_config_frame():
    assert CFG.n_fragments == 7
    assert CFG.n_units == 10
    assert CFG.decode_threshold == 3


def test_time_on_air():
    assert time_on_air(CFG) == pytest.approx(1.417216, rel=1e-12)
    short = LrfhssConfig(payload_bytes=0)
    assert time_on_air(short) == pytest.approx(0.905216, rel=1e-12)
    headers_only = unit_durations(CFG)[:3].sum()
    assert headers_only == pytest.approx(0.700416, rel=1e-12)


def test_config_validation():
    with pytest.raises(ConfigError):
        LrfhssConfig(n_channels=0)
    with pytest.raises(ConfigError):
        LrfhssConfig(coding_rate=0.0)
    with pytest.raises(ConfigError):
        LrfhssConfig(coding_rate=1.5)
    with pytest.raises(ConfigError):
        LrfhssConfig(header_duration=0.0)
    with pytest.raises(ConfigError):
        LrfhssConfig(n_header_copies=0)
    with pytest.raises(ConfigError):
        LrfhssConfig(payload_bytes=-1)


def test_time_edges_bitwise_contiguous():
    starts, ends = time_edges(123.456789, unit_durations(CFG))
    assert starts.shape == (10,)
    # consecutive units share the exact float boundary: no phantom overlap
    # or gap can appear under strict comparison
    assert np.all(ends[:-1] == starts[1:])
    assert np.all(ends > starts)


# --- hop sequences ---------------------------------------------------------------


def test_hop_sequence_shape_and_range(rng):
    seq = generate_hop_sequence(CFG, rng)
    assert seq.shape == (10,)
    assert seq.min() >= 0
    assert seq.max() < 35


def test_hop_consecutive_headers_distinct(rng):
    for _ in range(2_000):
        seq = generate_hop_sequence(CFG, rng)
        assert seq[0] != seq[1]
        assert seq[1] != seq[2]


def test_hop_batch_matches_rules(rng):
    seqs = generate_hop_sequences(CFG, rng, 50_000)
    assert seqs.shape == (50_000, 10)
    assert np.all(seqs[:, 0] != seqs[:, 1])
    assert np.all(seqs[:, 1] != seqs[:, 2])
    assert seqs.min() >= 0 and seqs.max() < 35


def test_hop_fragment_positions_uniform(rng):
    # spec'd as a frequency check over fragment positions
    total = 1_000_000
    counts = np.zeros(35, dtype=np.int64)
    for _ in range(4):
        seqs = generate_hop_sequences(CFG, rng, total // 4)
        counts += np.bincount(seqs[:, 3:].ravel(), minlength=35)
    freq = counts / counts.sum()
    assert np.all(np.abs(freq - 1 / 35) < 0.002)


def test_hop_two_channels_alternate_headers(rng):
    cfg = LrfhssConfig(n_channels=2, n_header_copies=2)
    seq = generate_hop_sequence(cfg, rng)
    assert seq[0] != seq[1]


def test_hop_impossible_distinctness_raises(rng):
    with pytest.raises(ConfigError):
        generate_hop_sequence(LrfhssConfig(n_channels=1), rng)
    with pytest.raises(ConfigError):
        generate_hop_sequences(LrfhssConfig(n_channels=2), rng, 10)


def test_single_header_single_channel_allowed(rng):
    cfg = LrfhssConfig(n_channels=1, n_header_copies=1)
    seq = generate_hop_sequence(cfg, rng)
    assert np.all(seq == 0)


def test_hop_deterministic():
    a = generate_hop_sequence(CFG, np.random.default_rng(99))
    b = generate_hop_sequence(CFG, np.random.default_rng(99))
    assert np.array_equal(a, b)


# --- transmissions and traffic -----------------------------------------------------


def test_make_transmission_structure(rng):
    tx = make_transmission(7, 100.0, CFG, rng)
    assert tx.device_id == 7
    assert tx.n_units == 10
    assert tx.unit_starts[0] == 100.0
    assert [tx.unit_kind(i) for i in range(3)] == ["header"] * 3
    assert [tx.unit_kind(i) for i in range(3, 10)] == ["fragment"] * 7
    durs = tx.unit_ends - tx.unit_starts
    assert durs[:3] == pytest.approx([0.233472] * 3, rel=1e-12)
    assert durs[3:] == pytest.approx([0.1024] * 7, rel=1e-12)


def test_traffic_poisson_count(rng):
    records = schedule_traffic(1_000, 24 * 3600.0, 900.0, CFG, rng)
    expect = 96_000
    assert abs(len(records) - expect) < 3 * math.sqrt(expect)


def test_traffic_no_self_overlap(rng):
    records = schedule_traffic(20, 20_000.0, 60.0, CFG, rng)
    toa = time_on_air(CFG)
    per_dev = {}
    for r in records:
        per_dev.setdefault(r.device_id, []).append(r.start_time)
    for starts in per_dev.values():
        starts = np.sort(starts)
        assert np.all(np.diff(starts) >= toa)


def test_traffic_horizon_cut(rng):
    records = schedule_traffic(200, 1_800.0, 900.0, CFG, rng)
    assert all(r.start_time < 1_800.0 for r in records)


def test_traffic_infinite_interval_empty(rng):
    assert schedule_traffic(10, 3_600.0, math.inf, CFG, rng) == []


def test_traffic_deterministic():
    a = schedule_traffic(5, 5_000.0, 300.0, CFG, np.random.default_rng(4))
    b = schedule_traffic(5, 5_000.0, 300.0, CFG, np.random.default_rng(4))
    assert len(a) == len(b)
    for ra, rb in zip(a, b):
        assert ra.start_time == rb.start_time
        assert np.array_equal(ra.channels, rb.channels)


# --- collision detection -------------------------------------------------------------


def test_single_transmission_never_collides(rng):
    tx = make_transmission(0, 10.0, CFG, rng)
    flags = detect_collisions([tx])
    assert not flags[0].any()


def test_identical_transmissions_fully_collide(rng):
    a = make_transmission(0, 10.0, CFG, rng)
    b = TransmissionRecord(
        device_id=1,
        start_time=a.start_time,
        channels=a.channels.copy(),
        unit_starts=a.unit_starts.copy(),
        unit_ends=a.unit_ends.copy(),
        n_headers=a.n_headers,
    )
    fa, fb = detect_collisions([a, b])
    assert fa.all() and fb.all()


def test_single_overlapping_pair_flags_exactly_two_units(rng):
    # craft two packets that share exactly one (channel, time) overlap on
    # their fourth fragment
    a = make_transmission(0, 0.0, CFG, rng)
    b = make_transmission(1, 0.0, CFG, rng)
    a.channels[:] = 0
    b.channels[:] = 1
    a.channels[6] = 20
    b.channels[6] = 20
    fa, fb = detect_collisions([a, b])
    expect = np.zeros(10, dtype=bool)
    expect[6] = True
    assert np.array_equal(fa, expect)
    assert np.array_equal(fb, expect)


def test_touching_packets_do_not_collide(rng):
    # b starts at the exact float where a ends, everything on one channel:
    # zero-length contact is not an overlap
    a = make_transmission(0, 0.0, CFG, rng)
    b = make_transmission(1, float(a.unit_ends[-1]), CFG, rng)
    a.channels[:] = 5
    b.channels[:] = 5
    assert b.unit_starts[0] == a.unit_ends[-1]
    fa, fb = detect_collisions([a, b])
    assert not fa.any() and not fb.any()


def _random_case(rng):
    """One random small scenario for the exhaustive oracle comparison."""
    n_channels = int(rng.integers(1, 3))
    n_headers = 1 if n_channels == 1 else int(rng.integers(1, 3))
    payload = int(rng.choice([0, 9]))  # one or two fragments at CR=1
    cfg = LrfhssConfig(
        n_channels=n_channels,
        n_header_copies=n_headers,
        coding_rate=1.0,
        payload_bytes=payload,
        header_duration=float(rng.choice([0.233472, 0.1024, 0.05])),
        fragment_duration=float(rng.choice([0.1024, 0.233472])),
    )
    n_tx = int(rng.integers(1, 4))
    span = time_on_air(cfg)
    records = []
    for dev in range(n_tx):
        mode = rng.random()
        if mode < 0.4:
            start = float(rng.uniform(0.0, 2.0 * span))
        elif mode < 0.7 and records:
            start = records[-1].start_time  # exact tie
        elif records:
            # exact adjacency with an earlier unit boundary
            base = records[-1]
            edge = float(rng.choice(np.concatenate([base.unit_starts, base.unit_ends])))
            start = edge
        else:
            start = 0.0
        records.append(make_transmission(dev, start, cfg, rng))
    return records


def test_collision_flags_match_pairwise_oracle():
    rng = np.random.default_rng(314159)
    for _ in range(4_000):
        records = _random_case(rng)
        got = detect_collisions(records)
        want = record_collisions(records)
        for g, w in zip(got, want):
            assert np.array_equal(g, w)


def test_collision_flags_active_mode_matches_oracle():
    rng = np.random.default_rng(271828)
    for _ in range(2_000):
        records = _random_case(rng)
        active = [rng.random(r.n_units) < 0.6 for r in records]
        got = detect_collisions(records, active=active)
        want = record_collisions(records, active=active)
        for g, w in zip(got, want):
            assert np.array_equal(g, w)


def test_active_mode_with_all_active_equals_default():
    rng = np.random.default_rng(1618)
    for _ in range(500):
        records = _random_case(rng)
        default = detect_collisions(records)
        allon = detect_collisions(
            records, active=[np.ones(r.n_units, dtype=bool) for r in records]
        )
        for g, w in zip(default, allon):
            assert np.array_equal(g, w)


def test_flat_collision_flags_masked_interferers():
    # victim still collides only with active interferers
    starts = np.array([0.0, 0.5, 0.5])
    ends = np.array([1.0, 1.5, 1.5])
    channels = np.array([3, 3, 3])
    full = collision_flags(starts, ends, channels)
    assert full.all()
    masked = collision_flags(starts, ends, channels,
                             active=np.array([True, False, False]))
    # units 2 and 3 still see unit 1; unit 1 sees nobody active
    assert not masked[0]
    assert masked[1] and masked[2]


# --- decode rules ------------------------------------------------------------------------


def _outcomes(erased, collided):
    return [UnitOutcome(erased=e, collided=c) for e, c in zip(erased, collided)]


def test_decode_one_header_three_fragments():
    erased = [False, True, True] + [False, False, False, True, True, True, True]
    decision = decode_packet({"gw": _outcomes(erased, [False] * 10)}, CFG)
    assert decision.per_gateway_decoded["gw"]
    assert decision.network_decoded


def test_decode_two_fragments_insufficient():
    erased = [False, True, True] + [False, False, True, True, True, True, True]
    decision = decode_packet({"gw": _outcomes(erased, [False] * 10)}, CFG)
    assert not decision.network_decoded


def test_decode_requires_header():
    erased = [True, True, True] + [False] * 7
    decision = decode_packet({"gw": _outcomes(erased, [False] * 10)}, CFG)
    assert not decision.network_decoded


def test_decode_collision_destroys_header():
    erased = [False] * 10
    collided = [True, True, True] + [False] * 7
    decision = decode_packet({"gw": _outcomes(erased, collided)}, CFG)
    assert not decision.network_decoded


def test_network_decode_is_union():
    bad = _outcomes([True] * 10, [False] * 10)
    good = _outcomes([False] * 10, [False] * 10)
    decision = decode_packet({"a": bad, "b": good}, CFG)
    assert not decision.per_gateway_decoded["a"]
    assert decision.per_gateway_decoded["b"]
    assert decision.network_decoded


def test_unit_outcome_received_definition():
    assert UnitOutcome(erased=False, collided=False).received
    assert not UnitOutcome(erased=True, collided=False).received
    assert not UnitOutcome(erased=False, collided=True).received
    assert not UnitOutcome(erased=True, collided=True).received


@st.composite
def _flag_case(draw):
    n_headers = draw(st.integers(1, 3))
    n_frag = draw(st.integers(1, 7))
    n = n_headers + n_frag
    threshold = draw(st.integers(1, n_frag))
    erased = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    collided = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    return n_headers, threshold, erased, collided


@given(_flag_case())
@settings(max_examples=400)
def test_decode_matches_brute_rule(case):
    n_headers, threshold, erased, collided = case
    got = decode_from_flags(erased, collided, n_headers, threshold)
    assert got == brute_decode(erased, collided, n_headers, threshold)


@given(_flag_case(), st.data())
@settings(max_examples=400)
def test_decode_monotone_in_received_units(case, data):
    n_headers, threshold, erased, collided = case
    before = decode_from_flags(erased, collided, n_headers, threshold)
    lost = [i for i in range(len(erased)) if erased[i] or collided[i]]
    if not lost:
        return
    i = data.draw(st.sampled_from(lost))
    erased2 = list(erased)
    collided2 = list(collided)
    erased2[i] = False
    collided2[i] = False
    after = decode_from_flags(erased2, collided2, n_headers, threshold)
    if before:
        assert after


@given(st.lists(st.lists(st.booleans(), min_size=10, max_size=10),
                min_size=1, max_size=4))
@settings(max_examples=300)
def test_decode_monotone_in_gateways(rows):
    outcomes = {
        f"g{i}": _outcomes(row, [False] * 10) for i, row in enumerate(rows)
    }
    full = decode_packet(outcomes, CFG)
    fewer = decode_packet(dict(list(outcomes.items())[:-1]), CFG) if len(rows) > 1 else None
    if fewer is not None and fewer.network_decoded:
        assert full.network_decoded


# --- link evaluation ---------------------------------------------------------------------


LINK = LinkBudgetConfig()
TERR = TerrestrialChannelConfig()
REGION = RegionConfig()


def _terrestrial_gwset(xy):
    gw = Gateway("bs_inner_0", "terrestrial", np.asarray(xy, dtype=float))
    return GatewaySet(gateways=[gw], region=REGION)


def _haps_gwset():
    return GatewaySet(gateways=[Gateway("haps", "haps")], region=REGION,
                      haps=HapsConfig())


def test_links_deterministic_threshold_all_erased(rng):
    # sigma = 0 and a deterministic power below the floor
    quiet = TerrestrialChannelConfig(shadow_sigma_db=0.0)
    tx = make_transmission(0, 0.0, CFG, rng)
    erased = evaluate_links(tx, [20_000.0, 0.0], _terrestrial_gwset([0.0, 0.0]),
                            LINK, quiet, rng)
    assert erased.shape == (1, 10)
    assert erased.all()


def test_links_deterministic_threshold_none_erased(rng):
    quiet = TerrestrialChannelConfig(shadow_sigma_db=0.0)
    tx = make_transmission(0, 0.0, CFG, rng)
    erased = evaluate_links(tx, [1_000.0, 0.0], _terrestrial_gwset([0.0, 0.0]),
                            LINK, quiet, rng)
    assert not erased.any()


def test_links_haps_nadir_strong(rng):
    # -100.75 dBm deterministic with mild gamma fading never dips 31 dB
    tx = make_transmission(0, 0.0, CFG, rng)
    for _ in range(100):
        erased = evaluate_links(tx, [0.0, 0.0], _haps_gwset(), LINK, TERR, rng)
        assert not erased.any()


def test_links_detailed_samples_consistent(rng):
    tx = make_transmission(0, 0.0, CFG, rng)
    erased, samples = evaluate_links(tx, [10_000.0, 5_000.0],
                                     _terrestrial_gwset([0.0, 0.0]),
                                     LINK, TERR, rng, detailed=True)
    assert len(samples) == 1 and len(samples[0]) == 10
    for j, s in enumerate(samples[0]):
        assert s.gateway_id == "bs_inner_0"
        assert s.unit_index == j
        assert s.erased == erased[0, j]
        assert s.erased == (s.rx_power_dbm < LINK.sensitivity_dbm)
        assert s.distance == pytest.approx(math.hypot(10_000.0, 5_000.0))


def test_links_deterministic_same_seed(rng):
    tx = make_transmission(0, 0.0, CFG, rng)
    a = evaluate_links(tx, [9e3, 0.0], _terrestrial_gwset([0.0, 0.0]), LINK, TERR,
                       np.random.default_rng(42))
    b = evaluate_links(tx, [9e3, 0.0], _terrestrial_gwset([0.0, 0.0]), LINK, TERR,
                       np.random.default_rng(42))
    assert np.array_equal(a, b)


# --- end-to-end low-load sanity --------------------------------------------------------


def test_low_load_success_near_one():
    # erasure off, one gateway: only collisions can fail a packet, and the
    # offered load keeps expected concurrent units far below one
    decoded = 0
    total = 0
    for seed in (1, 2, 3):
        rng = np.random.default_rng(seed)
        records = schedule_traffic(100, 7_200.0, 3_600.0, CFG, rng)
        flags = detect_collisions(records)
        for r, coll in zip(records, flags):
            outcome = _outcomes([False] * r.n_units, coll.tolist())
            total += 1
            decoded += decode_packet({"gw": outcome}, CFG).network_decoded
    assert total > 300
    assert decoded / total > 0.99
