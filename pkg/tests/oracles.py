"""Brute-force reference implementations used to cross-check the fast paths.

Everything here is written with a different algorithmic shape from the
library code (full pairwise matrices instead of sort-and-sweep) so a shared
bug is unlikely.
"""

import numpy as np


def pairwise_collisions(starts, ends, channels, packet_of, active=None):
    """O(n^2) interval-overlap collision flags.

    A unit collides iff some unit of a DIFFERENT packet overlaps it in
    time with strictly positive duration on the same channel.  ``active``
    masks which units count as interferers (they can still be victims).
    """
    s = np.asarray(starts, dtype=float)
    e = np.asarray(ends, dtype=float)
    ch = np.asarray(channels)
    pk = np.asarray(packet_of)
    n = s.size
    if n == 0:
        return np.zeros(0, dtype=bool)
    overlap = (s[:, None] < e[None, :]) & (s[None, :] < e[:, None])
    same_channel = ch[:, None] == ch[None, :]
    other_packet = pk[:, None] != pk[None, :]
    hits = overlap & same_channel & other_packet
    if active is not None:
        hits &= np.asarray(active, dtype=bool)[None, :]
    return hits.any(axis=1)


def record_collisions(records, active=None):
    """Same rule, starting from TransmissionRecord objects."""
    starts = np.concatenate([r.unit_starts for r in records])
    ends = np.concatenate([r.unit_ends for r in records])
    channels = np.concatenate([r.channels for r in records])
    packet_of = np.concatenate(
        [np.full(r.n_units, i) for i, r in enumerate(records)]
    )
    flat_active = None if active is None else np.concatenate(active)
    flat = pairwise_collisions(starts, ends, channels, packet_of, flat_active)
    out, pos = [], 0
    for r in records:
        out.append(flat[pos:pos + r.n_units])
        pos += r.n_units
    return out


def brute_decode(erased, collided, n_headers, threshold):
    """Decode rule spelled out unit by unit."""
    ok_header = False
    got_fragments = 0
    for i, (er, co) in enumerate(zip(erased, collided)):
        received = (not er) and (not co)
        if i < n_headers:
            ok_header = ok_header or received
        elif received:
            got_fragments += 1
    return ok_header and got_fragments >= threshold
