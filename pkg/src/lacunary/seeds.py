"""Deterministic seed derivation and counter-based bit streams.

All randomness in the package flows through two primitives: a keyed
blake2b counter stream (used to draw fixed-point alphas whose binary
expansion is stable under precision increases) and a seed-derivation
hash (so each sample of a Monte Carlo campaign owns an independent
stream and samples can run in any order, or in parallel, without
changing a single reported number).
"""

from __future__ import annotations

import hashlib

_MASK64 = (1 << 64) - 1
_BLOCK_BYTES = 64


def derive_seed(master: int, *indices: int) -> int:
    """Derive a 64-bit per-sample seed from a master seed and index path."""
    h = hashlib.blake2b(digest_size=8, key=(master & _MASK64).to_bytes(8, "big"))
    for ix in indices:
        h.update(int(ix).to_bytes(8, "big", signed=False))
    return int.from_bytes(h.digest(), "big")


def stream_bits(seed: int, nbits: int) -> int:
    """Return the first `nbits` of the blake2b counter stream keyed by `seed`.

    The stream is prefix-consistent: reading more bits extends the same
    expansion, so the top bits of stream_bits(s, P2) equal
    stream_bits(s, P1) for P1 < P2.  Raising precision therefore refines
    the same real number instead of drawing a fresh one.
    """
    if nbits <= 0:
        raise ValueError("nbits must be positive")
    key = (seed & _MASK64).to_bytes(8, "big")
    blocks = bytearray()
    counter = 0
    while 8 * len(blocks) < nbits:
        blocks += hashlib.blake2b(
            counter.to_bytes(8, "big"), key=key, digest_size=_BLOCK_BYTES
        ).digest()
        counter += 1
    return int.from_bytes(blocks, "big") >> (8 * len(blocks) - nbits)
