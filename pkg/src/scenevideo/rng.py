"""Named, seeded random streams on numpy's Philox counter-based generator.

A stream is keyed by ``SeedSequence([seed, crc32(name)])`` so independent
consumers (init, noise per level, training sampler) never share state and the
same ``(seed, name)`` always yields the same bits.
"""

from __future__ import annotations

import zlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def stream(seed: int, name: str) -> np.random.Generator:
    if seed < 0 or seed > SEED_MASK:
        raise ValueError("seed must be an unsigned 64-bit value")
    key = np.random.SeedSequence([seed & SEED_MASK, zlib.crc32(name.encode("utf-8"))])
    return np.random.Generator(np.random.Philox(key))
