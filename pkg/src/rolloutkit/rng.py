"""Seeded random streams.

One 64-bit seed feeds a counter-based generator (Philox); independent
sub-streams are addressed by integer keys, so adding a new consumer never
shifts the numbers another consumer sees.
"""

from __future__ import annotations

import numpy as np

INSTANCE = 0
SOLVER = 1  # reserved, no solver draws randomness today
PROBES = 2
BENCH = 3


def stream(seed: int, *keys: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(keys))
    return np.random.Generator(np.random.Philox(ss))
