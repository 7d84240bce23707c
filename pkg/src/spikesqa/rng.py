"""Seeded random streams.

Each Monte Carlo trial owns one stream identified by ``(master_seed, stream_id)``.
The stream is numpy's PCG64 bit generator seeded by
``SeedSequence(master_seed, spawn_key=(stream_id,))``; SeedSequence's hash
mixing spreads both integers over the full 128-bit PCG state, and PCG64's
output is the same on every platform numpy supports. The numba kernels draw
from the very same ``Generator`` object, so a stream advanced from Python and
from compiled code is one sequence.
"""

from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "numpy.PCG64 seeded by SeedSequence(master_seed, spawn_key=(stream_id,))"

_U64 = 1 << 64


class RngStream:
    __slots__ = ("master_seed", "stream_id", "generator")

    def __init__(self, master_seed: int, stream_id: int = 0):
        for name, value in (("master_seed", master_seed), ("stream_id", stream_id)):
            if not 0 <= int(value) < _U64:
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def uniform(self) -> float:
        return float(self.generator.random())

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"
