"""Hamming-weight-with-a-spike objective and the bit/spin convention.

Bits and spins are related by ``spin = 1 - 2 * bit``: bit 0 is spin +1 and
bit 1 is spin -1. Every other module goes through the helpers here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class SpikeProblem:
    """Objective ``f(z) = h(z)`` except ``f(z) = spike_height`` at ``h(z) = spike_location``.

    With only ``n`` given the instance is built in canonical mode: the spike sits at
    weight ``n / 4`` with height ``n``, which requires ``n % 4 == 0``. Passing
    ``spike_location`` and ``spike_height`` explicitly gives control variants
    (e.g. :meth:`spikeless`) for any ``n >= 1``.
    """

    n: int
    spike_location: int | None = None
    spike_height: float | None = None

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError(f"n must be a positive integer, got {n!r}")
        object.__setattr__(self, "n", int(n))
        if self.spike_location is None and self.spike_height is None:
            if n < 4 or n % 4:
                raise ValueError(
                    f"canonical instances need n >= 4 and n % 4 == 0, got n={n}"
                )
            object.__setattr__(self, "spike_location", n // 4)
            object.__setattr__(self, "spike_height", float(n))
        elif self.spike_location is None or self.spike_height is None:
            raise ValueError("spike_location and spike_height must be given together")
        else:
            loc = int(self.spike_location)
            if not 0 <= loc <= n:
                raise ValueError(f"spike_location {loc} outside [0, {n}]")
            object.__setattr__(self, "spike_location", loc)
            object.__setattr__(self, "spike_height", float(self.spike_height))

    @classmethod
    def spikeless(cls, n: int) -> "SpikeProblem":
        """Control instance with ``f = h`` everywhere (the spike is flattened)."""
        loc = n // 4 if n % 4 == 0 else 0
        return cls(n, spike_location=loc, spike_height=float(loc))

    @property
    def is_canonical(self) -> bool:
        return (
            self.n % 4 == 0
            and self.spike_location == self.n // 4
            and self.spike_height == float(self.n)
        )

    @cached_property
    def values_by_weight(self) -> np.ndarray:
        """Array of length ``n + 1`` with ``f`` at every Hamming weight (read-only)."""
        f = np.arange(self.n + 1, dtype=np.float64)
        f[self.spike_location] = self.spike_height
        f.flags.writeable = False
        return f

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "spike_location": self.spike_location,
            "spike_height": self.spike_height,
        }


def as_spins(values) -> np.ndarray:
    """Validate a sequence of +/-1 entries and return it as an ``int8`` array."""
    s = np.asarray(values)
    if s.ndim != 1:
        raise ValueError(f"a spin slice must be one-dimensional, got shape {s.shape}")
    if not np.all((s == 1) | (s == -1)):
        raise ValueError("spin entries must be +1 or -1")
    return s.astype(np.int8)


def bits_to_spins(bits) -> np.ndarray:
    b = np.asarray(bits)
    if not np.all((b == 0) | (b == 1)):
        raise ValueError("bit entries must be 0 or 1")
    return (1 - 2 * b.astype(np.int8)).astype(np.int8)


def spins_to_bits(spins) -> np.ndarray:
    s = np.asarray(spins)
    return ((1 - s.astype(np.int8)) // 2).astype(np.int8)


def hamming_weight(slice_) -> int:
    """Number of 1 bits in a spin slice, ``(n - sum(s)) / 2``."""
    s = as_spins(slice_)
    return (s.size - int(s.sum(dtype=np.int64))) // 2


def objective_by_weight(problem: SpikeProblem, h: int) -> float:
    if not 0 <= h <= problem.n:
        raise ValueError(f"Hamming weight {h} outside [0, {problem.n}]")
    return float(problem.values_by_weight[h])


def evaluate_objective(problem: SpikeProblem, slice_) -> float:
    s = as_spins(slice_)
    if s.size != problem.n:
        raise ValueError(f"slice has length {s.size}, problem has n={problem.n}")
    return objective_by_weight(problem, hamming_weight(s))
