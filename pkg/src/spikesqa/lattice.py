"""Trotter lattice state and the effective classical energy.

The lattice is ``L`` coupled copies (slices) of the ``n``-spin system, periodic
in the slice index. Its Boltzmann weight is ``exp(-betaE)`` with::

    betaE = sum_i [ (beta / L) f(z_i) - J sum_j z_ij z_{i+1,j} ]
    J = 1/2 log coth(beta Gamma / L)

The coupling term carries a minus sign so that aligned neighbours in imaginary
time are favoured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .problem import SpikeProblem, bits_to_spins, spins_to_bits


class InfiniteCouplingError(ValueError):
    """Raised when the coupling is requested at zero transverse field."""


_SMALL_X = 1e-4


def coupling_strength(beta: float, gamma: float, L: int) -> float:
    """Imaginary-time coupling ``J = 1/2 log coth(beta * gamma / L)``.

    Stable from ``x = beta * gamma / L`` around 1e-16 up to overflow-free large
    ``x`` (where ``J`` decays like ``exp(-2x)``).
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if L < 2:
        raise ValueError(f"L must be at least 2, got {L}")
    if gamma == 0:
        raise InfiniteCouplingError("coupling diverges at gamma = 0")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = beta * gamma / L
    if x < _SMALL_X:
        # log coth x = log cosh x - log sinh x, log sinh x = log x + x^2/6 + O(x^4)
        return 0.5 * (math.log(math.cosh(x)) - math.log(x) - x * x / 6.0)
    if x > 350.0:
        return math.exp(-2.0 * x)
    # coth x = 1 + 2 / (exp(2x) - 1)
    return 0.5 * math.log1p(2.0 / math.expm1(2.0 * x))


@dataclass(frozen=True)
class PimcParams:
    beta: float
    gamma: float
    L: int

    def __post_init__(self):
        if not (self.beta > 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"L must be an integer >= 2, got {self.L}")
        object.__setattr__(self, "L", int(self.L))

    @property
    def coupling_J(self) -> float:
        return coupling_strength(self.beta, self.gamma, self.L)

    @property
    def beta_over_L(self) -> float:
        return self.beta / self.L


class WorldlineLattice:
    """``L x n`` array of +/-1 spins with a cached Hamming weight per slice.

    Mutate only through :func:`apply_flip` and the dynamics functions; writing
    to ``spins`` directly desynchronises ``weights``.
    """

    def __init__(self, spins):
        s = np.array(spins, dtype=np.int8, copy=True)
        if s.ndim != 2:
            raise ValueError(f"spins must be a 2-D (L, n) array, got shape {s.shape}")
        if s.shape[0] < 2:
            raise ValueError(f"need at least two Trotter slices, got L={s.shape[0]}")
        if s.shape[1] < 1:
            raise ValueError("need at least one spin per slice")
        if not np.all((s == 1) | (s == -1)):
            raise ValueError("spin entries must be +1 or -1")
        self.spins = np.ascontiguousarray(s)
        self.weights = self.recompute_weights()

    @classmethod
    def uniform(cls, n: int, L: int, spin: int = 1) -> "WorldlineLattice":
        return cls(np.full((L, n), spin, dtype=np.int8))

    @classmethod
    def random(cls, n: int, L: int, rng) -> "WorldlineLattice":
        """Each spin independently +1 or -1 with probability 1/2."""
        u = rng.generator.random((L, n))
        return cls(np.where(u < 0.5, 1, -1).astype(np.int8))

    @classmethod
    def from_bits(cls, bits) -> "WorldlineLattice":
        return cls(bits_to_spins(np.asarray(bits)))

    @property
    def n(self) -> int:
        return self.spins.shape[1]

    @property
    def L(self) -> int:
        return self.spins.shape[0]

    def bits(self) -> np.ndarray:
        return spins_to_bits(self.spins)

    def recompute_weights(self) -> np.ndarray:
        return ((self.n - self.spins.sum(axis=1, dtype=np.int64)) // 2).astype(np.int64)

    def copy(self) -> "WorldlineLattice":
        return WorldlineLattice(self.spins)

    def __eq__(self, other):
        if not isinstance(other, WorldlineLattice):
            return NotImplemented
        return np.array_equal(self.spins, other.spins)

    def __repr__(self):
        return f"WorldlineLattice(n={self.n}, L={self.L}, weights={self.weights.tolist()})"

    # -- snapshot format: "n L" then L rows of n characters in {0,1} --

    def to_text(self) -> str:
        rows = ["".join("1" if b else "0" for b in row) for row in self.bits()]
        return f"{self.n} {self.L}\n" + "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "WorldlineLattice":
        lines = [ln.strip() for ln in text.strip().splitlines()]
        try:
            n, L = (int(tok) for tok in lines[0].split())
        except (IndexError, ValueError):
            raise ValueError("snapshot header must be 'n L'") from None
        rows = lines[1:]
        if len(rows) != L or any(len(r) != n or set(r) - {"0", "1"} for r in rows):
            raise ValueError(f"snapshot body must be {L} rows of {n} characters in {{0,1}}")
        bits = np.array([[c == "1" for c in r] for r in rows], dtype=np.int8)
        return cls.from_bits(bits)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "WorldlineLattice":
        return cls.from_text(Path(path).read_text())


def _check_dims(problem: SpikeProblem, lattice: WorldlineLattice, params: PimcParams):
    if lattice.n != problem.n:
        raise ValueError(f"lattice has n={lattice.n}, problem has n={problem.n}")
    if lattice.L != params.L:
        raise ValueError(f"lattice has L={lattice.L}, params have L={params.L}")


def _check_site(lattice: WorldlineLattice, slice_: int, bit: int):
    if not (0 <= slice_ < lattice.L and 0 <= bit < lattice.n):
        raise IndexError(
            f"site ({slice_}, {bit}) outside lattice of shape ({lattice.L}, {lattice.n})"
        )


def effective_energy(problem: SpikeProblem, lattice: WorldlineLattice, params: PimcParams) -> float:
    """``betaE`` of the whole lattice, using the cached slice weights."""
    _check_dims(problem, lattice, params)
    f = problem.values_by_weight
    s = lattice.spins.astype(np.int64)
    bonds = int(np.sum(s * np.roll(s, -1, axis=0)))
    return params.beta_over_L * float(f[lattice.weights].sum()) - params.coupling_J * bonds


def flip_delta(problem, lattice, params, slice_: int, bit: int) -> float:
    """Change in ``betaE`` from flipping one spin, in O(1); the lattice is untouched."""
    _check_dims(problem, lattice, params)
    _check_site(lattice, slice_, bit)
    return float(
        _kernels.flip_delta(
            lattice.spins,
            lattice.weights,
            problem.values_by_weight,
            params.beta_over_L,
            params.coupling_J,
            slice_,
            bit,
        )
    )


def apply_flip(lattice: WorldlineLattice, slice_: int, bit: int) -> WorldlineLattice:
    _check_site(lattice, slice_, bit)
    _kernels.apply_flip(lattice.spins, lattice.weights, slice_, bit)
    return lattice
