"""Markov-chain updates targeting ``pi(z) ~ exp(-betaE(z))``.

Two local update orders are provided. :func:`sweep` is the systematic
slice-major scan used for all annealing runs; it leaves ``pi`` stationary but
is not reversible step by step. :func:`random_site_update` picks sites
uniformly at random and satisfies detailed balance exactly, which is what the
transition-matrix tests check. :func:`worldline_resample` redraws a whole
imaginary-time column from its exact conditional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lattice import PimcParams, WorldlineLattice, _check_dims, effective_energy
from .problem import SpikeProblem
from .rng import RngStream


@dataclass(frozen=True)
class SweepReport:
    attempted: int
    accepted: int
    final_energy: float

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempted if self.attempted else 0.0


def metropolis_accept(delta_beta_E: float, rng: RngStream) -> bool:
    """Accept with probability ``min(1, exp(-delta))``; draws a uniform only when uphill."""
    if not math.isfinite(delta_beta_E):
        raise ValueError(f"energy difference must be finite, got {delta_beta_E}")
    if delta_beta_E <= 0.0:
        return True
    return rng.uniform() < math.exp(-delta_beta_E)


def _args(problem, lattice, params):
    _check_dims(problem, lattice, params)
    return (
        lattice.spins,
        lattice.weights,
        problem.values_by_weight,
        params.beta_over_L,
        params.coupling_J,
    )


def sweep(
    problem: SpikeProblem,
    lattice: WorldlineLattice,
    params: PimcParams,
    rng: RngStream,
    n_sweeps: int = 1,
    worldline: bool = False,
) -> SweepReport:
    """Run ``n_sweeps`` systematic scans (slice 0 bits 0..n-1, then slice 1, ...).

    With ``worldline=True`` every scan is followed by one heat-bath column
    redraw per qubit; those redraws are not counted in the report.
    """
    if n_sweeps < 0:
        raise ValueError("n_sweeps must be non-negative")
    accepted = _kernels.sweeps(*_args(problem, lattice, params), rng.generator, n_sweeps, worldline)
    return SweepReport(
        attempted=n_sweeps * lattice.n * lattice.L,
        accepted=int(accepted),
        final_energy=effective_energy(problem, lattice, params),
    )


def random_site_update(
    problem: SpikeProblem,
    lattice: WorldlineLattice,
    params: PimcParams,
    rng: RngStream,
    n_steps: int = 1,
) -> SweepReport:
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    accepted = _kernels.random_site_steps(*_args(problem, lattice, params), rng.generator, n_steps)
    return SweepReport(
        attempted=n_steps,
        accepted=int(accepted),
        final_energy=effective_energy(problem, lattice, params),
    )


def worldline_resample(
    problem: SpikeProblem,
    lattice: WorldlineLattice,
    params: PimcParams,
    qubit: int,
    rng: RngStream,
) -> WorldlineLattice:
    """Redraw column ``qubit`` from its conditional given all other columns.

    The conditional is a periodic 1-D Ising chain with coupling ``J`` and a
    per-slice field set by how ``f`` changes when the qubit's bit is 1.
    """
    if not 0 <= qubit < lattice.n:
        raise IndexError(f"qubit {qubit} outside [0, {lattice.n})")
    _kernels.worldline_resample(*_args(problem, lattice, params), qubit, rng.generator)
    return lattice


def sample_lattice_histogram(problem, lattice, params, rng, n_samples: int, burn_in: int = 1000, thin: int = 1):
    """Counts of every lattice configuration visited by systematic sweeps.

    Configurations are indexed by the integer whose bit ``i * n + j`` is the bit
    at slice ``i``, qubit ``j``. Only practical for ``n * L <= 20``.
    """
    if lattice.n * lattice.L > 20:
        raise ValueError("lattice histogram needs n * L <= 20")
    sweep(problem, lattice, params, rng, burn_in)
    counts = np.zeros(2 ** (lattice.n * lattice.L), dtype=np.int64)
    _kernels.lattice_histogram(*_args(problem, lattice, params), rng.generator, n_samples, thin, counts)
    return counts


def sample_slice_histogram(problem, lattice, params, rng, n_samples: int, burn_in: int = 1000, thin: int = 1):
    """Pooled occupancy of the ``2**n`` slice states over all slices and samples."""
    if lattice.n > 20:
        raise ValueError("slice histogram needs n <= 20")
    sweep(problem, lattice, params, rng, burn_in)
    counts = np.zeros(2**lattice.n, dtype=np.int64)
    _kernels.slice_histogram(*_args(problem, lattice, params), rng.generator, n_samples, thin, counts)
    return counts
