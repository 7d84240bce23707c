"""Quick equivalence checks run by ``spikesqa oracle-check``.

Each check returns a dict with ``name``, ``value``, ``tolerance`` and
``passed``. Sample sizes are trimmed so the whole suite finishes in seconds;
the test suite runs the same comparisons at full size.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh, eigvalsh_tridiagonal

from .dynamics import sample_lattice_histogram
from .lattice import PimcParams, WorldlineLattice, apply_flip, effective_energy, flip_delta
from .oracle import (
    brute_force_trotter_partition,
    exact_lattice_distribution,
    full_hamiltonian,
    symmetric_tridiagonal,
    thermal_trace,
)
from .problem import SpikeProblem
from .rng import RngStream
from .sa import SaRunConfig, exact_success_probability, run_sa_trial


def _check(name, value, tolerance, passed):
    return {"name": name, "value": float(value), "tolerance": float(tolerance), "passed": bool(passed)}


def symmetric_sector_check():
    """Ground energies agree and every symmetric level appears in the full spectrum."""
    worst = 0.0
    for n in (4, 8):
        p = SpikeProblem(n)
        for g in np.logspace(-2, 1, 12):
            full = eigh(full_hamiltonian(p, g), eigvals_only=True)
            sym = eigvalsh_tridiagonal(*symmetric_tridiagonal(p, g))
            worst = max(worst, abs(full[0] - sym[0]))
            worst = max(worst, float(np.max(np.min(np.abs(full[None, :] - sym[:, None]), axis=1))))
    return _check("symmetric_sector_in_full_spectrum", worst, 1e-10, worst < 1e-10)


def trotter_check():
    p = SpikeProblem.spikeless(2)
    exact = thermal_trace(p, 1.0, 1.0)
    errs = [abs(brute_force_trotter_partition(p, 1.0, 1.0, L) / exact - 1) for L in (2, 4, 8)]
    ok = errs[0] > errs[1] > errs[2] and errs[2] < 0.02
    return _check("trotter_relative_error_L8", errs[2], 0.02, ok)


def flip_delta_check(seed, count=2000):
    rng = RngStream(seed, 101)
    g = rng.generator
    worst = 0.0
    for _ in range(count):
        n = int(g.integers(1, 9))
        L = int(g.integers(2, 17))
        p = SpikeProblem(n, spike_location=int(g.integers(0, n + 1)), spike_height=float(n))
        params = PimcParams(float(g.uniform(0.5, 40)), float(g.uniform(1e-3, 2)), L)
        lat = WorldlineLattice.random(n, L, rng)
        i, j = int(g.integers(L)), int(g.integers(n))
        before = effective_energy(p, lat, params)
        d = flip_delta(p, lat, params, i, j)
        apply_flip(lat, i, j)
        after = effective_energy(p, WorldlineLattice(lat.spins), params)
        worst = max(worst, abs(d - (after - before)))
    return _check("flip_delta_vs_recompute", worst, 1e-9, worst < 1e-9)


def equilibrium_check(seed):
    p = SpikeProblem(2, spike_location=1, spike_height=2.0)
    params = PimcParams(2.0, 0.7, 2)
    exact = exact_lattice_distribution(p, params.beta, params.gamma, params.L)
    lat = WorldlineLattice.uniform(2, 2)
    counts = sample_lattice_histogram(p, lat, params, RngStream(seed, 102), 200_000)
    tv = 0.5 * np.abs(counts / counts.sum() - exact).sum()
    return _check("equilibrium_n2_L2_tv", tv, 0.02, tv < 0.02)


def sa_oracle_check(seed, trials=4000):
    p = SpikeProblem(4)
    cfg = SaRunConfig(n=4, sweeps_per_beta=2, seed=seed)
    exact = exact_success_probability(p, cfg)
    hits = sum(run_sa_trial(p, cfg, k).success for k in range(trials))
    sigma = np.sqrt(exact * (1 - exact) / trials)
    z = abs(hits / trials - exact) / sigma
    return _check("sa_birth_death_oracle_n4_zscore", z, 3.0, z < 3.0)


def run_oracle_checks(seed: int = 0) -> list:
    return [
        symmetric_sector_check(),
        trotter_check(),
        flip_delta_check(seed),
        equilibrium_check(seed),
        sa_oracle_check(seed),
    ]
