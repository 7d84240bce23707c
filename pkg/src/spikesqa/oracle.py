"""Exact small-scale quantum references for the PIMC engine.

``H(Gamma) = H_P - Gamma * sum_i sigma^x_i`` with ``H_P`` diagonal in the
computational basis, ``<z|H_P|z> = f(z)``. Basis index ``z`` encodes bit ``j``
as ``(z >> j) & 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.special import logsumexp

from .lattice import coupling_strength
from .problem import SpikeProblem

MAX_DENSE_N = 12
MAX_THERMAL_N = 8
MAX_TROTTER_SITES = 20


class OracleSizeError(ValueError):
    """The requested exact computation is too large to run densely."""


def _popcounts(n: int) -> np.ndarray:
    z = np.arange(2**n)
    return np.array([bin(x).count("1") for x in z])


def full_hamiltonian(problem: SpikeProblem, gamma: float) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of ``H(gamma)``."""
    n = problem.n
    if n > MAX_DENSE_N:
        raise OracleSizeError(
            f"dense Hamiltonian needs n <= {MAX_DENSE_N} (got {n}); use symmetric_hamiltonian"
        )
    dim = 2**n
    H = np.zeros((dim, dim))
    H[np.diag_indices(dim)] = problem.values_by_weight[_popcounts(n)]
    z = np.arange(dim)
    for j in range(n):
        H[z, z ^ (1 << j)] = -gamma
    return H


def symmetric_tridiagonal(problem: SpikeProblem, gamma: float) -> tuple:
    """Diagonal and off-diagonal of ``H(gamma)`` in the permutation-symmetric sector."""
    n = problem.n
    h = np.arange(n)
    diag = np.array(problem.values_by_weight, dtype=float)
    off = -gamma * np.sqrt((h + 1.0) * (n - h))
    return diag, off


def symmetric_hamiltonian(problem: SpikeProblem, gamma: float) -> np.ndarray:
    """``(n+1) x (n+1)`` matrix indexed by Hamming weight."""
    d, e = symmetric_tridiagonal(problem, gamma)
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def lowest_levels(problem: SpikeProblem, gamma: float, k: int = 2) -> np.ndarray:
    d, e = symmetric_tridiagonal(problem, gamma)
    return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, k - 1))


def symmetric_gap(problem: SpikeProblem, gamma: float) -> float:
    e0, e1 = lowest_levels(problem, gamma, 2)
    return float(e1 - e0)


@dataclass(frozen=True)
class SpectralScan:
    n: int
    gamma_grid: np.ndarray
    gaps: np.ndarray
    g_min: float
    gamma_at_min: float


def default_gamma_grid(points: int = 64) -> np.ndarray:
    return np.logspace(-3, 2, points)


def gap_scan(problem: SpikeProblem, gamma_grid=None, refine_rounds: int = 3) -> SpectralScan:
    """Symmetric-sector gap over ``gamma_grid`` with local refinement of the minimum.

    Each refinement round resamples the two intervals adjacent to the current
    minimum (in log-gamma) ten times more finely.
    """
    grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 16 or not np.all(grid > 0):
        raise ValueError("gamma_grid must hold at least 16 positive values")
    grid = np.unique(grid)
    gaps = np.array([symmetric_gap(problem, g) for g in grid])
    all_g, all_gap = list(grid), list(gaps)
    logs = np.log(grid)
    i = int(np.argmin(gaps))
    lo, hi = logs[max(i - 1, 0)], logs[min(i + 1, grid.size - 1)]
    step = (hi - lo) / 2
    for _ in range(refine_rounds):
        step /= 10
        fine = np.exp(np.arange(lo, hi + step / 2, step))
        fine_gaps = np.array([symmetric_gap(problem, g) for g in fine])
        all_g.extend(fine)
        all_gap.extend(fine_gaps)
        j = int(np.argmin(fine_gaps))
        centre = np.log(fine[j])
        lo, hi = centre - step, centre + step
    g_arr, first = np.unique(np.array(all_g), return_index=True)
    gap_arr = np.array(all_gap)[first]
    k = int(np.argmin(gap_arr))
    return SpectralScan(problem.n, g_arr, gap_arr, float(gap_arr[k]), float(g_arr[k]))


def thermal_trace(problem: SpikeProblem, beta: float, gamma: float) -> float:
    """``tr exp(-beta H)`` from the dense spectrum."""
    w = eigh(full_hamiltonian(problem, gamma), eigvals_only=True)
    return float(np.exp(logsumexp(-beta * w)))


def exact_thermal_slice_marginal(problem: SpikeProblem, beta: float, gamma: float) -> np.ndarray:
    """Diagonal of ``exp(-beta H) / tr exp(-beta H)`` over the ``2**n`` basis states."""
    if problem.n > MAX_THERMAL_N:
        raise OracleSizeError(f"thermal marginal needs n <= {MAX_THERMAL_N}, got {problem.n}")
    w, v = eigh(full_hamiltonian(problem, gamma))
    boltz = np.exp(-beta * (w - w[0]))
    p = (v**2) @ boltz
    return p / p.sum()


def _trotter_log_terms(problem: SpikeProblem, beta: float, gamma: float, L: int) -> np.ndarray:
    n = problem.n
    sites = n * L
    codes = np.arange(2**sites, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(sites)) & 1).astype(np.int8).reshape(-1, L, n)
    spins = 1 - 2 * bits.astype(np.int64)
    f = problem.values_by_weight[bits.sum(axis=2)]
    J = coupling_strength(beta, gamma, L)
    bonds = np.sum(spins * np.roll(spins, -1, axis=1), axis=(1, 2))
    return -(beta / L) * f.sum(axis=1) + J * bonds


def trotter_prefactor_log(beta: float, gamma: float, L: int, n: int) -> float:
    """Log of ``(sinh(2 beta gamma / L) / 2) ** (n L / 2)``."""
    return 0.5 * n * L * np.log(0.5 * np.sinh(2.0 * beta * gamma / L))


def brute_force_trotter_partition(problem: SpikeProblem, beta: float, gamma: float, L: int) -> float:
    """Normalized ``sum_z exp(-betaE(z))`` over all ``2**(n L)`` lattices.

    The prefactor makes the value an approximation of ``tr exp(-beta H)``.
    """
    if problem.n * L > MAX_TROTTER_SITES:
        raise OracleSizeError(f"enumeration needs n * L <= {MAX_TROTTER_SITES}, got {problem.n * L}")
    if L < 2:
        raise ValueError("L must be at least 2")
    log_z = logsumexp(_trotter_log_terms(problem, beta, gamma, L))
    return float(np.exp(log_z + trotter_prefactor_log(beta, gamma, L, problem.n)))


def exact_lattice_distribution(problem: SpikeProblem, beta: float, gamma: float, L: int) -> np.ndarray:
    """Boltzmann weights of every lattice, indexed like :func:`lattice_index`."""
    if problem.n * L > MAX_TROTTER_SITES:
        raise OracleSizeError(f"enumeration needs n * L <= {MAX_TROTTER_SITES}, got {problem.n * L}")
    t = _trotter_log_terms(problem, beta, gamma, L)
    p = np.exp(t - t.max())
    return p / p.sum()


def lattice_index(bits) -> int:
    """Integer code of an ``(L, n)`` bit array, bit ``i * n + j`` = ``bits[i, j]``."""
    flat = np.asarray(bits, dtype=np.int64).ravel()
    return int(np.sum(flat << np.arange(flat.size)))


def enumerate_lattices(n: int, L: int):
    """All ``(L, n)`` bit arrays in :func:`lattice_index` order."""
    for code in range(2 ** (n * L)):
        yield np.array([(code >> k) & 1 for k in range(n * L)], dtype=np.int8).reshape(L, n)


def basis_index(bits) -> int:
    """Basis index of one slice, bit ``j`` weighted by ``2**j``."""
    b = np.asarray(bits, dtype=np.int64)
    return int(np.sum(b << np.arange(b.size)))

