"""Slow, independent reference computations shared by the test modules.

Nothing here calls the library's energy or sampling code; the objective is
recomputed from its definition and the coupling from mpmath.
"""

import itertools
import math

import mpmath
import numpy as np


def f_of_weight(n, h, loc, height):
    return float(height) if h == loc else float(h)


def coupling(beta, gamma, L):
    with mpmath.workdps(50):
        return float(0.5 * mpmath.log(mpmath.coth(mpmath.mpf(beta) * gamma / L)))


def log_weight(bits, beta, gamma, loc, height):
    """``-betaE`` of an ``(L, n)`` bit lattice by explicit loops."""
    L, n = len(bits), len(bits[0])
    J = coupling(beta, gamma, L)
    total = 0.0
    for i in range(L):
        total -= beta / L * f_of_weight(n, sum(bits[i]), loc, height)
        for j in range(n):
            s = 1 - 2 * bits[i][j]
            t = 1 - 2 * bits[(i + 1) % L][j]
            total += J * s * t
    return total


def lattice_code(bits):
    L, n = len(bits), len(bits[0])
    return sum(bits[i][j] << (i * n + j) for i in range(L) for j in range(n))


def boltzmann_over_lattices(n, L, beta, gamma, loc, height):
    """Normalized weights indexed by ``lattice_code``."""
    size = 2 ** (n * L)
    logs = np.empty(size)
    for flat in itertools.product((0, 1), repeat=n * L):
        bits = [list(flat[i * n:(i + 1) * n]) for i in range(L)]
        logs[lattice_code(bits)] = log_weight(bits, beta, gamma, loc, height)
    p = np.exp(logs - logs.max())
    return p / p.sum()


def tv(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return 0.5 * float(np.abs(p / p.sum() - q / q.sum()).sum())


def binom_sigma(p, trials):
    return math.sqrt(max(p * (1 - p), 1e-300) / trials)
