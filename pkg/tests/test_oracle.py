import itertools
import math

import numpy as np
import pytest
from scipy.linalg import eigh, expm
from scipy.optimize import minimize_scalar

from _oracles import boltzmann_over_lattices
from spikesqa.oracle import (
    OracleSizeError,
    brute_force_trotter_partition,
    default_gamma_grid,
    enumerate_lattices,
    exact_lattice_distribution,
    exact_thermal_slice_marginal,
    full_hamiltonian,
    gap_scan,
    lattice_index,
    lowest_levels,
    symmetric_gap,
    symmetric_hamiltonian,
    thermal_trace,
)
from spikesqa.problem import SpikeProblem

GAMMAS = np.logspace(-2, 1, 15)


def dicke_basis(n):
    """Columns are the normalized uniform superpositions over each Hamming weight."""
    V = np.zeros((2**n, n + 1))
    for z in range(2**n):
        V[z, bin(z).count("1")] = 1.0
    return V / np.sqrt(V.sum(axis=0))


def trotter_product_trace(problem, beta, gamma, L):
    """``tr (exp(-beta/L H_P) exp(beta gamma/L sum sigma_x))**L`` from dense matrices."""
    n = problem.n
    H = full_hamiltonian(problem, gamma)
    diag = np.diag(np.diag(H))
    driver = diag - H
    step = expm(-beta / L * diag) @ expm(beta / L * driver)
    return float(np.trace(np.linalg.matrix_power(step, L)))


def test_single_qubit_matrix():
    H = full_hamiltonian(SpikeProblem.spikeless(1), 0.3)
    np.testing.assert_array_equal(H, [[0.0, -0.3], [-0.3, 1.0]])


@pytest.mark.parametrize("n", [2, 4, 7])
def test_dense_matrix_structure(n):
    p = SpikeProblem(n, spike_location=n // 2, spike_height=float(n))
    H = full_hamiltonian(p, 0.7)
    np.testing.assert_array_equal(H, H.T)
    off = H - np.diag(np.diag(H))
    np.testing.assert_allclose(off.sum(axis=1), -0.7 * n)
    assert np.all(np.count_nonzero(off, axis=1) == n)


def test_zero_field_diagonal():
    np.testing.assert_array_equal(np.diag(symmetric_hamiltonian(SpikeProblem(4), 0.0)), [0, 4, 2, 3, 4])
    np.testing.assert_array_equal(symmetric_hamiltonian(SpikeProblem(4), 0.0), np.diag([0, 4, 2, 3, 4]))


@pytest.mark.parametrize("n", [3, 4, 8])
def test_symmetric_block_is_dicke_projection(n):
    p = SpikeProblem(8) if n == 8 else SpikeProblem(n, spike_location=1, spike_height=float(n))
    V = dicke_basis(n)
    for g in (0.05, 0.9, 4.0):
        np.testing.assert_allclose(V.T @ full_hamiltonian(p, g) @ V, symmetric_hamiltonian(p, g), atol=1e-12)


def test_lowest_two_levels_n4():
    p = SpikeProblem(4)
    for g in GAMMAS:
        full = eigh(full_hamiltonian(p, g), eigvals_only=True)[:2]
        np.testing.assert_allclose(lowest_levels(p, g, 2), full, atol=1e-10)


def test_n8_ground_state_and_embedding():
    # for n = 8 a non-symmetric level can sit below the symmetric first excited state
    p = SpikeProblem(8)
    below = 0
    for g in GAMMAS:
        full = eigh(full_hamiltonian(p, g), eigvals_only=True)
        sym = np.linalg.eigvalsh(symmetric_hamiltonian(p, g))
        assert abs(full[0] - sym[0]) < 1e-10
        assert np.max(np.min(np.abs(full[None, :] - sym[:, None]), axis=1)) < 1e-10
        below += full[1] < sym[1] - 1e-6
    assert below > 0


def test_gap_scan_refinement_is_stable():
    p = SpikeProblem(256)
    a = gap_scan(p, default_gamma_grid(64))
    b = gap_scan(p, default_gamma_grid(128))
    assert abs(a.g_min / b.g_min - 1) < 0.01
    assert abs(a.gamma_at_min / b.gamma_at_min - 1) < 0.01


def test_gap_scan_matches_continuous_minimizer():
    p = SpikeProblem(512)
    scan = gap_scan(p)
    x0 = math.log(scan.gamma_at_min)
    res = minimize_scalar(lambda x: symmetric_gap(p, math.exp(x)), bounds=(x0 - 0.1, x0 + 0.1),
                          method="bounded", options={"xatol": 1e-10})
    assert scan.g_min == pytest.approx(res.fun, rel=1e-3)
    assert scan.g_min >= res.fun - 1e-12
    assert np.all(np.diff(scan.gamma_grid) > 0)
    assert scan.g_min == scan.gaps.min()


def test_gap_shrinks_like_inverse_sqrt():
    g1 = gap_scan(SpikeProblem(1024)).g_min
    g2 = gap_scan(SpikeProblem(2048)).g_min
    assert g2 / g1 == pytest.approx(1 / math.sqrt(2), abs=0.05)


def test_gap_scan_rejects_tiny_grid():
    with pytest.raises(ValueError):
        gap_scan(SpikeProblem(8), np.logspace(-1, 1, 5))


def test_thermal_marginal_against_expm():
    p = SpikeProblem(4)
    for beta, gamma in ((1.0, 1.0), (5.0, 0.3), (0.2, 3.0)):
        rho = expm(-beta * full_hamiltonian(p, gamma))
        np.testing.assert_allclose(exact_thermal_slice_marginal(p, beta, gamma), np.diag(rho) / np.trace(rho), atol=1e-12)
        assert thermal_trace(p, beta, gamma) == pytest.approx(np.trace(rho), rel=1e-10)


def test_thermal_marginal_limits():
    p = SpikeProblem(4)
    assert exact_thermal_slice_marginal(p, 32.0, 1e-6)[0] >= 0.999
    np.testing.assert_allclose(exact_thermal_slice_marginal(p, 1e-9, 1.0), 1 / 16, atol=1e-8)
    np.testing.assert_allclose(exact_thermal_slice_marginal(p, 1.0, 1e4), 1 / 16, atol=1e-3)
    with pytest.raises(OracleSizeError):
        exact_thermal_slice_marginal(SpikeProblem(12), 1.0, 1.0)


def test_trotter_single_qubit_closed_form():
    beta, gamma = 1.3, 0.8
    a = beta * gamma / 2
    expected = math.cosh(a) ** 2 + 2 * math.exp(-beta / 2) * math.sinh(a) ** 2 + math.exp(-beta) * math.cosh(a) ** 2
    assert brute_force_trotter_partition(SpikeProblem.spikeless(1), beta, gamma, 2) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("L", [2, 3, 4, 6])
def test_trotter_sum_equals_product_formula(L):
    p = SpikeProblem(2, spike_location=1, spike_height=2.0)
    for beta, gamma in ((1.0, 1.0), (3.0, 0.2)):
        assert brute_force_trotter_partition(p, beta, gamma, L) == pytest.approx(
            trotter_product_trace(p, beta, gamma, L), rel=1e-10
        )


def test_trotter_converges():
    p = SpikeProblem.spikeless(2)
    exact = thermal_trace(p, 1.0, 1.0)
    errs = [abs(brute_force_trotter_partition(p, 1.0, 1.0, L) / exact - 1) for L in (2, 4, 8)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.02


def test_lattice_distribution_matches_loops():
    p = SpikeProblem(2, spike_location=1, spike_height=2.0)
    np.testing.assert_allclose(
        exact_lattice_distribution(p, 2.0, 0.7, 3), boltzmann_over_lattices(2, 3, 2.0, 0.7, 1, 2.0), atol=1e-13
    )
    with pytest.raises(OracleSizeError):
        exact_lattice_distribution(SpikeProblem(4), 1.0, 1.0, 6)


def test_lattice_indexing():
    codes = [lattice_index(b) for b in enumerate_lattices(2, 3)]
    assert codes == list(range(64))
    bits = np.array([[1, 0], [0, 0], [0, 1]])
    assert lattice_index(bits) == 1 + 32


def test_dense_size_limit():
    with pytest.raises(OracleSizeError):
        full_hamiltonian(SpikeProblem(16), 1.0)
    assert symmetric_hamiltonian(SpikeProblem(4096), 1.0).shape == (4097, 4097)
