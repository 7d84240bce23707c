"""numba kernels for the Monte Carlo loops.

Conventions shared by every kernel:

* ``spins`` is an ``(L, n)`` int8 array of +/-1, ``weights`` the int64 Hamming
  weight of each row, kept in sync on every accepted flip.
* ``fvals`` is the objective indexed by Hamming weight.
* ``bL`` is beta / L, ``J`` the imaginary-time coupling; the energy term per
  bond is ``-J * s * s'`` (ferromagnetic).
* ``rng`` is a ``numpy.random.Generator``; Metropolis draws one uniform only for
  uphill moves.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def flip_delta(spins, weights, fvals, bL, J, i, j):
    L = spins.shape[0]
    s = np.int64(spins[i, j])
    w = weights[i]
    # spin +1 is bit 0, so flipping it raises the weight by one
    w_new = w + s
    nb = np.int64(spins[(i - 1 + L) % L, j]) + np.int64(spins[(i + 1) % L, j])
    return bL * (fvals[w_new] - fvals[w]) + 2.0 * J * s * nb


@njit(cache=True, nogil=True)
def apply_flip(spins, weights, i, j):
    s = spins[i, j]
    weights[i] += s
    spins[i, j] = -s


@njit(cache=True, nogil=True)
def metropolis(delta, rng):
    if delta <= 0.0:
        return True
    return rng.random() < np.exp(-delta)


@njit(cache=True, nogil=True)
def worldline_resample(spins, weights, fvals, bL, J, k, rng):
    """Heat-bath redraw of column ``k`` through a normalized transfer-matrix pass."""
    L = spins.shape[0]
    # site weights phi[i, a], a = 0 for spin +1 (bit 0), a = 1 for spin -1 (bit 1)
    phi = np.empty((L, 2))
    for i in range(L):
        w_other = weights[i] - (1 - spins[i, k]) // 2
        e0 = bL * fvals[w_other]
        e1 = bL * fvals[w_other + 1]
        m = min(e0, e1)
        phi[i, 0] = np.exp(-(e0 - m))
        phi[i, 1] = np.exp(-(e1 - m))
    # bond factor exp(J (s s' - 1)): 1 when aligned
    anti = np.exp(-2.0 * J)
    bond = np.array([[1.0, anti], [anti, 1.0]])

    # diagonal of the ring product M_0 M_1 ... M_{L-1}, M_i(a, b) = phi_i(a) bond(a, b)
    p00, p01, p10, p11 = 1.0, 0.0, 0.0, 1.0
    for i in range(L):
        m00 = phi[i, 0] * bond[0, 0]
        m01 = phi[i, 0] * bond[0, 1]
        m10 = phi[i, 1] * bond[1, 0]
        m11 = phi[i, 1] * bond[1, 1]
        q00 = p00 * m00 + p01 * m10
        q01 = p00 * m01 + p01 * m11
        q10 = p10 * m00 + p11 * m10
        q11 = p10 * m01 + p11 * m11
        scale = max(max(abs(q00), abs(q01)), max(abs(q10), abs(q11)))
        p00, p01, p10, p11 = q00 / scale, q01 / scale, q10 / scale, q11 / scale
    first = 0 if rng.random() * (p00 + p11) < p00 else 1

    # backward messages for the open chain pinned at slice 0
    r = np.empty((L, 2))
    for x in range(2):
        r[L - 1, x] = phi[L - 1, x] * bond[x, first]
    for i in range(L - 2, 0, -1):
        for x in range(2):
            r[i, x] = phi[i, x] * (bond[x, 0] * r[i + 1, 0] + bond[x, 1] * r[i + 1, 1])
        scale = max(r[i, 0], r[i, 1])
        r[i, 0] /= scale
        r[i, 1] /= scale

    new = np.empty(L, dtype=np.int64)
    new[0] = first
    for i in range(1, L):
        a = new[i - 1]
        w0 = bond[a, 0] * r[i, 0]
        w1 = bond[a, 1] * r[i, 1]
        new[i] = 0 if rng.random() * (w0 + w1) < w0 else 1

    for i in range(L):
        s_new = np.int8(1 - 2 * new[i])
        if spins[i, k] != s_new:
            apply_flip(spins, weights, i, k)


@njit(cache=True, nogil=True)
def acceptance_table(fvals, bL, J, n):
    """Metropolis acceptance probabilities indexed by ``[weight, a, c]``.

    ``a`` is 0 for spin +1 and 1 for spin -1; ``c = (s * (s_prev + s_next) + 2) / 2``.
    Downhill entries hold 2.0 so they are accepted without a draw.
    """
    table = np.empty((n + 1, 2, 3))
    for w in range(n + 1):
        for a in range(2):
            w_new = min(max(w + 1 - 2 * a, 0), n)
            for c in range(3):
                d = bL * (fvals[w_new] - fvals[w]) + 2.0 * J * (2 * c - 2)
                table[w, a, c] = 2.0 if d <= 0.0 else np.exp(-d)
    return table


@njit(cache=True, nogil=True)
def sweeps(spins, weights, fvals, bL, J, rng, n_sweeps, worldline):
    """Systematic slice-major Metropolis sweeps; returns the number of accepted flips.

    Decisions match ``metropolis(flip_delta(...), rng)`` draw for draw.
    """
    L, n = spins.shape
    table = acceptance_table(fvals, bL, J, n)
    accepted = 0
    for _ in range(n_sweeps):
        for i in range(L):
            row = spins[i]
            prev = spins[(i - 1 + L) % L]
            nxt = spins[(i + 1) % L]
            for j in range(n):
                s = row[j]
                q = table[weights[i], (1 - s) >> 1, (s * (prev[j] + nxt[j]) + 2) >> 1]
                if q > 1.0 or rng.random() < q:
                    row[j] = -s
                    weights[i] += s
                    accepted += 1
        if worldline:
            for k in range(n):
                worldline_resample(spins, weights, fvals, bL, J, k, rng)
    return accepted


@njit(cache=True, nogil=True)
def is_wall_free(spins):
    L, n = spins.shape
    for i in range(1, L):
        for j in range(n):
            if spins[i, j] != spins[0, j]:
                return False
    return True


@njit(cache=True, nogil=True)
def anneal(spins, weights, fvals, bL, Js, rng, sweeps_per_gamma, worldline, freeze_tol):
    """Run ``sweeps_per_gamma`` sweeps at each coupling in ``Js`` (non-decreasing).

    Without worldline moves, a lattice with no imaginary-time domain walls can
    only change through flips that break two bonds. When the summed acceptance
    bound over all remaining proposals drops below ``freeze_tol`` the run stops
    early. Returns the number of coupling steps actually run.
    """
    L, n = spins.shape
    m = Js.shape[0]
    for g in range(m):
        sweeps(spins, weights, fvals, bL, Js[g], rng, sweeps_per_gamma, worldline)
        if worldline or freeze_tol <= 0.0 or g == m - 1:
            continue
        if not is_wall_free(spins):
            continue
        table = acceptance_table(fvals, bL, Js[g + 1], n)
        p_max = 0.0
        for w in range(n + 1):
            for a in range(2):
                if table[w, a, 2] > p_max:
                    p_max = table[w, a, 2]
        remaining = float(m - g - 1) * sweeps_per_gamma * L * n
        if p_max <= 1.0 and remaining * p_max < freeze_tol:
            return g + 1
    return m


@njit(cache=True, nogil=True)
def random_site_steps(spins, weights, fvals, bL, J, rng, n_steps):
    L, n = spins.shape
    accepted = 0
    for _ in range(n_steps):
        site = min(int(rng.random() * (L * n)), L * n - 1)
        i = site // n
        j = site % n
        d = flip_delta(spins, weights, fvals, bL, J, i, j)
        if metropolis(d, rng):
            apply_flip(spins, weights, i, j)
            accepted += 1
    return accepted


@njit(cache=True, nogil=True)
def sa_anneal(bits, fvals, betas, sweeps_per_beta, rng, trajectory):
    """Random-site single-bit Metropolis on the classical objective.

    A sweep is ``n`` proposals. When ``trajectory`` is non-empty the weight
    after every proposal is written to it (index 0 holds the initial weight).
    Returns the final Hamming weight.
    """
    n = bits.shape[0]
    w = 0
    for j in range(n):
        w += bits[j]
    record = trajectory.shape[0] > 0
    if record:
        trajectory[0] = w
    t = 0
    for b in range(betas.shape[0]):
        beta = betas[b]
        for _ in range(sweeps_per_beta):
            for _ in range(n):
                j = min(int(rng.random() * n), n - 1)
                w_new = w - 1 if bits[j] == 1 else w + 1
                if metropolis(beta * (fvals[w_new] - fvals[w]), rng):
                    bits[j] = 1 - bits[j]
                    w = w_new
                t += 1
                if record:
                    trajectory[t] = w
    return w


@njit(cache=True, nogil=True)
def lattice_histogram(spins, weights, fvals, bL, J, rng, n_samples, thin, counts):
    """After every ``thin`` sweeps add one count at the lattice code (bit ``i*n + j``)."""
    L, n = spins.shape
    for _ in range(n_samples):
        sweeps(spins, weights, fvals, bL, J, rng, thin, False)
        code = 0
        for i in range(L):
            for j in range(n):
                if spins[i, j] < 0:
                    code |= 1 << (i * n + j)
        counts[code] += 1


@njit(cache=True, nogil=True)
def slice_histogram(spins, weights, fvals, bL, J, rng, n_samples, thin, counts):
    """After every ``thin`` sweeps add one count per slice at that slice's basis index."""
    L, n = spins.shape
    for _ in range(n_samples):
        sweeps(spins, weights, fvals, bL, J, rng, thin, False)
        for i in range(L):
            code = 0
            for j in range(n):
                if spins[i, j] < 0:
                    code |= 1 << j
            counts[code] += 1
