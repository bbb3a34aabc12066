"""Reference computations that share no code with the implicit engine.

They build matrices from Kronecker products and FFTs, or enumerate outcomes
exactly, and serve as the second route for the end-to-end checks.
"""

from fractions import Fraction
from math import comb

import numpy as np


def hadamard_power(n):
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    out = np.array([[1.0]])
    for _ in range(n):
        out = np.kron(out, h)
    return out


def dense_dj_matrix(truth_table):
    """``H^n . diag((-1)^f)`` as a dense array."""
    table = np.asarray(truth_table)
    n = int(np.log2(table.size))
    return hadamard_power(n) @ np.diag((-1.0) ** table)


def dense_dj_probability(truth_table):
    t = dense_dj_matrix(truth_table)
    e0 = np.zeros(t.shape[0])
    e0[0] = 1
    return abs((t @ t @ e0)[0]) ** 2


def _apply_mod(psi, x, N):
    """``(a, i) -> (a, (x^a - i) mod N)`` on an (N, q) array indexed ``[i, a]``."""
    q = psi.shape[1]
    out = np.zeros_like(psi)
    for a in range(q):
        xa = pow(x, a, N)
        for i in range(N):
            out[(xa - i) % N, a] += psi[i, a]
    return out


def _apply_dft(psi):
    q = psi.shape[1]
    return np.fft.ifft(psi, axis=1) * np.sqrt(q)


def dense_shor_t_squared(x, N, q):
    """Final (N, q) amplitude array of ``T^2 |a=0, i=0>`` with T = DFT . MOD."""
    psi = np.zeros((N, q), dtype=complex)
    psi[0, 0] = 1
    for _ in range(2):
        psi = _apply_dft(_apply_mod(psi, x, N))
    return psi


def textbook_shor(x, N, q):
    """DFT . MOD applied to the uniform superposition over ``a`` with ``i = 0``."""
    psi = np.zeros((N, q), dtype=complex)
    psi[0, :] = 1 / np.sqrt(q)
    return _apply_dft(_apply_mod(psi, x, N))


def a_marginal(psi):
    return (np.abs(psi) ** 2).sum(axis=0)


def at_least_k_of_m(p, k, m):
    """Exact binomial tail ``P(X >= k)`` for ``X ~ Binomial(m, p)``."""
    p = Fraction(p)
    return sum(comb(m, j) * p**j * (1 - p) ** (m - j) for j in range(k, m + 1))


def permutation_order(perm):
    """Smallest k with perm^k = identity, by repeated composition."""
    ident = tuple(range(len(perm)))
    cur, k = tuple(perm), 1
    while cur != ident:
        cur = tuple(perm[c] for c in cur)
        k += 1
    return k


def period_from_outcome(a, q, N, x, max_multiple=4):
    """Period read off ``a/q`` via ``Fraction.limit_denominator``; None when uninformative."""
    if a == 0:
        return None
    approx = Fraction(a, q).limit_denominator(N)
    if abs(approx - Fraction(a, q)) > Fraction(1, 2 * q):
        return None
    r = approx.denominator
    for m in range(1, max_multiple + 1):
        if pow(x, m * r, N) == 1:
            return m * r
    return None
