"""Independent reference computations for the tests.

Nothing here imports ergogap: generators are built densely, spectra come
from LAPACK or mpmath, cut constants by plain enumeration, semigroups by
the matrix exponential.
"""

import itertools
import math

import mpmath as mp
import numpy as np
from scipy.linalg import expm


def generator(birth, death):
    """Dense Q for b_0..b_{n-1}, a_1..a_n on {0..n}."""
    n = len(birth) + 1
    Q = np.zeros((n, n))
    for i, b in enumerate(birth):
        Q[i, i + 1] = b
    for i, a in enumerate(death, start=1):
        Q[i, i - 1] = a
    Q[np.diag_indices(n)] = -Q.sum(axis=1)
    return Q


def stationary(birth, death):
    mu = [1.0]
    for b, a in zip(birth, death):
        mu.append(mu[-1] * b / a)
    mu = np.array(mu)
    return mu / mu.sum()


def gap_dense(birth, death):
    """lambda_1 from the dense nonsymmetric eigensolver."""
    ev = np.sort(np.linalg.eigvals(-generator(birth, death)).real)
    return float(ev[1])


def gap_mp(birth, death, dps=40):
    """lambda_1 in high precision (symmetrized, mpmath eigensolver)."""
    with mp.workdps(dps):
        n = len(birth) + 1
        S = mp.zeros(n, n)
        for i in range(n):
            S[i, i] = (birth[i] if i < n - 1 else 0) + (death[i - 1] if i > 0 else 0)
        for i in range(n - 1):
            S[i, i + 1] = S[i + 1, i] = -mp.sqrt(mp.mpf(birth[i]) * death[i])
        ev = sorted(mp.eigsy(S)[0])
        return float(ev[1])


def delta_finite(birth, death):
    """sup_{i>=1} (sum_{j<i} 1/(mu_j b_j)) (sum_{j>=i} mu_j), exact rationals."""
    from fractions import Fraction as F
    mu = [F(1)]
    for b, a in zip(birth, death):
        mu.append(mu[-1] * F(b) / F(a))
    best = F(0)
    for i in range(1, len(mu)):
        phi = sum(1 / (mu[j] * F(birth[j])) for j in range(i))
        best = max(best, phi * sum(mu[i:]))
    return float(best), float(sum(mu))


def kernel(birth, death):
    pi = stationary(birth, death)
    Q = generator(birth, death)
    J = pi[:, None] * Q
    np.fill_diagonal(J, 0.0)
    return pi, 0.5 * (J + J.T)


def subsets(n):
    for mask in range(1, (1 << n) - 1):
        yield np.array([(mask >> k) & 1 for k in range(n)], dtype=bool)


def cut(J, A):
    return float(J[np.ix_(A, ~A)].sum())


def cheeger_k(pi, J):
    return min(cut(J, A) / min(pi[A].sum(), pi[~A].sum()) for A in subsets(len(pi)))


def cheeger_nash(pi, J, q):
    e = (2 * q - 3) / (2 * q - 2)
    return min(cut(J, A) / min(pi[A].sum(), pi[~A].sum()) ** e for A in subsets(len(pi)))


def cheeger_ls_r(pi, J, r):
    best = math.inf
    n = len(pi)
    for mask in range(1, 1 << n):
        A = np.array([(mask >> k) & 1 for k in range(n)], dtype=bool)
        p = pi[A].sum()
        if p <= r:
            best = min(best, cut(J, A) / (p * math.sqrt(math.log(math.e + 1 / p))))
    return best


def cheeger_ls_delta(pi, J, delta):
    best = math.inf
    n = len(pi)
    for mask in range(1, 1 << n):
        A = np.array([(mask >> k) & 1 for k in range(n)], dtype=bool)
        p = pi[A].sum()
        best = min(best, (cut(J, A) + delta * p) / (p * math.sqrt(1 - math.log(p))))
    return best


def evolve(birth, death, f, t):
    return expm(t * generator(birth, death)) @ np.asarray(f, dtype=float)


def random_rates(rng, n, lo=0.1, hi=10.0):
    return list(rng.uniform(lo, hi, n)), list(rng.uniform(lo, hi, n))
