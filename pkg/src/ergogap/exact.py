"""Reference computations on finite chains.

The generator ``-Q`` of a finite birth-death chain is similar to the
symmetric tridiagonal matrix with diagonal ``a_i + b_i`` and off-diagonal
``-sqrt(b_i a_{i+1})``.  Eigenvalues come from bisection on Sturm counts of
that matrix; the semigroup ``P_t`` is applied by uniformization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded
from scipy.stats import poisson

from .bdchain import ChainSpec, FiniteChain, truncate
from .errors import InvariantViolation, SpecError

__all__ = [
    "Spectrum",
    "Ladder",
    "tridiagonal",
    "sturm_count",
    "spectrum",
    "spectral_gap_exact",
    "eigenfunction",
    "dirichlet",
    "variance",
    "entropy",
    "evolve",
    "decay_rate_fit",
    "gap_ladder",
]

EIG_TOL = 1e-12


def tridiagonal(chain: FiniteChain) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the symmetrized ``-Q``."""
    diag = chain.a_full + chain.b_full
    off = -np.sqrt(chain.birth) * np.sqrt(chain.death)
    return diag, off


def sturm_count(diag: Sequence[float], off2: Sequence[float], x: float) -> int:
    """Number of eigenvalues strictly below ``x``.

    ``off2`` holds the squared off-diagonal entries.
    """
    tiny = 1e-300
    count = 0
    d = diag[0] - x
    if d < 0:
        count += 1
    for a, e2 in zip(diag[1:], off2):
        if d == 0.0:
            d = tiny
        d = (a - x) - e2 / d
        if d < 0:
            count += 1
    return count


@dataclass(frozen=True)
class Spectrum:
    """Lowest eigenvalues of ``-Q``, nondecreasing.

    ``residual`` is ``max ||(S - lam) v||`` over the computed pairs when
    eigenvectors were requested (``S`` the symmetrized matrix).
    """

    values: np.ndarray
    scale: float
    residual: Optional[float] = None
    vectors: Optional[np.ndarray] = None

    @property
    def snapped(self) -> np.ndarray:
        """Values with ``lambda_0`` reported as 0 when within tolerance of it."""
        v = self.values.copy()
        if abs(v[0]) <= EIG_TOL * max(1.0, self.scale):
            v[0] = 0.0
        return v

    @property
    def gap(self) -> float:
        return float(self.values[1])


def _bisect(diag: list, off2: list, k: int, lo: float, hi: float, tol: float) -> float:
    """Eigenvalue ``k`` (0-based) inside ``[lo, hi]``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(diag, off2, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _gershgorin(diag: np.ndarray, off: np.ndarray) -> tuple[float, float]:
    r = np.zeros_like(diag)
    r[:-1] += np.abs(off)
    r[1:] += np.abs(off)
    return float(np.min(diag - r)), float(np.max(diag + r))


def spectrum(chain: FiniteChain, count: Optional[int] = None, *, vectors: bool = False,
             tol: float = EIG_TOL) -> Spectrum:
    """The ``count`` smallest eigenvalues of ``-Q`` (all by default)."""
    n = chain.size
    if n < 2:
        raise SpecError("spectrum needs at least two states")
    count = n if count is None else count
    if not 1 <= count <= n:
        raise SpecError(f"count must be in 1..{n}, got {count}")
    diag, off = tridiagonal(chain)
    if not (np.all(np.isfinite(diag)) and np.all(np.isfinite(off))):
        raise SpecError("non-finite rate in chain")
    lo, hi = _gershgorin(diag, off)
    lo, hi = min(lo, 0.0) - tol, hi + tol
    dl, o2 = diag.tolist(), (off * off).tolist()
    vals = np.empty(count)
    left = lo
    for k in range(count):
        vals[k] = _bisect(dl, o2, k, left, hi, tol)
        left = max(lo, vals[k] - tol)
    vals = np.maximum.accumulate(vals)
    if not vectors:
        return Spectrum(vals, hi)
    V = np.column_stack([_inverse_iteration(diag, off, lam, hi) for lam in vals])
    res = max(float(np.max(np.abs(_tmul(diag, off, V[:, j]) - vals[j] * V[:, j])))
              for j in range(count))
    return Spectrum(vals, hi, res, V)


def _tmul(diag, off, v):
    out = diag * v
    out[:-1] += off * v[1:]
    out[1:] += off * v[:-1]
    return out


def _inverse_iteration(diag, off, lam, scale, iters: int = 3) -> np.ndarray:
    n = len(diag)
    shift = lam - 64 * np.finfo(float).eps * max(1.0, scale)
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag - shift
    ab[2, :-1] = off
    rng = np.random.default_rng(n)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = solve_banded((1, 1), ab, v, check_finite=False)
        nrm = np.linalg.norm(w)
        if not np.isfinite(nrm) or nrm == 0:
            break
        v = w / nrm
    return v


def spectral_gap_exact(chain: FiniteChain) -> float:
    """``lambda_1`` of the finite chain."""
    return spectrum(chain, 2).gap


def eigenfunction(chain: FiniteChain, k: int = 1) -> tuple[float, np.ndarray]:
    """Eigenpair ``(lambda_k, f)`` of ``-Q`` with ``pi(f^2) = 1`` and ``f_N >= 0``.

    The symmetric eigenvector ``v`` maps back as ``f = v / sqrt(pi)``.
    """
    sp = spectrum(chain, k + 1, vectors=True)
    v = sp.vectors[:, k]
    f = v / np.sqrt(chain.pi)
    f /= math.sqrt(float(np.sum(chain.pi * f * f)))
    if f[-1] < 0:
        f = -f
    return float(sp.values[k]), f


# --------------------------------------------------------------------------
# functionals


def _vec(chain: FiniteChain, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (chain.size,):
        raise SpecError(f"function has shape {f.shape}, chain has {chain.size} states")
    return f


def dirichlet(chain: FiniteChain, f) -> float:
    """``D(f) = sum_i pi_i b_i (f_{i+1} - f_i)^2``."""
    f = _vec(chain, f)
    return float(np.sum(chain.pi[:-1] * chain.birth * np.diff(f) ** 2))


def variance(chain: FiniteChain, f) -> float:
    f = _vec(chain, f)
    # shifting first makes constants exact even though sum(pi) is 1 only to rounding
    g = f - f[0]
    m = float(np.dot(chain.pi, g))
    return float(np.dot(chain.pi, (g - m) ** 2))


def entropy(chain: FiniteChain, f) -> float:
    """``pi(f log f) - pi(f) log pi(f)`` for ``f >= 0`` (with ``0 log 0 = 0``)."""
    f = _vec(chain, f)
    if np.any(f < 0):
        raise SpecError("entropy needs a nonnegative function")
    m = float(np.dot(chain.pi, f))
    if m == 0.0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        flogf = np.where(f > 0, f * np.log(np.where(f > 0, f, 1.0)), 0.0)
    return max(0.0, float(np.dot(chain.pi, flogf)) - m * math.log(m))


# --------------------------------------------------------------------------
# semigroup


def _poisson_weights(lt: float, tail: float) -> tuple[int, np.ndarray]:
    """Normalized Poisson(lt) weights on ``[m0, m1]`` with mass outside <= tail."""
    if lt == 0.0:
        return 0, np.ones(1)
    m0 = int(poisson.ppf(tail / 2, lt))
    m1 = int(poisson.isf(tail / 2, lt)) + 1
    m = np.arange(m0, m1 + 1)
    w = poisson.pmf(m, lt)
    return m0, w / w.sum()


def evolve(chain: FiniteChain, f, t: float, *, tail: float = 1e-12) -> np.ndarray:
    """``P_t f`` by uniformization with Poisson tail below ``tail * ||f||_inf``."""
    if not t >= 0:
        raise SpecError(f"time must be nonnegative, got {t}")
    f = _vec(chain, f)
    a, b = chain.a_full, chain.b_full
    lam = float(np.max(a + b))
    m0, w = _poisson_weights(lam * t, tail)
    up, dn = b / lam, a / lam

    def step(g):
        d = np.diff(g)
        out = g.copy()
        out[:-1] += up[:-1] * d
        out[1:] -= dn[1:] * d
        return out

    g = f.copy()
    for _ in range(m0):
        g = step(g)
    acc = np.zeros_like(f)
    for wm in w:
        acc += wm * (g - f)
        g = step(g)
    return f + acc


def decay_rate_fit(times, values) -> float:
    """Negated least-squares slope of ``log(values)`` against ``times``."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape or len(t) < 3:
        raise SpecError("need at least three (time, value) samples")
    if np.any(np.diff(t) <= 0):
        raise SpecError("times must be strictly increasing")
    if np.any(~(v > 0)) or not np.all(np.isfinite(v)):
        raise SpecError("values must be finite and positive")
    slope = np.polyfit(t, np.log(v), 1)[0]
    return float(-slope)


# --------------------------------------------------------------------------
# truncation ladder


@dataclass(frozen=True)
class Ladder:
    """``lambda_1`` on a ladder of truncations, with an extrapolated value."""

    sizes: tuple[int, ...]
    values: tuple[float, ...]
    estimate: float
    spread: float

    @property
    def last(self) -> float:
        return self.values[-1]


def _extrapolate(v: Sequence[float]) -> float:
    """Aitken extrapolation on the last three ladder values (guarded)."""
    if len(v) < 3:
        return float(v[-1])
    x0, x1, x2 = v[-3:]
    d1, d2 = x1 - x0, x2 - x1
    den = d2 - d1
    if den == 0 or abs(d2) >= abs(d1) or d1 * d2 <= 0:
        return float(x2)
    return float(x2 - d2 * d2 / den)


def gap_ladder(spec: ChainSpec, sizes: Sequence[int]) -> Ladder:
    """``lambda_1`` of the reflecting truncations at each size in ``sizes``."""
    sizes = tuple(int(n) for n in sizes)
    if not sizes or any(n < 1 for n in sizes) or any(y <= x for x, y in zip(sizes, sizes[1:])):
        raise SpecError("ladder sizes must be positive and strictly increasing")
    vals = tuple(spectral_gap_exact(truncate(spec, n)) for n in sizes)
    est = _extrapolate(vals)
    spread = abs(vals[-1] - est) if len(vals) >= 3 else (abs(vals[-1] - vals[-2]) if len(vals) == 2 else math.inf)
    if not math.isfinite(est):
        raise InvariantViolation("ladder produced a non-finite estimate")
    return Ladder(sizes, vals, est, spread)
