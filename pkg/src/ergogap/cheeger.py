"""Cheeger-type constants of finite symmetric kernels.

A kernel is a probability vector ``pi`` and a symmetric, nonnegative ``J``
with zero diagonal; for a reversible chain ``J(x, y) = pi_x q(x, y)``.  All
constants are infima over subsets ``A`` of a ratio built from the boundary
flux ``J(A x A^c)`` and ``pi(A)``.

Up to ``cap`` states (default 22) the infimum is exact: every subset is
visited.  The state set is split into a low and a high block so that the
flux of ``X u Y`` is ``cut(X) + cut(Y) - 2 J(X, Y)`` and one block of the
enumeration is a single matrix product.  Larger kernels fall back to a
seeded simulated-annealing search whose result is an upper bound on the
constant and is flagged as heuristic.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bdchain import FiniteChain
from .errors import SpecError

__all__ = [
    "SymmetricKernel",
    "CutResult",
    "kernel_from_chain",
    "kernel_from_json",
    "default_r",
    "alpha_kernel",
    "kernel_gap",
    "cut_value",
    "cheeger_poincare",
    "cheeger_logsobolev_r",
    "cheeger_logsobolev_delta",
    "cheeger_nash",
    "lawler_sokal_bound",
    "cheeger_table",
    "CheegerRow",
    "LawlerSokal",
    "nash_exponent",
    "EXHAUSTIVE_CAP",
]

EXHAUSTIVE_CAP = 22


@dataclass(frozen=True, eq=False)
class SymmetricKernel:
    pi: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        J = np.asarray(self.J, dtype=float)
        m = len(pi)
        if pi.ndim != 1 or m < 2:
            raise SpecError("kernel needs at least two states")
        if J.shape != (m, m):
            raise SpecError(f"J must be {m}x{m}, got {J.shape}")
        if not (np.all(np.isfinite(pi)) and np.all(np.isfinite(J))):
            raise SpecError("kernel entries must be finite")
        if np.any(pi <= 0) or abs(pi.sum() - 1.0) > 1e-9:
            raise SpecError("pi must be a positive probability vector")
        if np.any(J < 0):
            raise SpecError("J must be nonnegative")
        if np.any(np.diag(J) != 0):
            raise SpecError("J must vanish on the diagonal")
        if not np.allclose(J, J.T, rtol=1e-12, atol=0.0):
            raise SpecError("J must be symmetric")
        J = 0.5 * (J + J.T)
        for a in (pi, J):
            a.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "J", J)

    @property
    def size(self) -> int:
        return len(self.pi)

    @property
    def q(self) -> np.ndarray:
        """Total jump rates ``q(x) = sum_y J(x, y) / pi_x``."""
        return self.J.sum(axis=1) / self.pi


def kernel_from_chain(chain: FiniteChain) -> SymmetricKernel:
    """``J(i, i+1) = pi_i b_i`` for a finite birth-death chain."""
    m = chain.size
    J = np.zeros((m, m))
    flux = chain.pi[:-1] * chain.birth
    i = np.arange(m - 1)
    J[i, i + 1] = flux
    J[i + 1, i] = flux
    return SymmetricKernel(chain.pi, J)


def kernel_from_json(doc: dict) -> SymmetricKernel:
    if not isinstance(doc, dict) or "pi" not in doc or "J" not in doc:
        raise SpecError('kernel document must have "pi" and "J"')
    try:
        return SymmetricKernel(np.asarray(doc["pi"], dtype=float), np.asarray(doc["J"], dtype=float))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad kernel arrays: {exc}") from exc


def default_r(kernel: SymmetricKernel) -> np.ndarray:
    """``r(x, y) = max(q(x), q(y))``: symmetric, and ``J^{(1)}(x, E) <= pi_x``."""
    q = kernel.q
    return np.maximum(q[:, None], q[None, :])


def alpha_kernel(kernel: SymmetricKernel, alpha: float, r: Optional[np.ndarray] = None) -> SymmetricKernel:
    """``J^{(alpha)} = J / r^alpha`` where ``r > 0`` (0 elsewhere); ``alpha = 0`` gives ``J``."""
    if alpha < 0:
        raise SpecError("alpha must be nonnegative")
    if alpha == 0:
        return kernel
    r = default_r(kernel) if r is None else np.asarray(r, dtype=float)
    if r.shape != kernel.J.shape or np.any(r < 0) or not np.allclose(r, r.T):
        raise SpecError("r must be a symmetric nonnegative matrix of the kernel's shape")
    with np.errstate(divide="ignore", invalid="ignore"):
        Ja = np.where(r > 0, kernel.J / np.where(r > 0, r, 1.0) ** alpha, 0.0)
    np.fill_diagonal(Ja, 0.0)
    return SymmetricKernel(kernel.pi, Ja)


def kernel_gap(kernel: SymmetricKernel) -> float:
    """``lambda_1`` of ``D(f) = (1/2) sum J(x,y) (f(y) - f(x))^2`` on ``L^2(pi)``."""
    L = np.diag(kernel.J.sum(axis=1)) - kernel.J
    s = 1.0 / np.sqrt(kernel.pi)
    ev = np.linalg.eigvalsh(s[:, None] * L * s[None, :])
    return float(ev[1])


# --------------------------------------------------------------------------
# subset search


@dataclass(frozen=True)
class CutResult:
    """Infimum value, a minimising subset, and whether the search was exhaustive."""

    value: float
    subset: Optional[np.ndarray]
    exact: bool
    empty: bool = False

    @property
    def method(self) -> str:
        if self.empty:
            return "empty-family"
        return "exhaustive" if self.exact else "heuristic"


# objective(cut, pi(A), pi(A^c), kind) with kind 0 for the empty set, 2 for
# the full set and 1 otherwise.  pi(A^c) is summed separately rather than
# taken as 1 - pi(A), which loses everything when the complement is tiny.
Objective = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _subset_sums(w: np.ndarray) -> np.ndarray:
    """``out[mask] = sum_{bit in mask} w[bit]`` over all masks (``w`` may be 2-D)."""
    out = np.zeros((1,) + w.shape[1:])
    for k in range(len(w)):
        out = np.concatenate((out, out + w[k]), axis=0)
    return out


def _indicators(n: int) -> np.ndarray:
    return ((np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1).astype(float)


def _threads() -> int:
    env = os.environ.get("ERGOGAP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SpecError(f"ERGOGAP_THREADS must be an integer, got {env!r}") from None
    return min(8, os.cpu_count() or 1)


def cut_value(kernel: SymmetricKernel, A) -> float:
    """``J(A x A^c)`` as a sum of nonnegative terms."""
    A = np.asarray(A, dtype=bool)
    return float(kernel.J[np.ix_(A, ~A)].sum())


def _exhaustive(kernel: SymmetricKernel, objective: Objective) -> CutResult:
    J, pi = kernel.J, kernel.pi
    m = kernel.size
    lo_n = m // 2
    hi_n = m - lo_n
    lo_idx, hi_idx = np.arange(lo_n), np.arange(lo_n, m)

    # every flux below is a sum of nonnegative terms: no cancellation
    def internal(idx):
        # cut of X inside its own block: sum_{x in X, x' in block \ X} J
        P = _subset_sums(J[np.ix_(idx, idx)])
        return np.einsum("ij,ij->i", P, 1.0 - _indicators(len(idx)))

    in_lo, in_hi = internal(lo_idx), internal(hi_idx)
    Jc = J[np.ix_(lo_idx, hi_idx)]
    cross = _subset_sums(Jc)  # cross[X, y] = J(X, y)
    cross_c = cross[::-1]  # J(lo \ X, y): mask reversal is complementation
    hi_ind = _indicators(hi_n)
    pi_lo, pi_hi = _subset_sums(pi[lo_idx]), _subset_sums(pi[hi_idx])
    pc_lo, pc_hi = pi_lo[::-1], pi_hi[::-1]

    n_lo = 1 << lo_n
    chunk = max(1, min(n_lo, (1 << 20) // (1 << hi_n)))
    starts = range(0, n_lo, chunk)

    def run(s):
        e = min(n_lo, s + chunk)
        # J(X, hi \ Y) + J(lo \ X, Y)
        cut = cross[s:e] @ (1.0 - hi_ind).T + cross_c[s:e] @ hi_ind.T
        cut += in_lo[s:e, None] + in_hi[None, :]
        pa = pi_lo[s:e, None] + pi_hi[None, :]
        pc = pc_lo[s:e, None] + pc_hi[None, :]
        kind = np.ones(cut.shape, dtype=np.int8)
        if s == 0:
            kind[0, 0] = 0
        if e == n_lo:
            kind[-1, -1] = 2
        val = objective(cut, pa, pc, kind)
        k = int(np.argmin(val))
        return float(val.flat[k]), s + k // val.shape[1], k % val.shape[1]

    workers = min(_threads(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    best = min(parts, key=lambda t: t[0])
    if not math.isfinite(best[0]):
        return CutResult(math.inf, None, True, empty=True)
    mask = np.zeros(m, dtype=bool)
    mask[lo_idx] = (best[1] >> np.arange(lo_n)) & 1
    mask[hi_idx] = (best[2] >> np.arange(hi_n)) & 1
    return CutResult(best[0], mask, True)


def _anneal(kernel: SymmetricKernel, objective: Objective, seed: int,
            restarts: int = 16, kicks: int = 24, sweep_points: int = 64) -> CutResult:
    """Annealing over local optima, run on a batch of starting sets at once.

    Each round kicks every current set by a few random flips, runs greedy
    single-flip descent, and accepts by the Metropolis rule under a cooling
    temperature.  The best set found is re-evaluated exactly; its value is
    an upper bound on the infimum.
    """
    rng = np.random.default_rng(seed)
    J, pi = kernel.J, kernel.pi
    m = kernel.size
    deg = J.sum(axis=1)

    def kind_of(n):
        return np.where(n == 0, 0, np.where(n == m, 2, 1)).astype(np.int8)

    def score(cut, pa, pc, kind):
        v = objective(cut, pa, pc, kind)
        return np.where(np.isnan(v), np.inf, v)

    def descend(A):
        A = A.copy()
        Af = A.astype(float)
        inA = Af @ J  # J(x, A) for every row and state
        cut = np.maximum(Af @ deg - np.einsum("si,si->s", inA, Af), 0.0)
        pa, pc = Af @ pi, (1.0 - Af) @ pi
        size = A.sum(axis=1)
        cur = score(cut[:, None], pa[:, None], pc[:, None], kind_of(size)[:, None])[:, 0]
        rows = np.arange(len(A))
        while True:
            dcut = np.where(A, 2 * inA - deg, deg - 2 * inA)
            npa = np.maximum(np.where(A, pa[:, None] - pi, pa[:, None] + pi), 0.0)
            npc = np.maximum(np.where(A, pc[:, None] + pi, pc[:, None] - pi), 0.0)
            n = size[:, None] + np.where(A, -1, 1)
            vals = score(np.maximum(cut[:, None] + dcut, 0.0), npa, npc, kind_of(n))
            x = np.argmin(vals, axis=1)
            best = vals[rows, x]
            with np.errstate(invalid="ignore"):
                go = best < cur - 1e-15 * np.abs(cur)
            if not go.any():
                return A, cur
            r, c = rows[go], x[go]
            sign = np.where(A[r, c], -1.0, 1.0)
            A[r, c] = ~A[r, c]
            inA[r] += sign[:, None] * J[c]
            cut[r] = np.maximum(cut[r] + dcut[r, c], 0.0)
            pa[r], pc[r] = npa[r, c], npc[r, c]
            size[r] += sign.astype(int)
            cur[r] = best[go]

    # singletons lie in every nonempty mass-capped family, so they seed
    # descents that a random (possibly infeasible) start would never begin
    eye = np.eye(m, dtype=bool)[np.argsort(pi)[: min(m, 32)]]
    seeds = [eye, ~eye]
    # sweep sets of the low eigenvectors (the classical spectral cut)
    w = 1.0 / np.sqrt(pi)
    _, V = np.linalg.eigh(w[:, None] * (np.diag(deg) - J) * w[None, :])
    cuts = np.unique(np.linspace(0, m - 2, min(m - 1, sweep_points)).round().astype(int))
    prefix = np.tri(m - 1, m, dtype=bool)[cuts]  # row c has its first c+1 entries set
    for j in range(1, min(m, 4)):
        P = np.empty_like(prefix)
        P[:, np.argsort(V[:, j] * w)] = prefix
        seeds += [P, ~P]
    seeds.append(rng.random((restarts, m)) < rng.uniform(0.05, 0.6, size=(restarts, 1)))
    A, cur = descend(np.vstack(seeds))

    finite = np.isfinite(cur)
    T0 = np.where(finite & (cur > 0), 0.2 * np.abs(np.where(finite, cur, 0.0)), 1.0)
    rows = np.arange(len(A))
    pool = [A.copy()]
    for k in range(kicks):
        B = A.copy()
        nflip = 1 + rng.integers(3, size=len(B))
        for s in range(3):
            hit = rows[nflip > s]
            cols = rng.integers(m, size=len(hit))
            B[hit, cols] = ~B[hit, cols]
        B, bval = descend(B)
        T = T0 * (1 - k / kicks) + 1e-300
        with np.errstate(over="ignore", invalid="ignore"):
            p = np.exp(-(bval - cur) / T)
        take = (bval <= cur) | (np.isfinite(bval) & np.isfinite(cur) & (rng.random(len(B)) < p))
        A[take], cur[take] = B[take], bval[take]
        pool.append(B[np.isfinite(bval)])

    # exact re-evaluation of every distinct local optimum visited
    cand = np.unique(np.vstack(pool), axis=0)
    cut = np.array([cut_value(kernel, a) for a in cand])
    vals = score(cut, cand @ pi, (~cand) @ pi, kind_of(cand.sum(axis=1)))
    i = int(np.argmin(vals))
    if not math.isfinite(vals[i]):
        return CutResult(math.inf, None, False, empty=True)
    return CutResult(float(vals[i]), cand[i].copy(), False)


def _search(kernel: SymmetricKernel, objective: Objective, *, cap: int = EXHAUSTIVE_CAP,
            seed: int = 0, force_heuristic: bool = False) -> CutResult:
    if kernel.size <= cap and not force_heuristic:
        return _exhaustive(kernel, objective)
    return _anneal(kernel, objective, seed)


# --------------------------------------------------------------------------
# the constants


def nash_exponent(q_param: float) -> float:
    if not q_param > 1:
        raise SpecError(f"Nash exponent needs q > 1, got {q_param}")
    return (2 * q_param - 3) / (2 * q_param - 2)


def cheeger_poincare(kernel: SymmetricKernel, **kw) -> CutResult:
    """``inf_{0<pi(A)<1} J(A x A^c) / min(pi(A), pi(A^c))``."""
    def obj(cut, pa, pc, kind):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = cut / np.minimum(pa, pc)
        return np.where(kind == 1, v, np.inf)

    return _search(kernel, obj, **kw)


def cheeger_nash(kernel: SymmetricKernel, q_param: float, **kw) -> CutResult:
    """``inf J(A x A^c) / min(pi(A), pi(A^c))^{(2q-3)/(2q-2)}``."""
    e = nash_exponent(q_param)

    def obj(cut, pa, pc, kind):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = cut / np.minimum(pa, pc) ** e
        return np.where(kind == 1, v, np.inf)

    return _search(kernel, obj, **kw)


def cheeger_logsobolev_r(kernel: SymmetricKernel, r_level: float, **kw) -> CutResult:
    """``inf_{0<pi(A)<=r} J(A x A^c) / (pi(A) sqrt(log(e + 1/pi(A))))``.

    An empty family (``r`` below every ``pi_x``) gives ``+inf`` with
    ``empty=True``; that case is decided exactly, without a search.
    """
    if not 0 < r_level <= 1:
        raise SpecError("r_level must lie in (0, 1]")
    top = r_level * (1 + 1e-12)
    if float(np.min(kernel.pi)) > top:
        return CutResult(math.inf, None, True, empty=True)

    def obj(cut, pa, pc, kind):
        ok = (kind > 0) & (pa <= top)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = cut / (pa * np.sqrt(np.log(math.e + 1.0 / pa)))
        return np.where(ok, v, np.inf)

    return _search(kernel, obj, **kw)


def cheeger_logsobolev_delta(kernel: SymmetricKernel, delta: float, **kw) -> CutResult:
    """``inf_{pi(A)>0} (J(A x A^c) + delta pi(A)) / (pi(A) sqrt(1 - log pi(A)))``.

    ``A = E`` is admissible and contributes ``delta``.
    """
    if not delta >= 0:
        raise SpecError("delta must be nonnegative")

    def obj(cut, pa, pc, kind):
        with np.errstate(divide="ignore", invalid="ignore"):
            v = (cut + delta * pa) / (pa * np.sqrt(1.0 - np.log(np.minimum(pa, 1.0))))
        return np.where(kind == 2, delta, np.where(kind > 0, v, np.inf))

    return _search(kernel, obj, **kw)


@dataclass(frozen=True)
class LawlerSokal:
    bound: float
    k: float
    M: float
    exact: bool


def lawler_sokal_bound(kernel: SymmetricKernel, **kw) -> LawlerSokal:
    """``k^2 / (2M)`` with ``k`` the plain Cheeger constant and ``M = max_x q(x)``."""
    k = cheeger_poincare(kernel, **kw)
    M = float(np.max(kernel.q))
    bound = k.value ** 2 / (2 * M) if M > 0 else 0.0
    return LawlerSokal(bound, k.value, M, k.exact)


@dataclass(frozen=True)
class CheegerRow:
    alpha: float
    name: str
    parameter: Optional[float]
    result: CutResult


def cheeger_table(kernel: SymmetricKernel, *, alphas=(0.0, 0.5, 1.0), q_param: float = 3.0,
                  r_levels=(0.5, 0.25, 0.1, 0.01), deltas=(0.0, 1.0, 10.0, 100.0),
                  r: Optional[np.ndarray] = None, seed: int = 0,
                  cap: int = EXHAUSTIVE_CAP) -> list[CheegerRow]:
    """All constants per ``alpha``, the log-Sobolev forms over a parameter sweep."""
    kw = dict(seed=seed, cap=cap)
    rows = []
    for a in alphas:
        Ka = alpha_kernel(kernel, a, r)
        rows.append(CheegerRow(a, "poincare", None, cheeger_poincare(Ka, **kw)))
        rows.append(CheegerRow(a, "nash", q_param, cheeger_nash(Ka, q_param, **kw)))
        for lvl in r_levels:
            rows.append(CheegerRow(a, "logsobolev_r", lvl, cheeger_logsobolev_r(Ka, lvl, **kw)))
        for d in deltas:
            rows.append(CheegerRow(a, "logsobolev_delta", d, cheeger_logsobolev_delta(Ka, d, **kw)))
    return rows
