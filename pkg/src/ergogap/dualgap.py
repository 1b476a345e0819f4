"""Two-sided bounds on the spectral gap of a birth-death chain.

For an increasing test function ``f`` with ``f_0 = 0`` and its centred
version ``fb = f - pi(f)`` put

    I_i(fb) = [mu_i b_i (f_{i+1} - f_i)]^{-1} * sum_{j > i} mu_j fb_j .

Any strictly increasing ``f`` gives ``lambda_1 >= inf_i 1/I_i(fb)``; a test
function that is constant from some level ``k`` on gives
``lambda_1 <= max_{i < k} 1/I_i(fb)``.  With

    delta = sup_{i >= 1} (sum_{j < i} 1/(mu_j b_j)) * mu[i, oo)

one also has ``mu / delta >= lambda_1 >= 1 / (4 delta)`` (``mu`` the total,
unnormalized mass).

Infinite chains are handled on a probe ``0..H``: sums beyond ``H`` and
suprema over ``i > H`` are enclosed with the certified tail tests of
:mod:`ergogap.series`, and every returned number is an enclosure endpoint,
never a midpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .bdchain import ChainSpec, FiniteChain, MuWeights, mu_weights
from .errors import InvariantViolation, NonCertifiable, SpecError
from .series import sum_tail, tail_sup

__all__ = [
    "TestFunctionDiscrete",
    "GapBracket",
    "DeltaEnclosure",
    "I_operator",
    "I_enclosure",
    "lower_bound_from_test",
    "upper_bound_from_test",
    "delta_constant",
    "explicit_bounds",
    "approx_sequence",
    "DEFAULT_HORIZON",
]

DEFAULT_HORIZON = 4000
FPRIME = "Fprime"
FDOUBLEPRIME = "Fdoubleprime"
_EPS = np.finfo(float).eps
_LOG_RANGE = 650.0  # keep scaled weights well inside double range

Chain = Union[ChainSpec, FiniteChain]


@dataclass(frozen=True, eq=False)
class TestFunctionDiscrete:
    """Values ``f_0..f_K``; with ``plateau=k`` the function is ``f_{min(i,k)}``."""

    values: np.ndarray
    plateau: Optional[int] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or len(v) < 2:
            raise SpecError("test function needs at least two values")
        if not np.all(np.isfinite(v)):
            raise SpecError("test function values must be finite")
        if v[0] != 0.0:
            raise SpecError("test functions must start at f_0 = 0")
        k = self.plateau
        if k is not None:
            if not 1 <= k < len(v):
                raise SpecError(f"plateau level {k} outside 1..{len(v) - 1}")
            v = v[: k + 1]
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def kind(self) -> str:
        return FPRIME if self.plateau is not None else FDOUBLEPRIME

    @classmethod
    def increasing(cls, values: Sequence[float]) -> "TestFunctionDiscrete":
        return cls(np.asarray(values, dtype=float))

    @classmethod
    def with_plateau(cls, values: Sequence[float], k: int) -> "TestFunctionDiscrete":
        return cls(np.asarray(values, dtype=float), k)

    def extended(self, n: int) -> np.ndarray:
        """``f_0..f_{n-1}`` (plateau-extended; F'' functions are cut)."""
        v = self.values
        if self.plateau is None:
            return v[:n]
        out = np.full(n, v[-1])
        m = min(n, len(v))
        out[:m] = v[:m]
        return out


@dataclass(frozen=True)
class GapBracket:
    lower: float
    upper: float
    lower_source: str = ""
    upper_source: str = ""
    horizon: int = 0

    def __post_init__(self):
        if self.lower > self.upper * (1 + 1e-9) + 1e-12:
            raise InvariantViolation(f"gap bracket inverted: [{self.lower}, {self.upper}]")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= x <= self.upper + tol


@dataclass(frozen=True)
class DeltaEnclosure:
    lo: float
    hi: float


# --------------------------------------------------------------------------
# weights on the probe


@dataclass(frozen=True, eq=False)
class _Probe:
    """Scaled weights ``w_j = mu_j e^{-m}`` on ``0..N`` plus tail data."""

    finite: bool
    N: int
    logmu: np.ndarray
    logb: np.ndarray  # b_0..b_{N-1}
    shift: float
    w: np.ndarray = field(repr=False)
    beyond: float  # sum_{j>N} w_j upper bound (scaled), 0 when exact
    weights: MuWeights = field(repr=False)

    @property
    def b(self) -> np.ndarray:
        return np.exp(self.logb)


def _spec_of(chain: Chain) -> ChainSpec:
    if isinstance(chain, FiniteChain):
        return ChainSpec(np.asarray(chain.birth), np.asarray(chain.death), chain.N)
    if isinstance(chain, ChainSpec):
        return chain
    raise SpecError(f"expected a chain, got {type(chain).__name__}")


def _probe(chain: Chain, horizon: Optional[int]) -> _Probe:
    spec = _spec_of(chain)
    N = spec.states if spec.finite else (horizon or DEFAULT_HORIZON)
    if spec.finite and horizon is not None and horizon < N:
        N = spec.states  # finite chains are always used in full
    mw = mu_weights(spec, N)
    logmu = mw.log_values
    if not spec.finite:
        if not mw.total.decided:
            raise NonCertifiable("total mass of mu could not be certified on the probe")
        if mw.total.diverges:
            raise SpecError("mu has infinite mass: the chain is not positive recurrent")
    shift = float(np.max(logmu))
    # effective probe: stop where scaled weights leave the safe range
    ok = logmu - shift > -_LOG_RANGE
    n_eff = N if ok.all() else int(np.argmin(ok)) - 1
    if n_eff < 1:
        raise NonCertifiable("mu weights leave double range immediately")
    beyond = float(np.sum(np.exp(logmu[n_eff + 1:] - shift)))
    if not spec.finite:
        beyond += mw.beyond * math.exp(-shift)
    lb = spec.log_birth(n_eff)
    return _Probe(spec.finite and n_eff == N, n_eff, logmu[: n_eff + 1], lb, shift,
                  np.exp(logmu[: n_eff + 1] - shift), beyond, mw)


def _rev_cumsum_excl(x: np.ndarray) -> np.ndarray:
    """``out[i] = sum_{j > i} x_j``."""
    c = np.cumsum(x[::-1])[::-1]
    return np.append(c[1:], 0.0)


def _beyond_weighted(P: _Probe, f: np.ndarray, plateau: bool) -> float:
    """Upper bound on ``sum_{j > N} w_j f_j``."""
    if P.finite:
        return 0.0
    if plateau:
        return float(f[-1]) * P.beyond
    pos = f[1:] > 0
    if not pos.all():
        raise SpecError("F'' test function must be positive after f_0")
    logt = P.logmu[1:] - P.shift + np.log(f[1:])
    status, tail = sum_tail(logt, first_index=1)
    if status != "converges":
        raise NonCertifiable("sum of mu_j f_j beyond the probe is not certified finite: "
                             "pi(f) is undefined or unreachable")
    return tail


def I_enclosure(chain: Chain, f: TestFunctionDiscrete, horizon: Optional[int] = None,
                *, _P: Optional[_Probe] = None) -> tuple[np.ndarray, np.ndarray]:
    """Enclosures ``(lo, hi)`` of ``I_i(fb)`` for ``i = 0..K-1``.

    ``K`` is the plateau level for F' functions and the probe length for F''
    ones.  Entries where the step ``f_{i+1} - f_i`` is not positive raise.
    """
    P = _P or _probe(chain, horizon)
    plateau = f.plateau is not None
    if not plateau and len(f.values) - 1 < P.N:
        P = _truncate_probe(P, len(f.values) - 1)
    n = P.N + 1
    fv = f.extended(n)
    if plateau and f.plateau > P.N:
        raise SpecError(f"plateau level {f.plateau} beyond the usable probe 0..{P.N}")
    K = f.plateau if plateau else P.N
    steps = np.diff(fv)[:K]
    if np.any(steps <= 0):
        i = int(np.argmax(steps <= 0))
        raise SpecError(f"test function is not strictly increasing at i={i}")
    w = P.w
    bF = _beyond_weighted(P, fv, plateau)
    bM = P.beyond
    A = float(np.dot(w, fv))
    B = float(np.sum(w))
    if not math.isfinite(bM):
        raise NonCertifiable("mu tail beyond the probe is not certified")
    p_lo, p_hi = A / (B + bM), (A + bF) / B

    # forward form: T_i = sum_{j<=i} w_j (p - f_j); increasing in p
    cw = np.cumsum(w)[:K]
    cwf = np.cumsum(w * fv)[:K]
    slack_f = 8 * _EPS * (np.arange(1, K + 1)) * (cwf + p_hi * cw)
    fw_lo = p_lo * cw - cwf - slack_f
    fw_hi = p_hi * cw - cwf + slack_f
    # tail form: T_i = sum_{j>i} w_j f_j - p sum_{j>i} w_j; decreasing in p
    tf = _rev_cumsum_excl(w * fv)[:K]
    tm = _rev_cumsum_excl(w)[:K]
    slack_t = 8 * _EPS * (n - np.arange(K)) * (tf + bF + p_hi * (tm + bM))
    tl_lo = tf - p_hi * (tm + bM) - slack_t
    tl_hi = tf + bF - p_lo * tm + slack_t
    lo = np.maximum(fw_lo, tl_lo)
    hi = np.minimum(fw_hi, tl_hi)
    bad = lo > hi
    if bad.any():
        lo[bad] = np.minimum(fw_lo, tl_lo)[bad]
        hi[bad] = np.maximum(fw_hi, tl_hi)[bad]
    den = w[:K] * P.b[:K] * steps
    return lo / den, hi / den


def _truncate_probe(P: _Probe, n: int) -> _Probe:
    """Shorter probe; the dropped part becomes tail."""
    extra = float(np.sum(P.w[n + 1:]))
    return _Probe(False if (P.finite and n < P.N) else P.finite, n, P.logmu[: n + 1],
                  P.logb[:n], P.shift, P.w[: n + 1], P.beyond + extra, P.weights)


def I_operator(chain: Chain, f: TestFunctionDiscrete, i: int,
               horizon: Optional[int] = None) -> float:
    """``I_i(fb)``; the enclosure midpoint (its width is rounding or tail size)."""
    lo, hi = I_enclosure(chain, f, horizon)
    if not 0 <= i < len(lo):
        raise SpecError(f"index {i} outside 0..{len(lo) - 1}")
    return float(0.5 * (lo[i] + hi[i]))


def _reliable(lo: np.ndarray, hi: np.ndarray, rel: float = 1e-9) -> int:
    """Length of the prefix before the enclosures are swamped by the unprobed tail."""
    bad = (hi - lo) > rel * np.abs(hi)
    if not bad.any():
        return len(hi)
    # the tail uncertainty grows toward the probe end; cut at the last good index
    good = np.flatnonzero(~bad)
    return int(good[-1]) + 1 if len(good) else 0


def _sup_enclosed(finite: bool, lo: np.ndarray, hi: np.ndarray, what: str) -> float:
    """``sup_i`` of a sequence known through enclosures on a probe.

    On an infinite chain the sup beyond the reliable prefix is certified
    from the prefix's eventual monotonicity.
    """
    if finite:
        return float(np.max(hi))
    m = _reliable(lo, hi)
    if m < 16:
        raise NonCertifiable(f"{what}: probe too short for a certified supremum")
    x = hi[:m]
    s = float(np.max(x))
    noise = max(float(np.max(hi[:m] - lo[:m])), 1e-12 * abs(s))
    t = tail_sup(x, floor=max(abs(s), 1e-300), tol=noise)
    if t is None:
        raise NonCertifiable(f"{what}: supremum is not certified beyond the probe")
    return max(s, t)


def _sup_I(P: _Probe, lo: np.ndarray, hi: np.ndarray) -> float:
    return _sup_enclosed(P.finite, lo, hi, "sup_i I_i")


def lower_bound_from_test(chain: Chain, f: TestFunctionDiscrete,
                          horizon: Optional[int] = None) -> float:
    """``inf_i 1/I_i(fb)`` for a strictly increasing ``f``: a lower bound on ``lambda_1``."""
    if f.plateau is not None:
        raise SpecError("lower bounds need an F'' (strictly increasing) test function")
    P = _probe(chain, horizon)
    lo, hi = I_enclosure(chain, f, _P=P)
    if not P.finite and len(f.values) - 1 < P.N:
        P = _truncate_probe(P, len(f.values) - 1)
    s = _sup_I(P, lo, hi)
    return 0.0 if not math.isfinite(s) else 1.0 / s


def upper_bound_from_test(chain: Chain, f: TestFunctionDiscrete,
                          horizon: Optional[int] = None) -> float:
    """``max_{i<k} 1/I_i(fb)`` for ``f`` constant from level ``k``: an upper bound.

    On a finite chain an F'' function covering all states counts as
    plateaued at the last state.
    """
    P = _probe(chain, horizon)
    if f.plateau is None:
        if not (P.finite and len(f.values) == P.N + 1):
            raise SpecError("upper bounds need an F' (plateaued) test function")
        f = TestFunctionDiscrete(f.values, P.N)
    lo, _ = I_enclosure(chain, f, _P=P)
    if np.any(lo <= 0):
        return math.inf
    return float(np.max(1.0 / lo))


# --------------------------------------------------------------------------
# delta and the explicit bracket


def _log_phi(P: _Probe) -> np.ndarray:
    """``log sum_{j<i} 1/(mu_j b_j)`` for ``i = 1..N`` (unscaled mu)."""
    return np.logaddexp.accumulate(-(P.logmu[:-1] + P.logb))


def delta_constant(chain: Chain, horizon: Optional[int] = None) -> DeltaEnclosure:
    """Enclosure of ``delta = sup_{i>=1} phi_i mu[i, oo)``."""
    P = _probe(chain, horizon)
    return _delta(P)


def _delta(P: _Probe) -> DeltaEnclosure:
    lphi = _log_phi(P)
    # mu[i, oo) for i = 1..N, scaled back by the shift
    tail_probe = np.cumsum(P.w[::-1])[::-1][1:]
    x = np.exp(lphi + P.shift) * tail_probe
    x_lo = x * (1 - 8 * _EPS * P.N)
    if P.finite:
        x_hi = x * (1 + 8 * _EPS * P.N)
        return DeltaEnclosure(float(np.max(x_lo)), float(np.max(x_hi)))
    x_hi = np.exp(lphi + P.shift) * (tail_probe + P.beyond) * (1 + 8 * _EPS * P.N)
    lo = float(np.max(x_lo))
    hi = _sup_enclosed(False, x_lo, x_hi, "delta")
    return DeltaEnclosure(lo, max(hi, lo))


def _mass(P: _Probe) -> tuple[float, float]:
    lo = float(np.sum(P.w)) * math.exp(P.shift)
    return lo, (float(np.sum(P.w)) + P.beyond) * math.exp(P.shift)


def explicit_bounds(chain: Chain, horizon: Optional[int] = None) -> GapBracket:
    """``[1/(4 delta_hi), mu_hi/delta_lo]``."""
    P = _probe(chain, horizon)
    d = _delta(P)
    _, m_hi = _mass(P)
    return GapBracket(1.0 / (4.0 * d.hi), m_hi / d.lo, "explicit-delta", "explicit-delta", P.N)


# --------------------------------------------------------------------------
# approximation procedure


def _next_f(P: _Probe, f: np.ndarray) -> np.ndarray:
    """``f'_i = sum_{j<i} (mu_j b_j)^{-1} sum_{k>j} mu_k fb_k``, i.e. one application
    of the inverse of the generator restricted to ``f_0 = 0`` functions."""
    w = P.w
    n = len(f)
    p = float(np.dot(w, f)) / float(np.sum(w))
    # forward form avoids tail cancellation below the crossing
    T = np.cumsum(w * (p - f))[: n - 1]
    tail = _rev_cumsum_excl(w * (f - p))[: n - 1]
    T = np.where(f[: n - 1] < p, T, tail)
    steps = T / (w[: n - 1] * P.b[: n - 1])
    out = np.concatenate(([0.0], np.cumsum(steps)))
    return out / out[-1] if out[-1] > 0 else out


def _usable(f: np.ndarray) -> int:
    """Length of the strictly increasing, finite prefix."""
    ok = np.isfinite(f)
    d = np.diff(f) > 0
    good = np.concatenate(([True], d)) & ok
    return len(f) if good.all() else max(2, int(np.argmin(good)))


def _plateau_grid(kmax: int) -> list[int]:
    ks, k = [], 1
    while k < kmax:
        ks.append(k)
        k *= 2
    ks.append(kmax)
    return ks


def approx_sequence(chain: Chain, n_iters: int = 8, horizon: Optional[int] = None) -> list[GapBracket]:
    """Brackets from iterated test functions seeded by ``sqrt(phi)``.

    Each bracket side is certified through the test-function bounds above,
    the explicit delta bracket is folded in, and the sequences are made
    monotone with running max/min.
    """
    if n_iters < 1:
        raise SpecError("n_iters must be at least 1")
    P = _probe(chain, horizon)
    base = explicit_bounds(chain, horizon)
    lphi = np.concatenate(([-math.inf], _log_phi(P)))
    f = np.exp(0.5 * (lphi - float(np.max(lphi))))
    f[0] = 0.0
    lower, upper = base.lower, base.upper
    lsrc, usrc = "explicit-delta", "explicit-delta"
    out = []
    for it in range(1, n_iters + 1):
        n = _usable(f)
        f = f[:n]
        cand_lo, cand_up = _bounds_for(chain, P, f)
        if cand_lo > lower:
            lower, lsrc = cand_lo, f"F''-iterate-{it}"
        if cand_up < upper:
            upper, usrc = cand_up, f"F'-iterate-{it}"
        if it == 1 and lower < base.lower:
            raise InvariantViolation("first lower bound fell below 1/(4 delta)")
        out.append(GapBracket(lower, max(upper, lower), lsrc, usrc, P.N))
        if it < n_iters:
            f = _next_f(_truncate_probe(P, n - 1) if n - 1 < P.N else P, f)
    return out


def _bounds_for(chain: Chain, P: _Probe, f: np.ndarray) -> tuple[float, float]:
    lo = 0.0
    Pf = _truncate_probe(P, len(f) - 1) if len(f) - 1 < P.N else P
    try:
        lo_I, hi = I_enclosure(chain, TestFunctionDiscrete(f), _P=Pf)
        s = _sup_I(Pf, lo_I, hi)
        lo = 0.0 if not math.isfinite(s) else 1.0 / s
    except NonCertifiable:
        lo = 0.0
    up = math.inf
    for k in _plateau_grid(len(f) - 1):
        try:
            lo_I, _ = I_enclosure(chain, TestFunctionDiscrete(f, k), _P=P)
        except NonCertifiable:
            continue
        if np.all(lo_I > 0):
            up = min(up, float(np.max(1.0 / lo_I)))
    return lo, up
