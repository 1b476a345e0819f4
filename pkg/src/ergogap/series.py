"""Convergence verdicts for series, suprema and limits of positive sequences.

Everything here looks at a finite probe of a sequence (indices ``0..H``)
and either certifies the behaviour beyond ``H`` or says "inconclusive".
Certification rests on eventual monotonicity inside a window at the end of
the probe (the last half by default):

* a nonincreasing tail has its supremum at the start of the tail;
* a nondecreasing tail is bounded iff its increments are summable;
* a sum is enclosed with the ratio test (``t_{n+1}/t_n <= rho < 1``) or, when
  the ratio tends to one, Raabe's test (``n (1 - t_{n+1}/t_n) >= L > 1``,
  giving ``sum_{n>H} t_n <= t_H H / (L - 1)``).

Sequences that are constant to rounding precision over the window count as
converged at their last value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .rateexpr import RateExpr

__all__ = [
    "SeriesVerdict",
    "series_limit",
    "sum_verdict",
    "sup_verdict",
    "limit_verdict",
    "tail_sup",
    "tail_inf",
    "sum_tail",
]

EPS = np.finfo(float).eps
_SAMPLES = 64
_MIN_PROBE = 256

CONVERGES = "converges"
DIVERGES = "diverges"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SeriesVerdict:
    """Outcome of a series/sup/limit probe.

    ``lower``/``upper`` enclose the sum (or supremum, or limit) when the
    status is ``converges``.  For ``diverges`` the witness is the largest
    partial value seen.
    """

    status: str
    lower: float
    upper: float
    horizon: int
    method: str
    witness: Optional[float] = None

    @property
    def value(self) -> float:
        if self.status != CONVERGES:
            return math.inf if self.status == DIVERGES else math.nan
        if math.isinf(self.upper):
            return self.upper
        return 0.5 * (self.lower + self.upper)

    @property
    def converges(self) -> bool:
        return self.status == CONVERGES

    @property
    def diverges(self) -> bool:
        return self.status == DIVERGES

    @property
    def decided(self) -> bool:
        return self.status != INCONCLUSIVE


def _window(x: np.ndarray, frac: float = 0.5, min_len: int = 8) -> np.ndarray:
    n = len(x)
    w = max(min_len, int(n * frac))
    return x[max(0, n - w):]


def _stride(n: int) -> int:
    return max(1, n // _SAMPLES)


def _sample(w: np.ndarray) -> np.ndarray:
    """Evenly strided subsample ending at the last element."""
    s = _stride(len(w))
    return w[::-1][::s][::-1]


def _trend(w: np.ndarray, floor: float = 0.0, tol: float = 0.0) -> int:
    """+1 nondecreasing, -1 nonincreasing, 2 constant, 0 neither (to rounding).

    Judged on a strided subsample so that rounding noise between neighbours
    does not mask the trend.
    """
    scale = max(float(np.max(np.abs(w))), floor)
    tol = max(tol, 64 * EPS * scale)
    if float(np.max(w) - np.min(w)) <= tol:
        return 2
    d = np.diff(_sample(w))
    if np.all(d >= -tol):
        return 1
    if np.all(d <= tol):
        return -1
    return 0


def tail_sup(x: np.ndarray, *, floor: float = 0.0, frac: float = 0.5,
             offset: float = 0, tol: float = 0.0) -> Optional[float]:
    """Certified upper bound on ``sup_{n >= H} x_n`` (``inf`` if unbounded).

    ``offset`` is the absolute index of ``x[0]``; ``tol`` is the absolute
    noise level of the entries (rounding is always allowed for).  Returns
    None when the window shows no monotone trend.
    """
    x = np.asarray(x, dtype=float)
    if len(x) < 4 or not np.all(np.isfinite(x)):
        return None
    w = _window(x, frac)
    scale = max(float(np.max(np.abs(w))), floor)
    t = _trend(w, floor, tol)
    tol = max(tol, 64 * EPS * scale)
    if t == 2:
        return float(np.max(w)) + tol
    if t == -1:
        return float(np.max(w[-_stride(len(w)):])) + tol
    if t == 1:
        return _increasing_limit(x, scale, offset)
    return None


def tail_inf(x: np.ndarray, *, floor: float = 0.0, frac: float = 0.5,
             offset: float = 0) -> Optional[float]:
    """Certified lower bound on ``inf_{n >= H} x_n`` (``-inf`` if unbounded below)."""
    s = tail_sup(-np.asarray(x, dtype=float), floor=floor, frac=frac, offset=offset)
    return None if s is None else -s


def _increasing_limit(x: np.ndarray, scale: float, offset: float) -> Optional[float]:
    """Upper enclosure of the limit of an eventually nondecreasing sequence.

    Uses dyadic condensation: with ``n_k = c 2^k`` (absolute indices) the
    block gains ``E_k = x(n_{k+1}) - x(n_k)`` are summable iff the gains
    are, and for power-law increments their ratio settles to a constant.
    A ratio at or above one means the sequence is unbounded.  Returns None
    when the ratios drift upward too fast to extrapolate.
    """
    x = np.asarray(x, dtype=float)
    tol = 64 * EPS * scale
    last = float(x[-1])
    hi_abs = int(offset) + len(x) - 1
    lo_abs = max(int(offset), 1)
    J = int(math.floor(math.log2(hi_abs / lo_abs))) if hi_abs > lo_abs else 0
    if J < 5:
        return None
    J = min(J, 12)
    c = hi_abs >> J
    pts = x[(c << np.arange(J + 1)) - int(offset)]
    E = np.diff(pts)
    if float(np.max(np.abs(E[-3:]))) <= tol:
        # numerically converged: gains are at rounding level
        return last + 3 * tol
    q = E[-5:]
    if np.any(q <= 0):
        return None
    rho = q[1:] / q[:-1]
    if np.all(rho >= 1.0 - 1e-9):
        return math.inf
    r_hi = float(np.max(rho))
    # power-law gains settle geometrically fast; a slowly creeping ratio
    # (logarithmic corrections) cannot be extrapolated
    drift = float(np.max(np.diff(rho)))
    if r_hi >= 1.0 or drift > 1e-3 * (1.0 - rho[-1]) + 1e-12:
        return None
    return last + float(q[-1]) * r_hi / (1.0 - r_hi) + 3 * tol


def sum_tail(logt: np.ndarray, *, dlog: Optional[np.ndarray] = None,
             first_index: Optional[float] = None) -> tuple[str, float]:
    """Bound ``sum_{n > H} t_n`` from the log-terms ``log t_0 .. log t_H``.

    ``dlog`` optionally supplies accurately computed ``log(t_{n+1}/t_n)``
    (same length minus one); ``first_index`` is the absolute index of
    ``logt[0]`` (defaults to 0) and matters for Raabe's test.
    Returns ``(status, tail_upper)``.
    """
    logt = np.asarray(logt, dtype=float)
    if len(logt) < 8:
        return INCONCLUSIVE, math.nan
    if dlog is None:
        dlog = np.diff(logt)
    dlog = np.asarray(dlog, dtype=float)
    if np.any(np.isnan(dlog)) or np.any(np.isnan(logt[-len(dlog):])):
        return INCONCLUSIVE, math.nan
    n0 = 0 if first_index is None else first_index
    last_log = float(logt[-1])
    if last_log == -math.inf:
        return CONVERGES, 0.0
    H = n0 + len(logt) - 1

    # terms eventually nondecreasing: the sum diverges
    lo = tail_inf(dlog, floor=1.0, offset=n0)
    if lo is not None and lo >= 0.0 and float(dlog[-1]) >= 0.0:
        return DIVERGES, math.inf

    hi = tail_sup(dlog, floor=1.0, offset=n0)
    if hi is not None and hi < 0.0:
        rho = math.exp(hi)
        return CONVERGES, math.exp(last_log) * rho / (1.0 - rho)

    # ratio -> 1: Raabe's test with R_n = n (1 - t_{n+1}/t_n), then Bertrand's
    idx = n0 + np.arange(len(dlog), dtype=float)
    R = -idx * np.expm1(dlog)
    if np.all(np.isfinite(_window(R))):
        L = tail_inf(R, floor=1.0, offset=n0)
        if L is not None and L > 1.0 + 1e-9:
            return CONVERGES, math.exp(last_log) * H / (L - 1.0)
        U = tail_sup(R, floor=1.0, offset=n0)
        if U is not None and U <= 1.0:
            return DIVERGES, math.inf
        good = idx > 1
        B = np.log(idx[good]) * (R[good] - 1.0)
        if len(B) >= 8:
            UB = tail_sup(B, floor=1.0, offset=n0 + int(np.argmax(good)))
            if UB is not None and UB <= 1.0:
                return DIVERGES, math.inf
    return INCONCLUSIVE, math.nan


def _logsumexp(a: np.ndarray) -> float:
    a = np.asarray(a, dtype=float)
    m = float(np.max(a))
    if not np.isfinite(m):
        return m
    return m + math.log(float(np.sum(np.exp(a - m))))


def _sum_once(logt: np.ndarray, dlog: Optional[np.ndarray], method: str) -> SeriesVerdict:
    logt = np.asarray(logt, dtype=float)
    H = len(logt) - 1
    lse = _logsumexp(logt) if len(logt) else -math.inf
    partial = math.exp(lse) if lse < 709.0 else math.inf
    status, tail = sum_tail(logt, dlog=dlog)
    if status == CONVERGES:
        return SeriesVerdict(CONVERGES, partial, partial + tail, H, method)
    if status == DIVERGES:
        return SeriesVerdict(DIVERGES, partial, math.inf, H, method, witness=partial)
    return SeriesVerdict(INCONCLUSIVE, partial, math.inf, H, "none", witness=partial)


def _sup_once(x: np.ndarray, start: int, method: str) -> SeriesVerdict:
    x = np.asarray(x, dtype=float)
    H = len(x) - 1
    body = x[start:]
    if np.any(np.isposinf(body)):
        return SeriesVerdict(DIVERGES, math.inf, math.inf, H, method, witness=math.inf)
    seen = float(np.max(body)) if len(body) else -math.inf
    ts = tail_sup(body, offset=start)
    if ts is None:
        return SeriesVerdict(INCONCLUSIVE, seen, math.inf, H, "none", witness=seen)
    if math.isinf(ts):
        return SeriesVerdict(DIVERGES, seen, math.inf, H, method, witness=seen)
    return SeriesVerdict(CONVERGES, seen, max(seen, ts), H, method)


def _limit_once(x: np.ndarray, method: str) -> SeriesVerdict:
    x = np.asarray(x, dtype=float)
    H = len(x) - 1
    if len(x) < 8 or not np.all(np.isfinite(x)):
        return SeriesVerdict(INCONCLUSIVE, -math.inf, math.inf, H, "none")
    w = _window(x)
    t = _trend(w)
    last = float(w[-1])
    scale = float(np.max(np.abs(w)))
    if t == 2:
        tol = 64 * EPS * scale
        return SeriesVerdict(CONVERGES, last - tol, last + tol, H, method)
    if t == 1:
        hi = _increasing_limit(x, scale, 0)
        if hi is None:
            return SeriesVerdict(INCONCLUSIVE, last, math.inf, H, "none")
        if math.isinf(hi):
            return SeriesVerdict(DIVERGES, last, math.inf, H, method, witness=last)
        return SeriesVerdict(CONVERGES, last, hi, H, method)
    if t == -1:
        if last <= 0.0:
            return SeriesVerdict(CONVERGES, last, last, H, method)
        with np.errstate(divide="ignore"):
            nlx = -np.log(x)
        if not np.all(np.isfinite(nlx)):
            return SeriesVerdict(INCONCLUSIVE, 0.0, last, H, "none")
        hi = _increasing_limit(nlx, max(1.0, float(np.max(np.abs(nlx)))), 0)
        if hi is not None:
            if math.isinf(hi):
                return SeriesVerdict(CONVERGES, 0.0, 0.0, H, method)
            return SeriesVerdict(CONVERGES, math.exp(-hi), last, H, method)
        return SeriesVerdict(INCONCLUSIVE, 0.0, last, H, "none")
    return SeriesVerdict(INCONCLUSIVE, -math.inf, math.inf, H, "none")


def _ladder(H: int) -> list[int]:
    hs = [H]
    while hs[-1] // 4 >= _MIN_PROBE:
        hs.append(hs[-1] // 4)
    return hs


def _settle(results: list[SeriesVerdict], H: int) -> SeriesVerdict:
    """Largest-horizon decided verdict, provided no decided verdicts disagree."""
    decided = [r for r in results if r.decided]
    if not decided:
        return results[0]
    if len({r.status for r in decided}) > 1:
        seen = results[0]
        return SeriesVerdict(INCONCLUSIVE, seen.lower, math.inf, H, "none",
                             witness=seen.witness)
    return decided[0]


def sum_verdict(logt: np.ndarray, *, dlog: Optional[np.ndarray] = None,
                method: str = "ratio-monotone") -> SeriesVerdict:
    """Verdict on ``sum_{n>=0} t_n`` from log-terms over ``0..H``.

    The probe is repeated on the horizons ``H, H/4, H/16, ...``: deep
    horizons can lose the second-order ratio information to rounding.
    """
    logt = np.asarray(logt, dtype=float)
    logt, dlog = _trim(logt, dlog)
    H = len(logt) - 1
    res = [_sum_once(logt[: h + 1], None if dlog is None else dlog[:h], method)
           for h in _ladder(H)]
    return _settle(res, H)


def sup_verdict(x: np.ndarray, *, start: int = 0, method: str = "ratio-monotone") -> SeriesVerdict:
    """Verdict on ``sup_{n >= start} x_n`` (converges == finite)."""
    x = np.asarray(x, dtype=float)
    H = len(x) - 1
    res = [_sup_once(x[: h + 1], start, method) for h in _ladder(H) if h > start + 8]
    if not res:
        res = [_sup_once(x, start, method)]
    v = _settle(res, H)
    if v.converges:
        # the supremum over the full probe is at least what was seen there
        seen = float(np.max(x[start:]))
        v = SeriesVerdict(CONVERGES, seen, max(seen, v.upper), H, v.method)
    return v


def limit_verdict(x: np.ndarray, *, method: str = "ratio-monotone") -> SeriesVerdict:
    """Enclosure of ``lim x_n`` for a positive, eventually monotone sequence.

    A nonincreasing tail is certified to reach zero when ``-log x_n`` is
    certified unbounded.
    """
    x = np.asarray(x, dtype=float)
    return _settle([_limit_once(x[: h + 1], method) for h in _ladder(len(x) - 1)], len(x) - 1)


def _trim(logt: np.ndarray, dlog: Optional[np.ndarray]):
    """Cut the probe before the first non-finite or NaN log-term."""
    bad = ~np.isfinite(logt)
    bad[0] = False if logt[0] == -math.inf else bad[0]
    if not bad[1:].any():
        return logt, dlog
    stop = int(np.argmax(bad[1:])) + 1
    return logt[:stop], None if dlog is None else dlog[: stop - 1]


Term = Union[RateExpr, Callable[[np.ndarray], np.ndarray]]


def _closed_family(expr: RateExpr, mode: str) -> Optional[str]:
    """Exact verdict from the leading term ``c n^p g^n`` of an expression."""
    lead = expr.leading()
    if lead is None or lead.coef <= 0 or lead.base <= 0:
        return None
    if mode == "sum":
        if lead.base < 1:
            return CONVERGES
        if lead.base > 1:
            return DIVERGES
        return CONVERGES if lead.power < -1 else DIVERGES
    if mode == "sup":
        if lead.base < 1 or (lead.base == 1 and lead.power <= 0):
            return CONVERGES
        return DIVERGES
    return None


def series_limit(term: Term, mode: str = "sum", horizon: int = 100_000,
                 *, log: bool = False) -> SeriesVerdict:
    """Probe ``sum_n t_n`` (``mode='sum'``), ``sup_n t_n`` (``'sup'``) or
    ``lim_n t_n`` (``'limit'``) over ``n = 0..horizon``.

    ``term`` is a RateExpr or a vectorised callable.  With ``log=True`` the
    callable returns ``log t_n``.  RateExpr terms whose leading asymptotic
    term is recognised get an exact verdict (method ``closed-family``).
    """
    if mode not in ("sum", "sup", "limit"):
        raise ValueError(f"unknown mode {mode!r}")
    n = np.arange(horizon + 1)
    if isinstance(term, RateExpr):
        sign, logt = term.log_eval(n)
        if np.any(sign[1:] <= 0):
            raise ValueError("series terms must be positive")
        if sign[0] <= 0:
            logt[0] = -math.inf
        vals = None
    else:
        raw = np.asarray(term(n), dtype=float)
        if log:
            logt = raw
        else:
            if np.any(raw < 0):
                raise ValueError("series terms must be nonnegative")
            with np.errstate(divide="ignore"):
                logt = np.log(raw)
        vals = None if log else raw
    if mode == "sum":
        v = sum_verdict(logt)
    elif mode == "sup":
        v = sup_verdict(np.exp(logt) if vals is None else vals)
    else:
        v = limit_verdict(np.exp(logt) if vals is None else vals)
    if isinstance(term, RateExpr):
        exact = _closed_family(term, mode)
        if exact is not None:
            if exact == DIVERGES:
                return SeriesVerdict(DIVERGES, v.lower, math.inf, horizon,
                                     "closed-family", witness=v.witness or v.lower)
            if v.converges:
                return SeriesVerdict(CONVERGES, v.lower, v.upper, horizon, "closed-family")
            return SeriesVerdict(CONVERGES, v.lower, math.inf, horizon, "closed-family")
    return v
