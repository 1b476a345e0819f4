"""Ergodicity classification of infinite birth-death chains.

Eight criteria, each a series or supremum built from ``mu``:

========================  ==============================================
uniqueness (*)            sum_n mu[0,n] / (mu_n b_n) = oo
recurrence                sum_n 1 / (mu_n b_n) = oo
ergodicity                (*) and mu[0,oo) < oo
exponential ergodicity    (*) and sup_n mu[n,oo) U_n < oo
discrete spectrum         (*) and lim_n sup_{k>n} mu[k,oo) (U_k - U_n) = 0
log-Sobolev               (*) and sup_n mu[n,oo) log(1/mu[n,oo)) U_n < oo
strong ergodicity         (*) and sum_n mu_n U_n < oo
Nash(q)                   (*) and sup_n mu[n,oo)^{(q-2)/(q-1)} U_n < oo
========================  ==============================================

with ``U_n = sum_{j<n} 1/(mu_j b_j)``.  Exponential and strong ergodicity
carry a second name each (L^2- and L^1-exponential convergence), which
makes ten labelled properties.

Verdicts are three-valued.  A row that needs ``(*)`` fails as soon as
``(*)`` fails and is inconclusive while ``(*)`` is.  Every quantity is
evaluated in log-space on the probe ``0..H``; tails ``mu[n,oo)`` carry an
enclosure, and suprema are certified only over the prefix on which that
enclosure is tight.

Two identities keep the evaluation cheap and checkable:

* When ``mu < oo``, ``lim_n sup_{k>n} mu[k,oo)(U_k - U_n)`` equals
  ``limsup_k mu[k,oo) U_k`` (``mu[k,oo) U_n -> 0`` for fixed ``n``), so
  the discrete-spectrum row is a limit of the same sequence whose supremum
  is ``delta``.
* For every ``M``, ``sum_{n=1}^M mu_n U_n = sum_{j<M} u_j mu[j+1, M]``.
  Both sides of the strong-ergodicity row are computed on a truncation and
  compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bdchain import FAILS, HOLDS, ChainSpec, check_nonexplosion, mu_weights, ratio_limit_class
from .dualgap import delta_constant
from .errors import InvariantViolation, NonCertifiable, SpecError
from .series import (CONVERGES, DIVERGES, INCONCLUSIVE, SeriesVerdict, limit_verdict,
                     series_limit, sum_tail, sum_verdict, sup_verdict)

__all__ = [
    "HOLDS",
    "FAILS",
    "INCONCLUSIVE",
    "ROWS",
    "LABELS",
    "Verdict",
    "ClassificationReport",
    "classify_chain",
    "criterion_uniqueness",
    "criterion_recurrence",
    "criterion_ergodicity",
    "criterion_exp_ergodicity",
    "criterion_discrete_spectrum",
    "criterion_log_sobolev",
    "criterion_strong_ergodicity",
    "criterion_nash",
    "discrete_spectrum_window",
    "series_limit",
    "DEFAULT_HORIZON",
    "DEFAULT_Q",
]

DEFAULT_HORIZON = 100_000
DEFAULT_Q = 3.0
FUBINI_RTOL = 1e-10
DELTA_RTOL = 1e-12
# a tail enclosure within a factor 2 decides sup and limit questions both ways:
# hi/2 <= x <= hi, so x is bounded (tends to 0) exactly when hi is
_RELIABLE = math.log(2.0)
_LOG_SAFE = 1e4  # |log| magnitude below which log-space sums keep ~1e-12 accuracy

ROWS = ("uniqueness", "recurrence", "ergodicity", "exp_ergodicity", "discrete_spectrum",
        "log_sobolev", "strong_ergodicity", "nash")

LABELS = (
    ("Uniqueness", "uniqueness"),
    ("Recurrence", "recurrence"),
    ("Ergodicity", "ergodicity"),
    ("Exponential ergodicity", "exp_ergodicity"),
    ("L2-exponential convergence", "exp_ergodicity"),
    ("Discrete spectrum", "discrete_spectrum"),
    ("Log-Sobolev inequality", "log_sobolev"),
    ("Strong ergodicity", "strong_ergodicity"),
    ("L1-exponential convergence", "strong_ergodicity"),
    ("Nash inequality", "nash"),
)

# stronger -> weaker, from the diagram of ergodicity types
_DIAGRAM = (("nash", "log_sobolev"), ("nash", "strong_ergodicity"),
            ("log_sobolev", "exp_ergodicity"), ("strong_ergodicity", "exp_ergodicity"),
            ("exp_ergodicity", "ergodicity"))
_INCOMPARABLE = {("log_sobolev", "strong_ergodicity")}

_Y, _N = HOLDS, FAILS

# Reference ladders in ROWS order, worked out by hand from closed-form mu weights.
#   1, 2      mu_n = 2^-n; mu[n,oo) U_n = 2(1 - 2^-n) bounded, not -> 0; sum mu_n U_n = sum (1 - 2^-n)
#   1, i^2    mu_n = 1/(n!)^2; tails and U_n are dominated by their extreme terms, except that
#             mu[n,oo)^(1/2) U_n ~ (n-1)!/n grows, so Nash fails for every q > 2
#   1, 1      mu_n = 1: recurrent, mass infinite
#   2, 1      mu_n = 2^n: sum 1/(mu_n b_n) < oo (transient), explosion series ~ sum 1 diverges
#   2^i, 1    mu_n = 2^(n(n-1)/2): explosion series summable
CORPUS = (
    ("geometric", ChainSpec("1", "2"), (_Y, _Y, _Y, _Y, _N, _N, _N, _N)),
    ("factorial", ChainSpec("1", "i^2"), (_Y, _Y, _Y, _Y, _Y, _Y, _Y, _N)),
    ("null-recurrent", ChainSpec("1", "1"), (_Y, _Y, _N, _N, _N, _N, _N, _N)),
    ("transient", ChainSpec("2", "1"), (_Y, _N, _N, _N, _N, _N, _N, _N)),
    ("explosive", ChainSpec("2^i", "1"), (_N,) * 8),
)


@dataclass(frozen=True)
class Verdict:
    """One row: status, the evaluated quantity (an enclosure) and provenance."""

    row: str
    status: str
    quantity: Optional[SeriesVerdict]
    horizon: int
    method: str
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    @property
    def decided(self) -> bool:
        return self.status != INCONCLUSIVE

    @property
    def value(self) -> float:
        return math.nan if self.quantity is None else self.quantity.value

    @property
    def symbol(self) -> str:
        return {HOLDS: "yes", FAILS: "no"}.get(self.status, "?")


def _and(*statuses: str) -> str:
    if FAILS in statuses:
        return FAILS
    if all(s == HOLDS for s in statuses):
        return HOLDS
    return INCONCLUSIVE


# --------------------------------------------------------------------------
# probe data


@dataclass(frozen=True, eq=False)
class _Data:
    spec: ChainSpec
    H: int
    logmu: np.ndarray  # 0..H
    logu: np.ndarray  # log 1/(mu_n b_n), 0..H (0..N-1 on a finite chain)
    logU: np.ndarray  # log U_n, n = 0..H+1 (U_0 = 0)
    logT_lo: np.ndarray  # log mu[n, oo), n = 0..H
    logT_hi: np.ndarray
    total: SeriesVerdict
    star: "Verdict" = field(default=None)


def _log_beyond(logmu: np.ndarray, dlog: np.ndarray) -> float:
    """``log sum_{j > H} mu_j`` (upper bound) or ``+inf`` when not certified.

    The tail is bounded relative to ``mu_H`` so that it cannot underflow.
    """
    st, rel = sum_tail(logmu - logmu[-1], dlog=dlog)
    if st != CONVERGES:
        return math.inf
    return -math.inf if rel == 0.0 else float(logmu[-1] + math.log(rel))


def _data(spec: ChainSpec, horizon: int) -> _Data:
    if spec.finite:
        N = spec.states
        mw = mu_weights(spec, N)
        logmu = mw.log_values
        lb = spec.log_birth(N)
        logu = -(logmu[:-1] + lb)
        lo = mw.log_tail_probe
        hi = lo
        H = N
    else:
        H = int(horizon)
        if H < 64:
            raise SpecError("horizon must be at least 64")
        mw = mu_weights(spec, H)
        logmu = mw.log_values
        lb = spec.log_birth(H + 1)
        logu = -(logmu + lb)
        lo = mw.log_tail_probe
        if mw.total.converges:
            lbey = _log_beyond(logmu, spec.log_birth(H) - spec.log_death(H))
            hi = np.logaddexp(lo, lbey) if math.isfinite(lbey) else np.full_like(lo, math.inf)
        else:
            hi = np.full_like(lo, math.inf)
    logU = np.concatenate(([-math.inf], np.logaddexp.accumulate(logu)))
    for a in (logmu, logu, logU, lo, hi):
        a.setflags(write=False)
    return _Data(spec, H, logmu, logu, logU, lo, hi, mw.total)


def _reliable_prefix(lo: np.ndarray, hi: np.ndarray) -> int:
    """Length of the prefix on which ``hi - lo`` (log scale) stays tight."""
    with np.errstate(invalid="ignore"):
        bad = ~(hi - lo <= _RELIABLE)
    if not bad.any():
        return len(lo)
    good = np.flatnonzero(~bad)
    return int(good[-1]) + 1 if len(good) else 0


def _exp_verdict(v: SeriesVerdict) -> SeriesVerdict:
    """A verdict on ``sup log x`` turned into one on ``sup x``."""
    def ex(t):
        return math.inf if t >= 709.0 else math.exp(t)

    w = None if v.witness is None else ex(v.witness)
    return SeriesVerdict(v.status, ex(v.lower), ex(v.upper), v.horizon, v.method, w)


def _log_sup(x_lo: np.ndarray, x_hi: np.ndarray, start: int = 0) -> SeriesVerdict:
    """Certified ``sup_n x_n`` given log-enclosures ``x_lo <= log x <= x_hi``.

    The tail is extrapolated from the tight prefix only.
    """
    m = _reliable_prefix(x_lo, x_hi)
    H = len(x_lo) - 1
    if m - start < 64:
        seen = float(np.max(x_lo[start:])) if len(x_lo) > start else -math.inf
        return _exp_verdict(SeriesVerdict(INCONCLUSIVE, seen, math.inf, H, "none", seen))
    v = sup_verdict(x_hi[:m], start=start)
    seen = float(np.max(x_lo[start:m]))
    return _exp_verdict(SeriesVerdict(v.status, seen, v.upper, H, v.method, v.witness))


def _finite_sup(x: np.ndarray) -> SeriesVerdict:
    s = float(np.max(x)) if len(x) else -math.inf
    return _exp_verdict(SeriesVerdict(CONVERGES, s, s, len(x), "finite"))


# --------------------------------------------------------------------------
# rows


def _status_of(v: SeriesVerdict, *, holds_when: str) -> str:
    if not v.decided:
        return INCONCLUSIVE
    return HOLDS if v.status == holds_when else FAILS


def _uniqueness(D: _Data) -> Verdict:
    if D.spec.finite:
        return Verdict("uniqueness", HOLDS, None, D.H, "finite")
    ne = check_nonexplosion(D.spec, D.H)
    return Verdict("uniqueness", ne.verdict, ne.series, D.H, ne.series.method)


def _recurrence(D: _Data) -> Verdict:
    if D.spec.finite:
        return Verdict("recurrence", HOLDS, None, D.H, "finite")
    v = sum_verdict(D.logu)
    lead = D.spec.leading_rates()
    # u_{n+1}/u_n = a_{n+1}/b_{n+1}
    cls = None if lead is None else ratio_limit_class(lead[1], lead[0])
    if cls == 1:
        v = SeriesVerdict(DIVERGES, v.lower, math.inf, v.horizon, "closed-family", v.lower)
    elif cls == -1:
        v = SeriesVerdict(CONVERGES, v.lower, v.upper, v.horizon, "closed-family")
    return Verdict("recurrence", _status_of(v, holds_when=DIVERGES), v, D.H, v.method)


def _gate(D: _Data, row: str, *, need_mass: bool = True) -> Optional[Verdict]:
    """The verdict forced by ``(*)`` (and ``mu < oo``), if any."""
    star = D.star
    if star.fails:
        return Verdict(row, FAILS, None, D.H, star.method, "uniqueness condition fails")
    if need_mass and D.total.diverges:
        return Verdict(row, FAILS, D.total, D.H, D.total.method, "mu has infinite mass")
    if need_mass and not D.total.decided:
        return Verdict(row, INCONCLUSIVE, D.total, D.H, "none", "mass of mu undecided")
    return None


def _with_star(D: _Data, row: str, status: str, q: Optional[SeriesVerdict], note: str = "") -> Verdict:
    method = "finite" if D.spec.finite else (q.method if q is not None else "none")
    return Verdict(row, _and(D.star.status, status), q, D.H, method, note)


def _ergodicity(D: _Data) -> Verdict:
    g = _gate(D, "ergodicity", need_mass=False)
    if g is not None:
        return g
    status = _status_of(D.total, holds_when=CONVERGES)
    return _with_star(D, "ergodicity", status, D.total)


def _log_A(D: _Data) -> tuple[np.ndarray, np.ndarray]:
    """``log mu[n,oo) U_n`` for ``n = 1..H``, lower and upper."""
    n = len(D.logT_lo)
    U = D.logU[1:n]
    return D.logT_lo[1:] + U, D.logT_hi[1:] + U


def _exp_ergodicity(D: _Data) -> tuple[Verdict, Optional[float]]:
    g = _gate(D, "exp_ergodicity")
    if g is not None:
        return g, None
    a_lo, a_hi = _log_A(D)
    if D.spec.finite:
        q = _finite_sup(a_hi)
    else:
        q = _log_sup(a_lo, a_hi)
    v = _with_star(D, "exp_ergodicity", _status_of(q, holds_when=CONVERGES), q)
    return v, _delta_crosscheck(D, q)


def _delta_crosscheck(D: _Data, q: SeriesVerdict) -> Optional[float]:
    """Relative gap between this enclosure of ``delta`` and the dual-formula one.

    ``None`` when either side is not a finite enclosure.
    """
    if not q.converges:
        return None
    try:
        d = delta_constant(D.spec, None if D.spec.finite else D.H)
    except (NonCertifiable, SpecError):
        return None
    if not math.isfinite(d.hi):
        return None
    # the enclosures must intersect
    gap = max(d.lo - q.upper, q.lower - d.hi, 0.0)
    return gap / max(abs(d.lo), abs(q.lower), 1e-300)


def _discrete_spectrum(D: _Data, expo: Verdict) -> Verdict:
    g = _gate(D, "discrete_spectrum")
    if g is not None:
        return g
    if D.spec.finite:
        return _with_star(D, "discrete_spectrum", HOLDS, None)
    if expo.quantity is not None and expo.quantity.diverges:
        # sup_k mu[k,oo) U_k = oo with mu[k,oo) -> 0 forces limsup = oo
        return _with_star(D, "discrete_spectrum", FAILS, expo.quantity,
                          "mu[k,oo) U_k is unbounded")
    a_lo, a_hi = _log_A(D)
    m = _reliable_prefix(a_lo, a_hi)
    if m < 64:
        return _with_star(D, "discrete_spectrum", INCONCLUSIVE, None, "tail enclosure too wide")
    up = limit_verdict(np.exp(a_hi[:m]))
    if up.converges and up.upper == 0.0:
        status = HOLDS
    elif up.diverges or (up.converges and up.lower > 0.0):
        status = FAILS
    else:
        status = INCONCLUSIVE
    q = up if status != FAILS else SeriesVerdict(up.status, up.lower / 2.0, up.upper, up.horizon,
                                                   up.method, up.witness)
    return _with_star(D, "discrete_spectrum", status, q)


def discrete_spectrum_window(spec: ChainSpec, n: int, horizon: int = 4096) -> float:
    """``max_{n<k<=H} mu[k,H] sum_{n<=j<k} 1/(mu_j b_j)`` on the probe ``0..H``.

    The inner supremum of the discrete-spectrum criterion at a fixed ``n``,
    restricted to the probe (a lower bound for it).
    """
    D = _data(spec, horizon)
    H = len(D.logT_lo) - 1
    if not 0 <= n < H:
        raise SpecError(f"n must lie in 0..{H - 1}")
    logS = np.logaddexp.accumulate(D.logu[n:H])  # sum_{n<=j<k}, k = n+1..H
    return float(np.exp(np.max(D.logT_lo[n + 1:H + 1] + logS)))


def _log_sobolev(D: _Data) -> Verdict:
    g = _gate(D, "log_sobolev")
    if g is not None:
        return g
    a_lo, a_hi = _log_A(D)
    t_lo, t_hi = D.logT_lo[1:], D.logT_hi[1:]
    # only n with mu[n,oo) < 1 enter (log of mu[n,oo)^{-1} must be positive)
    pos = np.flatnonzero(t_hi < 0)
    if len(pos) == 0:
        return _with_star(D, "log_sobolev", HOLDS if D.spec.finite else INCONCLUSIVE, None,
                          "mu[n,oo) >= 1 on the whole probe")
    s = int(pos[0])
    with np.errstate(divide="ignore", invalid="ignore"):
        x_lo = np.full_like(a_lo, -math.inf)
        x_hi = np.full_like(a_hi, -math.inf)
        x_lo[s:] = a_lo[s:] + np.log(-t_hi[s:])
        x_hi[s:] = a_hi[s:] + np.log(-t_lo[s:])
    if D.spec.finite:
        q = _finite_sup(x_hi[s:])
    else:
        q = _log_sup(x_lo, x_hi, start=s)
    return _with_star(D, "log_sobolev", _status_of(q, holds_when=CONVERGES), q,
                      f"sup over n >= {s + 1} (mu[n,oo) < 1)")


def _fubini(D: _Data) -> Optional[float]:
    """Relative defect of ``sum_{n<=M} mu_n U_n = sum_{j<M} u_j mu[j+1, M]``.

    ``M`` is the largest index with every log-magnitude below ``_LOG_SAFE``.
    """
    size = min(len(D.logmu), len(D.logu) + 1)
    mag = np.maximum(np.abs(D.logmu[:size]), np.abs(D.logU[:size]))
    mag[0] = abs(D.logmu[0])
    ok = mag <= _LOG_SAFE
    M = size - 1 if ok.all() else int(np.argmin(ok)) - 1
    if M < 2:
        return None
    lhs_terms = D.logmu[1:M + 1] + D.logU[1:M + 1]
    T = np.logaddexp.accumulate(D.logmu[1:M + 1][::-1])[::-1]  # mu[j+1, M], j = 0..M-1
    rhs_terms = D.logu[:M] + T
    L = float(np.logaddexp.reduce(lhs_terms))
    R = float(np.logaddexp.reduce(rhs_terms))
    return abs(math.expm1(L - R))


def _strong(D: _Data) -> tuple[Verdict, Optional[float]]:
    fub = _fubini(D)
    g = _gate(D, "strong_ergodicity")
    if g is not None:
        return g, fub
    if D.spec.finite:
        terms = D.logmu[1:] + D.logU[1:len(D.logmu)]
        s = float(np.exp(np.logaddexp.reduce(terms)))
        q = SeriesVerdict(CONVERGES, s, s, D.H, "finite")
        return _with_star(D, "strong_ergodicity", HOLDS, q), fub
    # sum_{n>=1} mu_n U_n involves no tails of mu
    q = sum_verdict(D.logmu[1:] + D.logU[1:len(D.logmu)])
    return _with_star(D, "strong_ergodicity", _status_of(q, holds_when=CONVERGES), q), fub


def _nash(D: _Data, q_param: float) -> Verdict:
    e = _nash_exponent(q_param)
    g = _gate(D, "nash")
    if g is not None:
        return g
    U = D.logU[1:len(D.logT_lo)]
    x_lo = e * D.logT_lo[1:] + U
    x_hi = e * D.logT_hi[1:] + U
    if D.spec.finite:
        q = _finite_sup(x_hi)
    else:
        q = _log_sup(x_lo, x_hi)
    return _with_star(D, "nash", _status_of(q, holds_when=CONVERGES), q, f"q = {q_param:g}")


def _nash_exponent(q_param: float) -> float:
    if not q_param > 2:
        raise SpecError(f"the Nash criterion is complete only for q > 2 (got q = {q_param}); "
                        "for 1 < q <= 2 no criterion is available")
    return (q_param - 2.0) / (q_param - 1.0)


# --------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class ClassificationReport:
    spec: ChainSpec
    q_param: float
    horizon: int
    verdicts: dict
    diagnostics: tuple[str, ...] = ()
    fubini_defect: Optional[float] = None
    delta_defect: Optional[float] = None

    def __getitem__(self, row: str) -> Verdict:
        return self.verdicts[row]

    def labelled(self) -> list[tuple[str, Verdict]]:
        """The ten labelled properties (two rows carry two names)."""
        return [(label, self.verdicts[row]) for label, row in LABELS]

    def statuses(self) -> dict:
        return {row: self.verdicts[row].status for row in ROWS}


def _consistency(verdicts: dict) -> tuple[dict, list[str]]:
    """Downgrade the weaker side of any decided contradiction."""
    pairs = [(ROWS[j], ROWS[i]) for j in range(len(ROWS)) for i in range(j)
             if (ROWS[i], ROWS[j]) not in _INCOMPARABLE]
    pairs += list(_DIAGRAM)
    out = dict(verdicts)
    diags = []
    for strong, weak in pairs:
        s, w = out[strong], out[weak]
        if s.holds and w.fails:
            diags.append(f"{strong} holds but {weak} fails; {weak} downgraded")
            out[weak] = replace(w, status=INCONCLUSIVE, note=(w.note + "; contradiction").lstrip("; "))
    return out, diags


def classify_chain(spec: ChainSpec, q_param: float = DEFAULT_Q,
                   horizon: int = DEFAULT_HORIZON) -> ClassificationReport:
    """All rows on the probe ``0..horizon``, with the consistency checks run."""
    _nash_exponent(q_param)
    D = _data(spec, horizon)
    star = _uniqueness(D)
    D = replace(D, star=star)
    expo, ddef = _exp_ergodicity(D)
    strong, fub = _strong(D)
    rows = {
        "uniqueness": star,
        "recurrence": _recurrence(D),
        "ergodicity": _ergodicity(D),
        "exp_ergodicity": expo,
        "discrete_spectrum": _discrete_spectrum(D, expo),
        "log_sobolev": _log_sobolev(D),
        "strong_ergodicity": strong,
        "nash": _nash(D, q_param),
    }
    diags = []
    if fub is not None and fub > FUBINI_RTOL:
        raise InvariantViolation(f"Fubini identity defect {fub:.3g} exceeds {FUBINI_RTOL:g}")
    if ddef is not None and ddef > DELTA_RTOL:
        raise InvariantViolation(f"delta enclosures disagree (relative gap {ddef:.3g})")
    rows, more = _consistency(rows)
    diags += more
    return ClassificationReport(spec, float(q_param), D.H, rows, tuple(diags), fub, ddef)


# --------------------------------------------------------------------------
# single-row entry points


def _single(spec: ChainSpec, horizon: int, fn, *args):
    D = _data(spec, horizon)
    D = replace(D, star=_uniqueness(D))
    return fn(D, *args)


def criterion_uniqueness(spec: ChainSpec, horizon: int = DEFAULT_HORIZON) -> Verdict:
    return _uniqueness(_data(spec, horizon))


def criterion_recurrence(spec: ChainSpec, horizon: int = DEFAULT_HORIZON) -> Verdict:
    return _recurrence(_data(spec, horizon))


def criterion_ergodicity(spec: ChainSpec, horizon: int = DEFAULT_HORIZON) -> Verdict:
    return _single(spec, horizon, _ergodicity)


def criterion_exp_ergodicity(spec: ChainSpec, horizon: int = DEFAULT_HORIZON) -> Verdict:
    return _single(spec, horizon, _exp_ergodicity)[0]


def criterion_discrete_spectrum(spec: ChainSpec, horizon: int = DEFAULT_HORIZON) -> Verdict:
    def run(D):
        return _discrete_spectrum(D, _exp_ergodicity(D)[0])
    return _single(spec, horizon, run)


def criterion_log_sobolev(spec: ChainSpec, horizon: int = DEFAULT_HORIZON) -> Verdict:
    return _single(spec, horizon, _log_sobolev)


def criterion_strong_ergodicity(spec: ChainSpec, horizon: int = DEFAULT_HORIZON) -> Verdict:
    return _single(spec, horizon, _strong)[0]


def criterion_nash(spec: ChainSpec, q_param: float = DEFAULT_Q,
                   horizon: int = DEFAULT_HORIZON) -> Verdict:
    _nash_exponent(q_param)
    return _single(spec, horizon, _nash, q_param)
