"""Birth-death chains: rate specifications, mu-weights, truncations.

States are ``0..n`` (or ``0, 1, 2, ...``).  Births ``b_i`` move ``i -> i+1``
and deaths ``a_i`` move ``i -> i-1``.  The reversibility weights are

    mu_0 = 1,   mu_i = mu_{i-1} * b_{i-1} / a_i,

kept in log-space throughout so that factorial-type families do not
overflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import SpecError
from .rateexpr import Leading, RateExpr, parse_rate_expr
from .series import CONVERGES, DIVERGES, INCONCLUSIVE, SeriesVerdict, sum_tail, sum_verdict

__all__ = [
    "ChainSpec",
    "MuWeights",
    "FiniteChain",
    "NonExplosion",
    "parse_rate_expr",
    "parse_chain",
    "load_chain",
    "mu_weights",
    "check_nonexplosion",
    "truncate",
    "HOLDS",
    "FAILS",
    "INCONCLUSIVE",
]

HOLDS = "holds"
FAILS = "fails"

Rates = Union[RateExpr, np.ndarray]


def _as_rates(x, name: str) -> Rates:
    if isinstance(x, RateExpr):
        return x
    if isinstance(x, str):
        return parse_rate_expr(x)
    if isinstance(x, bool):
        raise SpecError(f"{name}: expected expression, number or array")
    if isinstance(x, (int, float)):
        if not math.isfinite(x) or x <= 0:
            raise SpecError(f"{name}: rate must be a finite positive number, got {x!r}")
        return parse_rate_expr(repr(float(x)))
    try:
        arr = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"{name}: expected expression, number or array") from exc
    if arr.ndim != 1 or len(arr) == 0:
        raise SpecError(f"{name}: rate array must be a non-empty flat list")
    if not np.all(np.isfinite(arr)):
        raise SpecError(f"{name}: rate array has non-finite entries")
    if np.any(arr <= 0):
        k = int(np.argmax(arr <= 0))
        raise SpecError(f"{name}: rate array entry {k} is not positive ({arr[k]!r})")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ChainSpec:
    """Birth and death rates plus the state bound (``None`` = infinite).

    ``birth`` holds ``b_0, b_1, ...`` and ``death`` holds ``a_1, a_2, ...``;
    an expression is evaluated at the state index itself (``a_i = expr(i)``),
    an array is read from position 0 (``death[0] = a_1``).
    """

    birth: Rates
    death: Rates
    states: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "birth", _as_rates(self.birth, "birth"))
        object.__setattr__(self, "death", _as_rates(self.death, "death"))
        n = self.states
        if n is not None:
            if isinstance(n, bool) or int(n) != n or n < 1:
                raise SpecError(f"states must be a positive integer or infinite, got {n!r}")
            object.__setattr__(self, "states", int(n))
        for name, r in (("birth", self.birth), ("death", self.death)):
            if isinstance(r, np.ndarray):
                if n is None:
                    raise SpecError(f"{name}: rate arrays need a finite state bound")
                if len(r) != n:
                    raise SpecError(f"{name}: array has {len(r)} entries, expected {n}")

    @property
    def finite(self) -> bool:
        return self.states is not None

    def _check_range(self, N: int) -> None:
        if N < 0:
            raise SpecError(f"index bound must be nonnegative, got {N}")
        if self.states is not None and N > self.states:
            raise SpecError(f"N={N} exceeds the state bound {self.states}")

    def log_birth(self, N: int) -> np.ndarray:
        """``log b_0 .. log b_{N-1}``."""
        self._check_range(N)
        return _log_rates(self.birth, np.arange(N), 0, "birth")

    def log_death(self, N: int) -> np.ndarray:
        """``log a_1 .. log a_N``."""
        self._check_range(N)
        return _log_rates(self.death, np.arange(1, N + 1), 1, "death")

    def birth_rates(self, N: int) -> np.ndarray:
        return np.exp(self.log_birth(N))

    def death_rates(self, N: int) -> np.ndarray:
        return np.exp(self.log_death(N))

    def scaled(self, c: float) -> "ChainSpec":
        """Same chain with every rate multiplied by ``c > 0``."""
        if not (c > 0 and math.isfinite(c)):
            raise SpecError("scale factor must be finite and positive")

        def mul(r):
            if isinstance(r, np.ndarray):
                return r * c
            return parse_rate_expr(f"{c!r}*({r})")

        return ChainSpec(mul(self.birth), mul(self.death), self.states)

    def leading_rates(self) -> Optional[tuple[Leading, Leading]]:
        """Leading asymptotic terms of ``(b_i, a_i)`` for infinite expression chains."""
        if self.finite or not isinstance(self.birth, RateExpr) or not isinstance(self.death, RateExpr):
            return None
        lb, la = self.birth.leading(), self.death.leading()
        if lb is None or la is None or lb.coef <= 0 or la.coef <= 0:
            return None
        return lb, la

    def to_json(self) -> dict:
        def enc(r):
            return [float(v) for v in r] if isinstance(r, np.ndarray) else str(r)

        return {"birth": enc(self.birth), "death": enc(self.death),
                "states": "inf" if self.states is None else self.states}

    def __repr__(self) -> str:
        return f"ChainSpec({self.to_json()!r})"


def _log_rates(r: Rates, idx: np.ndarray, first: int, name: str) -> np.ndarray:
    if len(idx) == 0:
        return np.zeros(0)
    if isinstance(r, np.ndarray):
        return np.log(r[idx - first])
    sign, logv = r.log_eval(idx)
    bad = (sign <= 0) | np.isnan(logv) | np.isinf(logv)
    if bad.any():
        k = int(idx[int(np.argmax(bad))])
        raise SpecError(f"{name} rate {r} is not finite and positive at i={k}")
    return logv


# --------------------------------------------------------------------------
# JSON chain files


def _reject_constant(name: str):
    raise SpecError(f"non-finite literal {name} is not allowed in chain files")


def parse_chain(text: str) -> ChainSpec:
    """Parse a chain document ``{"birth": ..., "death": ..., "states": n | "inf"}``."""
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON at line {exc.lineno} column {exc.colno} "
                        f"(char {exc.pos}): {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise SpecError("chain file must be a JSON object")
    missing = {"birth", "death", "states"} - doc.keys()
    if missing:
        raise SpecError(f"chain file is missing {sorted(missing)}")
    extra = doc.keys() - {"birth", "death", "states"}
    if extra:
        raise SpecError(f"unknown keys in chain file: {sorted(extra)}")
    states = doc["states"]
    if states == "inf":
        states = None
    elif isinstance(states, bool) or not isinstance(states, int):
        raise SpecError(f'"states" must be an integer or "inf", got {states!r}')
    return ChainSpec(doc["birth"], doc["death"], states)


def load_chain(path: Union[str, Path]) -> ChainSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read chain file {path}: {exc.strerror}") from exc
    return parse_chain(text)


# --------------------------------------------------------------------------
# mu-weights


def _log_cumsum(logx: np.ndarray) -> np.ndarray:
    return np.logaddexp.accumulate(logx) if len(logx) else logx


def _log_revcumsum(logx: np.ndarray) -> np.ndarray:
    return _log_cumsum(logx[::-1])[::-1]


@dataclass(frozen=True, eq=False)
class MuWeights:
    """``mu_0 .. mu_N`` with partial sums and tail enclosures.

    ``total`` is the verdict on ``mu = sum_i mu_i`` (exact for finite
    chains).  ``beyond`` bounds ``sum_{j > N} mu_j`` from above: 0 for a
    finite chain truncated at its bound, ``inf`` when the series diverges
    and ``nan`` when it could not be certified.
    """

    log_values: np.ndarray
    log_partial: np.ndarray = field(repr=False)
    log_tail_probe: np.ndarray = field(repr=False)
    total: SeriesVerdict
    beyond: float

    @property
    def N(self) -> int:
        return len(self.log_values) - 1

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    @property
    def partial(self) -> np.ndarray:
        """``mu[0, k]`` for ``k = 0..N``."""
        return np.exp(self.log_partial)

    @property
    def tail_certified(self) -> bool:
        return math.isfinite(self.beyond)

    def log_tail(self) -> tuple[np.ndarray, np.ndarray]:
        """Enclosure ``(lo, hi)`` of ``log mu[k, oo)`` for ``k = 0..N``.

        ``hi`` is ``+inf`` everywhere when the tail is not certified finite.
        """
        lo = self.log_tail_probe
        if not self.tail_certified:
            return lo, np.full_like(lo, math.inf)
        if self.beyond == 0.0:
            return lo, lo
        return lo, np.logaddexp(lo, math.log(self.beyond))

    def tail(self) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.log_tail()
        return np.exp(lo), np.exp(hi)

    def mass(self) -> tuple[float, float]:
        """Enclosure of ``mu[0, oo)``, widened by the summation rounding."""
        s = float(np.exp(self.log_partial[-1]))
        slack = 4.0 * (self.N + 2) * np.finfo(float).eps * s
        lo = s - slack
        if not self.tail_certified:
            return lo, math.inf
        return lo, s + slack + self.beyond


def mu_weights(spec: ChainSpec, N: int) -> MuWeights:
    """Weights ``mu_0..mu_N`` by the ratio recurrence (in log-space)."""
    spec._check_range(N)
    lb = spec.log_birth(N)
    la = spec.log_death(N)
    dlog = lb - la
    logmu = np.concatenate(([0.0], np.cumsum(dlog)))
    logmu.setflags(write=False)
    part = _log_cumsum(logmu)
    tailp = _log_revcumsum(logmu)
    if spec.finite and N == spec.states:
        lo = float(np.exp(part[-1]))
        total = SeriesVerdict(CONVERGES, lo, lo, N, "closed-family")
        beyond = 0.0
    else:
        total = _mu_total(spec, logmu, dlog)
        st, tail = sum_tail(logmu, dlog=dlog)
        if total.converges and st == CONVERGES:
            beyond = tail
        elif total.converges:
            beyond = max(0.0, total.upper - float(np.exp(part[-1])))
        elif total.diverges:
            beyond = math.inf
        else:
            beyond = math.nan
    return MuWeights(logmu, part, tailp, total, beyond)


def ratio_limit_class(num: Leading, den: Leading) -> Optional[int]:
    """Sign of ``log(num_i/den_i)`` in the limit: -1 (ratio < 1), +1 (> 1), 0 (-> 1)."""
    if not math.isclose(num.base, den.base, rel_tol=1e-15):
        return -1 if num.base < den.base else 1
    dp = num.power - den.power
    if abs(dp) > 1e-15:
        return -1 if dp < 0 else 1
    if math.isclose(num.coef, den.coef, rel_tol=1e-15):
        return 0
    return -1 if num.coef < den.coef else 1


def _mu_total(spec: ChainSpec, logmu: np.ndarray, dlog: np.ndarray) -> SeriesVerdict:
    v = sum_verdict(logmu, dlog=dlog)
    lead = spec.leading_rates()
    if lead is None:
        return v
    # mu_{i+1}/mu_i = b_i/a_{i+1}: the ratio test decides unless the limit is 1
    cls = ratio_limit_class(*lead)
    if cls is None or cls == 0:
        return v
    if cls > 0:
        return SeriesVerdict(DIVERGES, v.lower, math.inf, v.horizon, "closed-family",
                             witness=v.lower)
    return SeriesVerdict(CONVERGES, v.lower, v.upper, v.horizon, "closed-family")


# --------------------------------------------------------------------------
# non-explosion


@dataclass(frozen=True)
class NonExplosion:
    verdict: str
    series: SeriesVerdict
    mass: SeriesVerdict

    @property
    def mass_finite(self) -> Optional[bool]:
        return None if not self.mass.decided else self.mass.converges


def check_nonexplosion(spec: ChainSpec, horizon: int = 100_000) -> NonExplosion:
    """Non-explosion test ``sum_k (b_k mu_k)^{-1} mu[0,k] = oo`` plus ``mu < oo``."""
    if spec.finite:
        w = mu_weights(spec, spec.states)
        exact = SeriesVerdict(DIVERGES, math.inf, math.inf, spec.states, "closed-family")
        return NonExplosion(HOLDS, exact, w.total)
    w = mu_weights(spec, horizon)
    lb = spec.log_birth(horizon + 1)
    logt = -lb - w.log_values + w.log_partial
    s = sum_verdict(logt)
    verdict = HOLDS if s.diverges else FAILS if s.converges else INCONCLUSIVE
    return NonExplosion(verdict, s, w.total)


# --------------------------------------------------------------------------
# finite chains


@dataclass(frozen=True, eq=False)
class FiniteChain:
    """Chain on ``{0..N}`` with reflecting top (``b_N = 0``).

    ``birth`` is ``b_0..b_{N-1}``, ``death`` is ``a_1..a_N``.
    """

    birth: np.ndarray
    death: np.ndarray
    log_mu: np.ndarray = field(repr=False)
    pi: np.ndarray = field(repr=False)

    @classmethod
    def from_rates(cls, birth: Sequence[float], death: Sequence[float]) -> "FiniteChain":
        b = _as_rates(list(birth), "birth")
        a = _as_rates(list(death), "death")
        if len(a) != len(b):
            raise SpecError(f"need as many death rates as birth rates ({len(a)} vs {len(b)})")
        return truncate(ChainSpec(b, a, len(b)), len(b))

    @property
    def N(self) -> int:
        return len(self.birth)

    @property
    def size(self) -> int:
        return len(self.birth) + 1

    @property
    def b_full(self) -> np.ndarray:
        """``b_0..b_N`` with the reflecting ``b_N = 0``."""
        return np.append(self.birth, 0.0)

    @property
    def a_full(self) -> np.ndarray:
        """``a_0..a_N`` with ``a_0 = 0``."""
        return np.concatenate(([0.0], self.death))

    @property
    def mu(self) -> np.ndarray:
        return np.exp(self.log_mu)

    def generator(self) -> np.ndarray:
        """Dense ``Q`` (for small chains and tests)."""
        n = self.size
        Q = np.zeros((n, n))
        i = np.arange(self.N)
        Q[i, i + 1] = self.birth
        Q[i + 1, i] = self.death
        Q[np.arange(n), np.arange(n)] = -(self.a_full + self.b_full)
        return Q

    def balance_defect(self) -> float:
        """``max_i |pi_i b_i - pi_{i+1} a_{i+1}|`` relative to the largest flux."""
        up = self.pi[:-1] * self.birth
        down = self.pi[1:] * self.death
        scale = float(np.max(up)) if len(up) else 1.0
        return float(np.max(np.abs(up - down))) / scale if len(up) else 0.0


def truncate(spec: ChainSpec, N: int) -> FiniteChain:
    """Reflecting truncation to ``{0..N}``."""
    if N < 1:
        raise SpecError(f"truncation needs N >= 1, got {N}")
    spec._check_range(N)
    b = spec.birth_rates(N)
    a = spec.death_rates(N)
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(a))):
        raise SpecError("rates overflow double precision on this truncation")
    logmu = np.concatenate(([0.0], np.cumsum(np.log(b) - np.log(a))))
    logpi = logmu - float(_log_cumsum(logmu)[-1])
    pi = np.exp(logpi)
    for x in (b, a, logmu, pi):
        x.setflags(write=False)
    return FiniteChain(b, a, logmu, pi)
