"""Lower bounds on the first eigenvalue of a compact Riemannian manifold.

A manifold enters only through its dimension ``d``, diameter ``D`` and a
lower bound ``K`` on the Ricci curvature.  Besides the eight classical
closed forms (labelled ``"2.1"`` .. ``"2.8"``) this module evaluates the
variational quantity

    xi(f) = inf_{0<r<D} 4 f(r) / h(r),
    h(r)  = int_0^r C(s)^{-1} int_s^D C(u) f(u) du ds,

which is a lower bound for every ``f > 0`` on ``(0, D)``, with weight
``C(r) = cosh^{d-1}((r/2) sqrt(-K/(d-1)))`` (``cos`` for ``K > 0``), and the
closed forms derived from it (``"2.10"`` .. ``"2.13"``).

Quadrature uses composite Gauss-Legendre panels graded geometrically
toward both endpoints.  Every ``xi`` value is computed at two orders and
reduced by their difference, so it stays a lower bound for the given
``f`` up to the sampling of the infimum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import SpecError

__all__ = [
    "GeometrySpec",
    "BoundReport",
    "XiResult",
    "C_function",
    "classical_bounds",
    "corollary_bounds",
    "xi1_from_test",
    "xi1_representative",
    "xi1_family",
    "delta_geometric",
    "dominance_audit",
    "AuditViolation",
    "default_grid",
    "FORMULAS",
]

FORMULAS = ("2.1", "2.2", "2.3", "2.4", "2.5", "2.6", "2.7", "2.8",
            "2.10", "2.11", "2.12", "2.13lo", "2.13hi")


@dataclass(frozen=True)
class GeometrySpec:
    d: float
    D: float
    K: float

    def __post_init__(self):
        for name in ("d", "D", "K"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise SpecError(f"{name} must be a finite number, got {v!r}")
        if self.d < 1:
            raise SpecError(f"dimension must be at least 1, got {self.d}")
        if self.D <= 0:
            raise SpecError(f"diameter must be positive, got {self.D}")

    @property
    def alpha(self) -> float:
        return self.D * math.sqrt(abs(self.K) * (self.d - 1)) / 2

    @property
    def alpha_prime(self) -> float:
        return self.D * math.sqrt(abs(self.K) * max(self.d - 1, 2)) / 2

    @property
    def gamma(self) -> float:
        """``(1/2) sqrt(|K|/(d-1))``, the frequency inside ``C``."""
        if self.d <= 1:
            raise SpecError("the weight C needs d > 1")
        return 0.5 * math.sqrt(abs(self.K) / (self.d - 1))

    @property
    def weight_defined(self) -> bool:
        """True when ``C`` stays nonnegative on ``[0, D]``."""
        return self.d > 1 and (self.K <= 0 or self.gamma * self.D <= math.pi / 2 * (1 + 1e-15))


def C_function(spec: GeometrySpec, r):
    """The weight ``C(r)``; ``cos`` form for ``K > 0``."""
    if spec.d <= 1:
        raise SpecError("C(r) needs d > 1")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > spec.D * (1 + 1e-15)):
        raise SpecError("C(r) is defined for r in [0, D]")
    g = spec.gamma
    if spec.K > 0:
        if g * spec.D > math.pi / 2 * (1 + 1e-15):
            raise SpecError("cosine in C(r) crosses zero inside [0, D] (K too large for D)")
        base = np.maximum(np.cos(g * r), 0.0)
    else:
        base = np.cosh(g * r)
    out = base ** (spec.d - 1)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# classical bounds


@dataclass(frozen=True)
class BoundReport:
    """Per-formula values; ``None`` marks a formula whose side conditions fail."""

    spec: GeometrySpec
    values: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    @property
    def applicable(self) -> dict:
        return {k: v for k, v in self.values.items() if v is not None}

    @property
    def best(self) -> Optional[float]:
        lows = [v for k, v in self.applicable.items() if not k.endswith("hi")]
        return max(lows) if lows else None

    def get(self, key: str) -> Optional[float]:
        return self.values.get(key)


def _int_cos_power(p: float, upper: float) -> float:
    val, _ = quad(lambda t: math.cos(t) ** p, 0.0, upper, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def classical_bounds(spec: GeometrySpec) -> BoundReport:
    d, D, K = spec.d, spec.D, spec.K
    pi2 = math.pi ** 2
    v: dict = {}
    v["2.1"] = d / (d - 1) * K if (K >= 0 and d > 1) else None
    if d > 1 and K > 0 and math.isclose(K, d - 1, rel_tol=1e-12) and D <= math.pi * (1 + 1e-15):
        ratio = _int_cos_power(d - 1, math.pi / 2) / _int_cos_power(d - 1, min(D, math.pi) / 2)
        v["2.2"] = d * ratio ** (2.0 / d)
    else:
        v["2.2"] = None
    v["2.3"] = pi2 / (2 * D * D) if K >= 0 else None
    v["2.4"] = pi2 / (D * D) if K >= 0 else None
    if K <= 0 and d > 1:
        v["2.5"] = 1.0 / (D * D * (d - 1) * math.exp(1 + math.sqrt(1 + 16 * spec.alpha ** 2)))
    else:
        v["2.5"] = None
    v["2.6"] = pi2 / (D * D) + K if K <= 0 else None
    v["2.7"] = pi2 / (D * D) * math.exp(-spec.alpha) if (K <= 0 and d >= 5) else None
    v["2.8"] = (pi2 / (2 * D * D) * math.exp(-spec.alpha_prime)
                if (K <= 0 and 2 <= d <= 4) else None)
    return BoundReport(spec, v)


# --------------------------------------------------------------------------
# quadrature engine


def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _breakpoints(D: float, panels: int = 256, eps: float = 1e-9, stretch: float = 0.5) -> np.ndarray:
    """Panel ends on ``[0, D]``: cosine-stretched bulk plus geometric end grading."""
    t = np.linspace(0.0, 1.0, panels + 1)
    bulk = 0.5 * D * (1 - np.cos(math.pi * t))
    h0 = bulk[1]
    k = max(0, int(math.ceil(math.log2(h0 / (eps * D)))))
    near = h0 * stretch ** np.arange(1, k + 1)
    pts = np.concatenate(([0.0], near[::-1], bulk[1:-1], D - near, [D]))
    return np.unique(pts)


@dataclass(frozen=True, eq=False)
class _Profile:
    """``Phi``, ``A = int_0^r C f Phi`` and ``B = int_r^D C f`` at the panel ends."""

    x: np.ndarray
    phi: np.ndarray
    A: np.ndarray
    B: np.ndarray
    f: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.A + self.phi * self.B


def _profile(C: Callable, f: Optional[Callable], x: np.ndarray, n: int,
             f_of_phi: Optional[Callable] = None) -> _Profile:
    """Cumulative integrals on panels ``x`` with ``n``-point Gauss-Legendre.

    ``f_of_phi`` lets the test function depend on ``Phi`` itself (used for
    the representative function ``sqrt(Phi)``).
    """
    u, wts = _gl(n)
    a, b = x[:-1], x[1:]
    h = (b - a)[:, None]
    nodes = a[:, None] + h * u[None, :]  # (M, n)
    Cn = C(nodes)
    with np.errstate(divide="ignore"):
        icn = 1.0 / Cn
    # Phi at panel ends
    phi_panel = np.sum(icn * wts, axis=1) * h[:, 0]
    phi_x = np.concatenate(([0.0], np.cumsum(phi_panel)))
    # Phi at the nodes: partial integrals over [a, node] with the same rule
    sub = a[:, None, None] + (h * u[None, :])[:, :, None] * u[None, None, :]
    isub = 1.0 / C(sub)
    phi_nodes = phi_x[:-1, None] + np.sum(isub * wts[None, None, :], axis=2) * h * u[None, :]
    if f_of_phi is not None:
        fn = f_of_phi(phi_nodes)
        fx = f_of_phi(phi_x)
    else:
        fn = f(nodes)
        fx = f(x)
    cf = Cn * fn
    B_panel = np.sum(cf * wts, axis=1) * h[:, 0]
    B_x = np.concatenate((np.cumsum(B_panel[::-1])[::-1], [0.0]))
    A_panel = np.sum(cf * phi_nodes * wts, axis=1) * h[:, 0]
    A_x = np.concatenate(([0.0], np.cumsum(A_panel)))
    return _Profile(x, phi_x, A_x, B_x, np.asarray(fx, dtype=float))


@dataclass(frozen=True)
class XiResult:
    """``xi(f)``: the certified value, the raw minimum and where it sits."""

    value: float
    raw: float
    argmin: float
    error: float


def _xi_from_profiles(p_lo: _Profile, p_hi: _Profile, D: float, eps: float) -> XiResult:
    x = p_hi.x
    inner = (x > eps * D) & (x < D * (1 - eps))
    h_hi, h_lo = p_hi.h, p_lo.h
    err = np.abs(h_hi - h_lo)
    f = p_hi.f
    if np.any(f[inner] <= 0):
        raise SpecError("test function must be positive on (0, D)")
    # relative floor keeps the bound honest when both orders agree to rounding
    herr = err + 64 * np.finfo(float).eps * np.abs(h_hi)
    ratio = 4 * f[inner] / h_hi[inner]
    safe = 4 * f[inner] / (h_hi[inner] + herr[inner])
    k = int(np.argmin(safe))
    return XiResult(float(safe[k]), float(np.min(ratio)), float(x[inner][k]),
                    float(np.max(herr[inner] / h_hi[inner])))


_N_LO, _N_HI = 12, 20


def _xi(spec: GeometrySpec, f: Optional[Callable], f_of_phi: Optional[Callable] = None,
        *, eps: float = 1e-9, refine: int = 4) -> XiResult:
    if not spec.weight_defined:
        raise SpecError("xi needs a weight C that stays positive on (0, D)")
    C = lambda r: C_function(spec, np.clip(r, 0.0, spec.D))  # noqa: E731
    x = _breakpoints(spec.D, eps=eps)
    best = None
    for _ in range(refine + 1):
        lo = _profile(C, f, x, _N_LO, f_of_phi)
        hi = _profile(C, f, x, _N_HI, f_of_phi)
        res = _xi_from_profiles(lo, hi, spec.D, eps)
        best = res
        # refine panels around the minimiser (golden-section style zoom)
        k = int(np.searchsorted(x, res.argmin))
        if k <= 1 or k >= len(x) - 2:
            break
        zoom = np.linspace(x[k - 1], x[k + 1], 65)
        x = np.unique(np.concatenate((x, zoom)))
    return best


def xi1_from_test(spec: GeometrySpec, f: Callable, **kw) -> XiResult:
    """``xi(f)`` for a vectorised ``f`` positive on ``(0, D)``."""
    return _xi(spec, f, **kw)


def xi1_representative(spec: GeometrySpec, **kw) -> XiResult:
    """``xi`` at ``f = sqrt(Phi)``, ``Phi(r) = int_0^r C^{-1}``."""
    return _xi(spec, None, f_of_phi=lambda p: np.sqrt(np.maximum(p, 0.0)), **kw)


def family_function(spec: GeometrySpec, sign: int = -1) -> Callable:
    """Trial functions behind the corollary formulas.

    ``K > 0``: ``sin(gamma r)`` with ``gamma = (1/2) sqrt(K/(d-1))``.
    ``K <= 0``: ``cosh^{sign (d-1)}(gamma r) sin(beta r)``, ``beta = pi/(2D)``.
    """
    D = spec.D
    if spec.K > 0:
        g = spec.gamma
        if g * D > math.pi / 2 * (1 + 1e-15):
            raise SpecError("sin(gamma r) changes sign on (0, D)")
        return lambda r: np.sin(g * np.asarray(r))
    g = spec.gamma if spec.d > 1 else 0.0
    beta = math.pi / (2 * D)
    p = sign * (spec.d - 1)
    return lambda r: np.cosh(g * np.asarray(r)) ** p * np.sin(beta * np.asarray(r))


def xi1_family(spec: GeometrySpec, sign: int = -1, **kw) -> XiResult:
    return _xi(spec, family_function(spec, sign), **kw)


def _quad_max(p: np.ndarray, slope: np.ndarray, M: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``max_{0<=t<=h} p + slope t + M t^2 / 2`` elementwise (``M`` may be +inf)."""
    with np.errstate(invalid="ignore", over="ignore"):
        ends = np.maximum(p, p + slope * h + 0.5 * M * h * h)
        t = np.where(M < 0, np.clip(-slope / np.where(M < 0, M, -1.0), 0.0, h), 0.0)
        vertex = p + slope * t + 0.5 * M * t * t
    out = np.maximum(ends, vertex)
    return np.where(np.isnan(out), np.inf, out)


def _dC_bound(spec: GeometrySpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Upper bound of ``-C'`` on ``[a, b]`` (zero unless ``K > 0``)."""
    if spec.K <= 0:
        return np.zeros_like(a)
    g, p = spec.gamma, spec.d - 1
    # C' = -p g cos^{p-1}(g r) sin(g r); cos falls and sin rises on [0, pi/2]
    ca, cb = np.cos(g * a), np.maximum(np.cos(g * b), 0.0)
    with np.errstate(divide="ignore"):
        cmax = ca ** (p - 1) if p >= 1 else cb ** (p - 1)
    return p * g * cmax * np.sin(np.minimum(g * b, math.pi / 2))


def delta_geometric(spec: GeometrySpec, eps: float = 1e-9, rtol: float = 1e-13) -> tuple[float, float]:
    """Enclosure of ``delta = sup_r Phi(r) int_r^D C``.

    With ``P = Phi B`` (``B = int_r^D C``), ``P' = B/C - Phi C`` and
    ``P'' = -2 - C' (B/C^2 + Phi)``.  Each panel gets a second-order upper
    bound from both ends (or the monotone bound ``Phi(b) B(a)``), and panels
    whose bound exceeds the best node value are split until the two agree.
    """
    if not spec.weight_defined:
        raise SpecError("delta needs a weight C that stays positive on (0, D)")
    C = lambda r: C_function(spec, np.clip(r, 0.0, spec.D))  # noqa: E731
    one = lambda r: np.ones_like(np.asarray(r, dtype=float))  # noqa: E731
    x = _breakpoints(spec.D, eps=eps)
    tiny = 64 * np.finfo(float).eps
    for _ in range(60):
        lo, hi = _profile(C, one, x, _N_LO), _profile(C, one, x, _N_HI)
        ephi = np.abs(hi.phi - lo.phi) + tiny * np.abs(hi.phi)
        eB = np.abs(hi.B - lo.B) + tiny * np.abs(hi.B)
        phi_dn, phi_up = np.maximum(hi.phi - ephi, 0.0), hi.phi + ephi
        B_dn, B_up = np.maximum(hi.B - eB, 0.0), hi.B + eB
        L = float(np.max(phi_dn * B_dn))
        Cx = C(x)
        a, b = x[:-1], x[1:]
        h = b - a
        crude = phi_up[1:] * B_up[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            Cmin = np.minimum(Cx[:-1], Cx[1:])
            M = -2.0 + _dC_bound(spec, a, b) * (B_up[:-1] / Cmin ** 2 + phi_up[1:])
            M = np.where(np.isnan(M), np.inf, M)
            left = _quad_max(phi_up[:-1] * B_up[:-1], B_up[:-1] / Cx[:-1] - phi_dn[:-1] * Cx[:-1], M, h)
            right = _quad_max(phi_up[1:] * B_up[1:], -(B_dn[1:] / Cx[1:] - phi_up[1:] * Cx[1:]), M, h)
        U_k = np.minimum(crude, np.minimum(left, right))
        U = float(np.max(U_k))
        if U - L <= rtol * U:
            break
        split = np.flatnonzero(U_k > L + 0.5 * rtol * U)
        fresh = (a[split, None] + h[split, None] * np.arange(1, 8)[None, :] / 8).ravel()
        x = np.unique(np.concatenate((x, fresh)))
    return L, max(U, L)


# --------------------------------------------------------------------------
# corollaries


def corollary_bounds(spec: GeometrySpec, *, with_delta: bool = True) -> BoundReport:
    """Closed forms ``2.10``-``2.12`` and the ``2.13`` bracket ``[1/delta, 4/delta]``."""
    d, D, K = spec.d, spec.D, spec.K
    pi2 = math.pi ** 2
    v: dict = {}
    flags: dict = {}
    if d > 1 and K > 0:
        arg = D / 2 * math.sqrt(K / (d - 1))
        if arg <= math.pi / 2 * (1 + 1e-15):
            c = max(math.cos(min(arg, math.pi / 2)), 0.0)
            v["2.10"] = d * K / (d - 1) / (1 - c ** d)
        else:
            v["2.10"] = None
            flags["2.10"] = "cosine argument beyond pi/2"
    else:
        v["2.10"] = None
        if K == 0 and d > 1:
            flags["2.10"] = "0/0 at K=0 (removable limit 8/D^2 not substituted)"
    if d > 1 and K <= 0:
        v["2.11"] = (pi2 / (D * D) * math.sqrt(1 - 2 * D * D * K / pi2 ** 2)
                     * math.cosh(D / 2 * math.sqrt(-K / (d - 1))) ** (1 - d))
    else:
        v["2.11"] = None
    v["2.12"] = pi2 / (D * D) + K / 2
    if with_delta and spec.weight_defined:
        lo, hi = delta_geometric(spec)
        v["2.13lo"] = 1.0 / hi
        v["2.13hi"] = 4.0 / lo
    else:
        v["2.13lo"] = v["2.13hi"] = None
    return BoundReport(spec, v, flags)


def all_bounds(spec: GeometrySpec, *, with_delta: bool = True) -> BoundReport:
    a = classical_bounds(spec)
    b = corollary_bounds(spec, with_delta=with_delta)
    return BoundReport(spec, {**a.values, **b.values}, {**a.flags, **b.flags})


# --------------------------------------------------------------------------
# dominance audit


@dataclass(frozen=True)
class AuditViolation:
    spec: GeometrySpec
    better: str
    worse: str
    better_value: float
    worse_value: float

    def __str__(self) -> str:
        s = self.spec
        return (f"d={s.d} D={s.D} K={s.K}: ({self.better})={self.better_value!r} < "
                f"({self.worse})={self.worse_value!r}")


_CLAIMS = (("2.10", ("2.1", "2.2")), ("2.11", ("2.7", "2.8")), ("2.12", ("2.3", "2.6")))


def default_grid() -> list[GeometrySpec]:
    return [GeometrySpec(d, D, K) for d in (2, 3, 5, 8) for D in (0.5, 1.0, math.pi)
            for K in (-2.0, -0.5, 0.0, 0.5, 2.0)]


def _audit_one(spec: GeometrySpec, rtol: float) -> tuple[BoundReport, list[AuditViolation]]:
    rep = all_bounds(spec, with_delta=False)
    out = []
    for better, worse in _CLAIMS:
        bv = rep.get(better)
        if bv is None:
            continue
        for w in worse:
            wv = rep.get(w)
            if wv is not None and bv < wv - rtol * max(1.0, abs(wv)):
                out.append(AuditViolation(spec, better, w, bv, wv))
    return rep, out


def dominance_audit(grid: Iterable[GeometrySpec], *, rtol: float = 1e-12,
                    threads: Optional[int] = None) -> tuple[list[BoundReport], list[AuditViolation]]:
    """Check the corollaries against the classical bounds on every grid point.

    ``rtol`` absorbs rounding at equality cases such as the unit sphere.
    """
    grid = list(grid)
    with ThreadPoolExecutor(max_workers=threads or 1) as ex:
        results = list(ex.map(lambda s: _audit_one(s, rtol), grid))
    reports = [r for r, _ in results]
    violations = [v for _, vs in results for v in vs]
    return reports, violations
