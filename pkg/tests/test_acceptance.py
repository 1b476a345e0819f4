"""The eleven acceptance criteria, each at its stated tolerance.

Every test records a one-line result through the ``acceptance`` fixture; the
lines are printed in the terminal summary.
"""
import math
import time

import numpy as np

import oracles
from corpus import chains
from ergogap import classify, dualgap, exact, geombounds
from ergogap.bdchain import ChainSpec, FiniteChain, truncate
from ergogap.cheeger import (SymmetricKernel, cheeger_logsobolev_r, cheeger_nash, cheeger_poincare,
                             kernel_from_chain, lawler_sokal_bound)
from ergogap.dualgap import TestFunctionDiscrete as T


def test_01_closed_form_spectra(acceptance):
    rng = np.random.default_rng(1)
    two = rng.uniform(0.1, 10, (1000, 2))
    three = rng.uniform(0.1, 10, (1000, 4))
    worst = 0.0
    t0 = time.perf_counter()
    for b0, a1 in two:
        lam = exact.spectrum(FiniteChain.from_rates([b0], [a1])).values[1]
        worst = max(worst, abs(lam - (a1 + b0)) / max(1.0, a1 + b0))
    for b0, b1, a1, a2 in three:
        ev = exact.spectrum(FiniteChain.from_rates([b0, b1], [a1, a2])).values
        s = a1 + a2 + b0 + b1
        r = math.sqrt((a1 - a2 + b0 - b1) ** 2 + 4 * a1 * b1)
        for got, want in ((ev[1], (s - r) / 2), (ev[2], (s + r) / 2)):
            worst = max(worst, abs(got - want) / max(1.0, want))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1.0
    acceptance(1, ok, f"worst relative error {worst:.2e} over 2000 draws, {elapsed:.2f} s")
    assert ok


def test_02_table_1_1(acceptance):
    t0 = time.perf_counter()
    sizes = (500, 1000, 2000, 4000)
    rows = [(f"b=i+{c}, a=2i", ChainSpec(f"i+{c}", "2*i"), 1.0) for c in (0.5, 1, 2)]
    rows += [("b=i+1, a=2i+3", ChainSpec("i+1", "2*i+3"), 2.0),
             ("b=i+1, a=2i+4+sqrt2", ChainSpec("i+1", "2*i+4+sqrt(2)"), 3.0)]
    at_n = {}
    worst = 0.0
    for name, spec, want in rows:
        lad = exact.gap_ladder(spec, sizes)
        at_n[name] = lad.values[-1]
        worst = max(worst, abs(lad.values[-1] - want))
    row1 = [at_n[r[0]] for r in rows[:3]]
    spread = max(row1) - min(row1)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-2 and spread <= 1e-3 and elapsed < 30
    acceptance(2, ok, f"max |lambda_1(N=4000) - target| {worst:.2e}, c-spread {spread:.2e}, "
                      f"{elapsed:.1f} s")
    assert ok


def _oracle(spec, kind, gap):
    if kind == "geometric":
        return gap, 0.0
    if kind == "finite":
        return oracles.gap_dense(spec.birth, spec.death), 0.0
    lad = exact.gap_ladder(spec, (1000, 2000, 4000))
    return lad.estimate, lad.spread


def test_03_delta_bracket(acceptance):
    bad = []
    for name, spec, kind, gap in chains():
        lam, spread = _oracle(spec, kind, gap)
        tol = 1e-3 * max(1.0, lam) + spread
        br = dualgap.explicit_bounds(spec)
        if not (br.lower <= lam + tol and lam - tol <= br.upper):
            bad.append(f"{name}: [{br.lower}, {br.upper}] vs {lam}")
    acceptance(3, not bad, f"{len(bad)} violations on {len(chains())} chains")
    assert not bad, bad


def _f_of(x):
    return np.concatenate(([0.0], np.cumsum(np.exp(x))))


def _pattern_search(objective, n, sign):
    """Coordinate search on the log-increments of an increasing test function."""
    x = np.zeros(n)
    best = objective(x)
    step = 1.0
    while step >= 1e-9:
        improved = False
        for j in range(n):
            for d in (step, -step):
                y = x.copy()
                y[j] += d
                v = objective(y)
                if sign * (v - best) > 1e-15:
                    x, best, improved = y, v, True
                    break
        if not improved:
            step /= 2
    return best


def test_04_variational_sharpness(acceptance):
    rng = np.random.default_rng(4)
    below = above = 0.0
    invalid = 0
    for _ in range(30):
        n = int(rng.integers(1, 6))
        b, a = oracles.random_rates(rng, n)
        ch = FiniteChain.from_rates(b, a)
        lam = oracles.gap_dense(b, a)
        lo = _pattern_search(lambda x: dualgap.lower_bound_from_test(ch, T.increasing(_f_of(x))), n, 1)
        hi = _pattern_search(
            lambda x: dualgap.upper_bound_from_test(ch, T.with_plateau(_f_of(x), n)), n, -1)
        invalid += lo > lam * (1 + 1e-9) or hi < lam * (1 - 1e-9)
        below, above = max(below, lam - lo), max(above, hi - lam)
    ok = invalid == 0 and below <= 1e-6 and above <= 1e-6
    acceptance(4, ok, f"F'' ascent short by {below:.1e}, F' descent over by {above:.1e}, "
                      f"{invalid} invalid bounds on 30 chains")
    assert ok


def test_05_approximation_procedure(acceptance):
    bad = []
    for name, spec, _, _ in chains():
        seq = dualgap.approx_sequence(spec, 8)
        widths = [br.upper - br.lower for br in seq]
        d = dualgap.delta_constant(spec)
        if any(w1 > w0 for w0, w1 in zip(widths, widths[1:])):
            bad.append(f"{name}: widths {widths}")
        if seq[0].lower < 1 / (4 * d.hi):
            bad.append(f"{name}: first lower {seq[0].lower} < 1/(4 delta) {1 / (4 * d.hi)}")
    acceptance(5, not bad, f"{len(bad)} failures on {len(chains())} chains")
    assert not bad, bad


def test_06_geometry_sharpness(acceptance):
    worst_sphere = worst_circle = 0.0
    for d in range(2, 10):
        rep = geombounds.all_bounds(geombounds.GeometrySpec(d, math.pi, d - 1))
        for k in ("2.1", "2.10"):
            worst_sphere = max(worst_sphere, abs(rep.get(k) - d))
        rep = geombounds.all_bounds(geombounds.GeometrySpec(d, math.pi, 0.0))
        for k in ("2.4", "2.6", "2.12"):
            worst_circle = max(worst_circle, abs(rep.get(k) - 1.0))
    ok = worst_sphere <= 1e-10 and worst_circle <= 1e-12
    acceptance(6, ok, f"sphere error {worst_sphere:.1e}, circle error {worst_circle:.1e}")
    assert ok


def test_07_dominance_audit(acceptance):
    grid = geombounds.default_grid()
    _, viol = geombounds.dominance_audit(grid)
    ok = len(grid) == 60 and not viol
    acceptance(7, ok, f"{len(viol)} violations on {len(grid)} points")
    assert ok, [str(v) for v in viol]


def test_08_xi_bracket(acceptance):
    bad, checked = [], 0
    for s in geombounds.default_grid():
        if not s.weight_defined:
            continue
        lo, hi = geombounds.delta_geometric(s)
        for label, r in (("representative", geombounds.xi1_representative(s)),
                         ("family", geombounds.xi1_family(s))):
            checked += 1
            if not (1 / hi * (1 - r.error) <= r.value <= 4 / lo * (1 + r.error)):
                bad.append(f"{s} {label}: {r.value} not in [{1 / hi}, {4 / lo}]")
    acceptance(8, not bad, f"{len(bad)} of {checked} values outside [1/delta, 4/delta]")
    assert not bad, bad


def _random_kernel(rng, n):
    pi = rng.uniform(0.1, 1, n)
    pi /= pi.sum()
    J = np.triu(rng.uniform(0, 1, (n, n)) * (rng.uniform(size=(n, n)) < 0.6), 1)
    J[np.arange(n - 1), np.arange(1, n)] += 0.05  # keep the kernel irreducible
    J = J + J.T
    return pi, J


def _kernel_gap_dense(pi, J):
    L = J - np.diag(J.sum(axis=1))
    s = 1 / np.sqrt(pi)
    return float(np.sort(np.linalg.eigvalsh(-(s[:, None] * L * s[None, :])))[1])


def test_09_cheeger(acceptance):
    rng = np.random.default_rng(9)
    violations = 0
    for k in range(500):
        n = int(rng.integers(2, 13))
        if k % 2:
            pi, J = _random_kernel(rng, n)
            K, lam = SymmetricKernel(pi, J), _kernel_gap_dense(pi, J)
        else:
            b, a = oracles.random_rates(rng, n - 1)
            K, lam = kernel_from_chain(FiniteChain.from_rates(b, a)), oracles.gap_dense(b, a)
        violations += lawler_sokal_bound(K).bound > lam * (1 + 1e-10)
    disagree, runs = 0, 0
    for n in range(2, 15):
        for _ in range(3):
            pi, J = _random_kernel(rng, n)
            K = SymmetricKernel(pi, J)
            for search in (cheeger_poincare, lambda K, **kw: cheeger_nash(K, 3.0, **kw),
                           lambda K, **kw: cheeger_logsobolev_r(K, 0.3, **kw)):
                runs += 1
                e, h = search(K), search(K, force_heuristic=True)
                disagree += not math.isclose(e.value, h.value, rel_tol=1e-12)
    ok = violations == 0 and disagree == 0
    acceptance(9, ok, f"{violations} k^2/(2M) > lambda_1 on 500 chains, "
                      f"{disagree} of {runs} heuristic searches differ from exhaustive")
    assert ok


def _contradictions(rep):
    out = []
    for j, strong in enumerate(classify.ROWS):
        for weak in classify.ROWS[:j]:
            if {strong, weak} == {"log_sobolev", "strong_ergodicity"}:
                continue
            if rep[strong].status == classify.HOLDS and rep[weak].status == classify.FAILS:
                out.append(f"{strong} holds but {weak} fails")
    return out


def test_10_classifier_corpus(acceptance):
    bad = []
    for name, spec, want in classify.CORPUS:
        rep = classify.classify_chain(spec)
        got = tuple(rep[r].status for r in classify.ROWS)
        if got != want:
            bad.append(f"{name}: {got}")
        bad += [f"{name}: {d}" for d in rep.diagnostics]
        bad += [f"{name}: {c}" for c in _contradictions(rep)]
    acceptance(10, not bad, f"{len(classify.CORPUS)} chains, {len(bad)} mismatches or contradictions")
    assert not bad, bad


def _fitted_rate(ch, f, lam):
    times = np.linspace(0.0, 4.0 / lam, 41)
    var = np.array([exact.variance(ch, exact.evolve(ch, f, float(t))) for t in times])
    keep = var > var[0] * 1e-20
    return exact.decay_rate_fit(times[keep], var[keep])


def test_11_semigroup_decay(acceptance):
    rng = np.random.default_rng(11)
    cases = [truncate(ChainSpec(b, a), 25) for b, a in (("1", "2"), ("i+1", "2*i+3"), ("1", "i^2"))]
    cases += [FiniteChain.from_rates(*oracles.random_rates(rng, int(rng.integers(2, 10))))
              for _ in range(7)]
    short = eig_err = 0.0
    for ch in cases:
        lam, phi = exact.eigenfunction(ch, 1)
        lam_o = oracles.gap_dense(ch.birth, ch.death)
        rate = _fitted_rate(ch, rng.standard_normal(ch.size), lam_o)
        short = max(short, 2 * lam_o - rate)
        eig_err = max(eig_err, abs(_fitted_rate(ch, phi, lam_o) - 2 * lam_o))
    ok = short <= 1e-6 and eig_err <= 1e-6
    acceptance(11, ok, f"random f: rate below 2 lambda_1 by at most {max(short, 0.0):.1e}; "
                       f"eigenfunction |rate - 2 lambda_1| {eig_err:.1e} on {len(cases)} chains")
    assert ok
