import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergogap.bdchain import ChainSpec, FiniteChain, truncate
from ergogap.errors import SpecError
from ergogap.exact import (decay_rate_fit, dirichlet, eigenfunction, entropy, evolve, gap_ladder,
                           spectral_gap_exact, spectrum, sturm_count, tridiagonal, variance)

import oracles

rates = st.lists(st.floats(0.1, 10.0), min_size=1, max_size=9)


def test_two_state():
    assert spectral_gap_exact(FiniteChain.from_rates([3.0], [2.0])) == pytest.approx(5.0, abs=1e-12)


def test_three_state_all_ones():
    assert spectral_gap_exact(FiniteChain.from_rates([1.0, 1.0], [1.0, 1.0])) == pytest.approx(1.0, abs=1e-12)


def test_three_state_formula_value():
    # (a1-a2+b0-b1)^2 + 4 a1 b1 = 4 + 24 for these rates
    lam = (10 - math.sqrt(28)) / 2
    ch = FiniteChain.from_rates([1.0, 2.0], [3.0, 4.0])
    assert spectral_gap_exact(ch) == pytest.approx(lam, abs=1e-12)
    assert oracles.gap_mp([1, 2], [3, 4]) == pytest.approx(lam, abs=1e-14)


def test_lambda0_and_order():
    ch = FiniteChain.from_rates([1.0, 2.5, 0.3, 7.0], [4.0, 0.7, 2.0, 1.1])
    sp = spectrum(ch)
    assert abs(sp.values[0]) <= 1e-12
    assert np.all(np.diff(sp.values) >= 0)
    ref = np.sort(np.linalg.eigvals(-ch.generator()).real)
    assert np.allclose(sp.values, ref, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_sturm_against_mpmath(data):
    b = data.draw(rates)
    a = data.draw(st.lists(st.floats(0.1, 10.0), min_size=len(b), max_size=len(b)))
    assert spectral_gap_exact(FiniteChain.from_rates(b, a)) == pytest.approx(oracles.gap_mp(b, a), abs=1e-11)


@given(rates, st.floats(-50, 50))
def test_sturm_count_is_eigenvalue_count(b, x):
    ch = FiniteChain.from_rates(b, b[::-1])
    d, off = tridiagonal(ch)
    S = np.diag(d) + np.diag(off, 1) + np.diag(off, -1)
    ev = np.linalg.eigvalsh(S)
    if np.min(np.abs(ev - x)) > 1e-9:
        assert sturm_count(d, off * off, x) == int(np.sum(ev < x))


@pytest.mark.parametrize("b, a, lam", [
    ("i+1", "2*i+3", 2.0),
    ("i+1", "2*i+4+sqrt(2)", 3.0),
    ("i+1", "2*i", 1.0),
])
def test_table_rows_at_2000(b, a, lam):
    assert spectral_gap_exact(truncate(ChainSpec(b, a), 2000)) == pytest.approx(lam, abs=1e-2)


def test_ladder_rejects_bad_sizes():
    with pytest.raises(SpecError):
        gap_ladder(ChainSpec("1", "2"), [10, 10])


def test_dirichlet_examples():
    ch = truncate(ChainSpec("1", "2"), 1)
    assert dirichlet(ch, [0.0, 1.0]) == pytest.approx(2 / 3, rel=1e-15)
    assert dirichlet(ch, [4.0, 4.0]) == 0.0


def test_rayleigh_minimum_is_gap():
    rng = np.random.default_rng(5)
    for _ in range(20):
        b, a = oracles.random_rates(rng, 4)
        ch = FiniteChain.from_rates(b, a)
        lam, f = eigenfunction(ch)
        assert abs(float(np.dot(ch.pi, f))) < 1e-10
        assert dirichlet(ch, f) == pytest.approx(lam, rel=1e-9)
        # any other centred unit function has larger energy
        g = rng.standard_normal(ch.size)
        g -= np.dot(ch.pi, g)
        g /= math.sqrt(np.dot(ch.pi, g * g))
        assert dirichlet(ch, g) >= lam - 1e-9


def test_variance_entropy_examples():
    ch = FiniteChain.from_rates([1.0], [1.0])
    assert variance(ch, [0.0, 2.0]) == pytest.approx(1.0, rel=1e-15)
    e = math.e
    assert entropy(ch, [1.0, e]) == pytest.approx(e / 2 - (1 + e) / 2 * math.log((1 + e) / 2), rel=1e-13)
    assert variance(ch, [3.0, 3.0]) == 0.0 and entropy(ch, [3.0, 3.0]) == 0.0
    with pytest.raises(SpecError):
        entropy(ch, [-1.0, 1.0])


def test_evolve_identity_and_constants():
    ch = FiniteChain.from_rates([1.0, 2.0, 0.5], [0.3, 4.0, 1.0])
    f = np.array([0.2, -1.0, 3.0, 0.0])
    assert np.array_equal(evolve(ch, f, 0.0), f)
    assert np.allclose(evolve(ch, np.full(4, 2.5), 3.7), 2.5, rtol=1e-13)


def test_evolve_matches_expm():
    rng = np.random.default_rng(11)
    for _ in range(10):
        b, a = oracles.random_rates(rng, 5)
        ch = FiniteChain.from_rates(b, a)
        f = rng.standard_normal(6)
        for t in (0.01, 0.3, 2.0):
            assert np.allclose(evolve(ch, f, t), oracles.evolve(b, a, f, t), atol=1e-11)


def test_two_state_variance_is_one_mode():
    ch = FiniteChain.from_rates([3.0], [2.0])
    f = np.array([0.7, -2.0])
    v0 = variance(ch, f)
    for t in (0.05, 0.2, 1.0):
        assert variance(ch, evolve(ch, f, t)) == pytest.approx(v0 * math.exp(-10 * t), rel=1e-10)


def test_decay_fit_examples():
    t = np.array([0.0, 1.0, 2.0])
    assert decay_rate_fit(t, np.exp(-2 * t)) == pytest.approx(2.0, rel=1e-14)
    t = np.array([0.0, 2.0, 4.0])
    assert decay_rate_fit(t, 5 * np.exp(-0.5 * t)) == pytest.approx(0.5, rel=1e-14)


def test_fitted_rate_on_random_six_state():
    rng = np.random.default_rng(2)
    b, a = oracles.random_rates(rng, 5)
    ch = FiniteChain.from_rates(b, a)
    lam = spectral_gap_exact(ch)
    f = rng.standard_normal(6)
    ts = np.linspace(2 / lam, 6 / lam, 9)
    v = [variance(ch, evolve(ch, f, t)) for t in ts]
    assert decay_rate_fit(ts, v) >= 2 * lam - 1e-6
