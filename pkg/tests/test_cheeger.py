import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ergogap.bdchain import FiniteChain
from ergogap.cheeger import (SymmetricKernel, alpha_kernel, cheeger_logsobolev_delta,
                             cheeger_logsobolev_r, cheeger_nash, cheeger_poincare, cheeger_table,
                             cut_value, default_r, kernel_from_chain, kernel_from_json, kernel_gap,
                             lawler_sokal_bound, nash_exponent)
from ergogap.errors import SpecError

import oracles

SYM2 = FiniteChain.from_rates([1.0], [1.0])
ONES3 = FiniteChain.from_rates([1.0, 1.0], [1.0, 1.0])


def random_kernel(rng, n):
    b, a = oracles.random_rates(rng, n - 1)
    return b, a, kernel_from_chain(FiniteChain.from_rates(b, a))


def test_chain_kernels():
    K = kernel_from_chain(FiniteChain.from_rates([3.0], [2.0]))
    assert np.allclose(K.pi, [0.4, 0.6], rtol=1e-15)
    assert K.J[0, 1] == pytest.approx(6 / 5, rel=1e-15)
    K = kernel_from_chain(ONES3)
    assert K.J[0, 1] == pytest.approx(1 / 3) and K.J[1, 2] == pytest.approx(1 / 3)
    assert K.J[0, 2] == 0 and np.array_equal(K.J, K.J.T)


def test_kernel_validation():
    with pytest.raises(SpecError):
        SymmetricKernel(np.array([0.5, 0.5]), np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(SpecError):
        SymmetricKernel(np.array([0.5, 0.6]), np.zeros((2, 2)))
    with pytest.raises(SpecError):
        kernel_from_json({"pi": [1.0]})


def test_default_r_and_normalisation():
    K = kernel_from_chain(ONES3)
    r = default_r(K)
    assert np.allclose(K.q, [1, 2, 1]) and r[0, 1] == 2 and np.array_equal(r, r.T)
    K1 = alpha_kernel(K, 1.0)
    assert np.all(K1.J.sum(axis=1) <= K.pi * (1 + 1e-15))
    assert alpha_kernel(K, 0.0) is K


def test_normalisation_small_rates():
    # q <= 1 everywhere: r <= 1 raises entries, but the row bound still holds
    K = kernel_from_chain(FiniteChain.from_rates([0.2, 0.3], [0.1, 0.4]))
    K1 = alpha_kernel(K, 1.0)
    assert np.all(K1.J >= K.J - 1e-18)
    assert np.all(K1.J.sum(axis=1) <= K.pi * (1 + 1e-14))


def test_poincare_examples():
    assert cheeger_poincare(kernel_from_chain(SYM2)).value == pytest.approx(1.0, rel=1e-14)
    assert cheeger_poincare(kernel_from_chain(ONES3)).value == pytest.approx(1.0, rel=1e-14)


def test_lawler_sokal_examples():
    ls = lawler_sokal_bound(kernel_from_chain(SYM2))
    assert (ls.k, ls.M, ls.bound) == pytest.approx((1.0, 1.0, 0.5))
    ls = lawler_sokal_bound(kernel_from_chain(ONES3))
    assert (ls.k, ls.M, ls.bound) == pytest.approx((1.0, 2.0, 0.25))
    assert kernel_gap(kernel_from_chain(ONES3)) == pytest.approx(1.0, rel=1e-12)


def test_lawler_sokal_scaling():
    rng = np.random.default_rng(4)
    b, a, K = random_kernel(rng, 6)
    c = 3.7
    Kc = kernel_from_chain(FiniteChain.from_rates(np.array(b) * c, np.array(a) * c))
    assert lawler_sokal_bound(Kc).bound == pytest.approx(c * lawler_sokal_bound(K).bound, rel=1e-12)
    assert kernel_gap(Kc) == pytest.approx(c * kernel_gap(K), rel=1e-12)


def test_logsobolev_examples():
    K = kernel_from_chain(SYM2)
    assert cheeger_logsobolev_r(K, 0.4).value == math.inf
    assert cheeger_logsobolev_r(K, 0.5).value == pytest.approx(1 / math.sqrt(math.log(math.e + 2)), rel=1e-14)


def test_logsobolev_monotone():
    rng = np.random.default_rng(6)
    _, _, K = random_kernel(rng, 7)
    vals = [cheeger_logsobolev_r(K, r).value for r in (0.05, 0.1, 0.3, 0.6, 1.0)]
    assert all(v2 <= v1 for v1, v2 in zip(vals, vals[1:]))
    vals = [cheeger_logsobolev_delta(K, d).value for d in (0.0, 0.5, 2.0, 10.0)]
    assert all(v2 >= v1 for v1, v2 in zip(vals, vals[1:]))


def test_nash_examples():
    K = kernel_from_chain(SYM2)
    assert cheeger_nash(K, 2.0).value == pytest.approx(2 ** -0.5, rel=1e-14)
    assert nash_exponent(3.0) == 0.75
    rng = np.random.default_rng(9)
    _, _, K = random_kernel(rng, 6)
    assert cheeger_nash(K, 1e6).value == pytest.approx(cheeger_poincare(K).value, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2 ** 32 - 1))
def test_against_enumeration(n, seed):
    rng = np.random.default_rng(seed)
    b, a, K = random_kernel(rng, n)
    pi, J = oracles.kernel(b, a)
    assert cheeger_poincare(K).value == pytest.approx(oracles.cheeger_k(pi, J), rel=1e-10)
    assert cheeger_nash(K, 3.0).value == pytest.approx(oracles.cheeger_nash(pi, J, 3.0), rel=1e-10)
    assert cheeger_logsobolev_r(K, 0.3).value == pytest.approx(oracles.cheeger_ls_r(pi, J, 0.3), rel=1e-10)
    assert cheeger_logsobolev_delta(K, 2.0).value == pytest.approx(
        oracles.cheeger_ls_delta(pi, J, 2.0), rel=1e-10)


def test_cut_value():
    K = kernel_from_chain(ONES3)
    assert cut_value(K, [True, False, False]) == pytest.approx(1 / 3)
    assert cut_value(K, [False, True, False]) == pytest.approx(2 / 3)


def test_heuristic_flag_and_agreement():
    rng = np.random.default_rng(12)
    _, _, K = random_kernel(rng, 12)
    h = cheeger_poincare(K, force_heuristic=True)
    e = cheeger_poincare(K)
    assert h.method == "heuristic" and e.method == "exhaustive"
    assert h.value == pytest.approx(e.value, rel=1e-12)


def test_table_shape_and_determinism():
    K = kernel_from_chain(FiniteChain.from_rates([1.0, 2.0, 0.5], [0.7, 1.5, 2.0]))
    rows = cheeger_table(K, seed=5)
    assert len(rows) == 3 * (2 + 4 + 4)
    again = cheeger_table(K, seed=5)
    assert [r.result.value for r in rows] == [r.result.value for r in again]
