"""The 50-chain corpus shared by the bracket and approximation checks.

Oracles: (sqrt a - sqrt b)^2 for constant rates, the dense spectrum for finite
chains, and an extrapolated truncation ladder otherwise.
"""
import math

import numpy as np

from ergogap.bdchain import ChainSpec

GEOMETRIC = [(1, 2), (1, 3), (2, 5), (0.5, 1), (1, 1.5), (3, 4), (1, 10), (2, 3)]
POLYNOMIAL = [("i+1", "2*i+3"), ("i+0.5", "2*i"), ("i+1", "2*i"), ("i+2", "2*i"),
              ("i+1", "2*i+4+sqrt(2)"), ("i+1", "3*i+1"), ("1", "i+1"), ("2", "i+1"),
              ("i+1", "(i+1)^2"), ("1", "i^1.5"), ("i+1", "2*i+1"), ("0.5*i+1", "i+2")]
FACTORIAL = [("1", "i^2"), ("1", "i^2+1"), ("2", "i^2"), ("1", "i^3"), ("i+1", "i^3+1"),
             ("3", "(i+1)^2")]
N_RANDOM = 50 - len(GEOMETRIC) - len(POLYNOMIAL) - len(FACTORIAL)


def chains():
    """``(name, spec, kind, gap)``; kind is 'geometric', 'ladder' or 'finite' and
    ``gap`` is the closed form for geometric chains, else None."""
    out = [(f"geometric b={b} a={a}", ChainSpec(str(b), str(a)), "geometric",
            (math.sqrt(a) - math.sqrt(b)) ** 2) for b, a in GEOMETRIC]
    out += [(f"b={b} a={a}", ChainSpec(b, a), "ladder", None) for b, a in POLYNOMIAL + FACTORIAL]
    rng = np.random.default_rng(20240501)
    for k in range(N_RANDOM):
        n = int(rng.integers(1, 30))
        b = np.exp(rng.uniform(math.log(0.1), math.log(10), n))
        a = np.exp(rng.uniform(math.log(0.1), math.log(10), n))
        out.append((f"random-{k} n={n}", ChainSpec(b, a, n), "finite", None))
    return out

