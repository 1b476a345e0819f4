"""Spectral gap bounds, Cheeger constants and ergodicity criteria for birth-death chains."""

from .bdchain import ChainSpec, FiniteChain, load_chain, mu_weights, parse_chain, truncate
from .cheeger import SymmetricKernel, cheeger_table, kernel_from_chain, lawler_sokal_bound
from .classify import classify_chain
from .dualgap import approx_sequence, delta_constant, explicit_bounds
from .errors import ErgogapError, InvariantViolation, NonCertifiable, SpecError
from .exact import gap_ladder, spectral_gap_exact, spectrum
from .geombounds import GeometrySpec, all_bounds, dominance_audit

__version__ = "0.1.0"

__all__ = [
    "ChainSpec", "FiniteChain", "load_chain", "mu_weights", "parse_chain", "truncate",
    "SymmetricKernel", "cheeger_table", "kernel_from_chain", "lawler_sokal_bound",
    "classify_chain", "approx_sequence", "delta_constant", "explicit_bounds",
    "ErgogapError", "InvariantViolation", "NonCertifiable", "SpecError",
    "gap_ladder", "spectral_gap_exact", "spectrum",
    "GeometrySpec", "all_bounds", "dominance_audit",
]
