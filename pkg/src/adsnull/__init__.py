"""Null curves in AdS_3 from extremal trajectories: elliptic kernel, potentials,
spinor frames, the quasi-periodic family and the momentum lift."""

from .elliptic import Invariants, weierstrass, wp, wp_prime, weierstrass_zeta, weierstrass_sigma, inverse_wp
from .errors import AdsNullError, InvalidInput, NumericalFailure
from .potential import CaseTag, Potential, classify, potential_for, quasi_periodic

__version__ = "0.1.0"

__all__ = [
    "Invariants",
    "weierstrass",
    "wp",
    "wp_prime",
    "weierstrass_zeta",
    "weierstrass_sigma",
    "inverse_wp",
    "AdsNullError",
    "InvalidInput",
    "NumericalFailure",
    "CaseTag",
    "Potential",
    "classify",
    "potential_for",
    "quasi_periodic",
]
