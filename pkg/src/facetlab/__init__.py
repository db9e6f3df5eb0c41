"""Exact and Monte Carlo laboratory for halfspace tails of random sign vectors
and facets of random +-1 polytopes."""

from .entropy import (
    DomainError,
    FixedConstants,
    big_f,
    f_entropy,
    f_of_tanh,
    fixed_constants,
    g_ratio,
    h_fn,
    m1_m2,
    psi_fn,
)
from .hull import (
    Facet,
    HullResult,
    SignMatrix,
    facet_enum,
    facet_enum_bruteforce,
    membership,
    sample_polytope,
    verify_h_rep,
)
from .oracle import HalfspaceQuery, ProbEstimate, exact_halfspace_prob, mc_halfspace_prob

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "Facet",
    "FixedConstants",
    "HalfspaceQuery",
    "HullResult",
    "ProbEstimate",
    "SignMatrix",
    "__version__",
    "big_f",
    "exact_halfspace_prob",
    "f_entropy",
    "f_of_tanh",
    "facet_enum",
    "facet_enum_bruteforce",
    "fixed_constants",
    "g_ratio",
    "h_fn",
    "m1_m2",
    "mc_halfspace_prob",
    "membership",
    "psi_fn",
    "sample_polytope",
    "verify_h_rep",
]
