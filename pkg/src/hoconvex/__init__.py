"""Higher-order convexity on finite samples: difference operators, certifiers,
polynomial functions on Q + Q sqrt 2, and the decomposition f = g + P."""

from __future__ import annotations

from .certify import (
    ConvexityReport,
    certify_convex,
    certify_frechet,
    certify_jensen,
    certify_rn_convex,
    certify_wright,
    replay_witness,
)
from .decompose import (
    DecompositionResult,
    LipschitzCertificate,
    ModuleSamples,
    decompose,
    extend_from_rationals,
    lipschitz_certificate,
    sandwich_bound_check,
    verify_decomposition,
)
from .diffcore import (
    GridFunction,
    divided_difference,
    divided_difference_direct,
    divided_difference_recursive,
    forward_difference,
    identity_check,
    iterated_difference,
    mixed_difference,
)
from .errors import (
    ConsistencyError,
    DecompositionRejected,
    DomainError,
    HoconvexError,
    IngestionError,
    ModeError,
    UsageError,
)
from .polyfun import PolyFunction, SymTensor, evaluate_polyfun, frechet_exact, is_standard, random_polyfun
from .scalar import SQRT2, QuadElem

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "ConvexityReport",
    "DecompositionRejected",
    "DecompositionResult",
    "DomainError",
    "GridFunction",
    "HoconvexError",
    "IngestionError",
    "LipschitzCertificate",
    "ModeError",
    "ModuleSamples",
    "PolyFunction",
    "QuadElem",
    "SQRT2",
    "SymTensor",
    "UsageError",
    "certify_convex",
    "certify_frechet",
    "certify_jensen",
    "certify_rn_convex",
    "certify_wright",
    "decompose",
    "divided_difference",
    "divided_difference_direct",
    "divided_difference_recursive",
    "evaluate_polyfun",
    "extend_from_rationals",
    "forward_difference",
    "frechet_exact",
    "identity_check",
    "is_standard",
    "iterated_difference",
    "lipschitz_certificate",
    "mixed_difference",
    "random_polyfun",
    "replay_witness",
    "sandwich_bound_check",
    "verify_decomposition",
]
