"""Computational Stieltjes differential calculus.

Derivator-driven measures, derivatives and integrals; g-exponentials and
Sobolev-type extension operators; additive/multiplicative jump
decompositions; finite-scale compactness certificates.
"""
from . import errors
from .calculus import (
    GFunction,
    SobolevFunction,
    as_gfunction,
    embedding_check,
    ftc_build,
    g_derivative,
    integrate,
    integrate_direct,
    lp_norm,
    sobolev_norm,
)
from .derivator import (
    Derivator,
    PointClassification,
    Pseudoinverse,
    build_derivator,
    pseudoinverse,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Derivator",
    "PointClassification",
    "Pseudoinverse",
    "build_derivator",
    "pseudoinverse",
    "GFunction",
    "SobolevFunction",
    "as_gfunction",
    "integrate",
    "integrate_direct",
    "g_derivative",
    "ftc_build",
    "lp_norm",
    "sobolev_norm",
    "embedding_check",
    "__version__",
]
