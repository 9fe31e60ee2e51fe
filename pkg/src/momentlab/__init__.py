"""momentlab: desk-scale numerical verification of trace-formula,
Voronoi-summation, and moment identities for GL(3)xGL(2) L-functions."""

__version__ = "0.1.0"

from .arith import (
    KloostermanValue,
    RationalPhase,
    Residue,
    kloosterman,
    kloosterman_backend,
    mod_inverse,
    ramanujan_sum,
    reciprocity_identity,
)

__all__ = [
    "KloostermanValue",
    "RationalPhase",
    "Residue",
    "kloosterman",
    "kloosterman_backend",
    "mod_inverse",
    "ramanujan_sum",
    "reciprocity_identity",
    "__version__",
]
