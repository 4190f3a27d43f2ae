"""Exact computation with (doubly) twisted isometric tuples.

Core layers: tensorspace (flips, hexagon checks), operators (graded lattice
and dense backends), representation (tuples and relation checkers), wold
(wandering subspaces, summands, existence), model (Fock-space models and the
canonical transport), extension (bilateral unitary extensions), factory
(concrete example tuples), specio/cli (file formats and the command line).
"""

from .operators import (
    DenseOperator,
    DenseSpace,
    GradedVector,
    LatticeOperator,
    LatticeSpace,
    equal_on_window,
)
from .representation import AlgebraSpec, TwistedTuple, direct_sum, induce_from_s
from .tensorspace import FiberSpec, MultiIndex, check_hexagon, flip_block, flip_iterated, kron

__all__ = [
    "AlgebraSpec",
    "DenseOperator",
    "DenseSpace",
    "FiberSpec",
    "GradedVector",
    "LatticeOperator",
    "LatticeSpace",
    "MultiIndex",
    "TwistedTuple",
    "check_hexagon",
    "direct_sum",
    "equal_on_window",
    "flip_block",
    "flip_iterated",
    "induce_from_s",
    "kron",
]

__version__ = "0.1.0"
