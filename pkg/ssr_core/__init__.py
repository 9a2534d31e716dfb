# ssr_core/__init__.py
"""Numerical toolkit for bipartite states under a particle-number superselection rule."""
from .errors import SsrError
from .fock import BlockedDensity, BlockedPureState, LocalPOVM, SectorSpace
from .schmidt import SchmidtBlocks, entropy_of_entanglement, resource_pair, schmidt_block_decompose, siv

__all__ = [
    "SsrError",
    "SectorSpace",
    "BlockedPureState",
    "BlockedDensity",
    "LocalPOVM",
    "SchmidtBlocks",
    "schmidt_block_decompose",
    "entropy_of_entanglement",
    "siv",
    "resource_pair",
]
