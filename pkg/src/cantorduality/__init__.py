"""Finite verification of translation-covering combinatorics on Cantor space."""

__version__ = "0.1.0"

from .bitcube import (
    BlockIndexSet,
    BlockWord,
    CubeSet,
    Dyadic,
    Word,
    complement,
    density,
    enumerate_cubesets,
    is_subset,
    random_cubeset,
    union,
    xor_translate,
)

__all__ = [
    "BlockIndexSet",
    "BlockWord",
    "CubeSet",
    "Dyadic",
    "Word",
    "complement",
    "density",
    "enumerate_cubesets",
    "is_subset",
    "random_cubeset",
    "union",
    "xor_translate",
]
