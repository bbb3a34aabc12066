"""Small hand-made families, including deliberately broken ones for the verifier."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from mq2lab.core import Kind, MatrixFamily


def _fixed_dimension(dim):
    return lambda n: dim


def identity_family(dim: int) -> MatrixFamily:
    return MatrixFamily(
        entry=lambda i, j, n: 1.0 if i == j else 0.0,
        dimension=_fixed_dimension(dim),
        kind=Kind.UNITARY,
        column=lambda i, n: (np.array([i]), np.array([1.0 + 0j])),
        name=f"identity({dim})",
    )


def permutation_family(perm) -> MatrixFamily:
    """Sends source ``i`` to destination ``perm[i]``."""
    perm = tuple(perm)
    return MatrixFamily(
        entry=lambda i, j, n: 1.0 if perm[i] == j else 0.0,
        dimension=_fixed_dimension(len(perm)),
        kind=Kind.UNITARY,
        name="permutation",
    )


def fair_coin_family() -> MatrixFamily:
    """Two configurations; each source goes to either with probability 1/2."""
    half = Fraction(1, 2)
    return MatrixFamily(
        entry=lambda i, j, n: half,
        dimension=_fixed_dimension(2),
        kind=Kind.STOCHASTIC,
        name="fair-coin",
    )


def short_column_family(dim: int = 16) -> MatrixFamily:
    """``diag(1, 1/2, 1/2, ...)``: every column but the first has norm 1/2."""
    return MatrixFamily(
        entry=lambda i, j, n: (1.0 if i == 0 else 0.5) if i == j else 0.0,
        dimension=_fixed_dimension(dim),
        kind=Kind.UNITARY,
        name="short-column",
    )


def zeroed_source_family(family: MatrixFamily, source: int) -> MatrixFamily:
    """``family`` with every entry out of ``source`` set to zero."""
    return MatrixFamily(
        entry=lambda i, j, n: 0.0 if i == source else family.entry(i, j, n),
        dimension=family.dimension,
        kind=family.kind,
        name=f"{family.name} with source {source} zeroed",
    )


def overfull_source_family(dim: int = 4, source: int = 0) -> MatrixFamily:
    """Identity-like stochastic family whose ``source`` sends out mass 3/2."""
    def entry(i, j, n):
        if i == source:
            return Fraction(3, 4) if j in (0, 1) else Fraction(0)
        return Fraction(int(i == j))

    return MatrixFamily(entry, _fixed_dimension(dim), Kind.STOCHASTIC, name="overfull-source")
