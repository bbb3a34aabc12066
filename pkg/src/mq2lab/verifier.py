"""Numerical checks of the defining conditions: unitarity and stochasticity.

Sampling draws from a Philox generator (counter-based) keyed by the seed, so
reports are bit-reproducible for a given seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
import scipy.sparse as sp

from mq2lab.core import Kind, MatrixFamily
from mq2lab.engine import materialize
from mq2lab.exceptions import KindError

EXACT_TOL = 1e-10
SAMPLED_TOL = 1e-8
EXACT_LIMIT = 4096


class Method(enum.Enum):
    EXACT_DENSE = "ExactDense"
    SAMPLED_COLUMNS = "SampledColumns"


@dataclass(frozen=True)
class VerificationReport:
    checked_kind: Kind
    method: Method
    max_deviation: float
    samples: int
    tolerance: float
    worst_witness: tuple[int, int] | None = None

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "kind": self.checked_kind.value,
            "method": self.method.value,
            "max_deviation": self.max_deviation,
            "samples": self.samples,
            "passed": self.passed,
            "witness": list(self.worst_witness) if self.worst_witness is not None else None,
            "tolerance": self.tolerance,
        }


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _dense_column(family: MatrixFamily, i: int, n: int, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    dests, values = family.column_of(i, n)
    if len(dests):
        out[np.asarray(dests, dtype=np.int64)] = np.asarray(values, dtype=complex)
    return out


def verify_unitary_exact(family: MatrixFamily, n: int, tolerance: float = EXACT_TOL,
                         cap: int = EXACT_LIMIT) -> VerificationReport:
    """Materialize ``T_n`` and measure ``max |(T^dagger T - I)[r, c]|``.

    The witness is the ``(r, c)`` position of the worst deviation.
    """
    dense = materialize(family, n, cap=cap)
    dim = dense.shape[0]
    mat = sp.csc_matrix(dense)
    del dense
    gram = (mat.conj().T @ mat - sp.identity(dim, dtype=complex, format="csc")).tocoo()
    if gram.nnz == 0:
        return VerificationReport(Kind.UNITARY, Method.EXACT_DENSE, 0.0, dim, tolerance, None)
    mags = np.abs(gram.data)
    k = int(np.argmax(mags))
    return VerificationReport(
        Kind.UNITARY, Method.EXACT_DENSE, float(mags[k]), dim, tolerance,
        (int(gram.row[k]), int(gram.col[k])),
    )


def verify_unitary_sampled(family: MatrixFamily, n: int, samples: int,
                           tolerance: float = SAMPLED_TOL, seed: int = 0) -> VerificationReport:
    """Check random columns for unit norm and random column pairs for orthogonality.

    When ``samples`` covers the whole dimension every column and every pair
    is checked instead, which makes the verdict comparable with the exact check.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    dim = family.dimension(n)
    worst, witness = 0.0, None

    if samples >= dim:
        cols = np.stack([_dense_column(family, i, n, dim) for i in range(dim)], axis=1)
        dev = np.abs(cols.conj().T @ cols - np.eye(dim))
        r, c = np.unravel_index(int(np.argmax(dev)), dev.shape)
        return VerificationReport(Kind.UNITARY, Method.SAMPLED_COLUMNS, float(dev[r, c]),
                                  dim, tolerance, (int(r), int(c)))

    rng = _rng(seed)
    columns = rng.integers(0, dim, size=samples)
    pairs = rng.integers(0, dim, size=(samples, 2))
    cache = {}

    def col(i):
        if i not in cache:
            cache[i] = _dense_column(family, i, n, dim)
        return cache[i]

    for i in columns.tolist():
        v = col(i)
        dev = abs(float(np.vdot(v, v).real) - 1.0)
        if dev > worst:
            worst, witness = dev, (i, i)
    for a, b in pairs.tolist():
        if a == b:
            continue
        dev = abs(np.vdot(col(a), col(b)))
        if dev > worst:
            worst, witness = float(dev), (a, b)
    return VerificationReport(Kind.UNITARY, Method.SAMPLED_COLUMNS, worst, samples, tolerance, witness)


def _source_deviation(values) -> float:
    """Deviation of one source's outgoing distribution from a valid one.

    Sums exactly when every entry is rational.
    """
    for v in values:
        if isinstance(v, complex) or (isinstance(v, np.complexfloating)):
            if v.imag != 0:
                raise KindError(f"complex entry {v} in a stochastic family")
    exact = all(isinstance(v, Rational) for v in values)
    if exact:
        total = sum((Fraction(v) for v in values), Fraction(0))
        dev = abs(total - 1)
        for v in values:
            dev = max(dev, -Fraction(v), Fraction(v) - 1)
        return float(dev)
    reals = np.asarray([np.real(v) for v in values], dtype=float)
    dev = abs(float(np.sum(reals)) - 1.0)
    if reals.size:
        dev = max(dev, float(-reals.min()), float(reals.max() - 1.0))
    return dev


def verify_stochastic(family: MatrixFamily, n: int, tolerance: float = EXACT_TOL,
                      samples: int = 256, seed: int = 0,
                      exact_limit: int = EXACT_LIMIT) -> VerificationReport:
    """Check that each source's outgoing probabilities lie in [0, 1] and sum to 1.

    Sums run over destinations for a fixed source, which is what conserves
    probability under the ``<c2|T|c1>`` = P(c1 -> c2) convention.  Every
    source is checked when the dimension is at most ``exact_limit``;
    otherwise ``samples`` sources are drawn with ``seed``.
    """
    if family.kind is not Kind.STOCHASTIC:
        raise KindError(f"verify_stochastic needs a stochastic family, got {family.kind.value}")
    dim = family.dimension(n)
    if dim <= exact_limit:
        sources, method = range(dim), Method.EXACT_DENSE
    else:
        sources, method = _rng(seed).integers(0, dim, size=samples).tolist(), Method.SAMPLED_COLUMNS

    worst, witness, count = 0.0, None, 0
    for i in sources:
        _, values = family.column_of(i, n)
        dev = _source_deviation(list(values))
        count += 1
        if dev > worst:
            worst, witness = dev, (i, i)
    return VerificationReport(Kind.STOCHASTIC, method, worst, count, tolerance, witness)
