"""Deutsch-Jozsa as a two-application machine.

The family is ``<y|T|x> = (-1)^f(x) <y|H^n|x>``: a Hadamard layer preceded by
the phase oracle.  Starting and accepting at ``0^n``, the leading oracle copy
only contributes the global phase ``(-1)^f(0)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from mq2lab.core import DecisionMode, Kind, MachineSpec, MatrixFamily, StateVector
from mq2lab.exceptions import ContractError, DimensionRefusal

MAX_ARITY = 24
MAX_TABLE_ARITY = 16


class OracleClass(enum.Enum):
    CONSTANT = "Constant"
    BALANCED = "Balanced"
    NEITHER = "Neither"
    UNKNOWN = "Unknown"


class OracleFormatError(ContractError):
    pass


@dataclass(frozen=True)
class BooleanOracle:
    """A boolean function on ``arity``-bit inputs, indexed by integer value."""

    arity: int
    evaluate: Callable[[int], int]
    declared_class: OracleClass = OracleClass.UNKNOWN

    def __post_init__(self):
        if self.arity < 1:
            raise ContractError(f"oracle arity must be at least 1, got {self.arity}")
        if self.declared_class in (OracleClass.CONSTANT, OracleClass.BALANCED) \
                and self.arity <= MAX_TABLE_ARITY:
            actual = classify_oracle(self)
            if actual is not self.declared_class:
                raise ContractError(
                    f"oracle declared {self.declared_class.value} but is {actual.value}")

    @cached_property
    def table(self) -> np.ndarray:
        """All ``2**arity`` outputs as a uint8 array."""
        if self.arity > MAX_ARITY:
            raise DimensionRefusal(f"arity {self.arity} exceeds {MAX_ARITY}")
        return np.fromiter((self.evaluate(k) for k in range(1 << self.arity)),
                           dtype=np.uint8, count=1 << self.arity)

    @classmethod
    def from_truth_table(cls, bits, declared_class=OracleClass.UNKNOWN):
        bits = [int(b) for b in bits]
        size = len(bits)
        if size < 2 or size & (size - 1):
            raise OracleFormatError(f"truth table length {size} is not a power of two >= 2")
        if any(b not in (0, 1) for b in bits):
            raise OracleFormatError("truth table entries must be 0 or 1")
        arity = size.bit_length() - 1
        if arity > MAX_TABLE_ARITY:
            raise OracleFormatError(f"truth tables are capped at n <= {MAX_TABLE_ARITY}")
        frozen = tuple(bits)
        return cls(arity, frozen.__getitem__, declared_class)

    @classmethod
    def constant(cls, arity, value):
        return cls(arity, lambda k: value, OracleClass.CONSTANT)

    @classmethod
    def parity(cls, arity):
        return cls(arity, lambda k: bin(k).count("1") & 1, OracleClass.BALANCED)

    @classmethod
    def lowbit(cls, arity):
        return cls(arity, lambda k: k & 1, OracleClass.BALANCED)

    @classmethod
    def random_balanced(cls, arity, rng: np.random.Generator):
        bits = np.zeros(1 << arity, dtype=np.uint8)
        bits[rng.choice(1 << arity, size=1 << (arity - 1), replace=False)] = 1
        frozen = tuple(bits.tolist())
        return cls(arity, frozen.__getitem__, OracleClass.BALANCED)

    @classmethod
    def random(cls, arity, rng: np.random.Generator):
        frozen = tuple(rng.integers(0, 2, size=1 << arity).tolist())
        return cls(arity, frozen.__getitem__)

    def negated(self) -> BooleanOracle:
        f = self.evaluate
        return BooleanOracle(self.arity, lambda k: 1 - f(k), self.declared_class)


def load_truth_table(path) -> BooleanOracle:
    """Read a truth-table file: ``n`` on the first line, ``2**n`` bits on the second."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) != 2:
        raise OracleFormatError(f"{path}: expected 2 non-empty lines, found {len(lines)}")
    try:
        n = int(lines[0])
    except ValueError:
        raise OracleFormatError(f"{path}: first line must be an integer") from None
    if not 1 <= n <= MAX_TABLE_ARITY:
        raise OracleFormatError(f"{path}: n={n} outside [1, {MAX_TABLE_ARITY}]")
    bits = lines[1]
    if len(bits) != 1 << n or set(bits) - {"0", "1"}:
        raise OracleFormatError(f"{path}: second line must hold exactly {1 << n} characters of 0/1")
    return BooleanOracle.from_truth_table(bits)


def classify_oracle(oracle: BooleanOracle) -> OracleClass:
    if oracle.arity > MAX_TABLE_ARITY:
        raise DimensionRefusal(f"classification is exhaustive; arity {oracle.arity} > {MAX_TABLE_ARITY}")
    ones = sum(oracle.evaluate(k) for k in range(1 << oracle.arity))
    if ones in (0, 1 << oracle.arity):
        return OracleClass.CONSTANT
    if ones == 1 << (oracle.arity - 1):
        return OracleClass.BALANCED
    return OracleClass.NEITHER


def _parity(values: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(values) & 1).astype(np.int8)


def dj_family(oracle: BooleanOracle) -> MatrixFamily:
    """The oracle-times-Hadamard family, defined at ``n == oracle.arity`` only."""
    n0 = oracle.arity
    scale = 2.0 ** (-n0 / 2)

    def dimension(n):
        if n != n0:
            raise ContractError(f"Deutsch-Jozsa family built for n={n0}, asked for n={n}")
        return 1 << n

    def entry(x, y, n):
        dimension(n)
        sign = oracle.evaluate(x) ^ (bin(x & y).count("1") & 1)
        return -scale if sign else scale

    def column(x, n):
        ys = np.arange(dimension(n), dtype=np.int64)
        signs = _parity(ys & x) ^ int(oracle.table[x])
        return ys, scale * (1.0 - 2.0 * signs)

    return MatrixFamily(entry, dimension, Kind.UNITARY, column, name=f"dj(n={n0})")


def build_dj_machine(oracle: BooleanOracle) -> MachineSpec:
    """MQ2 machine: start at ``0^n``, apply the family twice, accept at ``0^n``."""
    if oracle.arity > MAX_ARITY:
        raise DimensionRefusal(f"arity {oracle.arity} exceeds {MAX_ARITY}")
    n = oracle.arity
    return MachineSpec(
        family=dj_family(oracle),
        initial_builder=lambda x: StateVector.basis(n, 0),
        acceptance_predicate=lambda x, c: c == 0,
        size_map=lambda x: n,
        application_count=lambda _: 2,
        decision_mode=DecisionMode.MQ2,
        name="deutsch-jozsa",
    )


def dj_closed_form_probability(oracle: BooleanOracle) -> float:
    """``2**(-2n) * (sum_k (-1)**f(k))**2``, evaluated by exhaustive summation."""
    if oracle.arity > MAX_ARITY:
        raise DimensionRefusal(f"arity {oracle.arity} exceeds {MAX_ARITY}")
    n = oracle.arity
    signed = (1 << n) - 2 * int(oracle.table.sum(dtype=np.int64))
    return math.ldexp(signed * signed, -2 * n)


BUILTIN_ORACLES = {
    "constant0": lambda n: BooleanOracle.constant(n, 0),
    "constant1": lambda n: BooleanOracle.constant(n, 1),
    "parity": BooleanOracle.parity,
    "lowbit": BooleanOracle.lowbit,
    # single 1 at the all-ones input
    "neither-demo": lambda n: BooleanOracle(n, lambda k: int(k == (1 << n) - 1)),
}
