"""Domain types: implicit matrix families, sparse state vectors, machines, codecs.

Index convention: a family's entry oracle is called as ``entry(i, j, n)`` and
returns ``<j|T_n|i>``, i.e. ``i`` is the source configuration (column) and
``j`` the destination (row).  A matrix-vector product therefore reads
``out[j] = sum_i entry(i, j, n) * v[i]``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from mq2lab.exceptions import ContractError

#: Largest dimension any simulation is allowed to touch.
MAX_DIMENSION = 1 << 24


class Kind(enum.Enum):
    UNITARY = "unitary"
    STOCHASTIC = "stochastic"


class Semantics(enum.Enum):
    AMPLITUDE = "amplitude"
    PROBABILITY = "probability"


class DecisionMode(enum.Enum):
    MQ2 = "MQ2"
    BQP = "BQP"
    P = "P"
    NP = "NP"
    PP = "PP"
    BPP = "BPP"

    @property
    def is_quantum(self) -> bool:
        return self in (DecisionMode.MQ2, DecisionMode.BQP)


def is_finite_amplitude(value: complex) -> bool:
    return cmath.isfinite(complex(value))


@dataclass(frozen=True)
class MatrixFamily:
    """A square matrix per size parameter ``n``, known only through an entry oracle.

    ``column`` is an optional fast path: ``column(i, n)`` returns
    ``(destinations, values)`` listing every nonzero entry of source ``i``.
    Destinations must be unique within one column.  Without it, columns are
    recovered by calling ``entry`` for every destination, which costs
    ``dimension(n)`` oracle calls per column.
    """

    entry: Callable[[int, int, int], Any]
    dimension: Callable[[int], int]
    kind: Kind
    column: Callable[[int, int], tuple[np.ndarray, Sequence[Any]]] | None = None
    name: str = "family"

    def column_of(self, i: int, n: int) -> tuple[np.ndarray, Sequence[Any]]:
        if self.column is not None:
            return self.column(i, n)
        dim = self.dimension(n)
        dests, values = [], []
        for j in range(dim):
            value = self.entry(i, j, n)
            if value != 0:
                dests.append(j)
                values.append(value)
        return np.asarray(dests, dtype=np.int64), values

    def without_column(self) -> MatrixFamily:
        """Same family, forced through the scalar entry oracle."""
        return MatrixFamily(self.entry, self.dimension, self.kind, None, self.name)


@dataclass(frozen=True)
class StateVector:
    """Sparse vector over configuration indices.

    Entries are complex amplitudes under ``Semantics.AMPLITUDE`` and real
    probabilities under ``Semantics.PROBABILITY``.  Use :meth:`from_mapping`
    to get canonical form (no stored zeros); the raw constructor keeps what it
    is given so that malformed vectors can still be validated.
    """

    size_param: int
    entries: Mapping[int, complex | float]
    semantics: Semantics = Semantics.AMPLITUDE

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    @classmethod
    def from_mapping(cls, size_param, entries, semantics=Semantics.AMPLITUDE):
        if semantics is Semantics.PROBABILITY:
            clean = {int(c): float(v) for c, v in entries.items() if v != 0}
        else:
            clean = {int(c): complex(v) for c, v in entries.items() if v != 0}
        return cls(size_param, clean, semantics)

    @classmethod
    def basis(cls, size_param, index, semantics=Semantics.AMPLITUDE):
        one = 1.0 if semantics is Semantics.PROBABILITY else 1.0 + 0j
        return cls(size_param, {int(index): one}, semantics)

    @classmethod
    def from_dense(cls, size_param, array, semantics=Semantics.AMPLITUDE):
        array = np.asarray(array)
        nz = np.flatnonzero(array)
        values = array[nz].real if semantics is Semantics.PROBABILITY else array[nz]
        return cls(size_param, dict(zip(nz.tolist(), values.tolist())), semantics)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, index):
        return self.entries.get(index, 0.0)

    @property
    def support(self) -> list[int]:
        return sorted(self.entries)

    def is_canonical(self) -> bool:
        return all(v != 0 for v in self.entries.values())

    def to_dense(self, dimension: int) -> np.ndarray:
        dtype = float if self.semantics is Semantics.PROBABILITY else complex
        out = np.zeros(dimension, dtype=dtype)
        for c, v in self.entries.items():
            out[c] = v
        return out

    def norm(self) -> float:
        return math.sqrt(math.fsum(abs(v) ** 2 for v in self.entries.values()))

    def total(self) -> float:
        return math.fsum(float(np.real(v)) for v in self.entries.values())


@dataclass(frozen=True)
class MachineSpec:
    """Everything needed to decide an input: ``(T, I(x), a(x, c), p(n), mode)``."""

    family: MatrixFamily
    initial_builder: Callable[[str], StateVector]
    acceptance_predicate: Callable[[str, int], bool]
    size_map: Callable[[str], int]
    application_count: Callable[[int], int]
    decision_mode: DecisionMode
    name: str = "machine"


def validate_machine_spec(spec: MachineSpec, x: str = "") -> list[str]:
    """Return human-readable violations of ``spec`` for input ``x`` (empty if valid)."""
    violations = []
    n = spec.size_map(x)
    try:
        dim = spec.family.dimension(n)
    except ContractError as exc:
        return [f"family undefined at size parameter {n}: {exc}"]
    if dim < 1:
        violations.append(f"dimension({n}) = {dim} is not positive")

    count = spec.application_count(n)
    if count < 1:
        violations.append(f"application_count({n}) = {count} must be positive")
    if spec.decision_mode is DecisionMode.MQ2 and count != 2:
        violations.append(f"MQ2 mode requires exactly 2 applications, got {count}")

    expected_kind = Kind.UNITARY if spec.decision_mode.is_quantum else Kind.STOCHASTIC
    if spec.family.kind is not expected_kind:
        violations.append(
            f"{spec.decision_mode.value} mode needs a {expected_kind.value} family, "
            f"got {spec.family.kind.value}"
        )

    v = spec.initial_builder(x)
    if v.size_param != n:
        violations.append(f"initial vector has size_param {v.size_param}, expected {n}")
    expected_sem = Semantics.AMPLITUDE if expected_kind is Kind.UNITARY else Semantics.PROBABILITY
    if v.semantics is not expected_sem:
        violations.append(f"initial vector semantics {v.semantics.value}, expected {expected_sem.value}")
    for c in v.entries:
        if not 0 <= c < dim:
            violations.append(f"initial vector index {c} out of range [0, {dim})")
    if not v.is_canonical():
        violations.append("initial vector stores explicit zero entries")
    if v.semantics is Semantics.PROBABILITY:
        if any(np.imag(val) != 0 or np.real(val) < 0 for val in v.entries.values()):
            violations.append("probability vector has negative or complex entries")
    return violations


@dataclass(frozen=True)
class ConfigCodec:
    """Mixed-radix bijection between register tuples and flat indices.

    The first register is the most significant digit, so iterating indices
    in order walks configurations lexicographically by register.
    """

    registers: tuple[tuple[str, int], ...]
    _strides: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if not self.registers:
            raise ContractError("a codec needs at least one register")
        strides = []
        acc = 1
        for name, size in reversed(self.registers):
            if size < 1:
                raise ContractError(f"register {name!r} has size {size}")
            strides.append(acc)
            acc *= size
        object.__setattr__(self, "_strides", tuple(reversed(strides)))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.registers)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(size for _, size in self.registers)

    @property
    def dimension(self) -> int:
        return math.prod(self.sizes)

    def pack(self, config: Sequence[int]) -> int:
        if len(config) != len(self.registers):
            raise ContractError(f"expected {len(self.registers)} registers, got {len(config)}")
        index = 0
        for value, (name, size), stride in zip(config, self.registers, self._strides):
            if not 0 <= value < size:
                raise ContractError(f"register {name!r} value {value} outside [0, {size})")
            index += value * stride
        return index

    def unpack(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dimension:
            raise ContractError(f"index {index} outside [0, {self.dimension})")
        out = []
        for (_, size), stride in zip(self.registers, self._strides):
            out.append((index // stride) % size)
        return tuple(out)


def codec_roundtrip(codec: ConfigCodec, index: int) -> tuple[int, ...]:
    """Unpack ``index`` and check that packing it back is the identity."""
    config = codec.unpack(index)
    if codec.pack(config) != index:
        raise ContractError(f"codec is not a bijection at index {index}")
    return config
