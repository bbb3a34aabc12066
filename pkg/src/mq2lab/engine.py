"""Implicit application of matrix families and class-style decisions."""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from mq2lab.core import (
    MAX_DIMENSION,
    DecisionMode,
    Kind,
    MachineSpec,
    MatrixFamily,
    Semantics,
    StateVector,
    validate_machine_spec,
)
from mq2lab.exceptions import ContractError, DimensionRefusal, NumericError

#: Tolerance for the equality tests of the P and NP columns and for all threshold boundaries.
EQUALITY_TOL = 1e-9
#: Upper clamp applied to reported probabilities; the raw value stays in the report.
PROBABILITY_CLAMP = 1.0 + 1e-9
# Above this, accumulate into a dict instead of a dense scratch array.
_DENSE_SCRATCH_LIMIT = 1 << 22


class Verdict(enum.Enum):
    ACCEPT = "Accept"
    REJECT = "Reject"
    INCONCLUSIVE = "Inconclusive"


def _checked_dimension(family: MatrixFamily, n: int) -> int:
    dim = family.dimension(n)
    if dim > MAX_DIMENSION:
        raise DimensionRefusal(f"dimension {dim} exceeds the cap {MAX_DIMENSION}")
    return dim


def apply_family(family: MatrixFamily, v: StateVector) -> StateVector:
    """Return ``T_n v`` without materializing ``T_n``.

    Only the columns of ``v``'s support are visited.  The result is in
    canonical sparse form and keeps ``v``'s semantics.
    """
    n = v.size_param
    dim = _checked_dimension(family, n)
    if v.entries and (min(v.entries) < 0 or max(v.entries) >= dim):
        raise ContractError(f"state vector has indices outside [0, {dim}) for n={n}")

    dense = dim <= _DENSE_SCRATCH_LIMIT
    dtype = float if v.semantics is Semantics.PROBABILITY else complex
    acc = np.zeros(dim, dtype=dtype) if dense else {}
    for i, amp in v.entries.items():
        dests, values = family.column_of(i, n)
        dests = np.asarray(dests, dtype=np.int64)
        values = np.asarray(values, dtype=dtype)
        if dests.size == 0:
            continue
        bad = ~np.isfinite(values)
        if bad.any():
            j = int(dests[np.argmax(bad)])
            raise NumericError(f"non-finite entry <{j}|T|{i}> at n={n}", source=i, destination=j)
        if dests.min() < 0 or dests.max() >= dim:
            raise ContractError(f"column {i} names destinations outside [0, {dim})")
        if dense:
            np.add.at(acc, dests, values * amp)
        else:
            for j, val in zip(dests.tolist(), (values * amp).tolist()):
                acc[j] = acc.get(j, 0) + val

    if dense:
        if not np.all(np.isfinite(acc)):
            raise NumericError(f"non-finite amplitude after applying {family.name}")
        return StateVector.from_dense(n, acc, v.semantics)
    return StateVector.from_mapping(n, acc, v.semantics)


def apply_power(family: MatrixFamily, v: StateVector, k: int) -> StateVector:
    """Apply ``family`` ``k`` times; ``k=2`` is the MQ2 evolution."""
    if k < 1:
        raise ContractError(f"power must be positive, got {k}")
    for _ in range(k):
        v = apply_family(family, v)
    return v


def final_state(spec: MachineSpec, x: str) -> StateVector:
    n = spec.size_map(x)
    return apply_power(spec.family, spec.initial_builder(x), spec.application_count(n))


def _accepting_mass(spec: MachineSpec, x: str, final: StateVector):
    breakdown = {}
    for c, value in final.entries.items():
        if spec.acceptance_predicate(x, c):
            if final.semantics is Semantics.AMPLITUDE:
                breakdown[c] = abs(value) ** 2
            else:
                breakdown[c] = float(np.real(value))
    return math.fsum(breakdown.values()), breakdown


def _check_spec(spec: MachineSpec, x: str):
    violations = validate_machine_spec(spec, x)
    if violations:
        raise ContractError("invalid machine spec: " + "; ".join(violations))


def acceptance_probability(spec: MachineSpec, x: str) -> float:
    """Accepting mass of the final vector, clamped to ``[0, 1 + 1e-9]``.

    Amplitude vectors contribute ``|<c|T^k|I(x)>|^2`` per accepting ``c``;
    probability vectors contribute their entries directly.
    """
    _check_spec(spec, x)
    raw, _ = _accepting_mass(spec, x, final_state(spec, x))
    return min(max(raw, 0.0), PROBABILITY_CLAMP)


def verdict_for(probability: float, mode: DecisionMode, tol: float = EQUALITY_TOL) -> Verdict:
    """Read the verdict off the threshold table for ``mode``.

    Boundaries are inclusive within ``tol``: a bounded-error probability of
    exactly 2/3 accepts and exactly 1/3 rejects, and PP's ``<= 1/2`` row wins
    at one half.
    """
    p = probability
    if mode is DecisionMode.P:
        if p >= 1.0 - tol:
            return Verdict.ACCEPT
        if p <= tol:
            return Verdict.REJECT
        return Verdict.INCONCLUSIVE
    if mode is DecisionMode.NP:
        return Verdict.ACCEPT if p > tol else Verdict.REJECT
    if mode is DecisionMode.PP:
        return Verdict.ACCEPT if p > 0.5 + tol else Verdict.REJECT
    if p >= 2.0 / 3.0 - tol:
        return Verdict.ACCEPT
    if p <= 1.0 / 3.0 + tol:
        return Verdict.REJECT
    return Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class DecisionReport:
    acceptance_probability: float
    mode: DecisionMode
    verdict: Verdict
    applications_performed: int
    elapsed: float
    raw_probability: float
    accepting_mass_breakdown: dict[int, float] | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        return {
            "probability": self.acceptance_probability,
            "mode": self.mode.value,
            "verdict": self.verdict.value,
            "applications": self.applications_performed,
            "elapsed_ms": self.elapsed * 1e3,
        }


def run_machine(spec: MachineSpec, x: str, keep_breakdown: bool = False):
    """Like :func:`decide` but also return the final state vector."""
    _check_spec(spec, x)
    start = time.perf_counter()
    count = spec.application_count(spec.size_map(x))
    final = final_state(spec, x)
    raw, breakdown = _accepting_mass(spec, x, final)
    elapsed = time.perf_counter() - start
    prob = min(max(raw, 0.0), PROBABILITY_CLAMP)
    report = DecisionReport(
        acceptance_probability=prob,
        mode=spec.decision_mode,
        verdict=verdict_for(prob, spec.decision_mode),
        applications_performed=count,
        elapsed=elapsed,
        raw_probability=raw,
        accepting_mass_breakdown=breakdown if keep_breakdown else None,
    )
    return report, final


def decide(spec: MachineSpec, x: str, keep_breakdown: bool = False) -> DecisionReport:
    """Run ``spec`` on ``x`` and compare the accepting mass with the mode's thresholds."""
    return run_machine(spec, x, keep_breakdown)[0]


def materialize(family: MatrixFamily, n: int, cap: int = 4096) -> np.ndarray:
    """Dense ``dimension x dimension`` array with ``M[j, i] = entry(i, j, n)``.

    Raises :class:`DimensionRefusal` when the dimension exceeds ``cap``.
    """
    dim = family.dimension(n)
    if dim > cap:
        raise DimensionRefusal(f"refusing to materialize dimension {dim} (cap {cap})")
    dtype = float if family.kind is Kind.STOCHASTIC else complex
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        dests, values = family.column_of(i, n)
        if len(dests):
            out[np.asarray(dests, dtype=np.int64), i] = np.asarray(values, dtype=complex)
    if dtype is float and not np.any(out.imag):
        return out.real.copy()
    return out
