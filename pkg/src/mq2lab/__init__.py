"""Numerical laboratory for matrix-family machines.

A machine is a poly-computable matrix family, an initial-vector builder and
an acceptance predicate.  The engine applies the family implicitly (entry by
entry, or column by column when the family can enumerate its nonzeros) and
turns the accepting mass into a class-style verdict.
"""

from mq2lab.core import (
    ConfigCodec,
    DecisionMode,
    Kind,
    MachineSpec,
    MatrixFamily,
    Semantics,
    StateVector,
    codec_roundtrip,
    validate_machine_spec,
)
from mq2lab.engine import (
    DecisionReport,
    Verdict,
    acceptance_probability,
    apply_family,
    apply_power,
    decide,
    materialize,
    verdict_for,
)
from mq2lab.exceptions import (
    ContractError,
    DimensionRefusal,
    KindError,
    MQ2LabError,
    NumericError,
)
from mq2lab.verifier import (
    VerificationReport,
    verify_stochastic,
    verify_unitary_exact,
    verify_unitary_sampled,
)

__all__ = [
    "ConfigCodec",
    "ContractError",
    "DecisionMode",
    "DecisionReport",
    "DimensionRefusal",
    "Kind",
    "KindError",
    "MQ2LabError",
    "MachineSpec",
    "MatrixFamily",
    "NumericError",
    "Semantics",
    "StateVector",
    "Verdict",
    "VerificationReport",
    "acceptance_probability",
    "apply_family",
    "apply_power",
    "codec_roundtrip",
    "decide",
    "materialize",
    "validate_machine_spec",
    "verdict_for",
    "verify_stochastic",
    "verify_unitary_exact",
    "verify_unitary_sampled",
]
