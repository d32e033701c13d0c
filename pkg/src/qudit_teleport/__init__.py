"""Qudit state-vector simulation of two-qudit entanglement teleportation,
with brute-force checks of competing expansion formulas and correction rules."""

from .linalg import (
    DomainError,
    PhasePermOp,
    PureState,
    apply_on_slots,
    equal_up_to_global_phase,
    fidelity,
    inner,
    make_ket,
    project_subsystem,
    tensor,
)
from .protocol import (
    M2,
    STD,
    CorrectionRuleset,
    FormulaSet,
    InputCoefficients,
    MEBasisConvention,
    Outcome,
    UnsupportedError,
    correction,
    me_state,
    run_protocol,
)
from .verifier import (
    check_expansion,
    compare_rulesets,
    discover_convention,
    oracle_correction,
    ref1_implied,
    sweep,
)

__all__ = [
    "DomainError",
    "PhasePermOp",
    "PureState",
    "apply_on_slots",
    "equal_up_to_global_phase",
    "fidelity",
    "inner",
    "make_ket",
    "project_subsystem",
    "tensor",
    "M2",
    "STD",
    "CorrectionRuleset",
    "FormulaSet",
    "InputCoefficients",
    "MEBasisConvention",
    "Outcome",
    "UnsupportedError",
    "correction",
    "me_state",
    "run_protocol",
    "check_expansion",
    "compare_rulesets",
    "discover_convention",
    "oracle_correction",
    "ref1_implied",
    "sweep",
]
