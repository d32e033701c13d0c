"""Brute-force adjudication of the expansion formulas and correction rules."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .linalg import DEFAULT_TOL, PureState, apply_on_slots, fidelity, project_subsystem
from .protocol import (
    M2,
    STD,
    CorrectionRuleset,
    FormulaSet,
    InputCoefficients,
    MEBasisConvention,
    Outcome,
    all_outcomes,
    candidate_family,
    correction,
    correction_index,
    formula_correction,
    input_state,
    me_state,
    predicted_residual,
    run_protocol,
    total_state,
)

MIN_MODULUS = 0.05
MIN_MODULUS_GAP = 0.02


@dataclass(frozen=True)
class ExpansionCheck:
    convention: str
    formula: FormulaSet
    per_pair: dict[tuple[int, int], bool]
    max_deviation: float

    @property
    def all_match(self) -> bool:
        return all(self.per_pair.values())


@dataclass(frozen=True)
class OutcomeStats:
    probability: float
    min_fidelity: float
    max_fidelity: float
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    dim: int
    convention: str
    ruleset: str
    trials: int
    seed: int
    tolerance: float
    per_outcome: dict[Outcome, OutcomeStats] = field(repr=False)

    @property
    def pass_count(self) -> int:
        return sum(s.passed for s in self.per_outcome.values())

    @property
    def fail_count(self) -> int:
        return len(self.per_outcome) - self.pass_count

    def to_dict(self, digits: int = 12) -> dict:
        outcomes = [
            {
                "l": o.l,
                "m": o.m,
                "n": o.n,
                "probability": round(s.probability, digits),
                "min_fidelity": round(s.min_fidelity, digits),
                "max_fidelity": round(s.max_fidelity, digits),
                "pass": s.passed,
            }
            for o, s in sorted(self.per_outcome.items())
        ]
        return {
            "dimension": self.dim,
            "convention": self.convention,
            "ruleset": self.ruleset,
            "tolerance": self.tolerance,
            "seed": self.seed,
            "outcomes": outcomes,
            "pass_count": self.pass_count,
            "fail_count": self.fail_count,
        }


@dataclass(frozen=True)
class OracleResult:
    outcome: Outcome | None
    maximizers: list[tuple[int, int]]
    unique: bool


def sample_generic_alpha(dim: int, rng: np.random.Generator) -> InputCoefficients:
    """Random coefficients with all moduli nonzero and pairwise distinct.

    Moduli and phases are drawn uniformly; draws with a modulus below
    ``MIN_MODULUS`` or two moduli closer than ``MIN_MODULUS_GAP`` (after
    normalization) are rejected.
    """
    while True:
        mod = rng.uniform(0.0, 1.0, size=dim)
        phase = rng.uniform(0.0, 2 * np.pi, size=dim)
        mod = mod / np.linalg.norm(mod)
        if mod.min() < MIN_MODULUS:
            continue
        if dim > 1 and np.diff(np.sort(mod)).min() < MIN_MODULUS_GAP:
            continue
        return InputCoefficients(dim, mod * np.exp(1j * phase))


def sample_alphas(dim: int, count: int, seed: int) -> list[InputCoefficients]:
    rng = np.random.default_rng(seed)
    return [sample_generic_alpha(dim, rng) for _ in range(count)]


def check_expansion(
    conv: MEBasisConvention, f: FormulaSet, c: InputCoefficients, tol: float = DEFAULT_TOL
) -> ExpansionCheck:
    """Project the 1-2-3-4 state on every ``|Phi_mn>_13`` and compare with ``f``.

    A pair matches when the residual equals the predicted 2-4 state up to a
    global phase; ``max_deviation`` is the largest ``1 - fidelity`` seen.
    """
    dim = c.dim
    state = total_state(c, conv)
    per_pair: dict[tuple[int, int], bool] = {}
    worst = 0.0
    for m, n in itertools.product(range(dim), repeat=2):
        residual, prob = project_subsystem(state, me_state(conv, dim, m, n), (1, 3))
        predicted = predicted_residual(f, c, m, n)
        dev = 1.0 if prob == 0.0 else 1.0 - fidelity(residual, predicted)
        per_pair[(m, n)] = dev <= tol
        worst = max(worst, dev)
    return ExpansionCheck(conv.name, f, per_pair, worst)


def _ruleset_name(rs) -> str:
    return rs.value if isinstance(rs, CorrectionRuleset) else rs.name


def sweep(
    conv: MEBasisConvention,
    rs,
    dim: int,
    trials: int = 20,
    tol: float = DEFAULT_TOL,
    seed: int = 42,
    alphas: Sequence[InputCoefficients] | None = None,
) -> VerificationReport:
    """Run the full protocol for all ``N**3`` outcomes over several inputs.

    ``alphas`` overrides the seeded generic samples. An outcome passes when its
    worst fidelity over the inputs is at least ``1 - tol``.
    """
    if alphas is None:
        if trials < 1:
            raise ValueError(f"trials must be >= 1, got {trials}")
        alphas = sample_alphas(dim, trials, seed)
    else:
        alphas = list(alphas)
        trials = len(alphas)
    per_outcome: dict[Outcome, OutcomeStats] = {}
    for o in all_outcomes(dim):
        runs = [run_protocol(c, conv, rs, o) for c in alphas]
        fids = [r.fidelity_after_correction for r in runs]
        lo, hi = min(fids), max(fids)
        ok = all(r.defined for r in runs) and lo >= 1.0 - tol
        per_outcome[o] = OutcomeStats(runs[0].probability, lo, hi, ok)
    return VerificationReport(dim, conv.name, _ruleset_name(rs), trials, seed, tol, per_outcome)


def oracle_correction(
    collapsed: PureState,
    c: InputCoefficients,
    dim: int,
    tol: float = DEFAULT_TOL,
    outcome: Outcome | None = None,
) -> OracleResult:
    """Try every ``U_n^j`` on ``collapsed`` and keep those restoring the input."""
    target = input_state(c)
    maximizers = []
    if collapsed.norm_sq > 0.0:
        for j, n in itertools.product(range(dim), repeat=2):
            fixed = apply_on_slots(formula_correction(dim, j, n), collapsed, (1, 2))
            if fidelity(fixed, target) >= 1.0 - tol:
                maximizers.append((j, n))
    return OracleResult(outcome, maximizers, len(maximizers) == 1)


def ruleset_indices(rs, dim: int, o: Outcome) -> tuple[int, int] | None:
    """The ``(j, n)`` whose closed-form correction equals the ruleset's choice."""
    if isinstance(rs, CorrectionRuleset) and not rs.is_table:
        return correction_index(rs.formula, dim, o), o.n
    op = correction(rs, dim, o)
    for j, n in itertools.product(range(dim), repeat=2):
        if formula_correction(dim, j, n).same_as(op):
            return j, n
    return None


def compare_rulesets(dim: int, a, b, atol: float = 1e-12) -> list[Outcome]:
    """Outcomes whose dense correction matrices differ entrywise beyond ``atol``."""
    return [
        o
        for o in all_outcomes(dim)
        if not np.allclose(correction(a, dim, o).matrix(), correction(b, dim, o).matrix(), rtol=0.0, atol=atol)
    ]


def discover_convention(
    candidates: Sequence[MEBasisConvention],
    alphas: Sequence[InputCoefficients] | None = None,
    tol: float = DEFAULT_TOL,
    seed: int = 2024,
) -> list[str]:
    """Names of candidates under which the corrected expansion holds for every input.

    Defaults to three seeded generic qutrit inputs.
    """
    if alphas is None:
        alphas = sample_alphas(3, 3, seed)
    return [
        conv.name
        for conv in candidates
        if all(check_expansion(conv, FormulaSet.OURS, c, tol).all_match for c in alphas)
    ]


@lru_cache(maxsize=None)
def ref1_implied() -> MEBasisConvention:
    """The convention recovered by search over :func:`candidate_family`.

    Raises ``LookupError`` when nothing survives; with several survivors the
    first in family order is used.
    """
    family = candidate_family()
    found = discover_convention(family)
    if not found:
        raise LookupError("no candidate convention reproduces the corrected expansion")
    winner = next(c for c in family if c.name == found[0])
    return MEBasisConvention("REF1_IMPLIED", winner.pairing, winner.phase_exponent, winner.phase_on_first)


def convention_by_name(name: str) -> MEBasisConvention:
    if name == "STD":
        return STD
    if name == "M2":
        return M2
    if name == "REF1_IMPLIED":
        return ref1_implied()
    for conv in candidate_family():
        if conv.name == name:
            return conv
    raise KeyError(f"unknown convention {name!r}")
