"""Two-qudit entanglement teleportation using local ancilla resources.

Qudit roles (1-based slots of the 5-qudit register):

* 1, 2 -- Alice's entangled input ``sum_k alpha_k |k, k>``
* 3, 4 -- shared maximally entangled pair (Alice holds 3, Bob holds 4)
* 5    -- Bob's ancilla, prepared in ``|0>``

Alice measures 1-3 in a maximally entangled basis (result ``m, n``) and 2 in
the Fourier basis (result ``l``). Bob applies the control-change gate to 4-5
and then a phase-and-shift correction chosen from ``(l, m, n)``.

The maximally entangled basis is pluggable; different conventions for it are
exactly what decides which correction rule works.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, NamedTuple

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DomainError,
    PhasePermOp,
    PureState,
    apply_on_slots,
    clock,
    fidelity,
    make_ket,
    project_subsystem,
    root_powers,
    shift,
    tensor,
)


class UnsupportedError(DomainError):
    """Raised for a valid request that a given ruleset cannot serve."""


Pairing = Callable[[int, int, int], int]
PhaseExponent = Callable[[int, int, int, int], int]


@dataclass(frozen=True)
class MEBasisConvention:
    """One way of writing the ``N**2`` maximally entangled pairs.

    With ``phase_on_first`` the states are
    ``|Phi_mn> = N**-0.5 * sum_q omega**phase_exponent(q, n, m) |q, pairing(q, n)>``;
    otherwise the summation variable labels the *second* qudit:
    ``N**-0.5 * sum_q omega**phase_exponent(q, n, m) |pairing(q, n), q>``.
    Both callables take ``N`` as their last argument.
    """

    name: str
    pairing: Pairing
    phase_exponent: PhaseExponent
    phase_on_first: bool = True

    def partner(self, q: int, n: int, dim: int) -> int:
        return int(self.pairing(q, n, dim)) % dim

    def check(self, dim: int) -> None:
        for n in range(dim):
            if sorted(self.partner(q, n, dim) for q in range(dim)) != list(range(dim)):
                raise DomainError(
                    f"convention {self.name}: pairing(., {n}) is not a bijection for N={dim}"
                )


def _qm(q: int, n: int, m: int, dim: int) -> int:
    return q * m


STD = MEBasisConvention("STD", lambda q, n, N: q + n, _qm, True)
M2 = MEBasisConvention("M2", lambda q, n, N: N - 1 - q - n, _qm, True)

PAIRINGS: dict[str, Pairing] = {
    "q+n": lambda q, n, N: q + n,
    "q-n": lambda q, n, N: q - n,
    "N-1-q-n": lambda q, n, N: N - 1 - q - n,
    "n-q": lambda q, n, N: n - q,
}


def candidate_family() -> list[MEBasisConvention]:
    """The eight pairing/orientation variants searched for an implied convention."""
    out = []
    for key, fn in PAIRINGS.items():
        for first in (True, False):
            name = f"[{key}]/{'first' if first else 'second'}"
            out.append(MEBasisConvention(name, fn, _qm, first))
    return out


def me_state(conv: MEBasisConvention, dim: int, m: int, n: int) -> PureState:
    if dim < 2:
        raise DomainError(f"dimension must be >= 2, got {dim}")
    if not (0 <= m < dim and 0 <= n < dim):
        raise DomainError(f"indices (m={m}, n={n}) out of range for N={dim}")
    conv.check(dim)
    amps = np.zeros(dim * dim, dtype=np.complex128)
    for q in range(dim):
        p = conv.partner(q, n, dim)
        a, b = (q, p) if conv.phase_on_first else (p, q)
        amps[a * dim + b] += root_powers(dim, conv.phase_exponent(q, n, m, dim))
    return PureState(dim, 2, amps / np.sqrt(dim))


@dataclass(frozen=True, eq=False)
class InputCoefficients:
    """Schmidt coefficients ``alpha_k`` of the state to be teleported."""

    dim: int
    alpha: np.ndarray

    def __post_init__(self) -> None:
        alpha = np.array(self.alpha, dtype=np.complex128).reshape(-1)
        if alpha.size != self.dim:
            raise DomainError(f"expected {self.dim} coefficients, got {alpha.size}")
        if not np.all(np.isfinite(alpha)):
            raise DomainError("coefficients must be finite")
        norm_sq = float(np.vdot(alpha, alpha).real)
        if abs(norm_sq - 1.0) > DEFAULT_TOL:
            raise DomainError(f"coefficients are not normalized (sum |alpha|^2 = {norm_sq!r})")
        alpha.flags.writeable = False
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def uniform(cls, dim: int) -> InputCoefficients:
        return cls(dim, np.full(dim, 1 / np.sqrt(dim)))


class Outcome(NamedTuple):
    l: int
    m: int
    n: int


def all_outcomes(dim: int) -> Iterator[Outcome]:
    """Every ``(l, m, n)`` in lexicographic order."""
    for l, m, n in itertools.product(range(dim), repeat=3):
        yield Outcome(l, m, n)


class FormulaSet(enum.Enum):
    OURS = "OURS"
    BAAN = "BAAN"


class CorrectionRuleset(enum.Enum):
    OURS_FORMULA = "OURS_FORMULA"
    BAAN_FORMULA = "BAAN_FORMULA"
    OURS_TABLE = "OURS_TABLE"
    BAAN_TABLE = "BAAN_TABLE"

    @property
    def is_table(self) -> bool:
        return self in (CorrectionRuleset.OURS_TABLE, CorrectionRuleset.BAAN_TABLE)

    @property
    def formula(self) -> FormulaSet:
        return FormulaSet.OURS if self.name.startswith("OURS") else FormulaSet.BAAN


@dataclass(frozen=True)
class ProtocolRun:
    outcome: Outcome
    probability: float
    fidelity_after_correction: float
    defined: bool = True


def input_state(c: InputCoefficients) -> PureState:
    n = c.dim
    amps = np.zeros(n * n, dtype=np.complex128)
    amps[np.arange(n) * (n + 1)] = c.alpha
    return PureState(n, 2, amps)


def total_state(c: InputCoefficients, conv: MEBasisConvention) -> PureState:
    """Register 1-2-3-4: input on 1-2, ``|Phi_00>`` on 3-4."""
    return tensor(input_state(c), me_state(conv, c.dim, 0, 0))


def _diagonal_pairs_state(dim: int, coeffs: np.ndarray, first, second) -> PureState:
    amps = np.zeros(dim * dim, dtype=np.complex128)
    np.add.at(amps, np.asarray(first) * dim + np.asarray(second), coeffs)
    return PureState(dim, 2, amps)


def predicted_residual(f: FormulaSet, c: InputCoefficients, m: int, n: int) -> PureState:
    """Normalized 2-4 state left after Alice finds ``|Phi_mn>`` on 1-3.

    Amplitude on ``|k, k+n>`` is ``alpha_k * omega**((k+n mod N) + 1)*m`` for
    the corrected expansion and ``alpha_k * omega**(-k*m)`` for the original one.
    """
    dim = c.dim
    k = np.arange(dim)
    if f is FormulaSet.OURS:
        expo = (((k + n) % dim) + 1) * m
    else:
        expo = -k * m
    return _diagonal_pairs_state(dim, c.alpha * root_powers(dim, expo), k, (k + n) % dim)


def predicted_collapsed(f: FormulaSet, c: InputCoefficients, o: Outcome) -> PureState:
    """Normalized 4-5 state after both of Alice's measurements.

    Amplitude on ``|k+n, k+n>`` is ``alpha_k * omega**(-k*j)`` with
    ``j = l - m`` (corrected) or ``j = l + m`` (original).
    """
    dim = c.dim
    k = np.arange(dim)
    j = correction_index(f, dim, o)
    kn = (k + o.n) % dim
    return _diagonal_pairs_state(dim, c.alpha * root_powers(dim, -k * j), kn, kn)


@lru_cache(maxsize=64)
def control_change_gate(dim: int) -> PhasePermOp:
    """``|x, y> -> |x, x+y mod N>``."""
    if dim < 2:
        raise DomainError(f"dimension must be >= 2, got {dim}")
    x, y = np.divmod(np.arange(dim * dim), dim)
    return PhasePermOp(x * dim + (x + y) % dim, np.zeros(dim * dim, dtype=np.int64), dim)


def rotated_ket(dim: int, l: int) -> PureState:
    """Fourier basis vector ``N**-0.5 * sum_k omega**(k*l) |k>``."""
    if not 0 <= l < dim:
        raise DomainError(f"l={l} out of range for N={dim}")
    return PureState(dim, 1, root_powers(dim, np.arange(dim) * l) / np.sqrt(dim))


def correction_index(f: FormulaSet, dim: int, o: Outcome) -> int:
    return (o.l - o.m) % dim if f is FormulaSet.OURS else (o.l + o.m) % dim


@lru_cache(maxsize=4096)
def formula_correction(dim: int, j: int, n: int) -> PhasePermOp:
    """``(Z**j X**-n) (x) X**-n``.

    On the diagonal subspace this is ``sum_q omega**(q*j) |q,q><q+n,q+n|``;
    off it, the extension keeps the operator unitary.
    """
    back = shift(dim).power((-n) % dim)
    return (clock(dim).power(j % dim) @ back).kron(back)


def correction(rs, dim: int, o: Outcome) -> PhasePermOp:
    """Bob's two-qudit correction for outcome ``o``.

    ``rs`` is a :class:`CorrectionRuleset` or any object with an
    ``operator(outcome)`` method and a ``dim`` attribute (e.g. a loaded table).
    """
    if not all(0 <= v < dim for v in o):
        raise DomainError(f"outcome {tuple(o)} out of range for N={dim}")
    if isinstance(rs, CorrectionRuleset):
        if rs.is_table:
            if dim != 3:
                raise UnsupportedError(f"{rs.value} is only defined for N=3, got N={dim}")
            from .tables import builtin_table

            return builtin_table(rs).operator(o)
        return formula_correction(dim, correction_index(rs.formula, dim, o), o.n)
    if rs.dim != dim:
        raise UnsupportedError(f"table is for N={rs.dim}, got N={dim}")
    return rs.operator(o)


def diagonal_restriction(op: PhasePermOp, dim: int) -> np.ndarray:
    """``R[a, b] = <a,a| U |b,b>``."""
    diag = np.arange(dim) * (dim + 1)
    return op.matrix()[np.ix_(diag, diag)]


@dataclass(frozen=True, eq=False)
class ProtocolTrace:
    """Intermediate (unnormalized) states of one branch of the protocol."""

    residual_24: PureState
    after_gate_245: PureState
    collapsed_45: PureState
    corrected_45: PureState
    probability: float


def trace_protocol(
    c: InputCoefficients, conv: MEBasisConvention, rs, o: Outcome
) -> ProtocolTrace:
    dim = c.dim
    state = total_state(c, conv)
    residual, _ = project_subsystem(state, me_state(conv, dim, o.m, o.n), (1, 3))
    # residual slots: (2, 4) -> adjoin ancilla 5 in |0>
    gated = apply_on_slots(control_change_gate(dim), tensor(residual, make_ket(dim, [0])), (2, 3))
    collapsed, prob = project_subsystem(gated, rotated_ket(dim, o.l), (1,))
    corrected = apply_on_slots(correction(rs, dim, o), collapsed, (1, 2))
    return ProtocolTrace(residual, gated, collapsed, corrected, prob)


def run_protocol(
    c: InputCoefficients, conv: MEBasisConvention, rs, o: Outcome
) -> ProtocolRun:
    t = trace_protocol(c, conv, rs, o)
    if t.corrected_45.norm_sq == 0.0:
        return ProtocolRun(o, 0.0, 0.0, defined=False)
    return ProtocolRun(o, t.probability, fidelity(t.corrected_45, input_state(c)))
