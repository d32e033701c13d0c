"""Dense state vectors for registers of qudits and phase-permutation operators.

Basis labels are big-endian: qudit 1 is the most significant digit, so
``|d_1 d_2 ... d_Q>`` sits at index ``sum(d_i * N**(Q - i))``. Slot numbers
are 1-based throughout, matching the usual labelling of a protocol's parties.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-10


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


def omega(n: int) -> complex:
    """Principal primitive ``n``-th root of unity, ``exp(2*pi*i/n)``."""
    return complex(np.exp(2j * np.pi / n))


def root_powers(n: int, exponents) -> np.ndarray:
    """Evaluate ``omega(n) ** e`` elementwise, reducing ``e`` mod ``n`` first.

    Reducing before exponentiating keeps equal exponents bit-identical.
    """
    e = np.mod(np.asarray(exponents, dtype=np.int64), n)
    return np.exp(2j * np.pi * e / n)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Amplitude vector of ``qudits`` qudits, each of dimension ``dim``.

    The vector need not be normalized; residuals of a projection keep their
    weight so that ``norm_sq`` is the probability of the branch.
    """

    dim: int
    qudits: int
    amps: np.ndarray

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise DomainError(f"qudit dimension must be >= 2, got {self.dim}")
        if self.qudits < 1:
            raise DomainError(f"need at least one qudit, got {self.qudits}")
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        if amps.size != self.dim**self.qudits:
            raise DomainError(
                f"expected {self.dim}**{self.qudits} = {self.dim**self.qudits} "
                f"amplitudes, got {amps.size}"
            )
        if not np.all(np.isfinite(amps)):
            raise DomainError("amplitudes must be finite")
        object.__setattr__(self, "amps", _freeze(amps))

    @classmethod
    def from_amplitudes(cls, dim: int, amps: Sequence[complex]) -> PureState:
        """Infer the qudit count from the vector length."""
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        q, size = 0, 1
        while size < amps.size:
            size *= dim
            q += 1
        if size != amps.size or q == 0:
            raise DomainError(f"length {amps.size} is not a positive power of {dim}")
        return cls(dim, q, amps)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))

    def is_normalized(self, tol: float = DEFAULT_TOL) -> bool:
        return abs(self.norm_sq - 1.0) <= tol

    def normalized(self) -> PureState:
        n = self.norm
        if n == 0.0:
            raise DomainError("cannot normalize the zero vector")
        return PureState(self.dim, self.qudits, self.amps / n)

    def scaled(self, factor: complex) -> PureState:
        return PureState(self.dim, self.qudits, self.amps * factor)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qudit."""
        return self.amps.reshape((self.dim,) * self.qudits)

    def __repr__(self) -> str:
        return f"PureState(dim={self.dim}, qudits={self.qudits}, norm_sq={self.norm_sq:.6g})"


def encode(dim: int, digits: Sequence[int]) -> int:
    """Big-endian index of a computational basis label."""
    idx = 0
    for d in digits:
        idx = idx * dim + int(d)
    return idx


def decode(dim: int, qudits: int, index: int) -> tuple[int, ...]:
    digits = []
    for _ in range(qudits):
        index, r = divmod(index, dim)
        digits.append(r)
    return tuple(reversed(digits))


def make_ket(dim: int, digits: Sequence[int]) -> PureState:
    """Computational basis state ``|digits>``."""
    digits = list(digits)
    if not digits:
        raise DomainError("a ket needs at least one digit")
    for d in digits:
        if not 0 <= d < dim:
            raise DomainError(f"digit {d} out of range for dimension {dim}")
    amps = np.zeros(dim ** len(digits), dtype=np.complex128)
    amps[encode(dim, digits)] = 1.0
    return PureState(dim, len(digits), amps)


def tensor(a: PureState, b: PureState) -> PureState:
    """Kronecker product with ``a`` on the leading slots."""
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return PureState(a.dim, a.qudits + b.qudits, np.kron(a.amps, b.amps))


def inner(a: PureState, b: PureState) -> complex:
    """``<a|b>``, antilinear in the first argument."""
    if a.dim != b.dim or a.qudits != b.qudits:
        raise DomainError(
            f"shape mismatch: ({a.dim}, {a.qudits}) vs ({b.dim}, {b.qudits})"
        )
    return complex(np.vdot(a.amps, b.amps))


def fidelity(a: PureState, b: PureState) -> float:
    """``|<a|b>|^2 / (<a|a><b|b>)``; insensitive to global phase and scale."""
    na, nb = a.norm_sq, b.norm_sq
    if na == 0.0 or nb == 0.0:
        raise DomainError("fidelity is undefined for a zero-norm state")
    f = abs(inner(a, b)) ** 2 / (na * nb)
    return float(min(max(f, 0.0), 1.0))


def equal_up_to_global_phase(a: PureState, b: PureState, tol: float = DEFAULT_TOL) -> bool:
    return fidelity(a, b) >= 1.0 - tol


def _check_slots(slots: Iterable[int], qudits: int) -> tuple[int, ...]:
    slots = tuple(int(s) for s in slots)
    if not slots:
        raise DomainError("slot set is empty")
    if len(set(slots)) != len(slots):
        raise DomainError(f"duplicate slots in {slots}")
    for s in slots:
        if not 1 <= s <= qudits:
            raise DomainError(f"slot {s} out of range 1..{qudits}")
    return slots


def _slots_first(state: PureState, slots: tuple[int, ...]) -> tuple[np.ndarray, list[int]]:
    """Matrix view with the named slots on the row axis (in the given order)."""
    axes = [s - 1 for s in slots]
    rest = [i for i in range(state.qudits) if i not in axes]
    t = np.transpose(state.tensor(), axes + rest)
    return t.reshape(state.dim ** len(axes), -1), axes + rest


def project_subsystem(
    state: PureState, bra: PureState, slots: Sequence[int]
) -> tuple[PureState, float]:
    """Contract ``<bra|`` against ``slots`` and return the unnormalized residual.

    Surviving qudits keep their relative order. The second return value is the
    squared norm of the residual, i.e. the probability of this outcome when
    ``state`` is normalized.
    """
    slots = _check_slots(slots, state.qudits)
    if bra.dim != state.dim:
        raise DomainError(f"dimension mismatch: {bra.dim} vs {state.dim}")
    if bra.qudits != len(slots):
        raise DomainError(f"bra has {bra.qudits} qudits but {len(slots)} slots were named")
    if len(slots) == state.qudits:
        raise DomainError("projection must leave at least one qudit")
    mat, _ = _slots_first(state, slots)
    residual = PureState(state.dim, state.qudits - len(slots), bra.amps.conj() @ mat)
    return residual, residual.norm_sq


@dataclass(frozen=True, eq=False)
class PhasePermOp:
    """Unitary ``U|i> = omega**phases[i] |perm[i]>`` on a ``dim``-dimensional space.

    ``root_order`` fixes which root of unity the integer phases refer to.
    """

    perm: np.ndarray
    phases: np.ndarray
    root_order: int

    def __post_init__(self) -> None:
        perm = np.asarray(self.perm, dtype=np.int64).reshape(-1)
        phases = np.asarray(self.phases, dtype=np.int64).reshape(-1)
        if perm.size != phases.size:
            raise DomainError("perm and phases must have the same length")
        if self.root_order < 1:
            raise DomainError(f"root order must be positive, got {self.root_order}")
        if sorted(perm.tolist()) != list(range(perm.size)):
            raise DomainError("perm is not a bijection on the basis labels")
        if np.any(phases < 0) or np.any(phases >= self.root_order):
            raise DomainError(f"phase exponents must lie in 0..{self.root_order - 1}")
        object.__setattr__(self, "perm", _freeze(perm))
        object.__setattr__(self, "phases", _freeze(phases))

    @property
    def dim(self) -> int:
        return int(self.perm.size)

    @classmethod
    def build(cls, perm, phases, root_order: int) -> PhasePermOp:
        """Like the constructor but reduces phase exponents mod ``root_order``."""
        return cls(perm, np.mod(np.asarray(phases, dtype=np.int64), root_order), root_order)

    @classmethod
    def identity(cls, dim: int, root_order: int) -> PhasePermOp:
        return cls(np.arange(dim), np.zeros(dim, dtype=np.int64), root_order)

    def matrix(self) -> np.ndarray:
        u = np.zeros((self.dim, self.dim), dtype=np.complex128)
        u[self.perm, np.arange(self.dim)] = root_powers(self.root_order, self.phases)
        return u

    def apply_vector(self, vec: np.ndarray) -> np.ndarray:
        """Apply to the leading axis of ``vec`` (a vector or a stack of columns)."""
        out = np.empty_like(vec)
        w = root_powers(self.root_order, self.phases)
        if vec.ndim == 1:
            out[self.perm] = w * vec
        else:
            out[self.perm] = w[:, None] * vec
        return out

    def _check_compatible(self, other: PhasePermOp) -> None:
        if self.root_order != other.root_order:
            raise DomainError(
                f"root order mismatch: {self.root_order} vs {other.root_order}"
            )

    def __matmul__(self, other: PhasePermOp) -> PhasePermOp:
        """Composition: ``(self @ other)|i> = self(other|i>)``."""
        self._check_compatible(other)
        if self.dim != other.dim:
            raise DomainError(f"dimension mismatch: {self.dim} vs {other.dim}")
        perm = self.perm[other.perm]
        phases = other.phases + self.phases[other.perm]
        return PhasePermOp.build(perm, phases, self.root_order)

    def kron(self, other: PhasePermOp) -> PhasePermOp:
        self._check_compatible(other)
        db = other.dim
        perm = (self.perm[:, None] * db + other.perm[None, :]).reshape(-1)
        phases = (self.phases[:, None] + other.phases[None, :]).reshape(-1)
        return PhasePermOp.build(perm, phases, self.root_order)

    def power(self, k: int) -> PhasePermOp:
        if k < 0:
            return self.inverse().power(-k)
        out = PhasePermOp.identity(self.dim, self.root_order)
        for _ in range(k):
            out = self @ out
        return out

    def inverse(self) -> PhasePermOp:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.dim)
        return PhasePermOp.build(inv, -self.phases[inv], self.root_order)

    def same_as(self, other: PhasePermOp) -> bool:
        """Exact equality of the integer data."""
        return (
            self.root_order == other.root_order
            and np.array_equal(self.perm, other.perm)
            and np.array_equal(self.phases, other.phases)
        )

    def __repr__(self) -> str:
        return (
            f"PhasePermOp(perm={self.perm.tolist()}, phases={self.phases.tolist()}, "
            f"root_order={self.root_order})"
        )


def shift(n: int) -> PhasePermOp:
    """Generalized Pauli ``X|q> = |q+1 mod n>``."""
    return PhasePermOp((np.arange(n) + 1) % n, np.zeros(n, dtype=np.int64), n)


def clock(n: int) -> PhasePermOp:
    """Generalized Pauli ``Z|q> = omega**q |q>``."""
    return PhasePermOp(np.arange(n), np.arange(n), n)


def apply_on_slots(op: PhasePermOp, state: PureState, slots: Sequence[int]) -> PureState:
    """Apply ``op`` to the named slots (in that order) and identity elsewhere."""
    slots = _check_slots(slots, state.qudits)
    if op.dim != state.dim ** len(slots):
        raise DomainError(
            f"operator dimension {op.dim} does not match {len(slots)} "
            f"qudit(s) of dimension {state.dim}"
        )
    mat, order = _slots_first(state, slots)
    new = op.apply_vector(mat).reshape((state.dim,) * state.qudits)
    back = np.argsort(order)
    return PureState(state.dim, state.qudits, np.transpose(new, back).reshape(-1))


def random_state(dim: int, qudits: int, rng: np.random.Generator) -> PureState:
    """Haar-distributed normalized state."""
    v = rng.normal(size=dim**qudits) + 1j * rng.normal(size=dim**qudits)
    return PureState(dim, qudits, v / np.linalg.norm(v))
