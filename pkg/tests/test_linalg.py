import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_apply, brute_project
from qudit_teleport.linalg import (
    DomainError,
    PhasePermOp,
    PureState,
    apply_on_slots,
    clock,
    equal_up_to_global_phase,
    fidelity,
    inner,
    make_ket,
    project_subsystem,
    random_state,
    shift,
    tensor,
)
from qudit_teleport.protocol import M2, InputCoefficients, me_state, total_state
from qudit_teleport.tables import builtin_table
from qudit_teleport.protocol import CorrectionRuleset, Outcome

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=5)


def random_op(dim, rng):
    return PhasePermOp(rng.permutation(dim), rng.integers(0, dim, size=dim), dim)


@pytest.mark.parametrize(
    "dim, digits, index, size",
    [(3, [0, 0], 0, 9), (3, [2, 0], 6, 9), (3, [1, 2, 0], 15, 27)],
)
def test_make_ket_big_endian(dim, digits, index, size):
    ket = make_ket(dim, digits)
    expected = np.zeros(size)
    expected[index] = 1
    assert ket.qudits == len(digits)
    np.testing.assert_array_equal(ket.amps, expected)


@pytest.mark.parametrize("digits", [[3], [0, -1], []])
def test_make_ket_rejects_bad_digits(digits):
    with pytest.raises(DomainError):
        make_ket(3, digits)


def test_state_length_invariant():
    with pytest.raises(DomainError):
        PureState(3, 2, np.ones(8))
    with pytest.raises(DomainError):
        PureState(3, 1, [np.nan, 0, 0])


def test_state_is_immutable():
    ket = make_ket(3, [1])
    with pytest.raises(ValueError):
        ket.amps[0] = 1


def test_tensor_of_kets():
    assert np.array_equal(tensor(make_ket(3, [1]), make_ket(3, [2])).amps, make_ket(3, [1, 2]).amps)


def test_tensor_dimension_mismatch():
    with pytest.raises(DomainError):
        tensor(make_ket(2, [0]), make_ket(3, [0]))


def test_tensor_with_me_pair_is_normalized():
    psi = PureState(3, 2, make_ket(3, [0, 0]).amps)
    phi = PureState(3, 2, np.array([1, 0, 0, 0, 1, 0, 0, 0, 1]) / np.sqrt(3))
    # direct: |1|^2 * 3 * (1/sqrt3)^2
    assert tensor(psi, phi).norm_sq == pytest.approx(1.0, abs=1e-12)


@given(seeds, dims)
def test_tensor_norm_multiplicative(seed, dim):
    rng = np.random.default_rng(seed)
    a, b = random_state(dim, 1, rng), random_state(dim, 2, rng)
    assert tensor(a, b).norm_sq == pytest.approx(1.0, abs=1e-12)


def test_inner_basics():
    rng = np.random.default_rng(0)
    psi = random_state(3, 2, rng).scaled(2.0)
    assert inner(psi, psi) == pytest.approx(4.0)
    assert inner(make_ket(3, [0]), make_ket(3, [1])) == 0
    with pytest.raises(DomainError):
        inner(make_ket(3, [0]), make_ket(3, [0, 0]))


def test_fidelity_examples():
    rng = np.random.default_rng(1)
    psi = random_state(3, 2, rng)
    assert fidelity(psi, psi) == pytest.approx(1.0)
    assert fidelity(psi, psi.scaled(np.exp(0.7j))) == pytest.approx(1.0)
    w = np.exp(2j * np.pi / 3)
    uniform = PureState(3, 2, np.array([1, 0, 0, 0, 1, 0, 0, 0, 1]) / np.sqrt(3))
    twisted = PureState(3, 2, np.array([1, 0, 0, 0, w, 0, 0, 0, w**2]) / np.sqrt(3))
    # |1 + w + w^2|^2 / 9 = 0
    assert fidelity(uniform, twisted) == pytest.approx(0.0, abs=1e-15)


def test_fidelity_zero_norm():
    with pytest.raises(DomainError):
        fidelity(PureState(3, 1, np.zeros(3)), make_ket(3, [0]))


@given(seeds)
def test_fidelity_symmetric(seed):
    rng = np.random.default_rng(seed)
    a, b = random_state(3, 2, rng), random_state(3, 2, rng)
    assert abs(fidelity(a, b) - fidelity(b, a)) <= 1e-12


def test_equal_up_to_global_phase():
    rng = np.random.default_rng(2)
    psi = random_state(3, 1, rng)
    assert equal_up_to_global_phase(psi, psi.scaled(-1))
    assert not equal_up_to_global_phase(make_ket(3, [0]), make_ket(3, [1]))


def test_project_basis_kets():
    res, p = project_subsystem(make_ket(3, [1, 2]), make_ket(3, [1]), [1])
    assert p == 1.0 and np.array_equal(res.amps, make_ket(3, [2]).amps)
    res, p = project_subsystem(make_ket(3, [1, 2]), make_ket(3, [0]), [1])
    assert p == 0.0 and not res.amps.any()


def test_project_total_state_me_pair():
    rng = np.random.default_rng(3)
    alpha = rng.normal(size=3) + 1j * rng.normal(size=3)
    c = InputCoefficients(3, alpha / np.linalg.norm(alpha))
    state = total_state(c, M2)
    bra = me_state(M2, 3, 0, 0)
    res, p = project_subsystem(state, bra, [1, 3])
    oracle = brute_project(state.amps, 3, 4, bra.amps, [1, 3])
    np.testing.assert_allclose(res.amps, oracle, atol=1e-14)
    assert p == pytest.approx(1 / 9, abs=1e-12)


@pytest.mark.parametrize("slots", [[0], [5], [1, 1]])
def test_project_bad_slots(slots):
    state = make_ket(3, [0, 0, 0])
    bra = make_ket(3, [0] * len(slots))
    with pytest.raises(DomainError):
        project_subsystem(state, bra, slots)


@given(seeds, st.permutations([1, 2, 3, 4]).map(lambda p: p[:2]))
def test_project_matches_brute_force(seed, slots):
    rng = np.random.default_rng(seed)
    state, bra = random_state(3, 4, rng), random_state(3, 2, rng)
    res, p = project_subsystem(state, bra, slots)
    np.testing.assert_allclose(res.amps, brute_project(state.amps, 3, 4, bra.amps, slots), atol=1e-13)
    assert p == pytest.approx(res.norm_sq)


@given(seeds, dims)
@settings(max_examples=30)
def test_projection_completeness(seed, dim):
    rng = np.random.default_rng(seed)
    state = random_state(dim, 3, rng).scaled(1.7)
    basis = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))[0]
    total = sum(project_subsystem(state, PureState(dim, 1, basis[:, i]), [2])[1] for i in range(dim))
    assert total == pytest.approx(state.norm_sq, abs=1e-10)


def test_tensor_project_round_trip():
    a, b = make_ket(3, [2, 1]), make_ket(3, [0])
    res, p = project_subsystem(tensor(a, b), a, [1, 2])
    assert p == 1.0 and np.array_equal(res.amps, b.amps)


def test_apply_identity_and_shift():
    state = make_ket(3, [2, 0])
    assert np.array_equal(apply_on_slots(PhasePermOp.identity(3, 3), state, [1]).amps, state.amps)
    assert np.array_equal(apply_on_slots(shift(3), state, [1]).amps, make_ket(3, [0, 0]).amps)


def test_apply_printed_table_row():
    op = builtin_table(CorrectionRuleset.OURS_TABLE).operator(Outcome(0, 0, 1))
    out = apply_on_slots(op, make_ket(3, [1, 1]), [1, 2])
    np.testing.assert_allclose(out.amps, make_ket(3, [0, 0]).amps, atol=1e-15)


def test_apply_shape_mismatch():
    with pytest.raises(DomainError):
        apply_on_slots(shift(3), make_ket(3, [0, 0]), [1, 2])


@given(seeds, st.permutations([1, 2, 3]).map(lambda p: p[:2]))
def test_apply_matches_brute_force(seed, slots):
    rng = np.random.default_rng(seed)
    op, state = random_op(9, rng), random_state(3, 3, rng)
    op = PhasePermOp(op.perm, op.phases % 3, 3)
    out = apply_on_slots(op, state, slots)
    np.testing.assert_allclose(out.amps, brute_apply(op.matrix(), state.amps, 3, 3, slots), atol=1e-13)


def test_norm_preservation_100_states():
    rng = np.random.default_rng(4)
    for _ in range(100):
        dim = int(rng.integers(2, 5))
        op = random_op(dim * dim, rng)
        op = PhasePermOp(op.perm, op.phases % dim, dim)
        psi = random_state(dim, 3, rng)
        slots = list(rng.permutation([1, 2, 3])[:2])
        assert abs(apply_on_slots(op, psi, slots).norm - psi.norm) <= 1e-12


@given(seeds, st.integers(min_value=2, max_value=16))
def test_phase_perm_unitary(seed, dim):
    op = random_op(dim, np.random.default_rng(seed))
    u = op.matrix()
    assert np.abs(u.conj().T @ u - np.eye(dim)).max() <= 1e-12


def test_phase_perm_rejects_non_bijection():
    with pytest.raises(DomainError):
        PhasePermOp([0, 0, 1], [0, 0, 0], 3)
    with pytest.raises(DomainError):
        PhasePermOp([0, 1, 2], [0, 3, 0], 3)


@given(seeds, dims)
def test_phase_perm_algebra_matches_dense(seed, dim):
    rng = np.random.default_rng(seed)
    a, b = random_op(dim, rng), random_op(dim, rng)
    np.testing.assert_allclose((a @ b).matrix(), a.matrix() @ b.matrix(), atol=1e-12)
    np.testing.assert_allclose(a.kron(b).matrix(), np.kron(a.matrix(), b.matrix()), atol=1e-12)
    np.testing.assert_allclose(a.inverse().matrix(), a.matrix().conj().T, atol=1e-12)


def test_clock_and_shift_commutation():
    for dim in range(2, 8):
        x, z = shift(dim).matrix(), clock(dim).matrix()
        w = np.exp(2j * np.pi / dim)
        np.testing.assert_allclose(z @ x, w * x @ z, atol=1e-12)
