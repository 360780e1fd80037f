import numpy as np
import pytest

from dfs_states import make_F, make_psi0
from errors import ArgumentError, NormalizationError, SizeError
from qcore import (
    DensityOperator,
    Outcome,
    QuantumState,
    Wing,
    apply_collective,
    basis_state,
    collective_operator,
    fidelity,
    haar_su2,
    haar_su2_batch,
    identity2,
    inverse_permutation,
    kron_power,
    kron_power_batch,
    measure_projective,
    partial_trace,
    pauli,
    permute_qubits,
    state_from_kets,
    swap,
    tensor,
)


def test_basis_state_uses_first_qubit_as_most_significant_bit():
    s = basis_state("0101")
    assert s.n_qubits == 4
    assert s.amplitudes[5] == 1


def test_state_must_be_normalized():
    with pytest.raises(NormalizationError):
        QuantumState(np.array([1.0, 1.0]))
    s = QuantumState.from_amplitudes([1.0, 1.0], normalize=True)
    assert s.amplitudes[0] == pytest.approx(1 / np.sqrt(2))


def test_amplitudes_are_read_only():
    s = basis_state("01")
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1


def test_tensor_refuses_more_than_eight_qubits():
    with pytest.raises(SizeError):
        tensor(basis_state("00000"), basis_state("0000"))
    assert tensor(basis_state("0000"), basis_state("1111")).n_qubits == 8


def test_permute_qubits_moves_bits():
    s = permute_qubits(basis_state("0011"), swap(2, 3))
    assert s.distance(basis_state("0101")) < 1e-15


def test_permutation_round_trip_and_validation():
    s = state_from_kets({"0011": 1, "0110": 2, "1000": 2}, scale=1 / 3)
    perm = [3, 1, 4, 2]
    back = permute_qubits(permute_qubits(s, perm), inverse_permutation(perm))
    assert back.distance(s) < 1e-15
    with pytest.raises(ArgumentError):
        permute_qubits(s, [1, 1, 2, 3])


def test_haar_su2_is_special_unitary_and_seeded():
    u = haar_su2(7)
    m = u.entries
    np.testing.assert_allclose(m.conj().T @ m, np.eye(2), atol=1e-12)
    assert np.linalg.det(m) == pytest.approx(1.0)
    np.testing.assert_array_equal(haar_su2(7).entries, m)


def test_haar_batch_moments(rng):
    us = haar_su2_batch(rng, 20000)
    x = np.abs(us[:, 0, 0]) ** 2
    # |U00|^2 is uniform on [0, 1]
    assert x.mean() == pytest.approx(0.5, abs=5 * np.sqrt(1 / 12 / len(x)))


def test_kron_power_batch_matches_kron_power(rng):
    us = haar_su2_batch(rng, 3)
    batch = kron_power_batch(us, 3)
    for u, b in zip(us, batch):
        np.testing.assert_allclose(b, kron_power(u, 3), atol=1e-14)


def test_collective_spin_annihilates_dfs_states(dfs_pair):
    for state in dfs_pair:
        for axis in "xyz":
            out = collective_operator(pauli(axis), 4) @ state.amplitudes
            assert np.linalg.norm(out) < 1e-12


def test_apply_collective_leaves_dfs_states_invariant(dfs_pair, rng):
    for state in dfs_pair:
        u = haar_su2(rng)
        assert apply_collective(state, u).distance(state) < 1e-12


def test_apply_collective_on_one_wing(eta, rng):
    u = haar_su2(rng)
    assert apply_collective(eta, u, Wing.ALICE).distance(eta) < 1e-12
    with pytest.raises(ArgumentError):
        apply_collective(basis_state("0101"), u, Wing.BOB)


def test_partial_trace_of_singlet_is_maximally_mixed():
    singlet = state_from_kets({"01": 1, "10": -1}, scale=1 / np.sqrt(2))
    rho = partial_trace(singlet, keep=[2])
    np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-15)
    rho_from_density = partial_trace(singlet.density(), keep=[1])
    np.testing.assert_allclose(rho_from_density.matrix, np.eye(2) / 2, atol=1e-15)


def test_partial_trace_argument_checks():
    with pytest.raises(ArgumentError):
        partial_trace(basis_state("01"), keep=[])
    with pytest.raises(ArgumentError):
        partial_trace(basis_state("01"), keep=[3])


def test_density_operator_invariants():
    with pytest.raises(NormalizationError):
        DensityOperator(np.array([[1, 1], [0, 0]]))
    with pytest.raises(NormalizationError):
        DensityOperator(np.eye(2))
    rho = DensityOperator(np.diag([0.75, 0.25]))
    values, _ = rho.spectrum()
    np.testing.assert_allclose(values, [0.75, 0.25])
    assert not rho.is_pure()


def test_measure_projective_reports_null_outcome():
    s = state_from_kets({"0": 1, "1": 1}, scale=1 / np.sqrt(2))
    p0 = np.diag([1.0, 0.0])
    dist = measure_projective(s, {Outcome.PLUS: p0})
    assert dist[Outcome.PLUS] == pytest.approx(0.5)
    assert dist[Outcome.NULL] == pytest.approx(0.5)
    with pytest.raises(ArgumentError):
        measure_projective(s, {Outcome.PLUS: p0, Outcome.MINUS: np.full((2, 2), 0.5)})


def test_fidelity_paths(dfs_pair):
    phi0, phi1 = dfs_pair
    assert fidelity(phi0, phi1) == pytest.approx(0.0, abs=1e-15)
    mixed = DensityOperator((phi0.density().matrix + phi1.density().matrix) / 2)
    assert fidelity(phi0, mixed) == pytest.approx(0.5)
    assert fidelity(mixed, phi0) == pytest.approx(0.5)
    # rank-deficient on both sides: no rounding noise from the zero eigenvalues
    assert abs(fidelity(mixed, mixed) - 1) < 1e-12


def test_outcome_labels():
    assert [o.label for o in (Outcome.MINUS, Outcome.NULL, Outcome.PLUS)] == ["-1", "null", "+1"]


def test_partial_trace_of_a_product_keeps_the_first_factor(rng):
    a = QuantumState.from_amplitudes(rng.standard_normal(4) + 1j * rng.standard_normal(4), normalize=True)
    b = QuantumState.from_amplitudes(rng.standard_normal(4) + 1j * rng.standard_normal(4), normalize=True)
    product = tensor(a, b)
    np.testing.assert_allclose(partial_trace(product, keep=[1, 2]).matrix, a.density().matrix, atol=1e-12)
    np.testing.assert_allclose(partial_trace(product.density(), keep=[3, 4]).matrix, b.density().matrix, atol=1e-12)


def test_measure_projective_on_four_qubit_states():
    # |psi0> = (|phi0> + sqrt3 |phi1>)/2
    dist = measure_projective(make_psi0(), make_F().projectors())
    assert dist[Outcome.MINUS] == pytest.approx(1 / 4, abs=1e-12)
    assert dist[Outcome.PLUS] == pytest.approx(3 / 4, abs=1e-12)
    assert dist[Outcome.NULL] == pytest.approx(0.0, abs=1e-12)


def test_measure_projective_rejects_non_projectors():
    s = basis_state("0")
    with pytest.raises(ArgumentError, match="idempotent"):
        measure_projective(s, {Outcome.PLUS: 2 * np.diag([1.0, 0.0])})
    with pytest.raises(ArgumentError, match="idempotent"):
        measure_projective(s, {Outcome.PLUS: np.array([[0.0, 1.0], [0.0, 0.0]])})
    # an overlap of 1e-7 is far above the default tolerance
    eps = 1e-7
    v = np.array([eps, np.sqrt(1 - eps**2)])
    with pytest.raises(ArgumentError, match="orthogonal"):
        measure_projective(s, {Outcome.MINUS: np.diag([1.0, 0.0]), Outcome.PLUS: np.outer(v, v)})
    with pytest.raises(ArgumentError):
        measure_projective(s, {Outcome.PLUS: np.eye(4)})


def test_identity_rotation_leaves_states_unchanged(dfs_pair):
    phi0, _ = dfs_pair
    np.testing.assert_array_equal(identity2().entries, np.eye(2))
    assert apply_collective(basis_state("0101"), identity2()).distance(basis_state("0101")) < 1e-15
    assert apply_collective(phi0, identity2()).distance(phi0) < 1e-15
