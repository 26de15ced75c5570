import numpy as np
import pytest

from qelmsim import linalg as la
from qelmsim.reservoir import HamiltonianSpec, sample_hamiltonian
from qelmsim.scrambling import (
    PAULI_EIGENSTATES,
    averaged_otoc,
    heisenberg_evolve,
    local_channel,
    local_holevo_profile,
    otoc_pair,
)

from _oracles import bloch_density, random_density, random_hermitian, random_unitary, swap_unitary


class TestHeisenbergEvolve:
    def test_identity(self):
        o = random_hermitian(np.random.default_rng(0), 4)
        assert np.max(np.abs(heisenberg_evolve(np.eye(4), o) - o)) == 0.0

    def test_x_rotation_takes_z_to_y(self):
        # 2x2 hand computation: U = exp(-i pi/4 sx) gives U^dag sz U = sy
        u = la.evolve_unitary(la.herm_eig(la.PAULI_X), np.pi / 4)
        out = heisenberg_evolve(u, la.PAULI_Z)
        assert np.max(np.abs(out - la.PAULI_Y)) <= 1e-12

    def test_trace_and_hermiticity_preserved(self):
        rng = np.random.default_rng(1)
        for _ in range(3):
            o = random_hermitian(rng, 8)
            u = random_unitary(rng, 8)
            out = heisenberg_evolve(u, o)
            assert np.trace(out) == pytest.approx(np.trace(o), abs=1e-12)
            assert np.max(np.abs(out - out.conj().T)) <= 1e-12

    def test_spectrum_preserved(self):
        rng = np.random.default_rng(2)
        o = random_hermitian(rng, 8)
        u = random_unitary(rng, 8)
        assert np.allclose(
            np.linalg.eigvalsh(heisenberg_evolve(u, o)), np.linalg.eigvalsh(o), atol=1e-10
        )

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            heisenberg_evolve(np.eye(4), np.eye(8))


class TestOtocPair:
    def test_commuting_pair_is_zero(self):
        a = la.kron(la.PAULI_Z, np.eye(2))
        b = la.kron(np.eye(2), la.PAULI_X)
        assert otoc_pair(a, b, 4) == pytest.approx(0.0, abs=1e-14)

    def test_equal_paulis(self):
        assert otoc_pair(la.PAULI_X, la.PAULI_X, 2) == pytest.approx(0.0, abs=1e-14)

    def test_anticommuting_pair(self):
        # sx sz sx sz = -I so the correlator saturates its maximum of 2
        assert otoc_pair(la.PAULI_X, la.PAULI_Z, 2) == pytest.approx(2.0, abs=1e-14)

    def test_rejects_non_involutory(self):
        with pytest.raises(ValueError, match="involutory"):
            otoc_pair(np.diag([2.0, 1.0]), la.PAULI_Z, 2)
        with pytest.raises(ValueError, match="Hermitian"):
            otoc_pair(np.array([[0.0, 1.0], [0.0, 0.0]]), la.PAULI_Z, 2)

    def test_conjugation_invariance(self):
        rng = np.random.default_rng(3)
        a = la.kron(la.PAULI_Z, np.eye(2))
        b = la.kron(np.eye(2), la.PAULI_Y)
        base = otoc_pair(a, b, 4)
        for _ in range(3):
            v = random_unitary(rng, 4)
            conj = otoc_pair(v.conj().T @ a @ v, v.conj().T @ b @ v, 4)
            assert abs(conj - base) <= 1e-10

    def test_sign_flip_of_b_invariant(self):
        # quadratic in the static operator
        u = random_unitary(np.random.default_rng(4), 4)
        a = heisenberg_evolve(u, la.kron(la.PAULI_Z, np.eye(2)))
        b = la.kron(np.eye(2), la.PAULI_X)
        assert otoc_pair(a, b, 4) == pytest.approx(otoc_pair(a, -b, 4), abs=1e-12)


class TestAveragedOtoc:
    def test_identity_dynamics_zero(self):
        result = averaged_otoc(np.eye(8, dtype=complex), 2)
        assert result.per_pair.shape == (2, 3)
        assert np.max(np.abs(result.per_pair)) <= 1e-12
        assert abs(result.averaged) <= 1e-12

    def test_two_qubit_closed_form(self):
        # H = sx (x) sx anticommutes with sz (x) I, so the Heisenberg operator
        # rotates as cos(2t) sz(x)I + sin(2t) sy(x)sx; tracing the products by
        # hand gives C_x = 0 and C_y = C_z = 1 - cos(4t).
        h = np.kron(la.PAULI_X, la.PAULI_X)
        decomp = la.herm_eig(h)
        for t in (0.0, 0.2, 0.7, 1.3):
            u = la.evolve_unitary(decomp, t)
            result = averaged_otoc(u, 1)
            expected = np.array([[0.0, 1.0 - np.cos(4 * t), 1.0 - np.cos(4 * t)]])
            assert np.max(np.abs(result.per_pair - expected)) <= 1e-10
            assert result.averaged == pytest.approx(2.0 * (1.0 - np.cos(4 * t)) / 3.0, abs=1e-10)

    def test_matches_pairwise_route(self):
        rng = np.random.default_rng(5)
        u = random_unitary(rng, 8)
        result = averaged_otoc(u, 2)
        for i in range(2):
            a_t = heisenberg_evolve(u, la.embed_pauli("z", i, 3))
            for ai, axis in enumerate("xyz"):
                b = la.embed_pauli(axis, 2, 3)
                assert result.per_pair[i, ai] == pytest.approx(otoc_pair(a_t, b, 8), abs=1e-10)

    def test_range_bounds(self):
        rng = np.random.default_rng(6)
        for _ in range(3):
            result = averaged_otoc(random_unitary(rng, 16), 3)
            assert np.all(result.per_pair >= -1e-12)
            assert np.all(result.per_pair <= 2.0 + 1e-12)

    def test_reservoir_dim_normalization_flag(self):
        u = random_unitary(np.random.default_rng(7), 8)
        full = averaged_otoc(u, 2)
        literal = averaged_otoc(u, 2, reservoir_dim_norm=True)
        # trace term doubles relative to 1: 1 - C_literal = 2 (1 - C_full)
        assert np.allclose(1.0 - literal.per_pair, 2.0 * (1.0 - full.per_pair), atol=1e-12)

    def test_growth_from_zero_time(self):
        # small-time consistency for sampled couplings: tiny at t=1e-3 and
        # monotone over the first decade of times
        for seed in (0, 1, 2):
            ham = sample_hamiltonian(HamiltonianSpec(3, "C", "ML", seed=seed))
            decomp = la.herm_eig(ham.h_total)
            times = np.logspace(-3, -2, 6)
            values = [averaged_otoc(la.evolve_unitary(decomp, t), 3).averaged for t in times]
            assert values[0] <= 1e-4
            assert all(b > a for a, b in zip(values, values[1:]))


class TestLocalChannel:
    def test_identity(self):
        rng = np.random.default_rng(8)
        out = local_channel(np.eye(16, dtype=complex), random_density(rng, 2), 3, node=1)
        assert np.max(np.abs(out - np.diag([1.0, 0.0]))) <= 1e-14

    def test_swap_transfers_input(self):
        rho_in = bloch_density(0.2, 0.4, -0.1)
        for node in (0, 1, 2):
            u = swap_unitary(4, node, 3)
            out = local_channel(u, rho_in, 3, node=node)
            assert np.max(np.abs(out - rho_in)) <= 1e-13

    def test_channel_properties(self):
        rng = np.random.default_rng(9)
        u = random_unitary(rng, 16)
        out = local_channel(u, random_density(rng, 2), 3, node=2)
        assert abs(np.trace(out) - 1.0) <= 1e-10
        assert np.linalg.eigvalsh(out).min() >= -1e-10

    def test_node_out_of_range(self):
        with pytest.raises(ValueError, match="node"):
            local_channel(np.eye(16, dtype=complex), np.eye(2) / 2, 3, node=3)


class TestLocalHolevoProfile:
    def test_identity_dynamics_zero(self):
        result = local_holevo_profile(np.eye(16, dtype=complex), 3)
        assert result.per_node_per_axis.shape == (3, 3)
        assert np.max(np.abs(result.per_node_per_axis)) <= 1e-10
        assert abs(result.averaged) <= 1e-10

    def test_swap_gives_one_bit_at_target_node(self):
        u = swap_unitary(4, 1, 3)
        result = local_holevo_profile(u, 3, log_base=2)
        # the swapped node receives the input perfectly: 1 bit on every axis
        assert np.allclose(result.per_node_per_axis[1], 1.0, atol=1e-10)
        assert result.per_node[1] == pytest.approx(1.0, abs=1e-10)
        for node in (0, 2):
            assert abs(result.per_node[node]) <= 1e-10

    def test_bounds_random_unitaries(self):
        rng = np.random.default_rng(10)
        for _ in range(3):
            result = local_holevo_profile(random_unitary(rng, 16), 3, log_base=2)
            assert np.all(result.per_node_per_axis >= -1e-10)
            assert np.all(result.per_node_per_axis <= 1.0 + 1e-10)

    def test_full_output_is_one_bit_and_bounds_nodes(self):
        # without any partial trace the sigma_z ensemble stays orthogonal and
        # pure, so its Holevo information is exactly 1 bit under any unitary;
        # a single node can never beat it
        rng = np.random.default_rng(11)
        u = random_unitary(rng, 16)
        plus, minus = PAULI_EIGENSTATES["z"]
        full_p = u[:, :2] @ plus
        full_m = u[:, :2] @ minus
        rho_p = np.outer(full_p, full_p.conj())
        rho_m = np.outer(full_m, full_m.conj())
        s_mix = la.von_neumann_entropy(0.5 * (rho_p + rho_m), 2)
        chi_full = s_mix - 0.5 * (la.von_neumann_entropy(rho_p, 2) + la.von_neumann_entropy(rho_m, 2))
        assert chi_full == pytest.approx(1.0, abs=1e-10)
        result = local_holevo_profile(u, 3, log_base=2)
        assert np.all(result.per_node_per_axis[:, 2] <= chi_full + 1e-10)

    def test_log_base_conversion(self):
        u = random_unitary(np.random.default_rng(12), 16)
        bits = local_holevo_profile(u, 3, log_base=2)
        nats = local_holevo_profile(u, 3, log_base="e")
        assert np.allclose(nats.per_node_per_axis, bits.per_node_per_axis * np.log(2.0), atol=1e-12)

    def test_pauli_eigenstates_are_eigenstates(self):
        for axis, pauli in zip("xyz", (la.PAULI_X, la.PAULI_Y, la.PAULI_Z)):
            plus, minus = PAULI_EIGENSTATES[axis]
            assert np.max(np.abs(pauli @ plus - plus)) <= 1e-15
            assert np.max(np.abs(pauli @ minus + minus)) <= 1e-15
