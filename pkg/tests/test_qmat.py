import numpy as np
import pytest

from conftest import (
    binary_entropy,
    generalized_rabi_pe,
    random_density_matrix,
    random_pure_state,
    random_unitary,
)
from unravelsim import qmat
from unravelsim.errors import (
    DimensionError,
    InvalidOperatorError,
    InvalidStateError,
)
from unravelsim.protocol import h_rf


class TestExpmHermitian:
    def test_zero_generator_is_identity(self):
        u = qmat.expm_hermitian(np.zeros((2, 2), dtype=complex), 7.3)
        assert np.allclose(u, np.eye(2), atol=1e-14)

    def test_resonant_pi_pulse_flips(self):
        # Omega*t = pi: full population transfer |0> -> |1>.
        u = qmat.expm_hermitian(0.5 * 4.0 * qmat.SIGMA_X, np.pi / 4)
        assert abs(abs(u[1, 0]) ** 2 - 1.0) < 1e-12

    def test_generalized_rabi_population(self):
        # Analytic oracle: P_e(t) = Omega^2/(Omega^2+Delta^2) sin^2(sqrt(.)t/2).
        omega, delta, t = 4.0, 2.0, 2.0
        u = qmat.expm_hermitian(h_rf(omega, delta), t)
        psi = u @ np.array([1.0, 0.0], dtype=complex)
        pe = abs(psi[1]) ** 2
        assert abs(pe - generalized_rabi_pe(omega, delta, t)) < 1e-12
        assert abs(pe - 0.8 * np.sin(2 * np.sqrt(5)) ** 2) < 1e-12

    def test_matches_fine_step_propagator(self):
        # Independent cross-check: first-order product formula with tiny steps.
        h = h_rf(4.0, 2.0)
        t = 2.0
        n = 200_000
        step = np.eye(2) - 1j * h * (t / n)
        u_num = np.eye(2, dtype=complex)
        for _ in range(200):
            u_num = np.linalg.matrix_power(step, n // 200) @ u_num
        u = qmat.expm_hermitian(h, t)
        psi0 = np.array([1.0, 0.0], dtype=complex)
        p_exact = abs((u @ psi0)[1]) ** 2
        p_num = abs((u_num @ psi0)[1]) ** 2 / np.linalg.norm(u_num @ psi0) ** 2
        assert abs(p_exact - p_num) < 1e-3

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidOperatorError):
            qmat.expm_hermitian(np.array([[0, 1], [0, 0]], dtype=complex), 1.0)

    def test_inverse_property(self, rng):
        for _ in range(50):
            h = random_density_matrix(rng, 4) + random_density_matrix(rng, 4)
            t = rng.uniform(-3, 3)
            u = qmat.expm_hermitian(h, t) @ qmat.expm_hermitian(h, -t)
            assert np.max(np.abs(u - np.eye(4))) < 1e-10

    def test_composition_property(self, rng):
        for _ in range(50):
            h = random_density_matrix(rng, 2) * rng.uniform(0.5, 4)
            t1, t2 = rng.uniform(-2, 2, size=2)
            lhs = qmat.expm_hermitian(h, t1 + t2)
            rhs = qmat.expm_hermitian(h, t1) @ qmat.expm_hermitian(h, t2)
            assert np.max(np.abs(lhs - rhs)) < 1e-10


class TestPartialTrace:
    def test_product_state(self):
        psi00 = np.zeros(4, dtype=complex)
        psi00[0] = 1.0
        red = qmat.partial_trace(qmat.projector_of(psi00), keep=1)
        assert np.allclose(red, [[1, 0], [0, 0]], atol=1e-14)

    def test_bell_state_is_maximally_mixed(self):
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        red = qmat.partial_trace(qmat.projector_of(bell), keep=1)
        assert np.allclose(red, np.eye(2) / 2, atol=1e-14)

    def test_tensor_factors_recovered(self, rng):
        for _ in range(20):
            rho_a = random_density_matrix(rng, 2)
            rho_b = random_density_matrix(rng, 2)
            joint = np.kron(rho_a, rho_b)
            assert np.max(np.abs(qmat.partial_trace(joint, 2) - rho_b)) < 1e-12
            assert np.max(np.abs(qmat.partial_trace(joint, 1) - rho_a)) < 1e-12

    def test_preserves_trace_and_positivity(self, rng):
        for _ in range(1000):
            rho = random_density_matrix(rng, 4)
            for keep in (1, 2):
                red = qmat.partial_trace(rho, keep)
                assert abs(np.trace(red).real - 1.0) < 1e-12
                assert np.linalg.eigvalsh(red).min() > -1e-12

    def test_rejects_wrong_dim(self):
        with pytest.raises(DimensionError):
            qmat.partial_trace(np.eye(2) / 2, keep=1)


class TestEntropy:
    def test_pure_state_zero(self, rng):
        for dim in (2, 4):
            rho = qmat.projector_of(random_pure_state(rng, dim))
            assert abs(qmat.vn_entropy(rho)) < 1e-12

    def test_maximally_mixed_qubit(self):
        assert abs(qmat.vn_entropy(np.eye(2) / 2) - 1.0) < 1e-14

    def test_post_dephasing_population_entropy(self):
        pe = 0.8 * np.sin(2 * np.sqrt(5)) ** 2
        rho = np.diag([1 - pe, pe]).astype(complex)
        assert abs(qmat.vn_entropy(rho) - binary_entropy(pe)) < 1e-12

    def test_basis_invariance(self, rng):
        for _ in range(100):
            dim = int(rng.choice([2, 4]))
            rho = random_density_matrix(rng, dim)
            u = random_unitary(rng, dim)
            assert abs(
                qmat.vn_entropy(u @ rho @ u.conj().T) - qmat.vn_entropy(rho)
            ) < 1e-9

    def test_concavity(self, rng):
        for _ in range(200):
            dim = int(rng.choice([2, 4]))
            r1 = random_density_matrix(rng, dim)
            r2 = random_density_matrix(rng, dim)
            lam = rng.uniform()
            mixed = qmat.vn_entropy(lam * r1 + (1 - lam) * r2)
            avg = lam * qmat.vn_entropy(r1) + (1 - lam) * qmat.vn_entropy(r2)
            assert mixed >= avg - 1e-9

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvalidStateError):
            qmat.vn_entropy(np.diag([1.5, -0.5]).astype(complex))


class TestKronAndExpval:
    def test_identity_kron(self):
        assert np.allclose(qmat.kron(qmat.IDENTITY_2, qmat.IDENTITY_2), np.eye(4))

    def test_local_operator_lifting(self):
        psi00 = np.zeros(4, dtype=complex)
        psi00[0] = 1.0
        lifted = qmat.kron(qmat.SIGMA_Z, qmat.IDENTITY_2)
        local = qmat.expval(qmat.SIGMA_Z, np.array([1.0, 0.0], dtype=complex))
        assert abs(qmat.expval(lifted, psi00) - local) < 1e-14

    def test_zz_eigenvalue_pattern(self):
        zz = qmat.kron(qmat.SIGMA_Z, qmat.SIGMA_Z)
        assert np.allclose(np.diag(zz).real, [1, -1, -1, 1])

    def test_sigma_z_convention(self):
        # sigma_z|0> = -|0>: the initial state has expectation -1.
        rho0 = np.diag([1.0, 0.0]).astype(complex)
        assert qmat.expval(qmat.SIGMA_Z, rho0) == -1.0

    def test_maximally_mixed_expval_zero(self):
        assert abs(qmat.expval(qmat.SIGMA_Z, np.eye(2) / 2)) < 1e-14

    def test_bell_state_local_z(self):
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        op = qmat.kron(qmat.SIGMA_Z, qmat.IDENTITY_2)
        assert abs(qmat.expval(op, bell)) < 1e-14

    def test_kron_rejects_wrong_dims(self):
        with pytest.raises(DimensionError):
            qmat.kron(np.eye(4), np.eye(2))
