import numpy as np
import pytest

from unravelsim import readout
from unravelsim.errors import CalibrationError, ParameterError


def simplex_sample(rng, dim):
    p = rng.dirichlet(np.ones(dim))
    return p


class TestAssignmentMatrix:
    def test_perfect_readout_identity(self):
        m = readout.assignment_from_params(
            [readout.ReadoutNoiseParams(1.0, 1.0)], 1
        )
        assert np.allclose(m, np.eye(2))

    def test_direct_construction(self):
        m = readout.assignment_from_params(
            [readout.ReadoutNoiseParams(0.99, 0.98)], 1
        )
        assert np.allclose(m, [[0.99, 0.02], [0.01, 0.98]])

    def test_two_qubit_column_stochastic(self):
        params = [readout.ReadoutNoiseParams(0.995, 0.995)] * 2
        m = readout.assignment_from_params(params, 2)
        assert m.shape == (4, 4)
        assert np.allclose(m.sum(axis=0), 1.0, atol=1e-12)
        assert np.all((m >= 0) & (m <= 1))

    def test_rejects_bad_params(self):
        with pytest.raises(ParameterError):
            readout.ReadoutNoiseParams(0.4, 0.99)
        with pytest.raises(ParameterError):
            readout.ReadoutNoiseParams(0.99, 1.01)


class TestCorruptCounts:
    def test_identity_noise_unchanged(self):
        observed = readout.corrupt_counts(np.array([300, 700]), np.eye(2), seed=3)
        assert np.array_equal(observed, [300, 700])

    def test_binomial_oracle(self):
        m = readout.single_qubit_matrix(readout.ReadoutNoiseParams(0.99, 0.99))
        observed = readout.corrupt_counts(np.array([10**6, 0]), m, seed=4)
        bound = 3 * np.sqrt(10**6 * 0.99 * 0.01)
        assert abs(observed[0] - 990_000) < bound
        assert observed.sum() == 10**6

    def test_zero_shots(self):
        observed = readout.corrupt_counts(np.array([0, 0]), np.eye(2), seed=0)
        assert np.array_equal(observed, [0, 0])

    def test_deterministic(self):
        m = readout.single_qubit_matrix(readout.ReadoutNoiseParams(0.9, 0.9))
        a = readout.corrupt_counts(np.array([500, 500]), m, seed=8)
        b = readout.corrupt_counts(np.array([500, 500]), m, seed=8)
        assert np.array_equal(a, b)


class TestCalibrate:
    def test_noiseless_exact(self):
        def measure(j):
            counts = np.zeros(2, dtype=int)
            counts[j] = 1000
            return counts

        assert np.allclose(readout.calibrate(measure, 2, 1000), np.eye(2))

    def test_binomial_accuracy(self):
        m_true = readout.single_qubit_matrix(readout.ReadoutNoiseParams(0.99, 0.98))
        shots = 10**5

        def measure(j):
            true = np.zeros(2, dtype=int)
            true[j] = shots
            return readout.corrupt_counts(true, m_true, seed=100 + j)

        m_est = readout.calibrate(measure, 2, shots)
        bound = 3 * np.sqrt(0.01 * 0.99 / shots)
        assert np.max(np.abs(m_est - m_true)) < 3 * bound

    def test_self_consistency_roundtrip(self):
        m_true = readout.assignment_from_params(
            [readout.ReadoutNoiseParams(0.98, 0.97)] * 2, 2
        )
        shots = 10**5

        def measure(j):
            true = np.zeros(4, dtype=int)
            true[j] = shots
            return readout.corrupt_counts(true, m_true, seed=200 + j)

        m_est = readout.calibrate(measure, 4, shots)
        for j in range(4):
            recovered = readout.unfold(m_est[:, j], m_est).probs
            target = np.eye(4)[j]
            assert np.max(np.abs(recovered - target)) < 1e-6

    def test_empty_column_raises(self):
        with pytest.raises(CalibrationError):
            readout.calibrate(lambda j: np.zeros(2, dtype=int), 2, 100)


class TestUnfold:
    def test_identity_passthrough(self, rng):
        for _ in range(10):
            f = simplex_sample(rng, 4)
            res = readout.unfold(f, np.eye(4))
            assert np.max(np.abs(res.probs - f)) < 1e-10

    def test_forward_compose_then_invert(self):
        m = readout.single_qubit_matrix(readout.ReadoutNoiseParams(0.99, 0.98))
        p = np.array([0.3, 0.7])
        res = readout.unfold(m @ p, m)
        assert np.max(np.abs(res.probs - p)) < 1e-9

    def test_boundary_solution_brute_force(self):
        # f = (1, 0) lies outside M applied to the simplex interior; the
        # constrained minimizer sits at the vertex p = (1, 0). Cross-check
        # against a dense grid search over the 1-simplex.
        m = readout.single_qubit_matrix(readout.ReadoutNoiseParams(0.99, 0.98))
        f = np.array([1.0, 0.0])
        res = readout.unfold(f, m)
        grid = np.linspace(0.0, 1.0, 10**6 + 1)
        candidates = np.stack([grid, 1 - grid], axis=1)
        obj = np.sum((candidates @ m.T - f) ** 2, axis=1)
        best = candidates[np.argmin(obj)]
        assert np.max(np.abs(res.probs - best)) < 1e-5
        assert np.allclose(res.probs, [1.0, 0.0], atol=1e-9)

    def test_random_roundtrip_sweep(self, rng):
        params = [readout.ReadoutNoiseParams(0.97, 0.96),
                  readout.ReadoutNoiseParams(0.99, 0.95)]
        m = readout.assignment_from_params(params, 2)
        assert np.linalg.cond(m) < 50
        for _ in range(1000):
            p = simplex_sample(rng, 4)
            res = readout.unfold(m @ p, m)
            assert np.max(np.abs(res.probs - p)) < 1e-8

    def test_output_is_a_distribution(self, rng):
        m = readout.assignment_from_params(
            [readout.ReadoutNoiseParams(0.9, 0.85)], 1
        )
        for _ in range(100):
            f = simplex_sample(rng, 2)
            res = readout.unfold(f, m)
            assert res.probs.min() >= -1e-12
            assert abs(res.probs.sum() - 1.0) <= 1e-10

    def test_idempotent_on_fixed_point(self):
        m = readout.assignment_from_params(
            [readout.ReadoutNoiseParams(0.95, 0.95)], 1
        )
        p = np.array([0.4, 0.6])
        res1 = readout.unfold(m @ p, m)
        res2 = readout.unfold(m @ res1.probs, m)
        assert np.max(np.abs(res2.probs - res1.probs)) < 1e-10

    def test_corrupt_then_unfold_recovers(self, rng):
        m = readout.assignment_from_params(
            [readout.ReadoutNoiseParams(0.995, 0.995)] * 2, 2
        )
        shots = 10**5
        for trial in range(20):
            p_true = simplex_sample(rng, 4)
            true_counts = rng.multinomial(shots, p_true)
            observed = readout.corrupt_counts(m=m, true_counts=true_counts, seed=trial)
            recovered = readout.unfold_counts(observed, m)
            assert np.max(np.abs(recovered - p_true)) < 5 * np.sqrt(1 / shots)

    def test_bad_frequency_vector(self):
        with pytest.raises(ParameterError):
            readout.unfold(np.array([0.7, 0.7]), np.eye(2))


class TestProjectSimplex:
    def test_already_on_simplex(self, rng):
        p = simplex_sample(rng, 4)
        assert np.allclose(readout.project_simplex(p), p, atol=1e-12)

    def test_projection_properties(self, rng):
        for _ in range(200):
            v = rng.standard_normal(4) * 2
            p = readout.project_simplex(v)
            assert p.min() >= 0
            assert abs(p.sum() - 1.0) < 1e-12
