import numpy as np
import pytest


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Ginibre-random full-rank density matrix."""
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_pure_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def binary_entropy(p: float) -> float:
    """H2(p) in bits, the analytic oracle for qubit-population entropies."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))


def generalized_rabi_pe(omega: float, delta: float, t: float) -> float:
    """Analytic excited-state population of a driven qubit starting in |0>."""
    g2 = omega**2 + delta**2
    return (omega**2 / g2) * np.sin(0.5 * np.sqrt(g2) * t) ** 2


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260823)
