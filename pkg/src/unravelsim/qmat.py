"""Dense complex linear algebra for 1- and 2-qubit Hilbert spaces.

Conventions used throughout the package:

* sigma_z = diag(-1, +1), i.e. sigma_z|0> = -|0>, so the initial state |0>
  has <sigma_z> = -1.
* Two-qubit basis ordering (|00>, |01>, |10>, |11>), qubit 1 is the left
  tensor factor; the measured observable on qubit 1 is sigma_z (x) identity.
* Entropies are in bits (log base 2).
"""

from __future__ import annotations

import numpy as np

from .errors import (
    DimensionError,
    InvalidOperatorError,
    InvalidStateError,
)

HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
EIGENVALUE_CLAMP = 1e-10

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)

# Lowering operator |g><e| in the (|0>=ground, |1>=excited) ordering.
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T


def _as_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] not in (2, 4):
        raise DimensionError(f"supported dimensions are 2 and 4, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise InvalidOperatorError("matrix has non-finite entries")
    return a


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    a = np.asarray(a, dtype=complex)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def check_density_matrix(rho: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = _as_square(rho)
    if not is_hermitian(rho, tol):
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol or abs(np.trace(rho).imag) > tol:
        raise InvalidStateError(f"density matrix trace {np.trace(rho)} != 1")
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -EIGENVALUE_CLAMP:
        raise InvalidStateError(f"density matrix has eigenvalue {evals.min()} < 0")
    return rho


def check_unitary(u: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    u = _as_square(u)
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > tol:
        raise InvalidOperatorError(f"matrix is not unitary (deviation {dev:.3e})")
    return u


def check_pure_state(psi: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or psi.shape[0] not in (2, 4):
        raise DimensionError(f"expected a 2- or 4-vector, got shape {psi.shape}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise InvalidStateError(f"state norm^2 = {norm2} != 1")
    return psi


def projector_of(psi: np.ndarray) -> np.ndarray:
    """|psi><psi| for a normalized state vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) via eigendecomposition of the Hermitian generator h."""
    h = _as_square(h)
    if not is_hermitian(h):
        raise InvalidOperatorError("generator is not Hermitian")
    if not np.isfinite(t):
        raise InvalidOperatorError(f"non-finite evolution time {t}")
    try:
        evals, vecs = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh on 2x2/4x4
        raise InvalidOperatorError(f"eigendecomposition failed: {exc}") from exc
    return (vecs * np.exp(-1.0j * evals * t)) @ vecs.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two single-qubit operators (qubit 1 = left factor)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimensionError(
            f"kron expects two 2x2 factors, got {a.shape} and {b.shape}"
        )
    return np.kron(a, b)


def partial_trace(rho: np.ndarray, keep: int) -> np.ndarray:
    """Reduced state of one qubit of a two-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"partial_trace needs a 4x4 matrix, got {rho.shape}")
    if keep not in (1, 2):
        raise DimensionError(f"keep must be 1 or 2, got {keep}")
    r = rho.reshape(2, 2, 2, 2)  # indices (b1, b2, b1', b2')
    if keep == 1:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijil->jl", r)


def vn_entropy(rho: np.ndarray) -> float:
    """Von Neumann entropy -Tr(rho log2 rho) in bits."""
    rho = _as_square(rho)
    evals = np.linalg.eigvalsh(rho)
    if evals.min() < -EIGENVALUE_CLAMP:
        raise InvalidStateError(f"eigenvalue {evals.min()} below -{EIGENVALUE_CLAMP}")
    evals = np.clip(evals, 0.0, None)
    nz = evals[evals > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def expval(op: np.ndarray, state: np.ndarray) -> float:
    """Tr(op rho) or <psi|op|psi>; the imaginary part must be negligible."""
    op = _as_square(op)
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        if state.shape[0] != op.shape[0]:
            raise DimensionError(
                f"operator dim {op.shape[0]} vs state dim {state.shape[0]}"
            )
        val = complex(np.vdot(state, op @ state))
    else:
        if state.shape != op.shape:
            raise DimensionError(
                f"operator shape {op.shape} vs state shape {state.shape}"
            )
        val = complex(np.trace(op @ state))
    if abs(val.imag) > 1e-8:
        raise InvalidOperatorError(
            f"expectation value has imaginary part {val.imag:.3e}"
        )
    return val.real
