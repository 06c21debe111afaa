"""Hamiltonians, intervention schedule and the two dephasing channels.

The two intervention schemes (projective measurement, random phase-flip
kick) implement the *same* dephasing channel on the average state: both
leave populations unchanged and zero all coherences in the computational
basis. They differ only at the level of individual trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .errors import DimensionError, LabelError, ParameterError

KICK_LABELS_1Q = ("I", "Z")
KICK_LABELS_2Q = ("00", "01", "10", "11")
OUTCOME_LABELS_1Q = ("0", "1")
OUTCOME_LABELS_2Q = ("00", "01", "10", "11")

PROJECTIVE = "projective"
KICK = "kick"
UNRAVELINGS = (PROJECTIVE, KICK)


@dataclass(frozen=True)
class ProtocolSpec:
    """Full parameterization of a discrete synthetic-unraveling run."""

    n_qubits: int
    omega: float
    delta: float
    t1: float
    t2: float
    t_grid: tuple[float, ...]
    unraveling: str
    shots_per_time: int = 1000
    seed: int = 0
    coupling_j: float = 0.0

    def __post_init__(self):
        if self.n_qubits not in (1, 2):
            raise ParameterError(f"n_qubits must be 1 or 2, got {self.n_qubits}")
        if self.unraveling not in UNRAVELINGS:
            raise ParameterError(f"unknown unraveling {self.unraveling!r}")
        grid = tuple(float(t) for t in self.t_grid)
        object.__setattr__(self, "t_grid", grid)
        if len(grid) == 0 or grid[0] != 0.0:
            raise ParameterError("t_grid must start at 0")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("t_grid must be strictly increasing")
        if not (0.0 < self.t1 < self.t2 <= grid[-1]):
            raise ParameterError(
                f"need 0 < t1 < t2 <= max(t_grid), got t1={self.t1}, "
                f"t2={self.t2}, t_max={grid[-1]}"
            )
        if self.shots_per_time < 1:
            raise ParameterError("shots_per_time must be >= 1")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def intervention_times(self) -> tuple[float, float]:
        return (self.t1, self.t2)


def h_rf(omega: float, delta: float) -> np.ndarray:
    """Driven-qubit Hamiltonian (Omega/2) sigma_x - (Delta/2) sigma_z."""
    if not (np.isfinite(omega) and np.isfinite(delta)):
        raise ParameterError("omega and delta must be finite")
    return 0.5 * omega * qmat.SIGMA_X - 0.5 * delta * qmat.SIGMA_Z


def h_two_qubit(omega: float, delta: float, j: float) -> np.ndarray:
    """Two driven qubits with a sigma_z (x) sigma_z coupling of strength j."""
    if not np.isfinite(j):
        raise ParameterError("coupling must be finite")
    h1 = h_rf(omega, delta)
    return (
        qmat.kron(h1, qmat.IDENTITY_2)
        + qmat.kron(qmat.IDENTITY_2, h1)
        + j * qmat.kron(qmat.SIGMA_Z, qmat.SIGMA_Z)
    )


def dephase_projective(rho: np.ndarray) -> np.ndarray:
    """Sum_b P_b rho P_b: keeps the computational-basis diagonal of rho."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape not in ((2, 2), (4, 4)):
        raise DimensionError(f"unsupported shape {rho.shape}")
    return np.diag(np.diag(rho))


def dephase_kick(rho: np.ndarray) -> np.ndarray:
    """Uniform mixture of phase-flip kick conjugations; equals dephase_projective."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape == (2, 2):
        labels = KICK_LABELS_1Q
        n_qubits = 1
    elif rho.shape == (4, 4):
        labels = KICK_LABELS_2Q
        n_qubits = 2
    else:
        raise DimensionError(f"unsupported shape {rho.shape}")
    out = np.zeros_like(rho)
    for label in labels:
        k = kick_unitary(label, n_qubits)
        out += k @ rho @ k.conj().T
    return out / len(labels)


def kick_unitary(label: str, n_qubits: int) -> np.ndarray:
    """Kick unitary for one record token: identity / sigma_z factors."""
    if n_qubits == 1:
        if label == "I":
            return qmat.IDENTITY_2.copy()
        if label == "Z":
            return qmat.SIGMA_Z.copy()
        raise LabelError(f"unknown 1-qubit kick label {label!r}")
    if n_qubits == 2:
        if label not in KICK_LABELS_2Q:
            raise LabelError(f"unknown 2-qubit kick label {label!r}")
        a, b = int(label[0]), int(label[1])
        za = qmat.SIGMA_Z if a else qmat.IDENTITY_2
        zb = qmat.SIGMA_Z if b else qmat.IDENTITY_2
        return qmat.kron(za, zb)
    raise DimensionError(f"n_qubits must be 1 or 2, got {n_qubits}")


def projector(label: str, n_qubits: int) -> np.ndarray:
    """Rank-1 computational-basis projector for one outcome token."""
    labels = outcome_labels(n_qubits)
    if label not in labels:
        raise LabelError(f"unknown {n_qubits}-qubit outcome label {label!r}")
    dim = 2**n_qubits
    idx = int(label, 2)
    p = np.zeros((dim, dim), dtype=complex)
    p[idx, idx] = 1.0
    return p


def outcome_labels(n_qubits: int) -> tuple[str, ...]:
    if n_qubits == 1:
        return OUTCOME_LABELS_1Q
    if n_qubits == 2:
        return OUTCOME_LABELS_2Q
    raise DimensionError(f"n_qubits must be 1 or 2, got {n_qubits}")


def kick_labels(n_qubits: int) -> tuple[str, ...]:
    if n_qubits == 1:
        return KICK_LABELS_1Q
    if n_qubits == 2:
        return KICK_LABELS_2Q
    raise DimensionError(f"n_qubits must be 1 or 2, got {n_qubits}")


def intervention_labels(spec: ProtocolSpec) -> tuple[str, ...]:
    """Per-intervention token alphabet for the spec's unraveling."""
    if spec.unraveling == PROJECTIVE:
        return outcome_labels(spec.n_qubits)
    return kick_labels(spec.n_qubits)
