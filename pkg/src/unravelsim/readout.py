"""Simulated readout noise: assignment matrix, calibration, and unfolding.

The assignment (confusion) matrix M is column-stochastic with
M[observed][true] entries. Noise is applied by sampling the column of the
true outcome; mitigation solves the bounded least-squares program

    argmin_p ||M p - f||^2   s.t.  p >= 0, sum(p) = 1

by projected gradient descent on the probability simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CalibrationError, OptimizationError, ParameterError

PGD_MAX_ITER = 100_000
PGD_STEP_TOL = 1e-12


@dataclass(frozen=True)
class ReadoutNoiseParams:
    """Per-qubit readout error: p00 = P(read 0 | true 0), p11 = P(read 1 | true 1)."""

    p00: float
    p11: float

    def __post_init__(self):
        for name, v in (("p00", self.p00), ("p11", self.p11)):
            if not (0.5 <= v <= 1.0):
                raise ParameterError(f"{name} = {v} outside [0.5, 1]")

    @property
    def fidelity(self) -> float:
        return 0.5 * (self.p00 + self.p11)


@dataclass(frozen=True)
class UnfoldResult:
    probs: np.ndarray
    residual: float
    n_iter: int


def check_assignment_matrix(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
        raise ParameterError(f"assignment matrix must be 2x2 or 4x4, got {m.shape}")
    if np.any(m < -tol) or np.any(m > 1 + tol):
        raise ParameterError("assignment matrix entries outside [0, 1]")
    col_sums = m.sum(axis=0)
    if np.max(np.abs(col_sums - 1.0)) > tol:
        raise ParameterError(f"columns must sum to 1, got {col_sums}")
    return m


def single_qubit_matrix(params: ReadoutNoiseParams) -> np.ndarray:
    return np.array(
        [[params.p00, 1.0 - params.p11], [1.0 - params.p00, params.p11]]
    )


def assignment_from_params(
    params: Sequence[ReadoutNoiseParams], n_qubits: int
) -> np.ndarray:
    """Tensor-product assignment matrix in the fixed (|00>,|01>,|10>,|11>) order."""
    if n_qubits not in (1, 2):
        raise ParameterError(f"n_qubits must be 1 or 2, got {n_qubits}")
    if len(params) != n_qubits:
        raise ParameterError(
            f"need {n_qubits} per-qubit parameter sets, got {len(params)}"
        )
    m = single_qubit_matrix(params[0])
    if n_qubits == 2:
        m = np.kron(m, single_qubit_matrix(params[1]))
    return check_assignment_matrix(m)


def corrupt_counts(
    true_counts: np.ndarray, m: np.ndarray, seed: int = 0
) -> np.ndarray:
    """Reassign each true-outcome shot through the corresponding column of M."""
    m = check_assignment_matrix(m)
    true_counts = np.asarray(true_counts)
    if np.any(true_counts < 0):
        raise ParameterError("counts must be non-negative")
    rng = np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(1)]))
    observed = np.zeros(m.shape[0], dtype=int)
    for j, n in enumerate(true_counts):
        n = int(n)
        if n > 0:
            observed += rng.multinomial(n, m[:, j])
    return observed


def calibrate(
    measure: Callable[[int], np.ndarray], n_outcomes: int, shots_per_state: int
) -> np.ndarray:
    """Build M column-by-column from basis-state preparation experiments.

    `measure(j)` returns observed counts when basis state j is prepared.
    """
    if shots_per_state < 1:
        raise ParameterError("shots_per_state must be >= 1")
    m = np.zeros((n_outcomes, n_outcomes))
    for j in range(n_outcomes):
        counts = np.asarray(measure(j), dtype=float)
        total = counts.sum()
        if total <= 0:
            raise CalibrationError(f"no shots observed for prepared state {j}")
        m[:, j] = counts / total
    return check_assignment_matrix(m, tol=1e-9)


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    cond = u + (1.0 - css) / idx > 0
    rho = idx[cond][-1]
    theta = (1.0 - css[rho - 1]) / rho
    return np.maximum(v + theta, 0.0)


def unfold(observed_freq: np.ndarray, m: np.ndarray) -> UnfoldResult:
    """Bounded least-squares unfolding of observed outcome frequencies."""
    m = check_assignment_matrix(m)
    f = np.asarray(observed_freq, dtype=float)
    if f.shape != (m.shape[0],):
        raise ParameterError(f"frequency vector shape {f.shape} vs matrix {m.shape}")
    if abs(f.sum() - 1.0) > 1e-9:
        raise ParameterError(f"observed frequencies sum to {f.sum()}, expected 1")

    step = 1.0 / np.linalg.norm(m, 2) ** 2
    mtm = m.T @ m
    mtf = m.T @ f
    p = project_simplex(f)
    for it in range(1, PGD_MAX_ITER + 1):
        grad = mtm @ p - mtf
        p_new = project_simplex(p - step * grad)
        delta = np.max(np.abs(p_new - p))
        p = p_new
        if delta < PGD_STEP_TOL:
            residual = float(np.linalg.norm(m @ p - f))
            return UnfoldResult(p, residual, it)
    residual = float(np.linalg.norm(m @ p - f))
    raise OptimizationError(
        f"unfolding did not converge in {PGD_MAX_ITER} iterations "
        f"(final residual {residual:.3e})"
    )


def unfold_counts(counts: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Convenience: normalize raw counts, unfold, return mitigated probabilities."""
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise ParameterError("cannot unfold empty counts")
    return unfold(counts / total, m).probs
