"""Continuous resonance-fluorescence dynamics and its two unravelings.

A driven two-level atom decays at rate gamma through the lowering operator
sqrt(gamma) sigma_minus. The unconditional master equation is integrated
with a fixed-step fourth-order scheme; the conditional dynamics are
realized either as photodetection jumps (Monte Carlo wave function) or as
a unit-efficiency x-quadrature homodyne diffusion (Euler-Maruyama).

Basis ordering: |0> = ground, |1> = excited, sigma_z = diag(-1, +1).
Trajectory i consumes its own counter-based random stream keyed by
(seed, i), so parallel and serial execution agree bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ParameterError, SampleSizeError, StepSizeError
from .protocol import h_rf
from .qmat import SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z

DT_STABILITY_LIMIT = 0.05
TRACE_DRIFT_TOL = 1e-6
NEG_EIGENVALUE_TOL = 1e-6


@dataclass(frozen=True)
class RFParams:
    omega: float
    delta: float
    gamma: float
    dt: float
    t_max: float
    n_traj: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if self.dt <= 0 or self.t_max <= 0:
            raise ParameterError("dt and t_max must be > 0")
        scale = max(self.gamma, abs(self.omega), abs(self.delta))
        if self.dt * scale >= DT_STABILITY_LIMIT:
            raise ParameterError(
                f"dt={self.dt} too large: dt*max(gamma,Omega,|Delta|)="
                f"{self.dt * scale:.3g} must stay below {DT_STABILITY_LIMIT}"
            )
        if self.n_traj < 1:
            raise ParameterError("n_traj must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt

    def hamiltonian(self) -> np.ndarray:
        return h_rf(self.omega, self.delta)


@dataclass
class RFTrajectory:
    """One conditional trajectory: pure states (jump) or density matrices."""

    times: np.ndarray
    states: np.ndarray
    record: np.ndarray  # jump times, or the Wiener increments


GROUND = np.array([1.0, 0.0], dtype=complex)
EXCITED = np.array([0.0, 1.0], dtype=complex)
N_OP = SIGMA_PLUS @ SIGMA_MINUS  # |e><e|


def _lindblad_rhs(rho: np.ndarray, h: np.ndarray, gamma: float) -> np.ndarray:
    comm = h @ rho - rho @ h
    diss = SIGMA_MINUS @ rho @ SIGMA_PLUS - 0.5 * (N_OP @ rho + rho @ N_OP)
    return -1.0j * comm + gamma * diss


def me_solve(params: RFParams, rho0: np.ndarray | None = None) -> np.ndarray:
    """RK4 integration of the unconditional master equation.

    Returns an array of shape (n_steps + 1, 2, 2); times are params.times.
    """
    h = params.hamiltonian()
    rho = np.outer(GROUND, GROUND.conj()) if rho0 is None else np.asarray(
        rho0, dtype=complex
    ).copy()
    dt = params.dt
    out = np.empty((params.n_steps + 1, 2, 2), dtype=complex)
    out[0] = rho
    for i in range(params.n_steps):
        k1 = _lindblad_rhs(rho, h, params.gamma)
        k2 = _lindblad_rhs(rho + 0.5 * dt * k1, h, params.gamma)
        k3 = _lindblad_rhs(rho + 0.5 * dt * k2, h, params.gamma)
        k4 = _lindblad_rhs(rho + dt * k3, h, params.gamma)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = rho
    drift = abs(np.trace(out[-1]).real - 1.0)
    if drift > TRACE_DRIFT_TOL:
        raise StepSizeError(f"trace drifted by {drift:.3e}; reduce dt")
    return out


def _traj_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=[np.uint64(seed), np.uint64(index)])
    )


def _effective_propagator(params: RFParams) -> np.ndarray:
    h_eff = params.hamiltonian() - 0.5j * params.gamma * N_OP
    return expm(-1.0j * h_eff * params.dt)


def _unitary_step(params: RFParams) -> np.ndarray:
    return expm(-1.0j * params.hamiltonian() * params.dt)


def jump_trajectory(
    params: RFParams, seed: int | None = None, traj_index: int = 0
) -> RFTrajectory:
    """Monte Carlo wave function trajectory under ideal photodetection."""
    seed = params.seed if seed is None else seed
    u_eff = _effective_propagator(params)
    rand = _traj_rng(seed, traj_index).random(params.n_steps)
    psi = GROUND.copy()
    states = np.empty((params.n_steps + 1, 2), dtype=complex)
    states[0] = psi
    jump_times = []
    for i in range(params.n_steps):
        p_jump = params.gamma * float(np.abs(psi[1]) ** 2) * params.dt
        if rand[i] < p_jump:
            psi = GROUND.copy()
            jump_times.append((i + 1) * params.dt)
        else:
            psi = u_eff @ psi
            norm = np.linalg.norm(psi)
            if norm < 1e-12:
                raise StepSizeError("state norm underflow in jump integrator")
            psi = psi / norm
        states[i + 1] = psi
    return RFTrajectory(params.times, states, np.array(jump_times))


def jump_ensemble(params: RFParams, sample_times: np.ndarray) -> np.ndarray:
    """<sigma_z> per trajectory at the sample times; shape (n_traj, n_samples).

    Vectorized over trajectories but random-stream-identical to running
    jump_trajectory(params, traj_index=i) one at a time.
    """
    idx = _sample_indices(params, sample_times)
    u_eff = _effective_propagator(params)
    rand = np.stack(
        [_traj_rng(params.seed, i).random(params.n_steps) for i in range(params.n_traj)]
    )
    psi = np.tile(GROUND, (params.n_traj, 1))
    out = np.empty((params.n_traj, len(idx)))
    col = {step: k for k, step in enumerate(idx)}
    if 0 in col:
        out[:, col[0]] = np.abs(psi[:, 1]) ** 2 - np.abs(psi[:, 0]) ** 2
    for i in range(params.n_steps):
        p_jump = params.gamma * np.abs(psi[:, 1]) ** 2 * params.dt
        jumped = rand[:, i] < p_jump
        psi = psi @ u_eff.T
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        psi[jumped] = GROUND
        step = i + 1
        if step in col:
            out[:, col[step]] = np.abs(psi[:, 1]) ** 2 - np.abs(psi[:, 0]) ** 2
    return out


def homodyne_trajectory(
    params: RFParams, seed: int | None = None, traj_index: int = 0
) -> RFTrajectory:
    """Diffusive x-quadrature homodyne trajectory (Euler-Maruyama)."""
    seed = params.seed if seed is None else seed
    dw = _traj_rng(seed, traj_index).standard_normal(params.n_steps) * np.sqrt(
        params.dt
    )
    rho = np.outer(GROUND, GROUND.conj())
    states = np.empty((params.n_steps + 1, 2, 2), dtype=complex)
    states[0] = rho
    u_dt = _unitary_step(params)
    for i in range(params.n_steps):
        rho = _homodyne_step(rho[None, :, :], u_dt, params, dw[i : i + 1])[0]
        states[i + 1] = rho
    return RFTrajectory(params.times, states, dw)


def _homodyne_step(
    rho: np.ndarray, u_dt: np.ndarray, params: RFParams, dw: np.ndarray
) -> np.ndarray:
    """One split step for a batch of conditional density matrices.

    The Hamiltonian part is applied exactly via the one-step propagator
    u_dt; the dissipative and measurement (Wiener) terms are added with an
    Euler-Maruyama update.
    """
    gamma, dt = params.gamma, params.dt
    rho = u_dt @ rho @ u_dt.conj().T
    diss = SIGMA_MINUS @ rho @ SIGMA_PLUS - 0.5 * (N_OP @ rho + rho @ N_OP)
    x = np.trace((SIGMA_MINUS + SIGMA_PLUS) @ rho, axis1=1, axis2=2).real
    meas = (
        SIGMA_MINUS @ rho
        + rho @ SIGMA_PLUS
        - x[:, None, None] * rho
    )
    rho = rho + dt * gamma * diss + np.sqrt(gamma) * dw[:, None, None] * meas
    rho = 0.5 * (rho + rho.conj().transpose(0, 2, 1))
    tr = np.trace(rho, axis1=1, axis2=2).real
    rho = rho / tr[:, None, None]
    # Unit-efficiency conditioning keeps the state pure, i.e. on the Bloch
    # sphere boundary, so the Euler step lands slightly outside the physical
    # set almost surely. Renormalize by radially projecting back onto the
    # Bloch ball (the closest physical state); without this the excursions
    # random-walk outward instead of averaging away.
    purity = np.sum(np.abs(rho) ** 2, axis=(1, 2))
    radius = np.sqrt(np.maximum(2.0 * purity - 1.0, 0.0))
    scale = np.where(radius > 1.0, 1.0 / radius, 1.0)
    half_eye = 0.5 * np.eye(2)
    rho = half_eye + (rho - half_eye) * scale[:, None, None]
    det = (rho[:, 0, 0] * rho[:, 1, 1] - rho[:, 0, 1] * rho[:, 1, 0]).real
    if det.min() < -NEG_EIGENVALUE_TOL:
        raise StepSizeError(
            f"conditional state lost positivity (det {det.min():.3e}); reduce dt"
        )
    return rho


def homodyne_ensemble(params: RFParams, sample_times: np.ndarray) -> np.ndarray:
    """<sigma_z> per homodyne trajectory at the sample times."""
    idx = _sample_indices(params, sample_times)
    u_dt = _unitary_step(params)
    dw = np.stack(
        [
            _traj_rng(params.seed, i).standard_normal(params.n_steps)
            for i in range(params.n_traj)
        ]
    ) * np.sqrt(params.dt)
    rho = np.tile(np.outer(GROUND, GROUND.conj()), (params.n_traj, 1, 1))
    out = np.empty((params.n_traj, len(idx)))
    col = {step: k for k, step in enumerate(idx)}
    if 0 in col:
        out[:, col[0]] = _sigz_of(rho)
    for i in range(params.n_steps):
        rho = _homodyne_step(rho, u_dt, params, dw[:, i])
        step = i + 1
        if step in col:
            out[:, col[step]] = _sigz_of(rho)
    return out


def _sigz_of(rho: np.ndarray) -> np.ndarray:
    return np.trace(SIGMA_Z @ rho, axis1=1, axis2=2).real


def _sample_indices(params: RFParams, sample_times: np.ndarray) -> list[int]:
    idx = [int(round(float(t) / params.dt)) for t in np.atleast_1d(sample_times)]
    for t, i in zip(np.atleast_1d(sample_times), idx):
        if i < 0 or i > params.n_steps:
            raise ParameterError(f"sample time {t} outside [0, {params.t_max}]")
    return idx


def rf_traj_variance(sigz_values: np.ndarray) -> float:
    """Unbiased sample variance of <sigma_z> across trajectories at one time."""
    v = np.asarray(sigz_values, dtype=float)
    if v.size < 2:
        raise SampleSizeError("need at least 2 trajectories for a variance")
    return float(np.var(v, ddof=1))
