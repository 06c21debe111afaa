"""Trajectory-ensemble generation for the discrete intervention protocols.

Two modes:

* exact: closed-form branch enumeration. Every record label present, with
  its Born / uniform weight and the conditional pure state.
* sampled: seeded Monte Carlo shots mimicking the hardware experiment.
  Projective records are Born-sampled; kick patterns get a deterministic
  even shot split (remainder to the lexicographically first patterns).

Interventions at t1, t2 are applied at evaluation times >= t_k (closed on
the left). Sampling is keyed by (seed, time), so evaluating grid times in
parallel or in any order yields identical results.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import protocol, qmat
from .errors import RangeError, UndefinedBranchError
from .protocol import KICK, PROJECTIVE, ProtocolSpec

EXACT = "exact"
SAMPLED = "sampled"

# Born weights below this are treated as exactly zero; the branch is kept
# (so branch counts stay at 2^m / 4^m) with weight 0 and no defined state.
ZERO_WEIGHT_TOL = 1e-14


@dataclass
class Branch:
    """One trajectory branch: record label, weight, conditional state."""

    label: tuple[str, ...]
    weight: float
    state: np.ndarray | None
    counts: dict[str, int] | None = None

    @property
    def defined(self) -> bool:
        return self.state is not None

    def require_state(self) -> np.ndarray:
        if self.state is None:
            raise UndefinedBranchError(
                f"branch {''.join(self.label) or '()'} has zero weight and no state"
            )
        return self.state


@dataclass
class TrajectoryEnsemble:
    time: float
    branches: list[Branch]
    unraveling: str
    mode: str
    n_qubits: int
    total_shots: int | None = None

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.branches])


def intervention_count(spec: ProtocolSpec, t: float) -> int:
    """Number of interventions completed by time t (closed on the left)."""
    if t < 0:
        raise RangeError(f"negative time {t}")
    return sum(1 for tk in spec.intervention_times if t >= tk)


def hamiltonian(spec: ProtocolSpec) -> np.ndarray:
    if spec.n_qubits == 1:
        return protocol.h_rf(spec.omega, spec.delta)
    return protocol.h_two_qubit(spec.omega, spec.delta, spec.coupling_j)


def initial_state(spec: ProtocolSpec) -> np.ndarray:
    psi = np.zeros(spec.dim, dtype=complex)
    psi[0] = 1.0
    return psi


def measured_observable(n_qubits: int) -> np.ndarray:
    """sigma_z on the designated qubit (qubit 1 = left tensor factor)."""
    if n_qubits == 1:
        return qmat.SIGMA_Z
    return qmat.kron(qmat.SIGMA_Z, qmat.IDENTITY_2)


def _check_time(spec: ProtocolSpec, t: float) -> float:
    t = float(t)
    if not (0.0 <= t <= spec.t_grid[-1]):
        raise RangeError(f"time {t} outside [0, {spec.t_grid[-1]}]")
    return t


def _split_projective(branches: list[Branch], n_qubits: int) -> list[Branch]:
    labels = protocol.outcome_labels(n_qubits)
    out: list[Branch] = []
    for br in branches:
        for label in labels:
            if br.state is None:
                out.append(Branch(br.label + (label,), 0.0, None))
                continue
            proj = protocol.projector(label, n_qubits)
            child = proj @ br.state
            p = float(np.vdot(child, child).real)
            if p <= ZERO_WEIGHT_TOL:
                out.append(Branch(br.label + (label,), 0.0, None))
            else:
                out.append(
                    Branch(br.label + (label,), br.weight * p, child / np.sqrt(p))
                )
    return out


def _split_kick(branches: list[Branch], n_qubits: int) -> list[Branch]:
    labels = protocol.kick_labels(n_qubits)
    out: list[Branch] = []
    for br in branches:
        for label in labels:
            if br.state is None:
                out.append(Branch(br.label + (label,), 0.0, None))
                continue
            k = protocol.kick_unitary(label, n_qubits)
            out.append(
                Branch(br.label + (label,), br.weight / len(labels), k @ br.state)
            )
    return out


def enumerate_branches(spec: ProtocolSpec, t: float) -> TrajectoryEnsemble:
    """Exact trajectory ensemble at time t: all 2^m (or 4^m) branches."""
    t = _check_time(spec, t)
    h = hamiltonian(spec)
    branches = [Branch((), 1.0, initial_state(spec))]
    t_prev = 0.0
    for tk in spec.intervention_times:
        if t < tk:
            break
        u = qmat.expm_hermitian(h, tk - t_prev)
        for br in branches:
            if br.state is not None:
                br.state = u @ br.state
        if spec.unraveling == PROJECTIVE:
            branches = _split_projective(branches, spec.n_qubits)
        else:
            branches = _split_kick(branches, spec.n_qubits)
        t_prev = tk
    u = qmat.expm_hermitian(h, t - t_prev)
    for br in branches:
        if br.state is not None:
            br.state = u @ br.state
    return TrajectoryEnsemble(
        time=t,
        branches=branches,
        unraveling=spec.unraveling,
        mode=EXACT,
        n_qubits=spec.n_qubits,
    )


def unconditional_state(spec: ProtocolSpec, t: float) -> np.ndarray:
    """Average-state evolution: unitary segments + dephasing at interventions."""
    t = _check_time(spec, t)
    h = hamiltonian(spec)
    rho = qmat.projector_of(initial_state(spec))
    t_prev = 0.0
    for tk in spec.intervention_times:
        if t < tk:
            break
        u = qmat.expm_hermitian(h, tk - t_prev)
        rho = protocol.dephase_projective(u @ rho @ u.conj().T)
        t_prev = tk
    u = qmat.expm_hermitian(h, t - t_prev)
    return u @ rho @ u.conj().T


def _rng_for(seed: int, t: float, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by (seed, time bits, stream)."""
    t_bits = int(np.float64(t).view(np.uint64))
    key = [np.uint64(seed) ^ np.uint64(0x9E3779B97F4A7C15) * np.uint64(stream + 1),
           np.uint64(t_bits)]
    return np.random.Generator(np.random.Philox(key=key))


def _final_p1(state: np.ndarray) -> float:
    """Probability that the final sigma_z measurement of qubit 1 yields b=1."""
    amps2 = np.abs(state) ** 2
    p1 = amps2[1] if state.shape[0] == 2 else amps2[2] + amps2[3]
    # Round-off in the branch propagation can push |amp|^2 past 1.
    return float(min(max(p1, 0.0), 1.0))


def sample_shots(spec: ProtocolSpec, t: float) -> TrajectoryEnsemble:
    """Seeded finite-shot ensemble mimicking the hardware run at time t."""
    exact = enumerate_branches(spec, t)
    rng = _rng_for(spec.seed, t)
    shots = spec.shots_per_time
    n_branches = len(exact.branches)

    if spec.unraveling == PROJECTIVE:
        weights = exact.weights
        # Guard against round-off in the multinomial probability vector.
        alloc = rng.multinomial(shots, weights / weights.sum())
    else:
        base, rem = divmod(shots, n_branches)
        alloc = np.full(n_branches, base, dtype=int)
        alloc[:rem] += 1

    branches: list[Branch] = []
    for br, n_r in zip(exact.branches, alloc):
        n_r = int(n_r)
        if n_r == 0:
            counts = {"0": 0, "1": 0}
        else:
            n1 = int(rng.binomial(n_r, _final_p1(br.require_state())))
            counts = {"0": n_r - n1, "1": n1}
        branches.append(
            Branch(br.label, n_r / shots, br.state, counts=counts)
        )
    return TrajectoryEnsemble(
        time=t,
        branches=branches,
        unraveling=spec.unraveling,
        mode=SAMPLED,
        n_qubits=spec.n_qubits,
        total_shots=shots,
    )


def conditional_reduced_state(branch: Branch, keep: int = 1) -> np.ndarray:
    """Reduced qubit state of a two-qubit branch's conditional pure state."""
    psi = branch.require_state()
    return qmat.partial_trace(qmat.projector_of(psi), keep)
