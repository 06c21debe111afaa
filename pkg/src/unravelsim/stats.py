"""Linear and nonlinear trajectory statistics, plus bootstrap intervals.

The linear statistic (the weighted mean mu) is blind to the unraveling; the
nonlinear ones (trajectory variance, trajectory-averaged entropy) are not.
Entropies are reported in bits.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, Mapping

import numpy as np

from . import qmat
from .engine import Branch, TrajectoryEnsemble, measured_observable
from .errors import (
    BootstrapError,
    EmptyBranchError,
    NormalizationError,
    SampleSizeError,
    SchemaError,
)

log = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-9


def conditional_estimate(
    branch: Branch, probs: np.ndarray | None = None
) -> float:
    """Finite-shot or exact estimate of <sigma_z> along one branch.

    Outcomes map to eigenvalues b=0 -> -1, b=1 -> +1. If `probs` (e.g.
    mitigated outcome probabilities) is given it takes precedence over the
    raw counts.
    """
    if probs is not None:
        p = np.asarray(probs, dtype=float)
        return float(p[1] - p[0])
    if branch.counts is not None:
        n0 = branch.counts.get("0", 0)
        n1 = branch.counts.get("1", 0)
        if n0 + n1 == 0:
            raise EmptyBranchError(
                f"branch {''.join(branch.label) or '()'} has zero shots"
            )
        return (n1 - n0) / (n1 + n0)
    psi = branch.require_state()
    obs = measured_observable(1 if psi.shape[0] == 2 else 2)
    return qmat.expval(obs, psi)


def ensemble_estimates(
    ensemble: TrajectoryEnsemble,
    mitigator: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[list[tuple[str, ...]], np.ndarray, np.ndarray]:
    """(labels, weights, estimates) with empty/zero-weight branches dropped.

    Dropped sampled branches are logged; remaining weights are renormalized.
    `mitigator` maps a raw outcome-count vector to mitigated probabilities.
    """
    labels, weights, values = [], [], []
    for br in ensemble.branches:
        if br.weight == 0.0:
            continue
        if ensemble.mode == "sampled":
            counts = np.array([br.counts["0"], br.counts["1"]], dtype=float)
            if counts.sum() == 0:
                log.warning(
                    "dropping empty sampled branch %s at t=%g",
                    "".join(br.label) or "()",
                    ensemble.time,
                )
                continue
            if mitigator is not None:
                e = conditional_estimate(br, probs=mitigator(counts))
            else:
                e = conditional_estimate(br)
        else:
            e = conditional_estimate(br)
        labels.append(br.label)
        weights.append(br.weight)
        values.append(e)
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        raise EmptyBranchError("ensemble has no populated branches")
    return labels, w / w.sum(), np.asarray(values, dtype=float)


def _check_weights(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise NormalizationError(f"weights sum to {w.sum()}, expected 1")
    return w


def ensemble_mean(weights: np.ndarray, estimates: np.ndarray) -> float:
    """mu = sum_r w_r e_r."""
    w = _check_weights(weights)
    return float(np.dot(w, estimates))


def trajectory_variance(weights: np.ndarray, estimates: np.ndarray) -> float:
    """sum_r w_r (e_r - mu)^2; the unraveling-sensitive second moment."""
    w = _check_weights(weights)
    e = np.asarray(estimates, dtype=float)
    mu = float(np.dot(w, e))
    return float(np.dot(w, (e - mu) ** 2))


def _default_functional(psi: np.ndarray) -> float:
    """Entropy probe per branch: full state (1 qubit) or reduced qubit 1."""
    rho = qmat.projector_of(psi)
    if psi.shape[0] == 4:
        rho = qmat.partial_trace(rho, keep=1)
    return qmat.vn_entropy(rho)


def traj_avg_entropy(
    ensemble: TrajectoryEnsemble,
    functional: Callable[[np.ndarray], float] = _default_functional,
) -> float:
    """E_r[S(.)] over the exact ensemble; zero-weight branches are skipped."""
    total = 0.0
    for br in ensemble.branches:
        if br.weight == 0.0:
            continue
        total += br.weight * functional(br.require_state())
    return total


def average_state(ensemble: TrajectoryEnsemble) -> np.ndarray:
    """sum_r w_r |psi_r><psi_r|, the reconstructed unconditional state."""
    dim = 2**ensemble.n_qubits
    rho = np.zeros((dim, dim), dtype=complex)
    for br in ensemble.branches:
        if br.weight == 0.0:
            continue
        rho += br.weight * qmat.projector_of(br.require_state())
    return rho


def entropy_of_average(
    state_or_ensemble: TrajectoryEnsemble | np.ndarray, reduce_to_qubit1: bool = False
) -> float:
    """S of the ensemble-averaged state (optionally reduced to qubit 1)."""
    if isinstance(state_or_ensemble, TrajectoryEnsemble):
        rho = average_state(state_or_ensemble)
    else:
        rho = np.asarray(state_or_ensemble, dtype=complex)
    if reduce_to_qubit1 and rho.shape == (4, 4):
        rho = qmat.partial_trace(rho, keep=1)
    return qmat.vn_entropy(rho)


def semi_experimental_entropy(
    weights: Mapping[tuple[str, ...], float],
    ideal_states: Mapping[tuple[str, ...], np.ndarray],
    kind: str = "mixture",
) -> float:
    """Combine empirical branch weights with ideal branch density matrices.

    kind="mixture": S(sum_r w_r rho_r), the average-state entropy marker.
    kind="average": sum_r w_r S(rho_r), the trajectory-averaged marker.
    Weights are renormalized to sum to 1.
    """
    missing = set(weights) - set(ideal_states)
    if missing:
        raise SchemaError(f"weights carry unknown branch labels: {sorted(missing)}")
    total = float(sum(weights.values()))
    if total <= 0:
        raise SchemaError("empirical weights sum to zero")
    if kind == "mixture":
        rho = None
        for label, w in weights.items():
            term = (w / total) * np.asarray(ideal_states[label], dtype=complex)
            rho = term if rho is None else rho + term
        return qmat.vn_entropy(rho)
    if kind == "average":
        return sum(
            (w / total) * qmat.vn_entropy(ideal_states[label])
            for label, w in weights.items()
        )
    raise SchemaError(f"unknown kind {kind!r}")


def nearest_rank_percentile(values: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise SampleSizeError("no values for percentile")
    rank = max(1, math.ceil(pct / 100.0 * v.size))
    return float(v[rank - 1])


def bootstrap_ci(
    counts_by_branch: Mapping[tuple[str, ...] | str, np.ndarray],
    estimator: Callable[[dict], float],
    n_resamples: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """16th/84th nearest-rank percentiles of the resampled estimator.

    Counts are resampled multinomially *within* each branch (or kick
    pattern), keeping branch totals fixed; the estimator re-runs the full
    pipeline (including any unfolding) on each resample.
    """
    if n_resamples < 100:
        raise BootstrapError(f"need >= 100 resamples, got {n_resamples}")
    labels = list(counts_by_branch)
    if not labels:
        raise BootstrapError("no counts to resample")
    rng = np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(0)]))

    resampled: dict = {}
    for label in labels:
        counts = np.asarray(counts_by_branch[label], dtype=float)
        total = int(round(counts.sum()))
        if total == 0:
            resampled[label] = np.zeros((n_resamples, counts.size), dtype=int)
        else:
            resampled[label] = rng.multinomial(
                total, counts / counts.sum(), size=n_resamples
            )

    values = []
    failures = 0
    for i in range(n_resamples):
        sample = {label: resampled[label][i] for label in labels}
        try:
            values.append(float(estimator(sample)))
        except Exception as exc:
            failures += 1
            log.warning("bootstrap resample %d failed: %s", i, exc)
    if failures > 0.1 * n_resamples:
        raise BootstrapError(f"{failures}/{n_resamples} resamples failed")
    lo = nearest_rank_percentile(values, 16.0)
    hi = nearest_rank_percentile(values, 84.0)
    return lo, hi


def mean_from_counts(
    counts_by_branch: Mapping, mitigator: Callable | None = None
) -> float:
    """mu recomputed from raw per-branch counts (bootstrap pipeline)."""
    w, e = _weights_estimates_from_counts(counts_by_branch, mitigator)
    return ensemble_mean(w, e)


def var_from_counts(
    counts_by_branch: Mapping, mitigator: Callable | None = None
) -> float:
    """Var_traj recomputed from raw per-branch counts (bootstrap pipeline)."""
    w, e = _weights_estimates_from_counts(counts_by_branch, mitigator)
    return trajectory_variance(w, e)


def _weights_estimates_from_counts(
    counts_by_branch: Mapping, mitigator: Callable | None
) -> tuple[np.ndarray, np.ndarray]:
    weights, estimates = [], []
    for label, counts in counts_by_branch.items():
        counts = np.asarray(counts, dtype=float)
        total = counts.sum()
        if total == 0:
            continue
        if mitigator is not None:
            p = np.asarray(mitigator(counts), dtype=float)
        else:
            p = counts / total
        weights.append(total)
        estimates.append(p[1] - p[0])
    if not weights:
        raise EmptyBranchError("all branches empty")
    w = np.asarray(weights, dtype=float)
    return w / w.sum(), np.asarray(estimates, dtype=float)
