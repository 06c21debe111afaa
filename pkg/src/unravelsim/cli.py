"""Configuration-driven experiment runner.

Reads a strict JSON config, runs the requested experiment (exact and/or
sampled discrete protocols, continuous resonance fluorescence, or a
readout calibration), and writes a CSV result table plus a JSON manifest
from which the run can be regenerated.

CSV header (fixed): time,protocol,unraveling,mode,quantity,value,ci_lo,ci_hi,shots,seed
Exit codes: 0 success, 1 validation error, 2 numerical/optimization error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, engine, qmat, readout, rf, stats
from .errors import (
    OptimizationError,
    ParameterError,
    SchemaError,
    StepSizeError,
    UnravelsimError,
)
from .protocol import KICK, PROJECTIVE, ProtocolSpec

CSV_HEADER = [
    "time",
    "protocol",
    "unraveling",
    "mode",
    "quantity",
    "value",
    "ci_lo",
    "ci_hi",
    "shots",
    "seed",
]

KINDS = ("discrete-1q", "discrete-2q", "continuous-rf", "calibrate")

_COMMON_KEYS = {"kind", "seed", "output"}
_DISCRETE_KEYS = _COMMON_KEYS | {
    "omega",
    "delta",
    "coupling_j",
    "t1",
    "t2",
    "t_grid",
    "mode",
    "shots_per_time",
    "mitigation",
    "readout",
    "bootstrap_resamples",
}
_RF_KEYS = _COMMON_KEYS | {
    "omega",
    "delta",
    "gamma",
    "dt",
    "t_max",
    "n_traj",
    "sample_times",
}
_CALIBRATE_KEYS = _COMMON_KEYS | {"n_qubits", "readout", "shots_per_state"}


@dataclass
class ResultRow:
    time: float
    protocol: str
    unraveling: str
    mode: str
    quantity: str
    value: float
    ci_lo: float | None = None
    ci_hi: float | None = None
    shots: int | None = None
    seed: int = 0

    def as_record(self) -> list[str]:
        return [
            repr(float(self.time)),
            self.protocol,
            self.unraveling,
            self.mode,
            self.quantity,
            repr(float(self.value)),
            "" if self.ci_lo is None else repr(float(self.ci_lo)),
            "" if self.ci_hi is None else repr(float(self.ci_hi)),
            "" if self.shots is None else str(self.shots),
            str(self.seed),
        ]


def default_grids() -> dict[str, list[float]]:
    """Uniform 51-point grids with the intervention times inserted."""
    return {
        "discrete-1q": _grid_with(np.linspace(0.0, 5.0, 51), (2.0, 4.0)),
        "discrete-2q": _grid_with(np.linspace(0.0, 2.5, 51), (0.6, 1.4)),
    }


def _grid_with(grid: np.ndarray, inserts: tuple[float, ...]) -> list[float]:
    values = list(map(float, grid))
    for t in inserts:
        if not any(abs(t - g) < 1e-12 for g in values):
            values.append(float(t))
    return sorted(values)


def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"config is not valid JSON: {exc}") from exc
    return validate_config(cfg)


def validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise SchemaError("config must be a JSON object")
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise SchemaError(f"kind must be one of {KINDS}, got {kind!r}")
    allowed = {
        "discrete-1q": _DISCRETE_KEYS,
        "discrete-2q": _DISCRETE_KEYS | {"coupling_j"},
        "continuous-rf": _RF_KEYS,
        "calibrate": _CALIBRATE_KEYS,
    }[kind]
    unknown = set(cfg) - allowed
    if unknown:
        raise SchemaError(f"unknown config keys for {kind}: {sorted(unknown)}")
    if kind in ("discrete-1q", "discrete-2q"):
        for key in ("omega", "delta", "t1", "t2"):
            if key not in cfg:
                raise SchemaError(f"{kind} config missing required key {key!r}")
        if cfg.get("mode", "exact") not in ("exact", "sampled", "both"):
            raise SchemaError(f"invalid mode {cfg.get('mode')!r}")
    if kind == "continuous-rf":
        for key in ("omega", "delta", "gamma", "dt", "t_max", "n_traj"):
            if key not in cfg:
                raise SchemaError(f"continuous-rf config missing key {key!r}")
    if kind == "calibrate":
        for key in ("n_qubits", "readout", "shots_per_state"):
            if key not in cfg:
                raise SchemaError(f"calibrate config missing key {key!r}")
    if "readout" in cfg and cfg["readout"] is not None:
        qubits = cfg["readout"].get("qubits") if isinstance(cfg["readout"], dict) else None
        if not qubits:
            raise SchemaError('readout section must be {"qubits": [{p00, p11}, ...]}')
        extra = set(cfg["readout"]) - {"qubits"}
        if extra:
            raise SchemaError(f"unknown readout keys: {sorted(extra)}")
        for q in qubits:
            if set(q) != {"p00", "p11"}:
                raise SchemaError(f"readout qubit entry needs exactly p00/p11, got {q}")
    return cfg


def _readout_params(cfg: dict) -> list[readout.ReadoutNoiseParams] | None:
    section = cfg.get("readout")
    if not section:
        return None
    return [
        readout.ReadoutNoiseParams(q["p00"], q["p11"]) for q in section["qubits"]
    ]


def _mix64(seed: int, t: float, salt: int) -> int:
    """Stable per-(seed, time, salt) key for sub-experiment RNG streams."""
    t_bits = int(np.float64(t).view(np.uint64))
    x = (seed & 0xFFFFFFFFFFFFFFFF) ^ (t_bits * 0x9E3779B97F4A7C15) ^ (
        salt * 0xBF58476D1CE4E5B9
    )
    return x & 0xFFFFFFFFFFFFFFFF


def build_specs(cfg: dict) -> dict[str, ProtocolSpec]:
    """One ProtocolSpec per unraveling from a discrete config."""
    kind = cfg["kind"]
    n_qubits = 1 if kind == "discrete-1q" else 2
    grid = cfg.get("t_grid")
    if grid is None:
        grid = _grid_with(
            np.linspace(0.0, _default_tf(cfg), 51), (cfg["t1"], cfg["t2"])
        )
    specs = {}
    for unraveling in (PROJECTIVE, KICK):
        specs[unraveling] = ProtocolSpec(
            n_qubits=n_qubits,
            omega=cfg["omega"],
            delta=cfg["delta"],
            coupling_j=cfg.get("coupling_j", 0.0),
            t1=cfg["t1"],
            t2=cfg["t2"],
            t_grid=tuple(grid),
            unraveling=unraveling,
            shots_per_time=cfg.get("shots_per_time", 1000),
            seed=cfg.get("seed", 0),
        )
    return specs


def _default_tf(cfg: dict) -> float:
    grid = cfg.get("t_grid")
    if grid:
        return max(grid)
    return 5.0 if cfg["kind"] == "discrete-1q" else 2.5


def run_discrete(cfg: dict) -> list[ResultRow]:
    kind = cfg["kind"]
    mode = cfg.get("mode", "exact")
    seed = cfg.get("seed", 0)
    n_resamples = cfg.get("bootstrap_resamples", 1000)
    specs = build_specs(cfg)
    noise = _readout_params(cfg)
    n_qubits = specs[PROJECTIVE].n_qubits
    # Mitigation mirrors the hardware analysis: on by default for the
    # two-qubit pipeline only, forceable either way from the config.
    mitigation = cfg.get("mitigation")
    if mitigation is None:
        mitigation = n_qubits == 2
    # Only qubit 1 is read out at the final time, so corruption and
    # unfolding use that qubit's 2x2 assignment matrix.
    m_final = readout.single_qubit_matrix(noise[0]) if noise else None

    rows: list[ResultRow] = []
    for unraveling, spec in specs.items():
        for t in spec.t_grid:
            if mode in ("exact", "both"):
                rows.extend(_exact_rows(kind, spec, unraveling, t, seed))
            if mode in ("sampled", "both"):
                rows.extend(
                    _sampled_rows(
                        kind,
                        spec,
                        unraveling,
                        t,
                        seed,
                        n_resamples,
                        m_final,
                        mitigation,
                    )
                )
    rows.sort(key=lambda r: (r.quantity, r.unraveling, r.mode, r.time))
    return rows


def _exact_rows(
    kind: str, spec: ProtocolSpec, unraveling: str, t: float, seed: int
) -> list[ResultRow]:
    ens = engine.enumerate_branches(spec, t)
    _, w, e = stats.ensemble_estimates(ens)
    rows = [
        ResultRow(t, kind, unraveling, "exact", "mu", stats.ensemble_mean(w, e), seed=seed),
        ResultRow(
            t, kind, unraveling, "exact", "var_traj",
            stats.trajectory_variance(w, e), seed=seed,
        ),
        ResultRow(
            t, kind, unraveling, "exact", "S_avg_state",
            stats.entropy_of_average(ens), seed=seed,
        ),
        ResultRow(
            t, kind, unraveling, "exact", "S_traj_avg",
            stats.traj_avg_entropy(ens), seed=seed,
        ),
    ]
    if spec.n_qubits == 2:
        rows.append(
            ResultRow(
                t, kind, unraveling, "exact", "S_avg_reduced",
                stats.entropy_of_average(ens, reduce_to_qubit1=True), seed=seed,
            )
        )
    return rows


def _sampled_rows(
    kind: str,
    spec: ProtocolSpec,
    unraveling: str,
    t: float,
    seed: int,
    n_resamples: int,
    m_final: np.ndarray | None,
    mitigation: bool,
) -> list[ResultRow]:
    ens = engine.sample_shots(spec, t)
    counts_by_branch: dict[tuple[str, ...], np.ndarray] = {}
    for i, br in enumerate(ens.branches):
        counts = np.array([br.counts["0"], br.counts["1"]], dtype=int)
        if m_final is not None and counts.sum() > 0:
            counts = readout.corrupt_counts(
                counts, m_final, seed=_mix64(seed, t, 1000 + i)
            )
        counts_by_branch[br.label] = counts

    mitigator = None
    if mitigation and m_final is not None:
        mitigator = lambda c: readout.unfold_counts(c, m_final)  # noqa: E731

    mu = stats.mean_from_counts(counts_by_branch, mitigator)
    var = stats.var_from_counts(counts_by_branch, mitigator)
    mu_ci = stats.bootstrap_ci(
        counts_by_branch,
        lambda c: stats.mean_from_counts(c, mitigator),
        n_resamples=n_resamples,
        seed=_mix64(seed, t, 1),
    )
    var_ci = stats.bootstrap_ci(
        counts_by_branch,
        lambda c: stats.var_from_counts(c, mitigator),
        n_resamples=n_resamples,
        seed=_mix64(seed, t, 2),
    )
    shots = spec.shots_per_time
    rows = [
        ResultRow(t, kind, unraveling, "sampled", "mu", mu, *mu_ci, shots, seed),
        ResultRow(t, kind, unraveling, "sampled", "var_traj", var, *var_ci, shots, seed),
    ]

    if unraveling == PROJECTIVE:
        rows.append(
            _semi_exp_row(kind, spec, ens, counts_by_branch, t, seed, n_resamples)
        )
    return rows


def _semi_exp_row(
    kind: str,
    spec: ProtocolSpec,
    ens: engine.TrajectoryEnsemble,
    counts_by_branch: dict,
    t: float,
    seed: int,
    n_resamples: int,
) -> ResultRow:
    """Semi-experimental entropy: empirical record weights x ideal states.

    One qubit: S of the weight-mixed ideal full states (the average-state
    entropy marker). Two qubits: weight-averaged entropy of the ideal
    reduced states (the trajectory-averaged marker).
    """
    exact = engine.enumerate_branches(spec, t)
    ideal_states: dict[tuple[str, ...], np.ndarray] = {}
    for br in exact.branches:
        if br.state is None:
            continue
        rho = qmat.projector_of(br.state)
        if spec.n_qubits == 2:
            rho = qmat.partial_trace(rho, keep=1)
        ideal_states[br.label] = rho
    kind_s = "mixture" if spec.n_qubits == 1 else "average"

    record_totals = {
        label: int(c.sum()) for label, c in counts_by_branch.items()
    }
    labels = [lb for lb in record_totals if lb in ideal_states]

    def estimate(totals: dict[tuple[str, ...], int]) -> float:
        weights = {lb: totals[lb] for lb in labels if totals[lb] > 0}
        return stats.semi_experimental_entropy(weights, ideal_states, kind=kind_s)

    value = estimate(record_totals)
    # Uncertainty comes from the record (branch-assignment) multinomial, so
    # the bootstrap resamples the record counts across branches.
    vec = np.array([record_totals[lb] for lb in labels], dtype=int)
    ci = stats.bootstrap_ci(
        {("records",): vec},
        lambda c: estimate(dict(zip(labels, c[("records",)]))),
        n_resamples=n_resamples,
        seed=_mix64(seed, t, 3),
    )
    return ResultRow(
        t, kind, PROJECTIVE, "sampled", "S_semi_exp", value,
        *ci, spec.shots_per_time, seed,
    )


def run_rf(cfg: dict) -> list[ResultRow]:
    seed = cfg.get("seed", 0)
    params = rf.RFParams(
        omega=cfg["omega"],
        delta=cfg["delta"],
        gamma=cfg["gamma"],
        dt=cfg["dt"],
        t_max=cfg["t_max"],
        n_traj=cfg["n_traj"],
        seed=seed,
    )
    sample_times = cfg.get("sample_times")
    if sample_times is None:
        sample_times = list(np.linspace(0.0, params.t_max, 21))
    sample_times = [float(t) for t in sample_times]

    rhos = rf.me_solve(params)
    idx = rf._sample_indices(params, np.array(sample_times))
    me_sigz = [float(np.trace(qmat.SIGMA_Z @ rhos[i]).real) for i in idx]

    rows: list[ResultRow] = []
    for t, v in zip(sample_times, me_sigz):
        rows.append(ResultRow(t, "continuous-rf", "average", "exact", "mu", v, seed=seed))

    for name, values in (
        ("jump", rf.jump_ensemble(params, np.array(sample_times))),
        ("homodyne", rf.homodyne_ensemble(params, np.array(sample_times))),
    ):
        n = params.n_traj
        for k, t in enumerate(sample_times):
            col = values[:, k]
            mean = float(col.mean())
            se = float(col.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
            rows.append(
                ResultRow(
                    t, "continuous-rf", name, "sampled", "mu", mean,
                    mean - se, mean + se, n, seed,
                )
            )
            if n > 1:
                var = rf.rf_traj_variance(col)
                var_se = var * np.sqrt(2.0 / (n - 1))
                rows.append(
                    ResultRow(
                        t, "continuous-rf", name, "sampled", "var_traj", var,
                        var - var_se, var + var_se, n, seed,
                    )
                )
    rows.sort(key=lambda r: (r.quantity, r.unraveling, r.mode, r.time))
    return rows


def run_calibrate(cfg: dict) -> dict:
    seed = cfg.get("seed", 0)
    params = _readout_params(cfg)
    n_qubits = cfg["n_qubits"]
    if n_qubits not in (1, 2):
        raise ParameterError(f"n_qubits must be 1 or 2, got {n_qubits}")
    if len(params) != n_qubits:
        raise ParameterError(
            f"need {n_qubits} readout qubit entries, got {len(params)}"
        )
    shots = cfg["shots_per_state"]
    m_true = readout.assignment_from_params(params, n_qubits)
    n_outcomes = m_true.shape[0]

    def measure(j: int) -> np.ndarray:
        true = np.zeros(n_outcomes, dtype=int)
        true[j] = shots
        return readout.corrupt_counts(true, m_true, seed=_mix64(seed, float(j), 4))

    m_est = readout.calibrate(measure, n_outcomes, shots)
    return {
        "n_qubits": n_qubits,
        "shots_per_state": shots,
        "seed": seed,
        "assignment_matrix": [[float(x) for x in row] for row in m_est],
        "true_matrix": [[float(x) for x in row] for row in m_true],
    }


def rows_to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.as_record())
    return buf.getvalue()


def write_outputs(cfg: dict, rows: list[ResultRow], out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    csv_path.write_text(rows_to_csv(rows), encoding="utf-8")
    manifest = {
        "version": __version__,
        "config": cfg,
        "seed": cfg.get("seed", 0),
        "outputs": ["results.csv"],
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return csv_path


def read_result_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise SchemaError(
                f"unexpected CSV header in {path}: {reader.fieldnames}"
            )
        return list(reader)


def parse_tolerances(text: str) -> dict[str, float]:
    """'default=1e-9,mu=1e-12' -> {'default': 1e-9, 'mu': 1e-12}."""
    tol: dict[str, float] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise SchemaError(f"bad tolerance entry {part!r}; expected name=value")
        name, value = part.split("=", 1)
        tol[name.strip()] = float(value)
    tol.setdefault("default", 1e-9)
    return tol


def compare(rows_a: list[dict], rows_b: list[dict], tol: dict[str, float]) -> dict:
    """Per-quantity max deviation of value columns between two result tables."""
    def key(r):
        return (r["time"], r["protocol"], r["unraveling"], r["mode"], r["quantity"])

    index_b = {key(r): r for r in rows_b}
    if {key(r) for r in rows_a} != set(index_b):
        raise SchemaError("result tables do not cover the same rows")
    deviations: dict[str, float] = {}
    for r in rows_a:
        d = abs(float(r["value"]) - float(index_b[key(r)]["value"]))
        q = r["quantity"]
        deviations[q] = max(deviations.get(q, 0.0), d)
    report = {}
    all_pass = True
    for q, d in sorted(deviations.items()):
        limit = tol.get(q, tol["default"])
        ok = d <= limit
        all_pass &= ok
        report[q] = {"max_deviation": d, "tolerance": limit, "pass": ok}
    return {"quantities": report, "pass": all_pass}


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.mode is not None:
        cfg["mode"] = args.mode
    if args.mitigation is not None:
        cfg["mitigation"] = args.mitigation == "on"
    if args.resamples is not None:
        cfg["bootstrap_resamples"] = args.resamples
    cfg = validate_config(cfg)
    out_dir = Path(args.out or cfg.get("output") or ".")
    kind = cfg["kind"]
    if kind == "calibrate":
        result = run_calibrate(cfg)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "assignment_matrix.json"
        path.write_text(json.dumps(result, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")
        return 0
    rows = run_rf(cfg) if kind == "continuous-rf" else run_discrete(cfg)
    path = write_outputs(cfg, rows, out_dir)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _cmd_compare(args) -> int:
    tol = parse_tolerances(args.tol)
    report = compare(
        read_result_csv(args.table_a), read_result_csv(args.table_b), tol
    )
    for q, info in report["quantities"].items():
        status = "PASS" if info["pass"] else "FAIL"
        print(
            f"{status} {q}: max deviation {info['max_deviation']:.3e} "
            f"(tolerance {info['tolerance']:.3e})"
        )
    return 0 if report["pass"] else 1


def _cmd_grids(_args) -> int:
    print(json.dumps(default_grids(), indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unravelsim",
        description="Synthetic-unraveling trajectory experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--mode", choices=["exact", "sampled", "both"])
    p_run.add_argument("--mitigation", choices=["on", "off"])
    p_run.add_argument("--out")
    p_run.add_argument("--resamples", type=int)
    p_run.set_defaults(func=_cmd_run)

    p_cal = sub.add_parser("calibrate", help="run a readout calibration config")
    p_cal.add_argument("config")
    p_cal.add_argument("--seed", type=int)
    p_cal.add_argument("--out")
    p_cal.set_defaults(
        func=_cmd_run, mode=None, mitigation=None, resamples=None
    )

    p_cmp = sub.add_parser("compare", help="compare two result tables")
    p_cmp.add_argument("table_a")
    p_cmp.add_argument("table_b")
    p_cmp.add_argument("--tol", default="default=1e-9")
    p_cmp.set_defaults(func=_cmd_compare)

    p_grids = sub.add_parser("grids", help="print the default time grids")
    p_grids.set_defaults(func=_cmd_grids)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OptimizationError, StepSizeError, UnravelsimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
