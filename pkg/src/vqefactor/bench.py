"""Experiment harness: seeded grids of VQE runs, regressions and table output.

Every grid cell runs the same seed list, so initial parameters coincide
across cells with equal parameter counts. Output rows are ordered by
(cell, seed) regardless of worker completion order, and no timing data is
written, so identical configs produce byte-identical files.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .cvar import CvarEvaluator, tail_size
from .hamiltonian import COST_KINDS, CostFunction, cost_table
from .instance import FactoringInstance, enumerate_instances, make_benchmark_instance
from .optimize import OptimizerConfig
from .simulator import FAMILIES, AnsatzSpec
from .vqe import RunConfig, run_vqe

# Registers above this size are hours-scale per grid; they need long_run=True.
DESK_MAX_QUBITS = 16
LOW_TAIL = 10

RUN_COLUMNS = [
    ("cell", "int"),
    ("seed", "int"),
    ("n", "int"),
    ("N", "int"),
    ("p", "int"),
    ("q", "int"),
    ("abs_diff", "int"),
    ("degenerate", "bool"),
    ("ansatz", "str"),
    ("layers", "int"),
    ("alpha", "float"),
    ("shots", "int?"),
    ("cost", "str"),
    ("optimizer", "str"),
    ("fidelity_threshold", "float"),
    ("success", "bool"),
    ("first_success_eval", "int?"),
    ("first_threshold_eval", "int?"),
    ("max_fidelity", "float?"),
    ("n_evals", "int"),
    ("best_cost", "float?"),
    ("termination", "str"),
    ("error", "str?"),
]

CELL_KEYS = ["n", "N", "p", "q", "abs_diff", "degenerate", "ansatz", "layers", "alpha", "shots", "cost", "optimizer", "fidelity_threshold"]

AGGREGATE_COLUMNS = [("cell", "int")] + [c for c in RUN_COLUMNS if c[0] in CELL_KEYS] + [
    ("runs", "int"),
    ("successes", "int"),
    ("success_rate", "float"),
    ("mean_first_success_eval", "float?"),
    ("threshold_hits", "int"),
    ("mean_first_threshold_eval", "float?"),
    ("errors", "int"),
    ("low_tail", "bool"),
]

TRAJECTORY_COLUMNS = [
    ("alpha", "float"),
    ("shots", "int"),
    ("eval", "int"),
    ("cvar", "float"),
    ("std_error", "float?"),
    ("fidelity", "float?"),
]

PER_INSTANCE_COLUMNS = [
    ("ansatz", "str"),
    ("n", "int"),
    ("p", "int"),
    ("q", "int"),
    ("abs_diff", "int"),
    ("degenerate", "bool"),
    ("runs", "int"),
    ("success_rate", "float"),
]


@dataclass
class ExperimentConfig:
    """A full grid. ``fidelity_threshold=None`` ties the threshold to alpha (t = alpha)."""

    instances: list
    ansatz: list = field(default_factory=lambda: ["linear_cnot"])
    layers: list = field(default_factory=lambda: [3])
    alphas: list = field(default_factory=lambda: [0.1])
    shots: list = field(default_factory=lambda: [None])
    costs: list = field(default_factory=lambda: ["hamiltonian"])
    optimizers: list = field(default_factory=lambda: ["cobyla"])
    seeds_per_cell: int = 10
    seed_offset: int = 0
    fidelity_threshold: float | None = None
    max_evals: int | None = None
    initial_state: str = "zeros"
    parallel_offset: str = "fixed"
    stop_on_success: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.instances:
            raise ValueError("instances must be non-empty")
        for name in ("ansatz", "layers", "alphas", "shots", "costs", "optimizers"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        bad = [a for a in self.ansatz if a not in FAMILIES]
        if bad:
            raise ValueError(f"unknown ansatz families {bad}")
        bad = [c for c in self.costs if c not in COST_KINDS]
        if bad:
            raise ValueError(f"unknown cost kinds {bad}")
        if self.seeds_per_cell < 1:
            raise ValueError("seeds_per_cell must be >= 1")

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}; allowed: {sorted(known)}")
        if "instances" not in data:
            raise ValueError("config needs an 'instances' list")
        return cls(**data)

    def to_json(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["instances"] = [i.n if isinstance(i, FactoringInstance) else i for i in self.instances]
        return out

    def resolved_instances(self) -> list[FactoringInstance]:
        out = []
        for item in self.instances:
            if isinstance(item, FactoringInstance):
                out.append(item)
            else:
                out.append(make_benchmark_instance(int(item)))
        return out

    def cells(self) -> list[dict]:
        out = []
        grid = itertools.product(
            self.resolved_instances(), self.ansatz, self.layers, self.alphas, self.shots, self.costs, self.optimizers
        )
        for inst, ansatz, L, alpha, shots, cost, opt in grid:
            t = alpha if self.fidelity_threshold is None else self.fidelity_threshold
            out.append(
                {
                    "instance": inst,
                    "ansatz": ansatz,
                    "layers": int(L),
                    "alpha": float(alpha),
                    "shots": None if shots is None else int(shots),
                    "cost": cost,
                    "optimizer": opt,
                    "fidelity_threshold": float(t),
                }
            )
        return out

    @property
    def total_runs(self) -> int:
        return len(self.cells()) * self.seeds_per_cell


def check_scale(instances, long_run: bool) -> None:
    too_big = [i.n for i in instances if i.N > DESK_MAX_QUBITS]
    if too_big and not long_run:
        raise ValueError(
            f"instances {too_big} need more than {DESK_MAX_QUBITS} qubits; enable the long-run flag to run them"
        )


def _run_config(cfg: ExperimentConfig, cell: dict, seed: int) -> RunConfig:
    inst = cell["instance"]
    return RunConfig(
        instance=inst,
        ansatz=AnsatzSpec(cell["ansatz"], inst.N, cell["layers"], cfg.parallel_offset),
        alpha=cell["alpha"],
        shots=cell["shots"],
        cost=CostFunction(cell["cost"]),
        optimizer=OptimizerConfig(cell["optimizer"], max_evals=cfg.max_evals, seed=seed),
        fidelity_threshold=cell["fidelity_threshold"],
        seed=seed,
        initial_state=cfg.initial_state,
        stop_on_success=cfg.stop_on_success,
    )


def _cell_fields(cell: dict) -> dict:
    inst = cell["instance"]
    return {
        "n": inst.n,
        "N": inst.N,
        "p": inst.p_true,
        "q": inst.q_true,
        "abs_diff": inst.q_true - inst.p_true,
        "degenerate": inst.degenerate,
        "ansatz": cell["ansatz"],
        "layers": cell["layers"],
        "alpha": cell["alpha"],
        "shots": cell["shots"],
        "cost": cell["cost"],
        "optimizer": cell["optimizer"],
        "fidelity_threshold": cell["fidelity_threshold"],
    }


def _execute(job):
    cfg, index, cell, seed = job
    row = {"cell": index, "seed": seed, **_cell_fields(cell)}
    try:
        rec = run_vqe(_run_config(cfg, cell, seed))
    except Exception as exc:  # one bad run must not sink the grid
        row.update(
            success=False, first_success_eval=None, first_threshold_eval=None, max_fidelity=None,
            n_evals=0, best_cost=None, termination="error", error=f"{type(exc).__name__}: {exc}",
        )
        return row, None
    row.update(
        success=rec.success,
        first_success_eval=rec.first_success_eval,
        first_threshold_eval=rec.first_threshold_eval,
        max_fidelity=rec.max_fidelity,
        n_evals=rec.trace.n_evals,
        best_cost=rec.trace.best_cost,
        termination=rec.trace.termination,
        error=None,
    )
    return row, rec.to_json()


def _mean_or_none(values):
    return float(np.mean(values)) if values else None


def aggregate(rows: list[dict]) -> list[dict]:
    """Per-cell success rate and mean first-success index over successful runs."""
    by_cell: dict = {}
    for r in rows:
        by_cell.setdefault(r["cell"], []).append(r)
    out = []
    for cell in sorted(by_cell):
        rs = by_cell[cell]
        succ = [r for r in rs if r["success"]]
        thr = [r["first_threshold_eval"] for r in rs if r["first_threshold_eval"] is not None]
        head = rs[0]
        shots = head["shots"]
        out.append(
            {
                "cell": cell,
                **{k: head[k] for k in CELL_KEYS},
                "runs": len(rs),
                "successes": len(succ),
                "success_rate": len(succ) / len(rs),
                "mean_first_success_eval": _mean_or_none([r["first_success_eval"] for r in succ]),
                "threshold_hits": len(thr),
                "mean_first_threshold_eval": _mean_or_none(thr),
                "errors": sum(1 for r in rs if r["error"]),
                "low_tail": shots is not None and tail_size(head["alpha"], shots) < LOW_TAIL,
            }
        )
    return out


@dataclass
class ExperimentResult:
    runs: list
    aggregate: list
    records: list


def run_experiment(cfg: ExperimentConfig, out_dir=None, long_run: bool = False) -> ExperimentResult:
    """Run every (cell, seed); optionally write runs.jsonl, runs.csv, aggregate.csv and aggregate.json."""
    cells = cfg.cells()
    check_scale([c["instance"] for c in cells], long_run)
    jobs = [(cfg, i, cell, cfg.seed_offset + k) for i, cell in enumerate(cells) for k in range(cfg.seeds_per_cell)]

    out = Path(out_dir) if out_dir is not None else None
    writer = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        writer = _StreamWriter(out)
    rows, records = [], []
    try:
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                results = pool.map(_execute, jobs, chunksize=max(1, len(jobs) // (4 * cfg.workers)))
                for row, rec in results:
                    rows.append(row)
                    records.append(rec)
                    if writer:
                        writer.write(row, rec)
        else:
            for job in jobs:
                row, rec = _execute(job)
                rows.append(row)
                records.append(rec)
                if writer:
                    writer.write(row, rec)
    finally:
        if writer:
            writer.close()
    agg = aggregate(rows)
    if out is not None:
        emit_csv(agg, out / "aggregate.csv", AGGREGATE_COLUMNS)
        emit_plot_data(agg, out / "aggregate.json", AGGREGATE_COLUMNS)
    return ExperimentResult(rows, agg, records)


class _StreamWriter:
    def __init__(self, out: Path):
        self.csv_path = out / "runs.csv"
        self.jsonl_path = out / "runs.jsonl"
        try:
            self._csv = open(self.csv_path, "w", newline="")
            self._jsonl = open(self.jsonl_path, "w")
        except OSError as exc:
            raise OSError(f"cannot open output in {out}: {exc}") from exc
        self._writer = csv.writer(self._csv, lineterminator="\n")
        self._writer.writerow([c for c, _ in RUN_COLUMNS])

    def write(self, row, rec):
        self._writer.writerow([_fmt(row.get(c), t) for c, t in RUN_COLUMNS])
        if rec is not None:
            self._jsonl.write(json.dumps(rec) + "\n")
        self._csv.flush()
        self._jsonl.flush()

    def close(self):
        self._csv.close()
        self._jsonl.close()


# -- tables -----------------------------------------------------------------


def _fmt(value, typ: str) -> str:
    if value is None:
        if not typ.endswith("?"):
            raise ValueError(f"missing value for non-optional {typ} column")
        return ""
    base = typ.rstrip("?")
    if base == "bool":
        return "true" if value else "false"
    if base == "float":
        return repr(float(value))
    if base == "int":
        return str(int(value))
    return str(value)


def _parse(text: str, typ: str):
    if text == "" and typ.endswith("?"):
        return None
    base = typ.rstrip("?")
    if base == "bool":
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r}")
        return text == "true"
    if base == "float":
        return float(text)
    if base == "int":
        return int(text)
    return text


def emit_csv(rows: list[dict], path, columns) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([c for c, _ in columns])
            for r in rows:
                w.writerow([_fmt(r.get(c), t) for c, t in columns])
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def read_csv(path, columns) -> list[dict]:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            expected = [c for c, _ in columns]
            if header != expected:
                raise ValueError(f"{path}: header {header} does not match {expected}")
            return [{c: _parse(v, t) for (c, t), v in zip(columns, line)} for line in reader]
    except OSError as exc:
        raise OSError(f"failed reading {path}: {exc}") from exc


def emit_plot_data(rows: list[dict], path, columns) -> None:
    """Column-oriented JSON ({"columns": [...], "data": {col: [...]}}) of the same table."""
    names = [c for c, _ in columns]
    data = {c: [r.get(c) for r in rows] for c in names}
    path = Path(path)
    try:
        with open(path, "w") as fh:
            json.dump({"columns": names, "data": data}, fh)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def read_plot_data(path) -> list[dict]:
    with open(path) as fh:
        obj = json.load(fh)
    cols = obj["columns"]
    n = len(obj["data"][cols[0]]) if cols else 0
    return [{c: obj["data"][c][i] for c in cols} for i in range(n)]


# -- regression ---------------------------------------------------------------


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    slope_std_error: float | None
    x: tuple
    y: tuple

    @property
    def t_value(self) -> float | None:
        if not self.slope_std_error:
            return None
        return self.slope / self.slope_std_error

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_std_error": self.slope_std_error,
            "points": len(self.x),
        }


def ols(x, y) -> RegressionResult:
    """Least-squares line y = intercept + slope * x with the usual slope standard error."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.size < 2:
        raise ValueError("need at least two (x, y) pairs of equal length")
    xm, ym = xa.mean(), ya.mean()
    sxx = float(np.sum((xa - xm) ** 2))
    if sxx == 0.0:
        raise ValueError("x has no spread; slope is undefined")
    slope = float(np.sum((xa - xm) * (ya - ym))) / sxx
    intercept = float(ym - slope * xm)
    se = None
    if xa.size > 2:
        resid = ya - (intercept + slope * xa)
        s2 = float(np.dot(resid, resid)) / (xa.size - 2)
        se = math.sqrt(s2 / sxx)
    return RegressionResult(slope, intercept, se, tuple(xa.tolist()), tuple(ya.tolist()))


@dataclass
class DifferenceStudyResult:
    per_instance: list
    regressions: dict  # (ansatz, group) -> RegressionResult | None
    experiment: ExperimentResult


def difference_study(N: int, cfg: ExperimentConfig, out_dir=None, long_run: bool = False) -> DifferenceStudyResult:
    """Success rate per instance against |p - q| for every instance needing N qubits."""
    instances = enumerate_instances(N)
    if not instances:
        raise ValueError(f"no odd semiprime needs exactly {N} qubits")
    grid = ExperimentConfig(**{**{f.name: getattr(cfg, f.name) for f in fields(cfg)}, "instances": instances})
    exp = run_experiment(grid, out_dir, long_run)
    per_instance = [
        {
            "ansatz": a["ansatz"],
            "n": a["n"],
            "p": a["p"],
            "q": a["q"],
            "abs_diff": a["abs_diff"],
            "degenerate": a["degenerate"],
            "runs": a["runs"],
            "success_rate": a["success_rate"],
        }
        for a in exp.aggregate
    ]
    regressions = {}
    for ansatz in grid.ansatz:
        rows = [r for r in per_instance if r["ansatz"] == ansatz]
        groups = {
            "all": rows,
            "degenerate": [r for r in rows if r["degenerate"]],
            "non_degenerate": [r for r in rows if not r["degenerate"]],
        }
        for name, rs in groups.items():
            try:
                regressions[(ansatz, name)] = ols([r["abs_diff"] for r in rs], [r["success_rate"] for r in rs])
            except ValueError:
                regressions[(ansatz, name)] = None
    if out_dir is not None:
        out = Path(out_dir)
        emit_csv(per_instance, out / "per_instance.csv", PER_INSTANCE_COLUMNS)
        reg = [
            {"ansatz": a, "group": g, **(r.to_json() if r else {"slope": None})}
            for (a, g), r in regressions.items()
        ]
        with open(out / "regression.json", "w") as fh:
            json.dump(reg, fh, indent=1)
            fh.write("\n")
    return DifferenceStudyResult(per_instance, regressions, exp)


def mean_success(per_instance: list, degenerate: bool, ansatz: str | None = None) -> float | None:
    rates = [
        r["success_rate"]
        for r in per_instance
        if r["degenerate"] == degenerate and (ansatz is None or r["ansatz"] == ansatz)
    ]
    return _mean_or_none(rates)


def alpha_error_study(
    instance: FactoringInstance,
    alphas,
    shots_list,
    *,
    ansatz: str = "linear_cnot",
    layers: int = 3,
    optimizer: str = "cobyla",
    max_evals: int | None = None,
    seed: int = 0,
    out_dir=None,
    long_run: bool = False,
) -> list[dict]:
    """Per-evaluation sampled CVaR and its standard error, every run starting at |+>^N."""
    check_scale([instance], long_run)
    rows = []
    for shots in shots_list:
        for alpha in alphas:
            cfg = RunConfig(
                instance=instance,
                ansatz=AnsatzSpec(ansatz, instance.N, layers),
                alpha=float(alpha),
                shots=int(shots),
                optimizer=OptimizerConfig(optimizer, max_evals=max_evals, seed=seed),
                seed=seed,
                initial_params="zeros",
                initial_state="plus",
            )
            rec = run_vqe(cfg)
            shadow = rec.shadow_fidelity or [None] * rec.trace.n_evals
            for i, (value, se, fid) in enumerate(zip(rec.trace.values, rec.std_error_trajectory, shadow)):
                rows.append(
                    {"alpha": float(alpha), "shots": int(shots), "eval": i + 1, "cvar": value, "std_error": se, "fidelity": fid}
                )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        emit_csv(rows, out / "alpha_study.csv", TRAJECTORY_COLUMNS)
        emit_plot_data(rows, out / "alpha_study.json", TRAJECTORY_COLUMNS)
    return rows


def initial_std_error(instance: FactoringInstance, alpha: float, shots: int, cost: str = "hamiltonian") -> float:
    """Standard error of CVaR on |+>^N, evaluated on the quantile sample of the uniform distribution.

    The quantile sample places shot k at the (k - 1/2)/S quantile of the cost
    distribution, which makes the figure deterministic (no RNG).
    """
    evaluator = CvarEvaluator(cost_table(instance, cost))
    dim = 1 << instance.N
    probs = np.full(dim, 1.0 / dim)
    cum = np.cumsum(probs[evaluator.order])
    u = (np.arange(shots) + 0.5) / shots
    ranks = np.minimum(np.searchsorted(cum, u, side="left"), dim - 1)
    counts = np.zeros(dim, dtype=np.int64)
    np.add.at(counts, evaluator.order[ranks], 1)
    est = evaluator.from_counts(counts, alpha)
    if est.std_error is None:
        raise ValueError("tail too small for a standard error")
    return est.std_error


def cost_function_study(
    instance: FactoringInstance,
    shots_list,
    *,
    costs=COST_KINDS,
    optimizers=("cobyla", "nft"),
    alpha: float = 0.01,
    layers: int = 3,
    seeds: int = 20,
    seed_offset: int = 0,
    fidelity_threshold: float = 0.01,
    max_evals: int | None = None,
    stop_on_success: bool = False,
    workers: int = 1,
    out_dir=None,
    long_run: bool = False,
) -> ExperimentResult:
    """Finite-shot success (solution observed) per cost kind x optimizer x shot count."""
    cfg = ExperimentConfig(
        instances=[instance],
        ansatz=["linear_cnot"],
        layers=[layers],
        alphas=[alpha],
        shots=list(shots_list),
        costs=list(costs),
        optimizers=list(optimizers),
        seeds_per_cell=seeds,
        seed_offset=seed_offset,
        fidelity_threshold=fidelity_threshold,
        max_evals=max_evals,
        stop_on_success=stop_on_success,
        workers=workers,
    )
    return run_experiment(cfg, out_dir, long_run)

