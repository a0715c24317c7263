"""Command line interface.

Every subcommand accepts ``--out DIR``; results go to JSON lines (runs) and
CSV (aggregates) there. Failures exit non-zero with a JSON error object on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import bench
from .hamiltonian import COST_KINDS, CostFunction
from .instance import enumerate_instances, make_benchmark_instance, make_instance
from .optimize import OptimizerConfig
from .simulator import FAMILIES, AnsatzSpec
from .vqe import RunConfig, run_vqe, run_with_alpha_schedule


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message, code=2)


def _fail(kind: str, message: str, code: int = 1):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    sys.exit(code)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _shots(text: str):
    return None if text.lower() == "exact" else int(text)


def _shots_list(text: str) -> list:
    return [_shots(x) for x in text.split(",") if x.strip()]


def _strs(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _load_instance(n: int, long_run: bool):
    inst = make_benchmark_instance(n)
    bench.check_scale([inst], long_run)
    return inst


def cmd_instance(args):
    inst = make_instance(args.n)
    try:
        inst = make_benchmark_instance(args.n)
        factors = f" p={inst.p_true} q={inst.q_true}"
    except ValueError:
        factors = " (not an odd semiprime)"
    data = inst.to_json()
    sys.stdout.write(f"n={inst.n} B={inst.B} Np={inst.Np} Nq={inst.Nq} N={inst.N}{factors}\n")
    _emit(data)
    out = _out_dir(args)
    if out:
        (out / "instance.json").write_text(json.dumps(data) + "\n")


def cmd_enumerate(args):
    instances = enumerate_instances(args.N)
    lines = [json.dumps(i.to_json()) for i in instances]
    for line in lines:
        sys.stdout.write(line + "\n")
    out = _out_dir(args)
    if out:
        (out / "instances.jsonl").write_text("".join(line + "\n" for line in lines))


def cmd_solve(args):
    inst = _load_instance(args.n, args.long_run)
    schedule = tuple(_floats(args.alpha_schedule)) if args.alpha_schedule else None
    cfg = RunConfig(
        instance=inst,
        ansatz=AnsatzSpec(args.ansatz, inst.N, args.layers),
        alpha=schedule[0] if schedule else args.alpha,
        shots=args.shots,
        cost=CostFunction(args.cost),
        optimizer=OptimizerConfig(args.optimizer, max_evals=args.max_evals, seed=args.seed),
        fidelity_threshold=args.threshold,
        seed=args.seed,
        initial_state=args.initial_state,
        alpha_schedule=schedule,
        stop_on_success=args.stop_on_success,
    )
    records = run_with_alpha_schedule(cfg) if schedule else [run_vqe(cfg)]
    last = records[-1]
    _emit(
        {
            "n": inst.n,
            "success": last.success,
            "alpha": last.config.alpha,
            "first_success_eval": last.first_success_eval,
            "max_fidelity": last.max_fidelity,
            "n_evals": last.trace.n_evals,
            "factors": [inst.p_true, inst.q_true] if last.success else None,
            "runs": len(records),
        }
    )
    out = _out_dir(args)
    if out:
        with open(out / "runs.jsonl", "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec.to_json()) + "\n")


def _summary(result: bench.ExperimentResult):
    for row in result.aggregate:
        _emit({k: row[k] for k in ("cell", "n", "ansatz", "layers", "alpha", "shots", "cost", "optimizer", "success_rate", "mean_first_success_eval")})


def cmd_sweep(args):
    try:
        data = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise CliError(f"cannot read config {args.config}: {exc}") from exc
    cfg = bench.ExperimentConfig.from_json(data)
    if args.workers:
        cfg = replace(cfg, workers=args.workers)
    _summary(bench.run_experiment(cfg, _out_dir(args), args.long_run))


def cmd_diff_study(args):
    cfg = bench.ExperimentConfig(
        instances=[0],  # replaced by the enumeration
        ansatz=_strs(args.ansatz),
        layers=[args.layers],
        alphas=[args.alpha],
        seeds_per_cell=args.seeds,
        fidelity_threshold=args.threshold,
        max_evals=args.max_evals,
        workers=args.workers or 1,
    )
    if args.N > bench.DESK_MAX_QUBITS and not args.long_run:
        raise CliError(f"N={args.N} exceeds {bench.DESK_MAX_QUBITS} qubits; pass --long-run")
    res = bench.difference_study(args.N, cfg, _out_dir(args), args.long_run)
    for (ansatz, group), reg in res.regressions.items():
        _emit({"ansatz": ansatz, "group": group, **(reg.to_json() if reg else {"slope": None})})


def cmd_alpha_study(args):
    inst = _load_instance(args.n, args.long_run)
    rows = bench.alpha_error_study(
        inst,
        _floats(args.alphas),
        _ints(args.shots),
        layers=args.layers,
        optimizer=args.optimizer,
        max_evals=args.max_evals,
        seed=args.seed,
        out_dir=_out_dir(args),
        long_run=args.long_run,
    )
    firsts = [r for r in rows if r["eval"] == 1]
    for r in firsts:
        _emit({"alpha": r["alpha"], "shots": r["shots"], "initial_cvar": r["cvar"], "initial_std_error": r["std_error"]})


def cmd_cost_study(args):
    inst = _load_instance(args.n, args.long_run)
    res = bench.cost_function_study(
        inst,
        _shots_list(args.shots),
        costs=_strs(args.costs),
        optimizers=_strs(args.optimizers),
        alpha=args.alpha,
        layers=args.layers,
        seeds=args.seeds,
        fidelity_threshold=args.threshold,
        max_evals=args.max_evals,
        workers=args.workers or 1,
        out_dir=_out_dir(args),
        long_run=args.long_run,
    )
    _summary(res)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vqefactor", description="Factor odd semiprimes with CVaR-VQE on a statevector simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="output directory")
        p.add_argument("--long-run", action="store_true", help=f"allow registers above {bench.DESK_MAX_QUBITS} qubits")

    p = sub.add_parser("instance", help="print the qubit layout of n")
    p.add_argument("n", type=int)
    common(p)
    p.set_defaults(func=cmd_instance)

    p = sub.add_parser("enumerate", help="list all odd semiprimes needing N qubits")
    p.add_argument("N", type=int)
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("solve", help="run one CVaR-VQE factorization")
    p.add_argument("n", type=int)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--shots", type=_shots, default=None, help="shot count or 'exact' (default)")
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--ansatz", choices=FAMILIES, default="linear_cnot")
    p.add_argument("--cost", choices=COST_KINDS, default="hamiltonian")
    p.add_argument("--optimizer", choices=("cobyla", "nft"), default="cobyla")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.01, help="fidelity threshold t")
    p.add_argument("--max-evals", type=int, default=None, help="default 50*N*L")
    p.add_argument("--initial-state", choices=("zeros", "plus"), default="zeros")
    p.add_argument("--alpha-schedule", default=None, help="comma list, e.g. 0.5,0.25")
    p.add_argument("--stop-on-success", action="store_true")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="run a JSON-configured experiment grid")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diff-study", help="success rate vs |p - q| for all n needing N qubits")
    p.add_argument("N", type=int)
    p.add_argument("--ansatz", default="linear_cnot", help="comma list of families")
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--max-evals", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_diff_study)

    p = sub.add_parser("alpha-study", help="CVaR standard error along runs started at |+>")
    p.add_argument("n", type=int)
    p.add_argument("--alphas", default="0.01,0.1,0.25,0.5,0.75")
    p.add_argument("--shots", default="1000,10000")
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--optimizer", choices=("cobyla", "nft"), default="cobyla")
    p.add_argument("--max-evals", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_alpha_study)

    p = sub.add_parser("cost-study", help="finite-shot success per cost function and optimizer")
    p.add_argument("n", type=int)
    p.add_argument("--shots", default="1000,10000")
    p.add_argument("--costs", default=",".join(COST_KINDS))
    p.add_argument("--optimizers", default="cobyla,nft")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--threshold", type=float, default=0.01)
    p.add_argument("--max-evals", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_cost_study)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CliError, ValueError, OSError, json.JSONDecodeError, TypeError) as exc:
        _fail(type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
