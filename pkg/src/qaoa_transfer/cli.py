"""Command-line driver: generate -> optimize -> transfer -> sample -> schedule.

Exit codes: 0 success, 2 usage or invalid input, 3 resource cap, 4 numeric failure.
Relative output paths are resolved against ``$QAOA_TL_OUTDIR`` when it is set.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from . import problems
from .annealing import ScheduleTable, default_schedule, export_schedule, schedule_from_params
from .encoding import PenaltyConfig, default_penalties, encode
from .exceptions import (DimensionError, NumericError, PenaltyConfigError, ResourceError,
                         ScheduleError, SizeError)
from .mitigation import mitigate
from .optimizer import DEFAULT_DELTA, BUDGET_MULTIPLIER, OptimizerConfig, linear_ramp, optimize
from .oracle import brute_force
from .problems import ProblemKind
from .records import ExperimentRecord, atomic_write_text, dumps, timestamp
from .simulator import MAX_QUBITS, QaoaSimulator, probability_of, sample
from .transfer import ParameterBank, sweep

log = logging.getLogger("qaoa_transfer")

EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_NUMERIC = 4
OUTDIR_ENV = "QAOA_TL_OUTDIR"


class UsageError(Exception):
    pass


def _out_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTDIR_ENV)
    return p if p.is_absolute() or not base else Path(base) / p


def _penalties(kind: ProblemKind, args) -> PenaltyConfig:
    return default_penalties(kind).merged(args.lambda0, args.lambda1, args.lambda2)


def _check_cap(n_qubits: int) -> None:
    if n_qubits > MAX_QUBITS:
        raise ResourceError(f"{n_qubits} qubits exceeds the simulator cap of {MAX_QUBITS}")


def _load_instance(path: str):
    return problems.from_json(Path(path).read_text())


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


# pipeline steps, shared by the individual commands and by `run`

def optimize_instance(inst, p: int, delta: float, multiplier: int,
                      penalties: Optional[PenaltyConfig] = None, initial_step: float = 0.1,
                      tolerance: float = 1e-6, seed: int = 0):
    """Linear-ramp start plus COBYLA; returns ``(params, trace, summary)``."""
    model = encode(inst, penalties)
    _check_cap(model.n_qubits)
    init = linear_ramp(p, delta)
    ground = brute_force(model)
    sim = QaoaSimulator(model)
    cfg = None
    if multiplier > 0:
        cfg = OptimizerConfig.for_problem(model.n_qubits, p, multiplier,
                                          initial_step=initial_step, tolerance=tolerance,
                                          seed=seed)
        best, trace = optimize(model, init, cfg)
    else:
        best, trace = init, None
    s0, s1 = sim.evolve(init), sim.evolve(best)
    summary = {
        "n_qubits": model.n_qubits,
        "init_expectation": sim.expectation(s0),
        "final_expectation": sim.expectation(s1),
        "init_prob_optimal": probability_of(s0, ground.ground_states),
        "final_prob_optimal": probability_of(s1, ground.ground_states),
        "evaluations": len(trace) if trace is not None else 0,
    }
    provenance = {
        "source": {"kind": inst.kind.value, "size": inst.size, "seed": inst.seed},
        "p": p, "delta": delta, "budget_multiplier": multiplier,
        "optimizer": cfg.to_dict() if cfg else None,
        "penalties": (penalties or default_penalties(inst.kind)).to_dict(),
    }
    return best, trace, summary, provenance


def target_instances(groups: Sequence[dict]) -> list:
    out = []
    for group in groups:
        offset = int(group.get("seed_offset", 0))
        for size in group.get("sizes", []):
            for k in range(int(group.get("n_seeds", 5))):
                out.append(problems.generate(group["kind"], int(size), offset + k))
    return out


def sample_instance(inst, params, shots: int, seed: int, do_mitigate: bool,
                    penalties: Optional[PenaltyConfig] = None):
    model = encode(inst, penalties)
    _check_cap(model.n_qubits)
    ground = brute_force(model)
    samples = sample(QaoaSimulator(model).evolve(params), shots, seed)
    result = {"n_shots": samples.n_shots,
              "raw_optimal_fraction": samples.fraction(ground.ground_states)}
    mitigated = None
    if do_mitigate:
        mitigated, report = mitigate(samples, model, ground.ground_states)
        result["mitigation"] = report.to_dict()
    return samples, mitigated, result


# commands

def cmd_generate(args) -> int:
    inst = problems.generate(args.kind, args.size, args.seed)
    out = _out_path(args.out or f"{inst.kind.value}{inst.size}_seed{inst.seed}.json")
    atomic_write_text(out, problems.to_json(inst) + "\n")
    print(f"{out}  ({inst.n_vars} variables)")
    return 0


def cmd_optimize(args) -> int:
    inst = _load_instance(args.instance)
    label = args.label or f"{inst.kind.value}{inst.size}"
    best, trace, summary, provenance = optimize_instance(
        inst, args.p, args.delta, args.budget_multiplier, _penalties(inst.kind, args),
        args.initial_step, args.tolerance, args.seed)
    bank_path = _out_path(args.bank)
    bank = ParameterBank.load(bank_path)
    bank.add(label, best, provenance)
    atomic_write_text(bank_path, bank.to_json() + "\n")
    if args.trace and trace is not None:
        trace.write_csv(_out_path(args.trace))
    print(f"entry {label!r} -> {bank_path}")
    print(f"expectation   init {summary['init_expectation']:.6f}  "
          f"final {summary['final_expectation']:.6f}")
    print(f"probability(x*) init {summary['init_prob_optimal']:.6f}  "
          f"final {summary['final_prob_optimal']:.6f}  ({summary['evaluations']} evaluations)")
    return 0


def cmd_transfer(args) -> int:
    entry = ParameterBank.load(_out_path(args.bank))[args.label]
    targets = target_instances([{"kind": args.kind, "sizes": args.sizes,
                                 "n_seeds": args.seeds, "seed_offset": args.seed_offset}])
    for t in targets:
        _check_cap(t.n_vars)
    pen = {ProblemKind.parse(args.kind): _penalties(ProblemKind.parse(args.kind), args)}
    report = sweep(args.label, entry.params, targets, pen, workers=args.workers)
    out = _out_path(args.out)
    atomic_write_text(out / "transfer.csv", report.to_csv())
    record = ExperimentRecord(
        config={"command": "transfer", "label": args.label, "kind": args.kind,
                "sizes": args.sizes, "n_seeds": args.seeds, "seed_offset": args.seed_offset,
                "penalties": {k.value: v.to_dict() for k, v in pen.items()}},
        bank={args.label: entry.to_dict()}, results=report.to_dict(),
        timestamps={"written": timestamp()}, version=__version__)
    record.write(out / "transfer.json")
    print(report.to_csv(), end="")
    for f in report.failures:
        print(f"failed: {f.kind}({f.size}, seed={f.seed}): {f.error}", file=sys.stderr)
    return 0


def cmd_sample(args) -> int:
    if args.shots < 1:
        raise UsageError("--shots must be at least 1")
    inst = _load_instance(args.instance)
    entry = ParameterBank.load(_out_path(args.bank))[args.label]
    samples, mitigated, result = sample_instance(inst, entry.params, args.shots, args.seed,
                                                 args.mitigate, _penalties(inst.kind, args))
    out = _out_path(args.out)
    atomic_write_text(out / "samples.json", samples.to_json() + "\n")
    if mitigated is not None:
        atomic_write_text(out / "mitigated.json", mitigated.to_json() + "\n")
    atomic_write_text(out / "sample_report.json", dumps(result))
    print(dumps(result), end="")
    return 0


def cmd_schedule(args) -> int:
    if args.label is None:
        sch = default_schedule(args.t_f)
    else:
        if args.bank is None:
            raise UsageError("--label needs --bank")
        entry = ParameterBank.load(_out_path(args.bank))[args.label]
        table = ScheduleTable.from_csv(args.table) if args.table else ScheduleTable.linear()
        sch = schedule_from_params(entry.params, table, args.mode, args.t_f, source=args.label)
    out = _out_path(args.out)
    export_schedule(sch, out)
    print(sch.to_csv(), end="")
    return 0


DEFAULT_PIPELINE = {
    "label": "bpp3",
    "source": {"kind": "bpp", "size": 3, "seed": 7},
    "p": 10,
    "delta": DEFAULT_DELTA,
    "budget_multiplier": BUDGET_MULTIPLIER,
    "initial_step": 0.1,
    "tolerance": 1e-6,
    "optimizer_seed": 0,
    "penalties": {},
    "targets": [{"kind": "mis", "sizes": [4, 6, 8], "n_seeds": 5, "seed_offset": 0}],
    "sample": {"kind": "mis", "size": 8, "seed": 0, "shots": 1000, "shot_seed": 0,
               "mitigate": True},
    "schedule": {"mode": "mixer", "t_f": 100.0, "table": None},
}


def run_pipeline(config: dict, out_dir: Path) -> ExperimentRecord:
    """Run every stage from one config dict and write all outputs under ``out_dir``."""
    cfg = {**DEFAULT_PIPELINE, **config}
    pen_over = {ProblemKind.parse(k): PenaltyConfig(**v) for k, v in cfg["penalties"].items()}

    def pen(kind: ProblemKind) -> PenaltyConfig:
        return pen_over.get(kind, default_penalties(kind))

    started = timestamp()
    src = problems.generate(**cfg["source"])
    targets = target_instances(cfg["targets"])
    for t in [src] + targets:
        _check_cap(t.n_vars)

    params, trace, opt_summary, provenance = optimize_instance(
        src, cfg["p"], cfg["delta"], cfg["budget_multiplier"], pen(src.kind),
        cfg["initial_step"], cfg["tolerance"], cfg["optimizer_seed"])
    label = cfg["label"]
    bank = ParameterBank()
    bank.add(label, params, provenance)
    atomic_write_text(out_dir / "source_instance.json", problems.to_json(src) + "\n")
    atomic_write_text(out_dir / "bank.json", bank.to_json() + "\n")
    if trace is not None:
        trace.write_csv(out_dir / "trace.csv")

    report = sweep(label, params, targets, pen_over)
    atomic_write_text(out_dir / "transfer.csv", report.to_csv())
    results = {"optimize": opt_summary, "transfer": report.to_dict()}

    if cfg.get("sample"):
        sc = cfg["sample"]
        inst = problems.generate(sc["kind"], sc["size"], sc["seed"])
        samples, mitigated, res = sample_instance(inst, params, sc["shots"], sc["shot_seed"],
                                                  sc.get("mitigate", False), pen(inst.kind))
        atomic_write_text(out_dir / "samples.json", samples.to_json() + "\n")
        if mitigated is not None:
            atomic_write_text(out_dir / "mitigated.json", mitigated.to_json() + "\n")
        results["sample"] = res

    if cfg.get("schedule"):
        sc = cfg["schedule"]
        table = ScheduleTable.from_csv(sc["table"]) if sc.get("table") else ScheduleTable.linear()
        sch = schedule_from_params(params, table, sc["mode"], sc["t_f"], source=label)
        export_schedule(sch, out_dir / "schedule.csv")
        results["schedule"] = [list(p) for p in sch.points]

    record = ExperimentRecord(config=cfg, bank={k: v.to_dict() for k, v in bank.entries.items()},
                              results=results,
                              timestamps={"started": started, "finished": timestamp()},
                              version=__version__)
    record.write(out_dir / "record.json")
    return record


def cmd_run(args) -> int:
    config = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
        config = data["config"] if "config" in data and "version" in data else data
    record = run_pipeline(config, _out_path(args.out))
    opt = record.results["optimize"]
    print(f"optimized {record.config['label']}: probability(x*) "
          f"{opt['init_prob_optimal']:.6f} -> {opt['final_prob_optimal']:.6f}")
    print(f"outputs in {_out_path(args.out)}")
    return 0


def _add_penalty_flags(p: argparse.ArgumentParser) -> None:
    for name in ("lambda0", "lambda1", "lambda2"):
        p.add_argument(f"--{name}", type=float, default=None,
                       help=f"override the default {name} for the instance's problem kind")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qaoa-tl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in ProblemKind]

    p = sub.add_parser("generate", help="draw a random problem instance")
    p.add_argument("--kind", required=True, choices=kinds)
    p.add_argument("--size", required=True, type=int)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", help="instance JSON path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("optimize", help="self-optimize QAOA angles and store them in a bank")
    p.add_argument("instance", help="instance JSON from `generate`")
    p.add_argument("--p", type=_positive_int, default=10)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--budget-multiplier", type=_nonneg_int, default=BUDGET_MULTIPLIER,
                   help="evaluation budget is this times n_qubits times p (0: keep the ramp)")
    p.add_argument("--initial-step", type=float, default=0.1)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bank", default="bank.json")
    p.add_argument("--label")
    p.add_argument("--trace", help="write the optimization trace CSV here")
    _add_penalty_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("transfer", help="apply a bank entry to random target instances")
    p.add_argument("--bank", default="bank.json")
    p.add_argument("--label", required=True)
    p.add_argument("--kind", required=True, choices=kinds)
    p.add_argument("--sizes", type=int, nargs="*", default=[])
    p.add_argument("--seeds", type=_positive_int, default=5)
    p.add_argument("--seed-offset", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", default="transfer")
    _add_penalty_flags(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("sample", help="shot-sample a bank entry on an instance")
    p.add_argument("instance")
    p.add_argument("--bank", default="bank.json")
    p.add_argument("--label", required=True)
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mitigate", action="store_true",
                   help="apply Hamming-distance-1 mitigation and report both fractions")
    p.add_argument("--out", default="sample")
    _add_penalty_flags(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("schedule", help="synthesize an annealing schedule from a bank entry")
    p.add_argument("--bank")
    p.add_argument("--label", help="omit for the default s = t/t_f schedule")
    p.add_argument("--table", help="CSV with columns s,A_GHz,B_GHz (default: linear synthetic)")
    p.add_argument("--mode", choices=["mixer", "cost"], default="mixer")
    p.add_argument("--t-f", type=float, default=100.0, help="anneal time in microseconds")
    p.add_argument("--out", default="schedule.csv")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("run", help="run or replay the full pipeline from a config or record")
    p.add_argument("--config", help="config JSON, or a record.json to replay")
    p.add_argument("--out", default="run")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, SizeError, DimensionError, PenaltyConfigError, ScheduleError,
            KeyError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
