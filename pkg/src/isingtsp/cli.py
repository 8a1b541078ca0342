"""Command-line interface: ``solve``, ``bench`` and ``oracle`` subcommands.

Exit codes: 0 success, 2 unreadable or malformed input, 3 solver failure,
64 bad usage.  Option values come from the command line, then from an
optional ``--config`` file of ``key = value`` lines, then from defaults.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import costmodel
from .distance import SUPPORTED_BITS, build_distance_matrix
from .macro import REPAIR_POLICIES, AnnealSchedule
from .oracle import HELD_KARP_MAX_N, brute_force_cycle, held_karp_cycle
from .solver import SolveConfig, default_parallelism, solve_hierarchical
from .tsplib import TSPLIBError, read_instance, write_tour

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVE = 3
EXIT_USAGE = 64

REPORT_SCHEMA = 1

BENCH_FIELDS = [
    "instance", "n", "m", "bits", "seed", "tour_length", "ratio",
    "clustering_s", "fixing_s", "annealing_s", "merging_s",
    "macro_latency_us", "macro_energy_uj",
]

# option name -> (type, default); these may also come from a config file
SOLVE_OPTIONS = {
    "max_cluster_size": (int, 12),
    "bits": (int, 4),
    "seed": (int, 0),
    "macros": (int, None),  # None: host parallelism
    "chip_macros": (int, None),  # None: widest level of the hierarchy
    "nonideal_eps": (float, 0.0),
    "repair": (str, "swap"),
    "granularity": (str, "sweep"),
    "report": (str, "json"),
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _common_options(p: argparse.ArgumentParser):
    p.add_argument("--max-cluster-size", type=int, help="largest cluster a macro solves (default 12)")
    p.add_argument("--bits", type=int, help="weight precision, one of 2, 3, 4 (default 4)")
    p.add_argument("--macros", type=int, help="worker threads solving clusters (default: CPU count)")
    p.add_argument("--chip-macros", type=int, help="macros assumed by the cost estimate")
    p.add_argument("--nonideal-eps", type=float, help="HRS leakage as a fraction of full scale")
    p.add_argument("--repair", help=f"permutation repair policy: {', '.join(REPAIR_POLICIES)}")
    p.add_argument("--granularity", help="write current steps per 'sweep' or per 'update'")
    p.add_argument("--optima", type=Path, help="JSON registry of known optimal lengths")
    p.add_argument("--config", type=Path, help="key = value file with option defaults")
    p.add_argument("--deterministic", action="store_true", help="leave wall-clock times out of reports")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isingtsp", description="Hierarchical TSP solving on modeled crossbar Ising macros.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", help="solve one TSPLIB instance")
    solve.add_argument("--instance", type=Path, required=True)
    solve.add_argument("--seed", type=int)
    solve.add_argument("--report", help="report format: json or csv (default json)")
    solve.add_argument("--output", type=Path, help="report file (default: stdout)")
    solve.add_argument("--tour", type=Path, help="write the tour in TSPLIB format here")
    solve.add_argument("--trace", type=Path, help="write per-sweep annealing rows as CSV here")
    _common_options(solve)

    bench = sub.add_parser("bench", help="sweep cluster size, precision and seed over instances")
    bench.add_argument("--instances", type=Path, required=True, help="file listing .tsp paths, one per line")
    bench.add_argument("--m-values", default="12", help="comma-separated cluster sizes")
    bench.add_argument("--bit-values", default="2,3,4", help="comma-separated precisions")
    bench.add_argument("--seeds", default="0", help="comma-separated seeds")
    bench.add_argument("--output", type=Path, help="CSV file (default: stdout)")
    _common_options(bench)

    orc = sub.add_parser("oracle", help="exact tour of a small instance")
    orc.add_argument("--instance", type=Path, required=True)
    orc.add_argument("--method", choices=["held-karp", "exhaustive"], default="held-karp")
    orc.add_argument("--tour", type=Path, help="write the exact tour here")
    return parser


def _read_config(path: Path | None) -> dict[str, str]:
    if path is None:
        return {}
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string("[options]\n" + path.read_text())
    except (OSError, configparser.Error) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return {k.replace("-", "_"): v.strip().strip('"') for k, v in cp["options"].items()}


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge command line, config file and defaults; validate choices."""
    config = _read_config(args.config)
    unknown = set(config) - set(SOLVE_OPTIONS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    opts = {}
    for name, (kind, default) in SOLVE_OPTIONS.items():
        value = getattr(args, name, None)
        if value is None and name in config:
            try:
                value = kind(config[name])
            except ValueError:
                raise UsageError(f"config value for {name} is not a valid {kind.__name__}") from None
        opts[name] = default if value is None else value
    if opts["bits"] not in SUPPORTED_BITS:
        raise UsageError(f"--bits must be one of {SUPPORTED_BITS}, got {opts['bits']}")
    if opts["max_cluster_size"] < 4:
        raise UsageError("--max-cluster-size must be at least 4")
    if opts["macros"] is None:
        opts["macros"] = default_parallelism()
    if opts["macros"] < 1 or (opts["chip_macros"] is not None and opts["chip_macros"] < 1):
        raise UsageError("macro counts must be positive")
    if opts["repair"] not in REPAIR_POLICIES:
        raise UsageError(f"--repair must be one of {REPAIR_POLICIES}")
    if opts["granularity"] not in ("sweep", "update"):
        raise UsageError("--granularity must be 'sweep' or 'update'")
    if opts["report"] not in ("json", "csv"):
        raise UsageError("--report must be json or csv")
    if opts["nonideal_eps"] < 0:
        raise UsageError("--nonideal-eps must be non-negative")
    return opts


def load_optima(path: Path | None) -> dict[str, int]:
    if path is None:
        return {}
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read optima registry {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("optima registry must be a JSON object of name -> length")
    return {str(k): int(v) for k, v in data.items()}


def _load_instance(path: Path):
    try:
        return read_instance(path)
    except (OSError, TSPLIBError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _lookup_optimum(optima: dict[str, int], inst, path: Path):
    for key in (inst.name, path.stem):
        if key in optima:
            return optima[key]
    return None


def run_solve(inst, path: Path, opts: dict, seed: int, optima: dict, record=False, deterministic=False):
    """Solve one instance; returns (tour, trace, report dict)."""
    cfg = SolveConfig(
        m=opts["max_cluster_size"],
        bits=opts["bits"],
        seed=seed,
        max_parallel=opts["macros"],
        leak=opts["nonideal_eps"],
        convention=inst.edge_weight_type,
        schedule=AnnealSchedule(granularity=opts["granularity"]),
        record_anneal=record,
        repair=opts["repair"],
    )
    tour, trace = solve_hierarchical(inst.coords, cfg)
    chip = opts["chip_macros"] or max((lv.clusters for lv in trace.levels), default=1)
    cost = costmodel.estimate(trace, opts["bits"], chip)
    report = {
        "schema": REPORT_SCHEMA,
        "instance": inst.name or path.stem,
        "n": inst.dimension,
        "m": opts["max_cluster_size"],
        "bits": opts["bits"],
        "seed": seed,
        "repair": opts["repair"],
        "tour_length": trace.tour_length,
    }
    best = _lookup_optimum(optima, inst, path)
    if best is not None:
        report["optimal_ratio"] = trace.tour_length / best
    if not deterministic:
        report["phase_times"] = dict(trace.phase_times)
    report["cost_report"] = cost.to_dict(include_host=not deterministic)
    return tour, trace, report


def _bench_row(report: dict, trace) -> dict:
    times = report.get("phase_times", {})
    cost = report["cost_report"]
    return {
        "instance": report["instance"],
        "n": report["n"],
        "m": report["m"],
        "bits": report["bits"],
        "seed": report["seed"],
        "tour_length": report["tour_length"],
        "ratio": f"{report['optimal_ratio']:.6f}" if "optimal_ratio" in report else "",
        **{f"{k}_s": (f"{times[k]:.6f}" if k in times else "") for k in ("clustering", "fixing", "annealing", "merging")},
        "macro_latency_us": f"{cost['macro_latency_ns'] / 1e3:.3f}",
        "macro_energy_uj": f"{cost['macro_energy_pj'] / 1e6:.6f}",
    }


def _csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def cmd_solve(args) -> int:
    opts = resolve_options(args)
    optima = load_optima(args.optima)
    seed = opts["seed"]
    inst = _load_instance(args.instance)
    try:
        tour, trace, report = run_solve(
            inst, args.instance, opts, seed, optima, record=args.trace is not None, deterministic=args.deterministic
        )
    except Exception as exc:  # anything past parsing is a solver failure
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    if args.tour is not None:
        args.tour.write_text(write_tour(tour, f"{inst.name}.tour", f"length {trace.tour_length}"))
    if args.trace is not None:
        with args.trace.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["level", "cluster", "sweep", "current_uA", "p", "length"])
            for row in trace.anneal_rows:
                level, cluster, step, current, p, length = row
                writer.writerow([level, cluster, step, f"{current:.4f}", f"{p:.6f}", length])
    if opts["report"] == "json":
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.output)
    else:
        _emit(_csv_text([_bench_row(report, trace)]), args.output)
    return EXIT_OK


def _int_list(text: str, name: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--{name} must be a comma-separated list of integers") from None


def cmd_bench(args) -> int:
    opts = resolve_options(args)
    optima = load_optima(args.optima)
    m_values = _int_list(args.m_values, "m-values")
    bit_values = _int_list(args.bit_values, "bit-values")
    seeds = _int_list(args.seeds, "seeds")
    if any(b not in SUPPORTED_BITS for b in bit_values):
        raise UsageError(f"--bit-values must be drawn from {SUPPORTED_BITS}")
    if any(m < 4 for m in m_values):
        raise UsageError("--m-values must all be at least 4")
    try:
        listing = args.instances.read_text().split("\n")
    except OSError as exc:
        raise InputError(f"cannot read {args.instances}: {exc}") from exc
    base = args.instances.parent
    paths = [base / line.strip() for line in listing if line.strip() and not line.startswith("#")]
    instances = [(p, _load_instance(p)) for p in paths]
    rows = []
    for path, inst in instances:
        for m in m_values:
            for bits in bit_values:
                for seed in seeds:
                    run = dict(opts, max_cluster_size=m, bits=bits)
                    try:
                        _, trace, report = run_solve(inst, path, run, seed, optima, deterministic=args.deterministic)
                    except Exception as exc:
                        print(f"solve failed on {path}: {exc}", file=sys.stderr)
                        return EXIT_SOLVE
                    rows.append(_bench_row(report, trace))
    _emit(_csv_text(rows), args.output)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    try:
        dm = build_distance_matrix(inst.coords, inst.edge_weight_type)
        if args.method == "exhaustive":
            if dm.n > 10:
                raise ValueError("exhaustive search is limited to 10 cities")
            length, tour = brute_force_cycle(dm)
        else:
            if dm.n > HELD_KARP_MAX_N:
                raise ValueError(f"Held-Karp is limited to {HELD_KARP_MAX_N} cities")
            length, tour = held_karp_cycle(dm)
    except ValueError as exc:
        print(f"oracle failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    print(length)
    if args.tour is not None:
        args.tour.write_text(write_tour(np.asarray(tour), f"{inst.name}.opt.tour", f"length {length}"))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(exc, file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
