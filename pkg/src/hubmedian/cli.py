"""Command-line interface.

Every subcommand is a thin wrapper over library calls; no solver or
reporting logic lives here.  Exit codes: 0 success, 1 usage error,
2 parse/data error, 3 benchmark gap threshold exceeded, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench as bench_mod
from . import io as io_mod
from .engine import GaParams, SolveReport, solve
from .evaluation import FitnessMode, InfeasibleSolutionError, objective
from .model import Instance, validate
from .oracle import exact_optimum, restricted_optimum

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_GAP = 3
EXIT_INVARIANT = 4


class UsageError(Exception):
    pass


class InternalInvariantError(Exception):
    """A result violated one of the engine's own guarantees."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_ga_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master RNG seed (default 0)")
    p.add_argument("--islands", type=int, default=64, help="island count R (default 64)")
    p.add_argument("--pop", type=int, default=64, help="population size per island (default 64)")
    p.add_argument("--inner", type=int, default=50, help="inner generations N1 (default 50)")
    p.add_argument("--outer", type=int, default=10, help="outer rounds N2 (default 10)")
    p.add_argument("--perturb", type=int, default=None,
                   help="perturbation strength (default min(p, 3))")
    p.add_argument("--strict-paper", action="store_true",
                   help="disable elitist retention (fidelity mode; trace may increase)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads for islands (never affects results)")


def _add_mode_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fitness-mode", default="raw", choices=["cab", "milli", "raw"],
                   help="fitness scaling (default raw)")


def _add_format_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", default=None, choices=["canonical", "coordinate"],
                   help="instance format (default: by file suffix)")


def _build_parser() -> _Parser:
    parser = _Parser(prog="hubmedian",
                     description="p-hub median solver, oracles and benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the island GA on an instance file")
    p_solve.add_argument("instance", type=Path)
    p_solve.add_argument("--p", type=int, default=None, help="override the file's hub count")
    p_solve.add_argument("--csv", default=None,
                         help="write a machine-readable CSV row to this path ('-' = stdout)")
    _add_format_arg(p_solve)
    _add_mode_arg(p_solve)
    _add_ga_args(p_solve)

    p_eval = sub.add_parser("eval", help="evaluate a solution file against an instance")
    p_eval.add_argument("instance", type=Path)
    p_eval.add_argument("solution", type=Path)
    _add_format_arg(p_eval)
    _add_mode_arg(p_eval)

    p_gen = sub.add_parser("gen", help="generate a random Euclidean instance")
    p_gen.add_argument("-n", "--nodes", type=int, required=True)
    p_gen.add_argument("-p", "--hubs", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--alpha", type=float, required=True, help="inter-hub discount factor")
    p_gen.add_argument("--chi", type=float, default=1.0, help="collection factor (default 1)")
    p_gen.add_argument("--delta", type=float, default=1.0, help="distribution factor (default 1)")
    p_gen.add_argument("-o", "--out", type=Path, required=True, help="output .usaphmp path")

    p_oracle = sub.add_parser("oracle", help="exact enumeration solvers (small instances)")
    p_oracle.add_argument("instance", type=Path)
    p_oracle.add_argument("--p", type=int, default=None, help="override the file's hub count")
    p_oracle.add_argument("--which", default="both", choices=["exact", "restricted", "both"])
    p_oracle.add_argument("--limit", type=int, default=10_000_000,
                          help="max enumeration count (default 1e7)")
    _add_format_arg(p_oracle)

    p_bench = sub.add_parser("bench", help="run a benchmark manifest against known bests")
    p_bench.add_argument("manifest", type=Path)
    p_bench.add_argument("--seeds", default="0",
                         help="comma-separated seeds, one run per seed (default '0')")
    p_bench.add_argument("--gap-threshold", type=float, default=None,
                         help="exit 3 if any known-best gap exceeds this")
    p_bench.add_argument("--csv", default=None, help="write rows CSV ('-' = stdout)")
    _add_ga_args(p_bench)

    p_sweep = sub.add_parser("sweep", help="solve across a grid of cost factors")
    p_sweep.add_argument("instance", type=Path)
    p_sweep.add_argument("--chis", default=None, help="comma-separated collection factors")
    p_sweep.add_argument("--deltas", default=None, help="comma-separated distribution factors")
    p_sweep.add_argument("--alphas", default=None, help="comma-separated discount factors")
    p_sweep.add_argument("--csv", default=None, help="write sweep CSV ('-' = stdout)")
    _add_format_arg(p_sweep)
    _add_mode_arg(p_sweep)
    _add_ga_args(p_sweep)

    return parser


def _params_from(ns: argparse.Namespace) -> GaParams:
    try:
        return GaParams(islands=ns.islands, pop_size=ns.pop, inner_iters=ns.inner,
                        outer_iters=ns.outer, seed=ns.seed, perturb_strength=ns.perturb,
                        strict_paper=ns.strict_paper)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load_instance(path: Path, fmt: str | None, p_override: int | None = None) -> Instance:
    inst = io_mod.load_instance(path, format=fmt)
    if p_override is not None:
        try:
            inst = inst.with_p(p_override)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return inst


def _emit(text: str, target: str | None) -> None:
    if target == "-":
        sys.stdout.write(text)
    elif target is not None:
        Path(target).write_text(text)


def _float_list(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"bad float list {text!r}") from None


def _check_report_invariants(report: SolveReport, inst: Instance, strict: bool) -> None:
    if not validate(report.best_solution, inst).ok:
        raise InternalInvariantError("engine returned an infeasible solution")
    trace = report.trace
    if not strict and any(trace[i + 1] > trace[i] for i in range(len(trace) - 1)):
        raise InternalInvariantError("engine trace is not nonincreasing")


def _one_based(indices) -> str:
    return " ".join(str(int(i) + 1) for i in indices)


def _check_strength(params: GaParams, inst: Instance) -> None:
    try:
        params.resolved_strength(inst.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_solve(ns: argparse.Namespace) -> int:
    inst = _load_instance(ns.instance, ns.format, ns.p)
    params = _params_from(ns)
    _check_strength(params, inst)
    mode = FitnessMode.from_string(ns.fitness_mode)
    report = solve(inst, params, mode, workers=ns.workers)
    _check_report_invariants(report, inst, params.strict_paper)

    if ns.csv != "-":
        label = inst.name or ns.instance.stem
        print(f"instance       {label}  (n={inst.n}, p={inst.p})")
        print(f"params         islands={params.islands} pop={params.pop_size} "
              f"inner={params.inner_iters} outer={params.outer_iters} "
              f"perturb={params.resolved_strength(inst.p)} "
              f"strict_paper={params.strict_paper} seed={params.seed}")
        print(f"fitness mode   {mode.value}")
        print(f"raw objective  {report.raw_objective!r}")
        print(f"fitness        {report.scaled_fitness!r}")
        print(f"hubs (1-based) {_one_based(report.best_solution.hubs)}")
        print(f"evaluations    {report.evaluations}")
        print(f"wall time      {report.wall_time:.3f} s")
        print("trace          " + " ".join(f"{v:.6g}" for v in report.trace))
        if report.interrupted:
            print("NOTE: run interrupted; best-so-far reported")
    row = bench_mod.report_row(inst.name or ns.instance.stem, inst, report, mode, params)
    _emit(bench_mod.rows_to_csv([row]), ns.csv)
    return EXIT_OK


def _cmd_eval(ns: argparse.Namespace) -> int:
    inst = _load_instance(ns.instance, ns.format)
    n, p, sol = io_mod.read_solution(ns.solution.read_bytes())
    if n != inst.n:
        raise io_mod.ParseError(f"solution is for n={n}, instance has n={inst.n}")
    if p != inst.p:
        raise io_mod.ParseError(f"solution is for p={p}, instance has p={inst.p}")
    mode = FitnessMode.from_string(ns.fitness_mode)
    try:
        bd = objective(inst, sol, mode)
    except InfeasibleSolutionError as exc:
        print("infeasible solution:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_DATA
    print(f"collection     {bd.collection_cost!r}")
    print(f"transfer       {bd.transfer_cost!r}")
    print(f"distribution   {bd.distribution_cost!r}")
    print(f"raw total      {bd.raw_total!r}")
    print(f"fitness ({mode.value}) {bd.scaled_fitness!r}")
    return EXIT_OK


def _cmd_gen(ns: argparse.Namespace) -> int:
    try:
        inst = io_mod.generate_urand(ns.nodes, ns.hubs, ns.seed,
                                     (ns.chi, ns.alpha, ns.delta))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = io_mod.serialize_instance(inst)
    ns.out.write_bytes(data)
    print(f"wrote {ns.out}  n={inst.n} p={inst.p} sha256={io_mod.sha256_hex(data)}")
    return EXIT_OK


def _cmd_oracle(ns: argparse.Namespace) -> int:
    inst = _load_instance(ns.instance, ns.format, ns.p)
    if ns.which in ("exact", "both"):
        sol, raw = exact_optimum(inst, limit=ns.limit)
        print(f"exact optimum       {raw!r}")
        print(f"  hubs (1-based)    {_one_based(sol.hubs)}")
        print(f"  alloc (1-based)   {_one_based(sol.alloc)}")
    if ns.which in ("restricted", "both"):
        sol, raw = restricted_optimum(inst, limit=ns.limit)
        print(f"restricted optimum  {raw!r}")
        print(f"  hubs (1-based)    {_one_based(sol.hubs)}")
    return EXIT_OK


def _cmd_bench(ns: argparse.Namespace) -> int:
    manifest = bench_mod.parse_manifest(ns.manifest)
    params = _params_from(ns)
    try:
        seeds = [int(tok) for tok in ns.seeds.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"bad seed list {ns.seeds!r}") from None
    if not seeds:
        raise UsageError("at least one seed is required")

    result = bench_mod.run_bench(manifest, params, seeds, workers=ns.workers, progress=print)
    for s in result.summaries:
        extra = ""
        if s.mean_gap is not None:
            extra = f"  best_gap={s.best_gap:+.3e}  mean_gap={s.mean_gap:+.3e}"
        print(f"summary {s.label}: best={s.best_achieved:.6f}{extra}")
    _emit(bench_mod.rows_to_csv(result.rows), ns.csv)

    for label, msg in result.failures:
        print(f"FAILED {label}: {msg}", file=sys.stderr)
    for row in result.rows:
        if row.anomalous:
            print(f"ALARM {row.label} seed={row.seed}: achieved beats the recorded "
                  f"known best by {-row.gap:.3e} (relative); check units/data",
                  file=sys.stderr)
    if result.failures or result.any_anomaly:
        return EXIT_DATA
    if ns.gap_threshold is not None:
        worst = result.max_gap()
        if worst is not None and worst > ns.gap_threshold:
            print(f"gap threshold exceeded: {worst:.3e} > {ns.gap_threshold:.3e}",
                  file=sys.stderr)
            return EXIT_GAP
    return EXIT_OK


def _cmd_sweep(ns: argparse.Namespace) -> int:
    inst = _load_instance(ns.instance, ns.format)
    params = _params_from(ns)
    _check_strength(params, inst)
    mode = FitnessMode.from_string(ns.fitness_mode)
    rows = bench_mod.run_sweep(
        inst, params, mode,
        chis=_float_list(ns.chis), deltas=_float_list(ns.deltas),
        alphas=_float_list(ns.alphas), workers=ns.workers,
    )
    text = bench_mod.sweep_to_csv(rows)
    if ns.csv is None:
        sys.stdout.write(text)
    else:
        _emit(text, ns.csv)
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "eval": _cmd_eval,
    "gen": _cmd_gen,
    "oracle": _cmd_oracle,
    "bench": _cmd_bench,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        return _COMMANDS[ns.command](ns)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        # parse errors, manifest errors, enumeration limits, bad file data
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InternalInvariantError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
