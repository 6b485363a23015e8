"""Benchmark manifests, regression runs against known-best values, and
cost-factor sweeps.

A manifest is a CSV with header ``label,path,format,p,mode,known_best``;
``format``, ``p`` and ``known_best`` may be empty (infer by suffix / use the
file's p / no gap).  Paths are resolved relative to the manifest file.
Lines starting with ``#`` are skipped.

Machine output is CSV under a fixed, versioned header (schema v1 below);
rows embed the seed and a parameter fingerprint so any row is replayable
from the output alone.  Wall times are reported but never part of
regression comparisons.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .engine import GaParams, SolveReport, solve
from .evaluation import FitnessMode, StatisticUndefinedError, avg_interhub_distance
from .io import format_for_path, load_instance
from .model import Instance, Solution

BENCH_CSV_SCHEMA = "v1"
BENCH_CSV_HEADER = ("label,n,p,mode,seed,achieved,known_best,gap,"
                    "evaluations,wall_time_s,params_fingerprint")
SWEEP_CSV_HEADER = "chi,delta,alpha,fitness,avg_interhub_distance"

# a proven optimum beaten by more than this is a units/data error, not luck
NEGATIVE_GAP_ALARM = -1e-6


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestRow:
    label: str
    path: Path
    format: str
    p_override: int | None
    mode: FitnessMode
    known_best: float | None


@dataclass(frozen=True)
class BenchmarkManifest:
    rows: tuple[ManifestRow, ...]


def parse_manifest(path) -> BenchmarkManifest:
    path = Path(path)
    base = path.parent
    lines = [
        line for line in path.read_text().splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    reader = csv.DictReader(lines)
    expected = ["label", "path", "format", "p", "mode", "known_best"]
    if reader.fieldnames != expected:
        raise ManifestError(f"manifest header must be {','.join(expected)}, "
                            f"got {reader.fieldnames}")
    rows = []
    for i, rec in enumerate(reader, start=2):
        try:
            instance_path = base / rec["path"].strip()
            fmt = rec["format"].strip() or format_for_path(instance_path)
            p_override = int(rec["p"]) if rec["p"].strip() else None
            mode = FitnessMode.from_string(rec["mode"].strip())
            kb_text = rec["known_best"].strip()
            known_best = float(kb_text) if kb_text else None
            if known_best is not None and not known_best > 0:
                raise ValueError(f"known_best must be positive, got {known_best}")
        except (ValueError, KeyError, AttributeError, TypeError) as exc:
            raise ManifestError(f"manifest row {i}: {exc}") from None
        rows.append(ManifestRow(
            label=rec["label"].strip(), path=instance_path, format=fmt,
            p_override=p_override, mode=mode, known_best=known_best,
        ))
    return BenchmarkManifest(rows=tuple(rows))


def params_fingerprint(params: GaParams, mode: FitnessMode) -> str:
    """Short stable digest of everything but the seed (the seed has its own
    column)."""
    text = (f"{BENCH_CSV_SCHEMA}|islands={params.islands}|pop={params.pop_size}"
            f"|inner={params.inner_iters}|outer={params.outer_iters}"
            f"|perturb={params.perturb_strength}|strict={params.strict_paper}"
            f"|mode={mode.value}")
    return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class BenchReportRow:
    label: str
    n: int
    p: int
    mode: FitnessMode
    seed: int
    achieved: float
    known_best: float | None
    gap: float | None
    evaluations: int
    wall_time_s: float
    params_fingerprint: str

    @property
    def anomalous(self) -> bool:
        return self.gap is not None and self.gap < NEGATIVE_GAP_ALARM

    def csv_fields(self) -> list[str]:
        return [
            self.label, str(self.n), str(self.p), self.mode.value, str(self.seed),
            repr(self.achieved),
            "" if self.known_best is None else repr(self.known_best),
            "" if self.gap is None else repr(self.gap),
            str(self.evaluations), repr(self.wall_time_s), self.params_fingerprint,
        ]


def report_row(label: str, inst: Instance, report: SolveReport, mode: FitnessMode,
               params: GaParams, known_best: float | None = None) -> BenchReportRow:
    achieved = report.scaled_fitness
    gap = None if known_best is None else (achieved - known_best) / known_best
    return BenchReportRow(
        label=label, n=inst.n, p=inst.p, mode=mode, seed=params.seed,
        achieved=achieved, known_best=known_best, gap=gap,
        evaluations=report.evaluations, wall_time_s=report.wall_time,
        params_fingerprint=params_fingerprint(params, mode),
    )


def rows_to_csv(rows: Sequence[BenchReportRow]) -> str:
    out = [BENCH_CSV_HEADER]
    out.extend(",".join(r.csv_fields()) for r in rows)
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class RowSummary:
    label: str
    best_achieved: float
    best_gap: float | None
    mean_gap: float | None


@dataclass(frozen=True)
class BenchResult:
    rows: tuple[BenchReportRow, ...]
    summaries: tuple[RowSummary, ...]
    failures: tuple[tuple[str, str], ...]  # (label, error message)

    @property
    def any_anomaly(self) -> bool:
        return any(r.anomalous for r in self.rows)

    def max_gap(self) -> float | None:
        gaps = [r.gap for r in self.rows if r.gap is not None]
        return max(gaps) if gaps else None


def run_bench(manifest: BenchmarkManifest, params: GaParams, seeds: Sequence[int],
              workers: int | None = None,
              progress: Callable[[str], None] | None = None) -> BenchResult:
    """Solve every manifest row under every seed, in manifest order.

    Row failures (missing file, parse error) are recorded and skipped so the
    rest of the manifest still runs.
    """
    rows: list[BenchReportRow] = []
    summaries: list[RowSummary] = []
    failures: list[tuple[str, str]] = []
    for mrow in manifest.rows:
        try:
            inst = load_instance(mrow.path, format=mrow.format)
            if mrow.p_override is not None:
                inst = inst.with_p(mrow.p_override)
        except (OSError, ValueError) as exc:
            failures.append((mrow.label, str(exc)))
            if progress:
                progress(f"{mrow.label}: FAILED ({exc})")
            continue
        row_reports = []
        for seed in seeds:
            run_params = dataclasses.replace(params, seed=seed)
            report = solve(inst, run_params, mrow.mode, workers=workers)
            row = report_row(mrow.label, inst, report, mrow.mode, run_params,
                             known_best=mrow.known_best)
            rows.append(row)
            row_reports.append(row)
            if progress:
                progress(_format_row_progress(row))
        best = min(r.achieved for r in row_reports)
        gaps = [r.gap for r in row_reports if r.gap is not None]
        summaries.append(RowSummary(
            label=mrow.label,
            best_achieved=best,
            best_gap=min(gaps) if gaps else None,
            mean_gap=sum(gaps) / len(gaps) if gaps else None,
        ))
    return BenchResult(rows=tuple(rows), summaries=tuple(summaries),
                       failures=tuple(failures))


def _format_row_progress(row: BenchReportRow) -> str:
    gap = "" if row.gap is None else f"  gap={row.gap:+.3e}"
    return (f"{row.label}  seed={row.seed}  achieved={row.achieved:.6f}{gap}"
            f"  t={row.wall_time_s:.2f}s")


@dataclass(frozen=True)
class SweepRow:
    chi: float
    delta: float
    alpha: float
    fitness: float
    avg_interhub: float | None
    solution: Solution

    def csv_fields(self) -> list[str]:
        return [
            repr(self.chi), repr(self.delta), repr(self.alpha), repr(self.fitness),
            "" if self.avg_interhub is None else repr(self.avg_interhub),
        ]


def run_sweep(inst: Instance, params: GaParams, mode: FitnessMode,
              chis: Sequence[float] | None = None,
              deltas: Sequence[float] | None = None,
              alphas: Sequence[float] | None = None,
              workers: int | None = None) -> list[SweepRow]:
    """Solve the instance once per (chi, delta, alpha) grid point, sharing the
    seed, and record the best solution's average inter-hub distance (empty for
    p = 1, where the statistic is undefined)."""
    chis = list(chis) if chis else [inst.chi]
    deltas = list(deltas) if deltas else [inst.delta]
    alphas = list(alphas) if alphas else [inst.alpha]
    out = []
    for chi, delta, alpha in itertools.product(chis, deltas, alphas):
        point = inst.with_factors(chi=chi, alpha=alpha, delta=delta)
        report = solve(point, params, mode, workers=workers)
        try:
            avg = avg_interhub_distance(point, report.best_solution)
        except StatisticUndefinedError:
            avg = None
        out.append(SweepRow(chi=chi, delta=delta, alpha=alpha,
                            fitness=report.scaled_fitness, avg_interhub=avg,
                            solution=report.best_solution))
    return out


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    out = [SWEEP_CSV_HEADER]
    out.extend(",".join(r.csv_fields()) for r in rows)
    return "\n".join(out) + "\n"
