"""Benchmark runner: one matrix, several solvers, CSV traces plus a summary."""
from __future__ import annotations

import csv
import json
import os
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .generators import GridSpec, gen_convection_diffusion, gen_poisson_neumann, rhs_unit_solution
from .mmio import mm_read, read_vector
from .solvers import ConvergenceTrace, SolveResult, SolverConfig, solve

__all__ = [
    "ManifestError",
    "RunManifest",
    "RunRecord",
    "BenchmarkReport",
    "GENERATORS",
    "TRACE_HEADER",
    "load_problem",
    "run_benchmark",
    "write_trace_csv",
    "read_trace_csv",
    "write_summary_csv",
    "format_summary",
]

TRACE_HEADER = ["iter", "resid", "rel_resid", "matvec", "seconds"]
SUMMARY_HEADER = ["solver", "status", "iterations", "final_rel_resid", "matvec",
                  "dot", "axpy", "peak_vectors", "seconds"]

GENERATORS = {
    "conv-diff": gen_convection_diffusion,
    "poisson-neumann": gen_poisson_neumann,
}


class ManifestError(ValueError):
    """Invalid run description; ``field`` names the offending flag or key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass
class RunManifest:
    """Everything needed to repeat a benchmark run.

    Exactly one of ``matrix_path`` and ``generator`` is set. ``rhs`` is
    ``"auto"`` (generator RHS, or ``A @ ones`` for files), ``"unit"``,
    ``"random"`` (standard normal drawn with ``seed``) or a vector file path.
    """

    solvers: list
    matrix_path: str | None = None
    generator: str | None = None
    grid: GridSpec | None = None
    rhs: str = "auto"
    seed: int = 0
    out_dir: str | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.matrix_path is None) == (self.generator is None):
            raise ManifestError("--matrix/--gen", "give exactly one matrix source")
        if self.generator is not None:
            if self.generator not in GENERATORS:
                raise ManifestError("--gen", f"unknown generator {self.generator!r}")
            if self.grid is None:
                raise ManifestError("--n", "generator needs a grid size")
        if not self.solvers:
            raise ManifestError("--solver", "no solver requested")

    def to_dict(self) -> dict:
        return {
            "matrix_path": self.matrix_path,
            "generator": self.generator,
            "grid": asdict(self.grid) if self.grid else None,
            "rhs": self.rhs,
            "seed": self.seed,
            "solvers": [_config_dict(c) for c in self.solvers],
            "metadata": self.metadata,
        }


def _config_dict(cfg: SolverConfig) -> dict:
    return {
        "method": cfg.method.value,
        "L": cfg.L,
        "psi_mode": cfg.psi_mode.value,
        "omega": cfg.omega,
        "inner_iters": cfg.inner_iters,
        "restart_K": cfg.restart_K,
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
    }


@dataclass
class RunRecord:
    label: str
    config: SolverConfig
    result: SolveResult
    seconds: float


@dataclass
class BenchmarkReport:
    manifest: RunManifest
    n: int
    nnz: int
    records: list

    @property
    def all_converged(self) -> bool:
        return all(rec.result.converged for rec in self.records)

    def summary_rows(self) -> list:
        rows = []
        for rec in self.records:
            res = rec.result
            rows.append({
                "solver": rec.label,
                "status": res.status.value,
                "iterations": res.iterations,
                "final_rel_resid": res.true_relative_residual,
                "matvec": res.counters.matvec_count,
                "dot": res.counters.dot_count,
                "axpy": res.counters.axpy_count,
                "peak_vectors": res.counters.peak_vectors,
                "seconds": rec.seconds,
            })
        return rows


def load_problem(manifest: RunManifest):
    """Resolve the matrix and right-hand side named by ``manifest``."""
    if manifest.generator is not None:
        A, b = GENERATORS[manifest.generator](manifest.grid)
    else:
        path = manifest.matrix_path
        if not os.path.exists(path):
            raise ManifestError("--matrix", f"cannot read {path!r}: no such file")
        try:
            A = mm_read(path)
        except (OSError, ValueError) as exc:
            raise ManifestError("--matrix", f"cannot read {path!r}: {exc}") from exc
        b = None
    rhs = manifest.rhs
    if rhs == "unit" or (rhs == "auto" and b is None):
        b = rhs_unit_solution(A)
    elif rhs == "random":
        b = np.random.default_rng(manifest.seed).standard_normal(A.n)
    elif rhs != "auto":
        try:
            b = read_vector(rhs)
        except (OSError, ValueError) as exc:
            raise ManifestError("--rhs", f"cannot read {rhs!r}: {exc}") from exc
        if b.shape != (A.n,):
            raise ManifestError("--rhs", f"vector has length {b.size}, matrix is {A.n}x{A.n}")
    return A, b


def _labels(configs):
    seen = {}
    out = []
    for cfg in configs:
        name = cfg.method.value
        seen[name] = seen.get(name, 0) + 1
        out.append(name if seen[name] == 1 else f"{name}-{seen[name]}")
    return out


def run_benchmark(manifest: RunManifest, out_dir=None, problem=None) -> BenchmarkReport:
    """Run every configured solver on the same ``(A, b)``.

    Traces go to ``<out_dir>/<solver>.csv`` alongside ``summary.csv`` and
    ``manifest.json`` when an output directory is given.
    """
    A, b = problem if problem is not None else load_problem(manifest)
    manifest.metadata.setdefault("started", time.strftime("%Y-%m-%dT%H:%M:%S%z"))
    manifest.metadata.update({
        "grcsolve": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "n": A.n,
        "nnz": A.nnz,
    })
    records = []
    for label, cfg in zip(_labels(manifest.solvers), manifest.solvers):
        t0 = time.perf_counter()
        res = solve(A, b, cfg)
        records.append(RunRecord(label, cfg, res, time.perf_counter() - t0))
    manifest.metadata["statuses"] = {r.label: r.result.status.value for r in records}
    report = BenchmarkReport(manifest, A.n, A.nnz, records)

    out_dir = out_dir or manifest.out_dir
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for rec in records:
            write_trace_csv(rec.result.trace, out / f"{rec.label}.csv")
        write_summary_csv(report, out / "summary.csv")
        with open(out / "manifest.json", "w") as fh:
            json.dump(manifest.to_dict(), fh, indent=2, default=str)
            fh.write("\n")
    return report


def _g17(v) -> str:
    return f"{v:.17g}"


def write_trace_csv(trace: ConvergenceTrace, path) -> None:
    if len(trace) == 0:
        raise ValueError("empty trace")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for it, rn, rel, mv, sec in trace.rows():
            w.writerow([it, _g17(rn), _g17(rel), mv, _g17(sec)])


def read_trace_csv(path) -> ConvergenceTrace:
    trace = ConvergenceTrace()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header}")
        for row in reader:
            trace.append(int(row[0]), float(row[1]), float(row[2]), int(row[3]), float(row[4]))
    return trace


def write_summary_csv(report: BenchmarkReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_HEADER, lineterminator="\n")
        w.writeheader()
        for row in report.summary_rows():
            row = dict(row)
            row["final_rel_resid"] = _g17(row["final_rel_resid"])
            row["seconds"] = _g17(row["seconds"])
            w.writerow(row)


def format_summary(report: BenchmarkReport) -> str:
    src = report.manifest.matrix_path or f"{report.manifest.generator} n={report.manifest.grid.n}"
    lines = [f"matrix: {src}  (N={report.n}, nnz={report.nnz})",
             f"{'solver':<12}{'status':<11}{'iters':>7}{'rel_resid':>12}{'matvec':>8}"
             f"{'dot':>9}{'peak':>6}{'sec':>9}"]
    for row in report.summary_rows():
        lines.append(
            f"{row['solver']:<12}{row['status']:<11}{row['iterations']:>7}"
            f"{row['final_rel_resid']:>12.3e}{row['matvec']:>8}{row['dot']:>9}"
            f"{row['peak_vectors']:>6}{row['seconds']:>9.3f}"
        )
    return "\n".join(lines)
