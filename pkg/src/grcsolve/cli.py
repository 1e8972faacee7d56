"""``grc-bench`` command line.

Every flag can also come from the environment as ``GRC_BENCH_<FLAG>``
(upper case, dashes as underscores), e.g. ``GRC_BENCH_INNER_ITERS=30``.
``GRC_BENCH_SOLVER`` takes a comma-separated list. Flags given on the
command line win over the environment.

Exit status: 0 when every solver converged, 1 when a solver ended in any
other state, 2 for bad input (the message names the flag).
"""
from __future__ import annotations

import argparse
import os
import sys

from .bench import GENERATORS, ManifestError, RunManifest, format_summary, run_benchmark
from .generators import GridSpec
from .solvers import Method, PsiMode, SolverConfig

__all__ = ["ENV_PREFIX", "build_parser", "parse_cli", "main"]

ENV_PREFIX = "GRC_BENCH_"
_DEFAULTS = SolverConfig()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ManifestError("argv", message)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="grc-bench", description="Run sparse iterative solvers on one matrix.",
                allow_abbrev=False)
    src = p.add_argument_group("matrix source")
    src.add_argument("--matrix", help="Matrix Market coordinate file")
    src.add_argument("--gen", help=f"generator: {', '.join(GENERATORS)}")
    src.add_argument("--n", help="grid points per axis for --gen")
    src.add_argument("--stretch", help="Poisson grid stretch ratio (default 1.05)")
    src.add_argument("--c", help="convection coefficient (default 1000)")
    sol = p.add_argument_group("solvers")
    sol.add_argument("--solver", action="append",
                     help="grc, rc, cr, gmres, bicgstab or all; repeatable")
    sol.add_argument("--L", help=f"window length (default {_DEFAULTS.L})")
    sol.add_argument("--psi", help="GRC psi mode: damped or residual")
    sol.add_argument("--omega", help=f"SOR relaxation factor (default {_DEFAULTS.omega})")
    sol.add_argument("--inner-iters", help=f"SOR sweeps per RC step (default {_DEFAULTS.inner_iters})")
    sol.add_argument("--restart", help=f"GMRES restart length (default {_DEFAULTS.restart_K})")
    sol.add_argument("--tol", help=f"relative residual target (default {_DEFAULTS.tol:g})")
    sol.add_argument("--max-iter", help=f"iteration cap (default {_DEFAULTS.max_iter})")
    run = p.add_argument_group("run")
    run.add_argument("--rhs", help="unit, random or a vector file (default: generator RHS / A @ ones)")
    run.add_argument("--out", help="directory for CSV traces, summary.csv and manifest.json")
    run.add_argument("--seed", help="seed for --rhs random (default 0)")
    return p


def _flag_values(parser, argv, env):
    ns = parser.parse_args(argv)
    values = {}
    for action in parser._actions:
        if not action.option_strings or action.dest == "help":
            continue
        flag = action.option_strings[0]
        v = getattr(ns, action.dest)
        if v is None:
            key = ENV_PREFIX + flag.lstrip("-").replace("-", "_").upper()
            raw = env.get(key)
            if raw is not None and raw != "":
                v = [s.strip() for s in raw.split(",") if s.strip()] if action.dest == "solver" else raw
        values[flag] = v
    return values


def _convert(values, flag, conv, default=None):
    raw = values.get(flag)
    if raw is None:
        return default
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ManifestError(flag, f"invalid value {raw!r} ({exc})") from None


def _solver_list(raw):
    if not raw:
        return [Method.GRC]
    out = []
    for name in raw:
        name = name.lower()
        if name == "all":
            out.extend(Method)
            continue
        try:
            out.append(Method(name))
        except ValueError:
            raise ManifestError("--solver", f"unknown solver {name!r}") from None
    return out


def parse_cli(argv=None, env=None) -> RunManifest:
    """Map flags (and ``GRC_BENCH_*`` variables) to a :class:`RunManifest`.

    >>> m = parse_cli(["--solver", "grc", "--L", "5", "--matrix", "m.mtx"], env={})
    >>> m.matrix_path, m.solvers[0].describe()
    ('m.mtx', 'GRC(L=5,damped)')
    """
    env = os.environ if env is None else env
    values = _flag_values(build_parser(), list(sys.argv[1:] if argv is None else argv), env)

    matrix, gen = values["--matrix"], values["--gen"]
    if matrix is not None and gen is not None:
        raise ManifestError("--matrix/--gen", "give either a matrix file or a generator, not both")
    if matrix is None and gen is None:
        raise ManifestError("--matrix/--gen", "no matrix source given")
    grid = None
    if gen is not None:
        if gen not in GENERATORS:
            raise ManifestError("--gen", f"unknown generator {gen!r}; choose from {', '.join(GENERATORS)}")
        n = _convert(values, "--n", int)
        if n is None:
            raise ManifestError("--n", f"required with --gen {gen}")
        stretch = _convert(values, "--stretch", float, 1.05)
        conv = _convert(values, "--c", float, 1000.0)
        try:
            grid = GridSpec(n=n, stretch=stretch, convection=conv)
        except ValueError as exc:
            field = {"n": "--n", "stretch": "--stretch"}.get(str(exc).split()[0], "--c")
            raise ManifestError(field, str(exc)) from None
    else:
        for flag in ("--n", "--stretch", "--c"):
            if values[flag] is not None:
                raise ManifestError(flag, "only meaningful with --gen")

    L = _convert(values, "--L", int, _DEFAULTS.L)
    if L < 2:
        raise ManifestError("--L", f"must be >= 2, got {L}")
    psi = _convert(values, "--psi", lambda s: PsiMode(s.lower()), _DEFAULTS.psi_mode)
    omega = _convert(values, "--omega", float, _DEFAULTS.omega)
    if not 0.0 < omega < 2.0:
        raise ManifestError("--omega", f"must lie in (0, 2), got {omega:g}")
    inner = _convert(values, "--inner-iters", _positive_int, _DEFAULTS.inner_iters)
    restart = _convert(values, "--restart", _positive_int, _DEFAULTS.restart_K)
    tol = _convert(values, "--tol", float, _DEFAULTS.tol)
    if not tol > 0.0:
        raise ManifestError("--tol", f"must be > 0, got {tol:g}")
    max_iter = _convert(values, "--max-iter", _positive_int, _DEFAULTS.max_iter)
    seed = _convert(values, "--seed", int, 0)
    if seed < 0:
        raise ManifestError("--seed", "must be non-negative")

    solvers = [
        SolverConfig(method=m, L=L, psi_mode=psi, omega=omega, inner_iters=inner,
                     restart_K=restart, tol=tol, max_iter=max_iter)
        for m in _solver_list(values["--solver"])
    ]
    return RunManifest(solvers=solvers, matrix_path=matrix, generator=gen, grid=grid,
                       rhs=values["--rhs"] or "auto", seed=seed, out_dir=values["--out"])


def main(argv=None, env=None) -> int:
    try:
        manifest = parse_cli(argv, env)
        report = run_benchmark(manifest)
    except ManifestError as exc:
        print(f"grc-bench: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"grc-bench: error: --out: {exc}", file=sys.stderr)
        return 2
    print(format_summary(report))
    for rec in report.records:
        if not rec.result.converged:
            print(f"grc-bench: {rec.label} ended {rec.result.status.value}"
                  + (f" ({rec.result.message})" if rec.result.message else ""), file=sys.stderr)
    return 0 if report.all_converged else 1
