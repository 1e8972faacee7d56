"""Solver configuration, results and the shared iteration monitor."""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..counters import OpCounters
from ..sparse import CSRMatrix, as_csr, as_vector, matvec

__all__ = [
    "Method",
    "PsiMode",
    "Status",
    "SolverConfig",
    "ConvergenceTrace",
    "SolveResult",
    "SolverInvariantError",
]


class Method(str, enum.Enum):
    GRC = "grc"
    RC = "rc"
    CR = "cr"
    GMRES = "gmres"
    BICGSTAB = "bicgstab"


class PsiMode(str, enum.Enum):
    DAMPED = "damped"
    RESIDUAL = "residual"


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    STAGNATED = "Stagnated"
    BREAKDOWN = "Breakdown"
    DIVERGED = "Diverged"


class SolverInvariantError(AssertionError):
    """Raised by ``debug=True`` runs when a stored image drifts from A @ v."""


@dataclass(frozen=True)
class SolverConfig:
    """Solver kind plus every tunable.

    Defaults: window ``L=5``, SOR ``omega=1.9`` with 50 sweeps, GMRES
    restart 40.
    """

    method: Method = Method.GRC
    L: int = 5
    psi_mode: PsiMode = PsiMode.DAMPED
    omega: float = 1.9
    inner_iters: int = 50
    restart_K: int = 40
    tol: float = 1e-12
    max_iter: int = 10_000
    initial_guess: np.ndarray | None = field(default=None, compare=False, repr=False)
    debug: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "psi_mode", PsiMode(self.psi_mode))
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"L must be an integer >= 2, got {self.L!r}")
        if not (0.0 < self.omega < 2.0):
            raise ValueError(f"omega must lie in (0, 2), got {self.omega!r}")
        if int(self.inner_iters) != self.inner_iters or self.inner_iters < 1:
            raise ValueError(f"inner_iters must be an integer >= 1, got {self.inner_iters!r}")
        if int(self.restart_K) != self.restart_K or self.restart_K < 1:
            raise ValueError(f"restart_K must be an integer >= 1, got {self.restart_K!r}")
        if not (self.tol > 0.0):
            raise ValueError(f"tol must be > 0, got {self.tol!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be an integer >= 1, got {self.max_iter!r}")

    @property
    def stall_window(self) -> int:
        return 10 * self.L

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)

    def describe(self) -> str:
        m = self.method
        if m is Method.GRC:
            return f"GRC(L={self.L},{self.psi_mode.value})"
        if m is Method.RC:
            return f"RC(L={self.L},omega={self.omega:g},inner={self.inner_iters})"
        if m is Method.GMRES:
            return f"GMRES({self.restart_K})"
        return "CR" if m is Method.CR else "BiCGSTAB"


@dataclass
class ConvergenceTrace:
    """Per-iteration history; row 0 is the initial residual."""

    iteration: list = field(default_factory=list)
    residual_norm: list = field(default_factory=list)
    relative_residual: list = field(default_factory=list)
    cumulative_matvec: list = field(default_factory=list)
    elapsed_seconds: list = field(default_factory=list)

    def append(self, it, rnorm, rel, matvecs, seconds):
        self.iteration.append(int(it))
        self.residual_norm.append(float(rnorm))
        self.relative_residual.append(float(rel))
        self.cumulative_matvec.append(int(matvecs))
        self.elapsed_seconds.append(float(seconds))

    def __len__(self):
        return len(self.iteration)

    def rows(self):
        return list(zip(self.iteration, self.residual_norm, self.relative_residual,
                        self.cumulative_matvec, self.elapsed_seconds))

    @property
    def iterations(self) -> int:
        return self.iteration[-1] if self.iteration else 0

    def matvecs_per_iteration(self) -> np.ndarray:
        return np.diff(np.asarray(self.cumulative_matvec))


@dataclass
class SolveResult:
    x: np.ndarray
    status: Status
    trace: ConvergenceTrace
    counters: OpCounters
    true_relative_residual: float = float("nan")
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def iterations(self) -> int:
        return self.trace.iterations


def prepare(A, b, cfg: SolverConfig):
    """Validate inputs; return (A, b, x0)."""
    A = as_csr(A)
    b = as_vector(b, A.n, "b")
    if not np.all(np.isfinite(b)):
        raise ValueError("b must be finite")
    if cfg.initial_guess is None:
        x0 = np.zeros(A.n)
    else:
        x0 = as_vector(cfg.initial_guess, A.n, "initial_guess").copy()
    return A, b, x0


def initial_residual(A: CSRMatrix, b, x):
    """b - A x, skipping the product for a zero start."""
    if not np.any(x):
        return b.copy()
    return b - matvec(A, x)


class Monitor:
    """Trace recording plus the termination rules shared by every solver.

    The final from-scratch residual check (:meth:`verify`) runs outside the
    cost counters: it is a soundness guard, not part of the algorithm.
    """

    MAX_REPLACEMENTS = 3

    def __init__(self, A, b, cfg: SolverConfig, counters: OpCounters):
        self.A, self.b, self.cfg, self.counters = A, b, cfg, counters
        self.trace = ConvergenceTrace()
        self.t0 = time.perf_counter()
        self.r0norm = None
        self.best = np.inf
        self.since_best = 0
        self.replacements = 0

    def start(self, r0norm) -> Status | None:
        self.r0norm = float(r0norm)
        self.best = self.r0norm
        self.trace.append(0, r0norm, 1.0, self.counters.matvec_count, 0.0)
        if not np.isfinite(r0norm):
            return Status.BREAKDOWN
        if r0norm == 0.0:
            return Status.CONVERGED
        return None

    def relative(self, rnorm) -> float:
        return rnorm / self.r0norm

    def record(self, it, rnorm) -> Status | None:
        rel = rnorm / self.r0norm
        self.trace.append(it, rnorm, rel, self.counters.matvec_count,
                          time.perf_counter() - self.t0)
        if not np.isfinite(rnorm):
            return Status.BREAKDOWN
        if rel <= self.cfg.tol:
            return Status.CONVERGED
        if (self.best - rnorm) > 1e-16 * self.best:
            self.best = rnorm
            self.since_best = 0
        else:
            self.since_best += 1
            if self.since_best >= self.cfg.stall_window:
                return Status.STAGNATED
        if it >= self.cfg.max_iter:
            return Status.MAX_ITER
        return None

    def true_residual(self, x):
        return self.b - self.A.to_scipy() @ x

    def verify(self, x):
        """Recompute the residual from scratch after a Converged verdict.

        Returns ``(ok, r_true)``. When the recursive residual has drifted the
        caller may restart from ``r_true``; after ``MAX_REPLACEMENTS`` such
        restarts ``ok`` is reported as ``None`` meaning "give up".
        """
        r = self.true_residual(x)
        if np.linalg.norm(r) <= 10.0 * self.cfg.tol * self.r0norm:
            return True, r
        self.replacements += 1
        if self.replacements > self.MAX_REPLACEMENTS:
            return None, r
        return False, r

    def finish(self, x, status, message="") -> SolveResult:
        r = self.true_residual(x)
        rel = float(np.linalg.norm(r) / self.r0norm) if self.r0norm else 0.0
        if status is Status.CONVERGED and not rel <= 10.0 * self.cfg.tol:
            status = Status.STAGNATED
            message = message or "recursive residual drifted from the true residual"
        return SolveResult(
            x=x,
            status=status,
            trace=self.trace,
            counters=self.counters,
            true_relative_residual=rel,
            message=message,
        )
