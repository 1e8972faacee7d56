"""Iterative solvers behind one ``solve(A, b, cfg)`` contract."""
from __future__ import annotations

from .base import (
    ConvergenceTrace,
    Method,
    PsiMode,
    SolveResult,
    SolverConfig,
    SolverInvariantError,
    Status,
)
from .bicgstab import bicgstab_solve
from .cr import CrStep, SymmetryWarning, cr_solve
from .gmres import gmres_solve
from .grc import CuttingStep, grc_solve, rc_solve
from .lsq import ResidualStep, minimize_residual, solve_gram
from .sor import sor_sweeps

__all__ = [
    "ConvergenceTrace",
    "CrStep",
    "CuttingStep",
    "Method",
    "PsiMode",
    "ResidualStep",
    "SolveResult",
    "SolverConfig",
    "SolverInvariantError",
    "Status",
    "SymmetryWarning",
    "bicgstab_solve",
    "cr_solve",
    "gmres_solve",
    "grc_solve",
    "minimize_residual",
    "rc_solve",
    "solve",
    "solve_gram",
    "sor_sweeps",
]

_DISPATCH = {
    Method.GRC: grc_solve,
    Method.RC: rc_solve,
    Method.CR: cr_solve,
    Method.GMRES: gmres_solve,
    Method.BICGSTAB: bicgstab_solve,
}


def solve(A, b, cfg: SolverConfig | None = None, callback=None, **overrides) -> SolveResult:
    """Run the solver named by ``cfg.method``; keyword overrides patch ``cfg``.

    >>> import numpy as np
    >>> solve(np.eye(3), [1.0, 2.0, 3.0], method="cr").x
    array([1., 2., 3.])
    """
    cfg = cfg or SolverConfig()
    if overrides:
        cfg = cfg.with_(**overrides)
    return _DISPATCH[cfg.method](A, b, cfg, callback=callback)
