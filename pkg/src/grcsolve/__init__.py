"""Residual cutting solvers (RC, GRC) with CR, GMRES(K) and BiCGSTAB baselines."""
from .counters import OpCounters, counting
from .generators import GridSpec, gen_convection_diffusion, gen_poisson_neumann, rhs_unit_solution
from .mmio import MatrixMarketError, mm_read, mm_write
from .solvers import (
    ConvergenceTrace,
    Method,
    PsiMode,
    SolveResult,
    SolverConfig,
    Status,
    bicgstab_solve,
    cr_solve,
    gmres_solve,
    grc_solve,
    minimize_residual,
    rc_solve,
    solve,
    sor_sweeps,
)
from .sparse import CSRMatrix, symmetrize, transpose, triangular_split

__version__ = "0.1.0"

__all__ = [
    "CSRMatrix",
    "ConvergenceTrace",
    "GridSpec",
    "MatrixMarketError",
    "Method",
    "OpCounters",
    "PsiMode",
    "SolveResult",
    "SolverConfig",
    "Status",
    "bicgstab_solve",
    "counting",
    "cr_solve",
    "gen_convection_diffusion",
    "gen_poisson_neumann",
    "gmres_solve",
    "grc_solve",
    "minimize_residual",
    "mm_read",
    "mm_write",
    "rc_solve",
    "rhs_unit_solution",
    "solve",
    "sor_sweeps",
    "symmetrize",
    "transpose",
    "triangular_split",
]
