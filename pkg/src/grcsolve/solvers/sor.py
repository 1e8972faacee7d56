"""Forward SOR sweeps over a triangular split (RC inner solver)."""
from __future__ import annotations

import numba
import numpy as np

from ..counters import active_counters
from ..sparse import TriangularSplit, as_vector

__all__ = ["sor_sweeps"]


@numba.njit(cache=True)
def _sweep(lp, lc, lv, up, uc, uv, diag, rhs, omega, x, n_sweeps):
    n = x.shape[0]
    for _ in range(n_sweeps):
        for i in range(n):
            s = rhs[i]
            for k in range(lp[i], lp[i + 1]):
                s -= lv[k] * x[lc[k]]
            for k in range(up[i], up[i + 1]):
                s -= uv[k] * x[uc[k]]
            x[i] = (1.0 - omega) * x[i] + omega * s / diag[i]


def sor_sweeps(split: TriangularSplit, rhs, omega, n_sweeps, x0=None) -> np.ndarray:
    """Apply ``n_sweeps`` forward SOR sweeps to ``A x = rhs``.

    Each sweep solves ``(L + D/omega) x_new = ((1/omega - 1) D - U) x_old + rhs``
    in natural row order; ``omega = 1`` is Gauss-Seidel. The final iterate is
    returned even if the iteration diverges. ``x0`` is not modified.
    """
    if not split.usable_for_relaxation:
        raise ValueError(
            f"zero diagonal at rows {split.zero_diagonal[:5].tolist()}: relaxation undefined"
        )
    if n_sweeps < 1:
        raise ValueError("n_sweeps must be >= 1")
    n = split.diag.shape[0]
    rhs = as_vector(rhs, n, "rhs")
    x = np.zeros(n) if x0 is None else as_vector(x0, n, "x0").copy()
    lo, up = split.lower, split.upper
    _sweep(lo.row_ptr, lo.col_idx, lo.values, up.row_ptr, up.col_idx, up.values,
           split.diag, rhs, float(omega), x, int(n_sweeps))
    c = active_counters()
    if c is not None:
        c.sweeps += int(n_sweeps)
    return x
