"""Small residual-minimization step shared by GRC and RC.

Given images ``H b_i`` of a handful of basis vectors, find coefficients
minimizing ``||r - sum_i alpha_i H b_i||`` through the normal equations
``G alpha = c`` with ``G_ij = (Hb_i, Hb_j)`` and ``c_i = (Hb_i, r)``.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..sparse import dot

__all__ = ["PIVOT_TOL", "ResidualStep", "solve_gram", "minimize_residual"]

PIVOT_TOL = 1e-14


class ResidualStep(NamedTuple):
    alpha: np.ndarray
    residual: np.ndarray
    degenerate: bool


def _pivoted_cholesky_solve(G, c, pivot_tol):
    """Solve SPD ``G y = c`` with diagonal (complete) pivoting.

    ``G`` must already have unit diagonal. Returns ``None`` if a pivot falls
    below ``pivot_tol``.
    """
    k = G.shape[0]
    A = G.copy()
    perm = np.arange(k)
    Lf = np.zeros((k, k))
    for j in range(k):
        p = j + int(np.argmax(np.diag(A)[j:]))
        if p != j:
            A[[j, p], :] = A[[p, j], :]
            A[:, [j, p]] = A[:, [p, j]]
            Lf[[j, p], :j] = Lf[[p, j], :j]
            perm[[j, p]] = perm[[p, j]]
        piv = A[j, j]
        if not (piv > pivot_tol):
            return None
        d = np.sqrt(piv)
        Lf[j, j] = d
        Lf[j + 1:, j] = A[j + 1:, j] / d
        A[j + 1:, j + 1:] -= np.outer(Lf[j + 1:, j], Lf[j + 1:, j])
    cp = c[perm]
    z = np.empty(k)
    for i in range(k):
        z[i] = (cp[i] - Lf[i, :i] @ z[:i]) / Lf[i, i]
    y = np.empty(k)
    for i in range(k - 1, -1, -1):
        y[i] = (z[i] - Lf[i + 1:, i] @ y[i + 1:]) / Lf[i, i]
    out = np.empty(k)
    out[perm] = y
    return out


def solve_gram(G, c, pivot_tol=PIVOT_TOL):
    """Coefficients for the normal equations of a window least-squares fit.

    Basis entry 0 is the newest vector; the last entry is the oldest. The
    system is Jacobi-scaled to unit diagonal so the pivot test measures
    linear dependence, not vector length. When it is near singular the
    oldest basis vector is dropped and the solve retried.

    Returns ``(alpha, used, degenerate)`` where ``used`` is the number of
    leading basis vectors kept; dropped ones get ``alpha = 0``.
    """
    G = np.asarray(G, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    k = c.shape[0]
    alpha = np.zeros(k)
    for used in range(k, 0, -1):
        d = np.diag(G)[:used]
        if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
            continue
        s = 1.0 / np.sqrt(d)
        Gs = G[:used, :used] * np.outer(s, s)
        y = _pivoted_cholesky_solve(Gs, c[:used] * s, pivot_tol)
        if y is None or not np.all(np.isfinite(y)):
            continue
        alpha[:used] = y * s
        return alpha, used, False
    return alpha, 0, True


def minimize_residual(images, r, gram=None, rhs=None) -> ResidualStep:
    """Minimize ``||r - sum alpha_i images[i]||`` over the given images.

    ``gram`` and ``rhs`` may be supplied from a cache; any that are missing
    are computed with counted inner products.
    """
    images = [np.asarray(v, dtype=np.float64) for v in images]
    k = len(images)
    if k == 0:
        raise ValueError("need at least one basis image")
    if gram is None:
        gram = np.empty((k, k))
        for i in range(k):
            for j in range(i, k):
                gram[i, j] = gram[j, i] = dot(images[i], images[j])
    if rhs is None:
        rhs = np.array([dot(v, r) for v in images])
    alpha, _, degenerate = solve_gram(gram, rhs)
    residual = np.array(r, dtype=np.float64, copy=True)
    for a, v in zip(alpha, images):
        if a != 0.0:
            residual -= a * v
    return ResidualStep(alpha, residual, degenerate)
