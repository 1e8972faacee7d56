"""Restarted GMRES(K): modified Gram-Schmidt Arnoldi, Givens least squares."""
from __future__ import annotations

import numpy as np

from ..counters import OpCounters, counting
from ..sparse import dot, matvec, norm2
from .base import Method, Monitor, SolverConfig, Status, initial_residual, prepare

__all__ = ["gmres_solve"]


def _givens(a, b):
    if b == 0.0:
        return 1.0, 0.0
    h = np.hypot(a, b)
    return a / h, b / h


def gmres_solve(A, b, cfg: SolverConfig | None = None, callback=None):
    """GMRES restarted every ``cfg.restart_K`` iterations.

    The trace records the Givens residual estimate after every Arnoldi step.
    At a restart the residual vector is rebuilt from the Arnoldi basis, so
    each iteration costs exactly one matvec. ``callback(x_cycle_start, j,
    estimate)`` is called after every inner step if given.
    """
    cfg = (cfg or SolverConfig(method=Method.GMRES)).with_(method=Method.GMRES)
    A, b, x = prepare(A, b, cfg)
    n, K = A.n, cfg.restart_K
    counters = OpCounters()
    message = ""
    with counting(counters):
        r = initial_residual(A, b, x)
        beta = norm2(r)
        mon = Monitor(A, b, cfg, counters)
        status = mon.start(beta)
        it = 0
        V = np.empty((K + 1, n))
        H = np.zeros((K + 1, K))
        counters.note_vectors(K + 1)
        while status is None:
            V[0] = r / beta
            H[:] = 0.0
            cs, sn = np.zeros(K), np.zeros(K)
            g = np.zeros(K + 1)
            g[0] = beta
            happy = False
            j = -1
            for j in range(K):
                w = matvec(A, V[j])
                for i in range(j + 1):
                    H[i, j] = dot(w, V[i])
                    w -= H[i, j] * V[i]
                counters.axpy_count += j + 1
                hn = norm2(w)
                H[j + 1, j] = hn
                for i in range(j):
                    t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                    H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                    H[i, j] = t
                cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
                H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
                H[j + 1, j] = 0.0
                g[j + 1] = -sn[j] * g[j]
                g[j] = cs[j] * g[j]
                it += 1
                est = abs(g[j + 1])
                status = mon.record(it, est)
                if callback is not None:
                    callback(x, j, est)
                happy = hn <= 1e-14 * max(abs(H[j, j]), 1e-300) or hn == 0.0
                if happy:
                    if status is None or status is Status.STAGNATED:
                        status = Status.CONVERGED
                    break
                if status is not None:
                    break
                V[j + 1] = w / hn
            k = j + 1
            if H[k - 1, k - 1] == 0.0:
                status = Status.BREAKDOWN
                message = "singular Hessenberg factor"
                break
            y = np.zeros(k)
            for i in range(k - 1, -1, -1):
                y[i] = (g[i] - H[i, i + 1:k] @ y[i + 1:]) / H[i, i]
            x += V[:k].T @ y
            counters.axpy_count += k
            # residual = V_{k+1} Q^T (0, ..., 0, g_k)
            if happy:
                r = mon.true_residual(x)
            else:
                z = np.zeros(k + 1)
                z[k] = g[k]
                for i in range(k - 1, -1, -1):
                    zi, zi1 = z[i], z[i + 1]
                    z[i] = cs[i] * zi - sn[i] * zi1
                    z[i + 1] = sn[i] * zi + cs[i] * zi1
                r = V[: k + 1].T @ z
                counters.axpy_count += k + 1
            if status is Status.CONVERGED:
                ok, r_true = mon.verify(x)
                if ok is False and not happy:
                    r, status = r_true, None
                elif ok is False or ok is None:
                    status = Status.BREAKDOWN if happy else Status.STAGNATED
                    message = "true residual did not confirm convergence"
            if status is None:
                beta = norm2(r)
    return mon.finish(x, status, message)
