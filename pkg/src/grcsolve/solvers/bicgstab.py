"""BiCGSTAB (van der Vorst), unpreconditioned."""
from __future__ import annotations

import numpy as np

from ..counters import OpCounters, counting
from ..sparse import dot, matvec, norm2
from .base import Method, Monitor, SolverConfig, Status, initial_residual, prepare

__all__ = ["bicgstab_solve", "DIVERGENCE_LIMIT"]

TINY = 1e-290
DIVERGENCE_LIMIT = 1e12


def bicgstab_solve(A, b, cfg: SolverConfig | None = None, callback=None):
    """Standard BiCGSTAB with shadow residual ``r0``.

    Two matvecs per iteration. The only half-step exit is an exactly
    vanishing intermediate residual ``s`` (where the stabilizing step is
    undefined). Relative residuals above ``DIVERGENCE_LIMIT`` end the run
    as ``Diverged``.
    """
    cfg = (cfg or SolverConfig(method=Method.BICGSTAB)).with_(method=Method.BICGSTAB)
    A, b, x = prepare(A, b, cfg)
    counters = OpCounters()
    message = ""
    with counting(counters):
        r = initial_residual(A, b, x)
        rnorm = norm2(r)
        mon = Monitor(A, b, cfg, counters)
        status = mon.start(rnorm)
        counters.note_vectors(5)
        r_hat = r.copy()
        rhat_norm = rnorm
        rho = alpha = omega = 1.0
        p = np.zeros_like(r)
        v = np.zeros_like(r)
        it = 0
        while status is None:
            rho_new = dot(r_hat, r)
            if abs(rho_new) <= TINY * rhat_norm * rnorm:
                status, message = Status.BREAKDOWN, "rho vanished"
                break
            beta = (rho_new / rho) * (alpha / omega)
            rho = rho_new
            p -= omega * v
            p *= beta
            p += r
            v = matvec(A, p)
            sigma = dot(r_hat, v)
            if abs(sigma) <= TINY * rhat_norm * rnorm:
                status, message = Status.BREAKDOWN, "(r0, v) vanished"
                break
            alpha = rho / sigma
            s = r - alpha * v
            if not np.any(s):
                x += alpha * p
                r = s
                counters.axpy_count += 5
                it += 1
                rnorm = 0.0
                status = mon.record(it, rnorm)
                break
            t = matvec(A, s)
            tt = dot(t, t)
            if tt <= TINY:
                status, message = Status.BREAKDOWN, "(t, t) vanished"
                break
            omega = dot(t, s) / tt
            x += alpha * p + omega * s
            r = s - omega * t
            counters.axpy_count += 6
            it += 1
            rnorm = norm2(r)
            if callback is not None:
                callback(x, r)
            status = mon.record(it, rnorm)
            if status is None and mon.relative(rnorm) > DIVERGENCE_LIMIT:
                status, message = Status.DIVERGED, "residual exceeded divergence limit"
            elif status is None and abs(omega) <= TINY:
                status, message = Status.BREAKDOWN, "omega vanished"
            elif status is Status.CONVERGED:
                ok, r_true = mon.verify(x)
                if ok is False:
                    r = r_true
                    r_hat = r.copy()
                    rhat_norm = rnorm = np.linalg.norm(r)
                    rho = alpha = omega = 1.0
                    p[:] = 0.0
                    v[:] = 0.0
                    status = None
                elif ok is None:
                    status, message = Status.STAGNATED, "residual replacement limit reached"
    return mon.finish(x, status, message)
