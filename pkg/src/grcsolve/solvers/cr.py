"""Conjugate residual method."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..counters import OpCounters, counting
from ..sparse import dot, matvec, norm2
from .base import Method, Monitor, SolverConfig, Status, initial_residual, prepare

__all__ = ["CrStep", "SymmetryWarning", "cr_solve"]


class SymmetryWarning(UserWarning):
    pass


@dataclass
class CrStep:
    """State after step ``m``: ``x += a * p`` has been applied."""

    m: int
    x: np.ndarray
    r: np.ndarray
    p: np.ndarray
    hp: np.ndarray
    a: float


def cr_solve(A, b, cfg: SolverConfig | None = None, callback=None):
    """Conjugate residual iteration for symmetric ``A``.

    Non-symmetric input only triggers a :class:`SymmetryWarning`. One matvec
    per iteration (``H r`` for the fresh residual); ``H p`` is carried by
    recurrence.
    """
    cfg = (cfg or SolverConfig(method=Method.CR)).with_(method=Method.CR)
    A, b, x = prepare(A, b, cfg)
    if not A.is_symmetric(rtol=1e-12):
        warnings.warn("CR applied to a non-symmetric matrix", SymmetryWarning, stacklevel=2)

    counters = OpCounters()
    message = ""
    with counting(counters):
        r = initial_residual(A, b, x)
        mon = Monitor(A, b, cfg, counters)
        status = mon.start(norm2(r))
        counters.note_vectors(3)
        p = hp = None
        rhr = 0.0
        m = 0
        while status is None:
            hr = matvec(A, r)
            rhr_new = dot(hr, r)
            if p is None:
                p, hp = r.copy(), hr.copy()
            else:
                beta = rhr_new / rhr
                p *= beta
                p += r
                hp *= beta
                hp += hr
                counters.axpy_count += 2
            rhr = rhr_new
            hphp = dot(hp, hp)
            if not (hphp > 1e-300) or rhr == 0.0:
                status = Status.BREAKDOWN
                message = "(Hp, Hp) underflow" if not hphp > 1e-300 else "(Hr, r) = 0"
                break
            a = rhr / hphp
            x += a * p
            r -= a * hp
            counters.axpy_count += 2
            m += 1
            rnorm = norm2(r)
            if callback is not None:
                callback(CrStep(m=m - 1, x=x, r=r, p=p, hp=hp, a=a))
            status = mon.record(m, rnorm)
            if status is Status.CONVERGED:
                ok, r_true = mon.verify(x)
                if ok is False:
                    r, p = r_true, None
                    status = None
                elif ok is None:
                    status = Status.STAGNATED
                    message = "residual replacement limit reached"
    return mon.finish(x, status, message)
