"""Residual cutting (RC) and generalized residual cutting (GRC).

Both share one outer loop. Each step builds a new vector ``psi``, spends one
matvec on ``H psi``, then picks the combination

    phi = a_1 psi + a_2 phi_{m-1} + ... + a_L phi_{m-L+1}

minimizing ``||r - H phi||``. ``H phi`` is assembled from stored images, so
the window of ``L-1`` past (phi, H phi) pairs is the only long-vector
storage beyond x, b, r and psi.

GRC forms ``psi`` without touching the matrix entries:
damped mode uses ``psi = phi_{m-1} - H phi_{m-1} + r`` (``psi = r`` on the
first step); residual mode uses ``psi = r``. RC forms ``psi`` with SOR sweeps
on ``H psi = r`` from a zero start.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..counters import OpCounters, counting
from ..sparse import dot, matvec, norm2, triangular_split
from .base import (
    Method,
    Monitor,
    PsiMode,
    SolverConfig,
    SolverInvariantError,
    Status,
    initial_residual,
    prepare,
)
from .lsq import solve_gram
from .sor import sor_sweeps

__all__ = ["CuttingStep", "grc_solve", "rc_solve", "INNER_BLOWUP"]

INNER_BLOWUP = 1e90
PHI_FLOOR = 1e-300


@dataclass
class CuttingStep:
    """Snapshot handed to ``callback`` after step ``m`` (read-only arrays).

    ``basis``/``images`` are the vectors actually used in the minimization
    (``psi`` first); ``window`` holds the retained ``phi`` newest first.
    """

    m: int
    x: np.ndarray
    r: np.ndarray
    psi: np.ndarray
    hpsi: np.ndarray
    basis: list
    images: list
    alpha: np.ndarray
    phi: np.ndarray
    hphi: np.ndarray
    window: list
    window_images: list


def grc_solve(A, b, cfg: SolverConfig | None = None, callback=None):
    """Solve ``A x = b`` with generalized residual cutting.

    Parameters
    ----------
    A : CSRMatrix, scipy sparse matrix or ndarray
    b : array_like
    cfg : SolverConfig, optional
        ``method`` is ignored; ``L``, ``psi_mode``, ``tol``, ``max_iter`` and
        ``initial_guess`` are used.
    callback : callable, optional
        Called with a :class:`CuttingStep` after every step.

    Returns
    -------
    SolveResult
    """
    cfg = (cfg or SolverConfig()).with_(method=Method.GRC)
    A, b, x = prepare(A, b, cfg)

    def make_psi(r, window):
        if cfg.psi_mode is PsiMode.RESIDUAL or not window:
            return r.copy()
        phi, hphi = window[0]
        return phi - hphi + r

    return _cutting_loop(A, b, x, cfg, make_psi, callback)


def rc_solve(A, b, cfg: SolverConfig | None = None, callback=None):
    """Solve ``A x = b`` with residual cutting, SOR as the inner solver.

    Uses ``omega`` and ``inner_iters`` from ``cfg``. When the inner iterate
    grows past 1e90 it is rescaled by a power of two (exact, and the window
    minimization only sees its direction); a non-finite iterate ends the run
    with ``Breakdown``, upgraded to ``Diverged`` if the recomputed residual
    exceeds the last recorded one.
    """
    cfg = (cfg or SolverConfig(method=Method.RC)).with_(method=Method.RC)
    A, b, x = prepare(A, b, cfg)
    split = triangular_split(A)
    if not split.usable_for_relaxation:
        raise ValueError(
            f"RC needs a nonzero diagonal; zero at rows {split.zero_diagonal[:5].tolist()}"
        )

    def make_psi(r, window):
        psi = sor_sweeps(split, r, cfg.omega, cfg.inner_iters)
        peak = np.abs(psi).max(initial=0.0)
        if not np.isfinite(peak):
            return None
        if peak > INNER_BLOWUP:
            psi = np.ldexp(psi, -np.frexp(peak)[1])
        return psi

    return _cutting_loop(A, b, x, cfg, make_psi, callback)


def _cutting_loop(A, b, x, cfg, make_psi, callback):
    counters = OpCounters()
    L = cfg.L
    with counting(counters):
        r = initial_residual(A, b, x)
        mon = Monitor(A, b, cfg, counters)
        status = mon.start(norm2(r))
        # newest first: (phi, H phi); gram holds their mutual inner products
        window = deque(maxlen=L - 1)
        gram = np.zeros((0, 0))
        message = ""
        m = 0
        while status is None:
            psi = make_psi(r, window)
            if psi is None:
                status = Status.BREAKDOWN
                message = "inner solver iterate overflowed"
                break
            hpsi = matvec(A, psi)
            k = 1 + len(window)
            counters.note_vectors(2 * len(window) + 2)

            G = np.empty((k, k))
            G[0, 0] = dot(hpsi, hpsi)
            for j, (_, hw) in enumerate(window, start=1):
                G[0, j] = G[j, 0] = dot(hpsi, hw)
            G[1:, 1:] = gram
            c = np.empty(k)
            c[0] = dot(hpsi, r)
            for j, (_, hw) in enumerate(window, start=1):
                c[j] = dot(hw, r)

            alpha, used, degenerate = solve_gram(G, c)
            if degenerate or not np.all(np.isfinite(alpha)):
                status = Status.STAGNATED if degenerate else Status.BREAKDOWN
                message = "window least-squares system is degenerate"
                break

            if callback is not None:
                snap_psi, snap_hpsi = psi.copy(), hpsi.copy()
                basis = [snap_psi] + [w for w, _ in list(window)[: used - 1]]
                images = [snap_hpsi] + [hw for _, hw in list(window)[: used - 1]]

            # phi and H phi overwrite psi / H psi in place
            phi, hphi = psi, hpsi
            phi *= alpha[0]
            hphi *= alpha[0]
            for a, (w, hw) in zip(alpha[1:used], window):
                phi += a * w
                hphi += a * hw
            counters.axpy_count += 2 * used + 2
            x += phi
            r -= hphi

            if np.abs(phi).max(initial=0.0) <= PHI_FLOOR:
                status = Status.STAGNATED
                message = "correction vanished"

            if cfg.debug:
                _check_image(A, phi, hphi)

            # (H phi, H w_j) follows from the Gram rows already in hand
            cross = alpha @ G[:, 1:]
            keep = min(len(window), L - 2)
            new_gram = np.empty((keep + 1, keep + 1))
            new_gram[0, 0] = dot(hphi, hphi)
            new_gram[0, 1:] = new_gram[1:, 0] = cross[:keep]
            new_gram[1:, 1:] = gram[:keep, :keep]
            window.appendleft((phi, hphi))
            gram = new_gram

            m += 1
            rnorm = norm2(r)
            if callback is not None:
                callback(CuttingStep(
                    m=m - 1, x=x, r=r, psi=snap_psi, hpsi=snap_hpsi, basis=basis,
                    images=images, alpha=alpha[:used].copy(), phi=phi, hphi=hphi,
                    window=[w for w, _ in window], window_images=[hw for _, hw in window],
                ))
            if status is not None:
                mon.record(m, rnorm)
                break
            status = mon.record(m, rnorm)
            if status is Status.CONVERGED:
                ok, r_true = mon.verify(x)
                if ok is False:
                    # recursive residual drifted: restart the window from the truth
                    r = r_true
                    window.clear()
                    gram = np.zeros((0, 0))
                    status = None
                elif ok is None:
                    status = Status.STAGNATED
                    message = "residual replacement limit reached"

    result = mon.finish(x, status, message)
    if cfg.method is Method.RC and status is not Status.CONVERGED:
        last = mon.trace.relative_residual[-1]
        if result.true_relative_residual > last * (1.0 + 1e-6):
            result.status = Status.DIVERGED
    return result


def _check_image(A, v, hv):
    exact = A.to_scipy() @ v
    bound = 1e-12 * A.frobenius_norm() * np.linalg.norm(v)
    err = np.linalg.norm(exact - hv)
    if err > bound:
        raise SolverInvariantError(
            f"stored image drifted: ||Av - Hv|| = {err:.3e} > {bound:.3e}"
        )
