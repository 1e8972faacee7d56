"""Dense reference computations for cross-checking the solvers.

Nothing here imports :mod:`grcsolve.solvers`; keep it that way so oracle and
solver errors cannot cancel.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "DENSE_CAP",
    "SingularMatrixError",
    "dense_solve",
    "dense_least_squares",
    "krylov_basis",
    "full_minres_oracle",
    "distance_to_span",
]

DENSE_CAP = 512


class SingularMatrixError(np.linalg.LinAlgError):
    def __init__(self, pivot_index, pivot):
        self.pivot_index = pivot_index
        super().__init__(f"matrix is singular to working precision at pivot {pivot_index} "
                         f"(|pivot| = {pivot:.3e})")


def _dense(A):
    if hasattr(A, "to_dense"):
        A = A.to_dense()
    elif hasattr(A, "toarray"):
        A = A.toarray()
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if max(A.shape) > DENSE_CAP:
        raise ValueError(f"dense oracle limited to {DENSE_CAP} rows/cols, got {A.shape}")
    return A


def dense_solve(A, b) -> np.ndarray:
    """Gaussian elimination with partial pivoting."""
    M = _dense(A)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("A must be square")
    x = np.array(b, dtype=np.float64).ravel()
    if x.shape != (n,):
        raise ValueError("b has the wrong length")
    tol = 1e-14 * np.linalg.norm(M)
    for k in range(n):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        if abs(M[p, k]) <= tol:
            raise SingularMatrixError(k, abs(M[p, k]))
        if p != k:
            M[[k, p]] = M[[p, k]]
            x[[k, p]] = x[[p, k]]
        f = M[k + 1:, k] / M[k, k]
        M[k + 1:, k:] -= np.outer(f, M[k, k:])
        x[k + 1:] -= f * x[k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - M[k, k + 1:] @ x[k + 1:]) / M[k, k]
    return x


def dense_least_squares(B, r, rcond=1e-12) -> np.ndarray:
    """argmin ||r - B a||; singular values below ``rcond * s_max`` are cut."""
    B = _dense(B)
    if not np.any(B):
        raise ValueError("B has no nonzero column")
    coef, *_ = np.linalg.lstsq(B, np.asarray(r, dtype=np.float64), rcond=rcond)
    return coef


def krylov_basis(A, v, m, breakdown_tol=1e-12) -> np.ndarray:
    """Orthonormal basis of K_m(A, v) by Arnoldi with full reorthogonalization.

    Returns an ``n x d`` array with ``d <= m``; ``d < m`` signals that the
    Krylov space stopped growing.
    """
    A = _dense(A)
    v = np.asarray(v, dtype=np.float64)
    n = A.shape[0]
    if m > n:
        raise ValueError(f"m={m} exceeds the dimension {n}")
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("starting vector is zero")
    Q = np.zeros((n, m))
    Q[:, 0] = v / nv
    for j in range(1, m):
        w = A @ Q[:, j - 1]
        scale = np.linalg.norm(w)
        for _ in range(2):
            w -= Q[:, :j] @ (Q[:, :j].T @ w)
        if np.linalg.norm(w) <= breakdown_tol * max(scale, 1e-300):
            return Q[:, :j]
        Q[:, j] = w / np.linalg.norm(w)
    return Q


def full_minres_oracle(A, b, m) -> np.ndarray:
    """``min_{z in K_i(A, b)} ||b - A z||`` for ``i = 0..m``.

    Entry 0 is ``||b||``. Once the Krylov space stops growing the sequence
    stays at the attained minimum.
    """
    A = _dense(A)
    b = np.asarray(b, dtype=np.float64)
    out = np.empty(m + 1)
    out[0] = np.linalg.norm(b)
    Q = krylov_basis(A, b, min(m, A.shape[0]))
    last = out[0]
    for i in range(1, m + 1):
        if i <= Q.shape[1]:
            AQ = A @ Q[:, :i]
            y, *_ = np.linalg.lstsq(AQ, b, rcond=None)
            last = np.linalg.norm(b - AQ @ y)
        out[i] = last
    return out


def distance_to_span(Q, v) -> float:
    """``||(I - Q Q^T) v||`` for orthonormal columns ``Q``."""
    v = np.asarray(v, dtype=np.float64)
    w = v - Q @ (Q.T @ v)
    return float(np.linalg.norm(w - Q @ (Q.T @ w)))
