"""Test-matrix generators on the unit cube.

* :func:`gen_convection_diffusion` -- 7-point central differences for
  ``u_xx + u_yy + u_zz + c u_x`` with homogeneous Dirichlet data, sign
  flipped so the diagonal is positive.
* :func:`gen_poisson_neumann` -- finite-volume Laplacian on a geometrically
  stretched vertex grid with zero-flux walls and one pinned corner.

Unknowns are ordered x fastest: ``idx = i + n*j + n*n*k``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import CSRMatrix

__all__ = [
    "GridSpec",
    "GRID_CAP",
    "conv_diff_nnz",
    "conv_diff_row_ptr",
    "convection_diffusion_header",
    "gen_convection_diffusion",
    "gen_poisson_neumann",
    "manufactured_solution",
    "rhs_unit_solution",
]

GRID_CAP = 1290  # 7 n^3 stays below 2**34 entries


@dataclass(frozen=True)
class GridSpec:
    n: int
    stretch: float = 1.05
    convection: float = 1000.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"n must be an integer >= 3, got {self.n!r}")
        if not (self.stretch >= 1.0) or not np.isfinite(self.stretch):
            raise ValueError(f"stretch must be >= 1, got {self.stretch!r}")
        if not np.isfinite(self.convection):
            raise ValueError("convection must be finite")

    @property
    def dimension(self) -> int:
        return self.n ** 3


def _check_cap(n, cap):
    if n > cap:
        raise ValueError(f"grid n={n} exceeds the cap {cap}; raise max_n explicitly")


def conv_diff_nnz(n: int) -> int:
    """Closed form: one diagonal plus six stencil arms missing one face each."""
    return 7 * n ** 3 - 6 * n ** 2


def _axis_neighbours(n):
    # 1 or 2 in-grid neighbours along one axis for each grid index
    c = np.full(n, 2, dtype=np.int64)
    c[0] -= 1
    c[-1] -= 1
    return c


def conv_diff_row_ptr(n: int, max_n: int = GRID_CAP) -> np.ndarray:
    """CSR row pointer of the 7-point operator, built from neighbour counts only."""
    _check_cap(n, max_n)
    a = _axis_neighbours(n)
    counts = 1 + a[:, None, None] + a[None, :, None] + a[None, None, :]
    row_ptr = np.empty(n ** 3 + 1, dtype=np.int64)
    row_ptr[0] = 0
    np.cumsum(counts.ravel(), out=row_ptr[1:])
    return row_ptr


def convection_diffusion_header(spec: GridSpec, max_n: int = GRID_CAP):
    """``(rows, cols, nnz)`` without materializing column indices or values."""
    rp = conv_diff_row_ptr(spec.n, max_n)
    size = rp.shape[0] - 1
    return size, size, int(rp[-1])


def gen_convection_diffusion(spec: GridSpec, max_n: int = GRID_CAP):
    """Return ``(A, b)`` with ``b = A @ ones``.

    Mesh width ``h = 1/(n+1)``; diagonal ``6/h^2``; neighbours ``-1/h^2``;
    the x-neighbours additionally carry ``-c/(2h)`` (i+1) and ``+c/(2h)``
    (i-1), i.e. the negated central difference of ``c u_x``.
    """
    n = spec.n
    _check_cap(n, max_n)
    h = 1.0 / (n + 1)
    inv_h2 = 1.0 / (h * h)
    conv = spec.convection / (2.0 * h)
    N = n ** 3
    k, j, i = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    i, j, k = i.ravel(), j.ravel(), k.ravel()
    idx = np.arange(N, dtype=np.int64)

    # stencil arms in increasing column order: -z, -y, -x, diag, +x, +y, +z
    arms = [
        (k > 0, -n * n, -inv_h2),
        (j > 0, -n, -inv_h2),
        (i > 0, -1, -inv_h2 + conv),
        (None, 0, 6.0 * inv_h2),
        (i < n - 1, 1, -inv_h2 - conv),
        (j < n - 1, n, -inv_h2),
        (k < n - 1, n * n, -inv_h2),
    ]
    row_ptr = conv_diff_row_ptr(n, max_n)
    nnz = int(row_ptr[-1])
    col_idx = np.empty(nnz, dtype=np.int64)
    values = np.empty(nnz, dtype=np.float64)
    fill = row_ptr[:-1].copy()
    for mask, offset, coef in arms:
        rows = idx if mask is None else idx[mask]
        pos = fill[rows]
        col_idx[pos] = rows + offset
        values[pos] = coef
        fill[rows] += 1
    A = CSRMatrix(N, row_ptr, col_idx, values, check=False)
    return A, rhs_unit_solution(A)


def _stretched_axis(n, stretch):
    """Node coordinates and control-volume widths on [0, 1]."""
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        spacing = stretch ** np.arange(n - 1, dtype=np.float64)
        spacing = spacing / spacing.sum()
    if not np.all(np.isfinite(spacing)) or np.any(spacing <= 0.0):
        raise ValueError(f"stretch={stretch} produces degenerate grid spacing at n={n}")
    coords = np.concatenate([[0.0], np.cumsum(spacing)])
    width = np.empty(n)
    width[0] = spacing[0] / 2
    width[-1] = spacing[-1] / 2
    width[1:-1] = (spacing[:-1] + spacing[1:]) / 2
    return coords, spacing, width


def gen_poisson_neumann(spec: GridSpec, max_n: int = GRID_CAP):
    """Return ``(A, b)`` for the pinned Neumann Poisson problem.

    Cell faces between neighbouring nodes get conductance ``area/distance``;
    wall faces carry no flux. Row and column 0 (the corner at the origin)
    are reduced to their diagonal, which keeps ``A`` symmetric and
    nonsingular. ``b = A @ u*`` with ``u* = x + y + z``.
    """
    n = spec.n
    _check_cap(n, max_n)
    coords, spacing, width = _stretched_axis(n, spec.stretch)
    N = n ** 3
    grid = np.arange(N, dtype=np.int64).reshape(n, n, n)  # [k, j, i]
    wk, wj, wi = width.reshape(n, 1, 1), width.reshape(1, n, 1), width.reshape(1, 1, n)
    # face conductance: transverse face area over node distance
    faces = [
        (grid[:, :, :-1], grid[:, :, 1:], wk * wj / spacing.reshape(1, 1, n - 1)),
        (grid[:, :-1, :], grid[:, 1:, :], wk * wi / spacing.reshape(1, n - 1, 1)),
        (grid[:-1, :, :], grid[1:, :, :], wj * wi / spacing.reshape(n - 1, 1, 1)),
    ]
    rows, cols, vals = [], [], []
    diag = np.zeros(N)
    for a_idx, b_idx, cond in faces:
        a_idx, b_idx, cond = a_idx.ravel(), b_idx.ravel(), cond.ravel()
        rows += [a_idx, b_idx]
        cols += [b_idx, a_idx]
        vals += [-cond, -cond]
        np.add.at(diag, a_idx, cond)
        np.add.at(diag, b_idx, cond)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    keep = (rows != 0) & (cols != 0)
    rows = np.concatenate([rows[keep], np.arange(N)])
    cols = np.concatenate([cols[keep], np.arange(N)])
    vals = np.concatenate([vals[keep], diag])
    A = CSRMatrix.from_coo(N, rows, cols, vals)
    return A, A.to_scipy() @ _node_sum(coords)


def manufactured_solution(spec: GridSpec) -> np.ndarray:
    """``u* = x + y + z`` at the nodes used by :func:`gen_poisson_neumann`."""
    return _node_sum(_stretched_axis(spec.n, spec.stretch)[0])


def _node_sum(x):
    return (x[None, None, :] + x[None, :, None] + x[:, None, None]).ravel()


def rhs_unit_solution(A: CSRMatrix) -> np.ndarray:
    """``b = A @ ones`` so the exact solution is all ones."""
    return A.to_scipy() @ np.ones(A.n)
