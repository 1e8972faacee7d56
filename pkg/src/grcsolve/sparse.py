"""Square CSR matrices, vector kernels and triangular splitting.

All arithmetic is float64. Matrices are immutable once built: the index and
value arrays are flagged read-only and a scipy view is cached for matvec.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .counters import active_counters

__all__ = [
    "CSRMatrix",
    "TriangularSplit",
    "as_csr",
    "as_vector",
    "matvec",
    "dot",
    "norm2",
    "axpy",
    "scale",
    "transpose",
    "symmetrize",
    "triangular_split",
]


class CSRMatrix:
    """Square real matrix in compressed sparse row layout.

    Parameters
    ----------
    n : int
        Dimension (rows == cols).
    row_ptr, col_idx, values : array_like
        Standard CSR arrays; rows must have strictly increasing column
        indices. Use :meth:`from_coo` to build from unsorted triplets.
    check : bool
        Validate the structural invariants (default ``True``).
    """

    __slots__ = ("n", "row_ptr", "col_idx", "values", "_sp")

    def __init__(self, n, row_ptr, col_idx, values, *, check=True):
        self.n = int(n)
        self.row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
        self.col_idx = np.ascontiguousarray(col_idx, dtype=np.int64)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        if check:
            self._validate()
        for arr in (self.row_ptr, self.col_idx, self.values):
            arr.setflags(write=False)
        self._sp = None

    def _validate(self):
        n, rp, ci, v = self.n, self.row_ptr, self.col_idx, self.values
        if n < 0:
            raise ValueError(f"negative dimension {n}")
        if rp.ndim != 1 or rp.shape[0] != n + 1:
            raise ValueError(f"row_ptr must have length n+1={n + 1}, got {rp.shape}")
        if rp[0] != 0:
            raise ValueError("row_ptr[0] must be 0")
        if np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        nnz = int(rp[-1])
        if ci.shape != (nnz,) or v.shape != (nnz,):
            raise ValueError(
                f"col_idx/values must have length row_ptr[n]={nnz}, "
                f"got {ci.shape[0]} and {v.shape[0]}"
            )
        if nnz:
            if ci.min() < 0 or ci.max() >= n:
                raise ValueError("column index out of range [0, n)")
            # strictly increasing inside each row: every step that is not a
            # row boundary must increase
            steps = np.diff(ci)
            starts = np.zeros(nnz, dtype=bool)
            starts[rp[:-1][rp[:-1] < nnz]] = True
            if np.any((steps <= 0) & ~starts[1:]):
                raise ValueError("column indices must be strictly increasing within rows")
            if not np.all(np.isfinite(v)):
                raise ValueError("matrix values must be finite")

    # construction -------------------------------------------------------

    @classmethod
    def from_coo(cls, n, rows, cols, vals, *, drop_zeros=False):
        """Build from triplets; duplicates are summed, rows sorted."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
            raise ValueError("triplet index out of range")
        m = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        m.sum_duplicates()
        if drop_zeros:
            m.eliminate_zeros()
        return cls._from_canonical_scipy(m)

    @classmethod
    def from_scipy(cls, m):
        m = sp.csr_matrix(m, dtype=np.float64)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        m = m.copy()
        m.sum_duplicates()
        return cls._from_canonical_scipy(m)

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"matrix must be square, got shape {a.shape}")
        return cls._from_canonical_scipy(sp.csr_matrix(a))

    @classmethod
    def identity(cls, n):
        idx = np.arange(n, dtype=np.int64)
        return cls(n, np.arange(n + 1), idx, np.ones(n), check=False)

    @classmethod
    def _from_canonical_scipy(cls, m):
        m.sort_indices()
        return cls(m.shape[0], m.indptr, m.indices, m.data)

    # views ----------------------------------------------------------------

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def nnz(self):
        return int(self.row_ptr[-1])

    def to_scipy(self) -> sp.csr_matrix:
        if self._sp is None:
            m = sp.csr_matrix((self.values, self.col_idx, self.row_ptr), shape=self.shape)
            m.has_sorted_indices = True
            self._sp = m
        return self._sp

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def diagonal(self) -> np.ndarray:
        return self.to_scipy().diagonal()

    def row(self, i):
        """(columns, values) of row ``i``."""
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_idx[lo:hi], self.values[lo:hi]

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def equals(self, other: "CSRMatrix") -> bool:
        """Exact structural and value equality."""
        return (
            self.n == other.n
            and np.array_equal(self.row_ptr, other.row_ptr)
            and np.array_equal(self.col_idx, other.col_idx)
            and np.array_equal(self.values, other.values)
        )

    def is_symmetric(self, rtol=0.0) -> bool:
        s = self.to_scipy()
        diff = abs(s - s.T)
        if diff.nnz == 0:
            return True
        scale = np.abs(self.values).max() if self.nnz else 0.0
        return bool(diff.max() <= rtol * scale)

    def __matmul__(self, x):
        return matvec(self, x)

    def __repr__(self):
        return f"CSRMatrix(n={self.n}, nnz={self.nnz})"


@dataclass(frozen=True)
class TriangularSplit:
    """Strictly lower part, diagonal and strictly upper part of a matrix."""

    lower: CSRMatrix
    diag: np.ndarray
    upper: CSRMatrix
    zero_diagonal: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def usable_for_relaxation(self) -> bool:
        return self.zero_diagonal.size == 0

    def reassemble(self) -> CSRMatrix:
        """``lower + diag + upper`` with explicit zeros removed."""
        n = self.diag.shape[0]
        d = sp.diags(self.diag, format="csr", shape=(n, n))
        m = sp.csr_matrix(self.lower.to_scipy() + self.upper.to_scipy() + d)
        m.eliminate_zeros()
        return CSRMatrix._from_canonical_scipy(m)


def as_csr(a) -> CSRMatrix:
    """Coerce ndarray / scipy sparse / CSRMatrix to :class:`CSRMatrix`."""
    if isinstance(a, CSRMatrix):
        return a
    if sp.issparse(a):
        return CSRMatrix.from_scipy(a)
    return CSRMatrix.from_dense(a)


def as_vector(x, n=None, name="vector") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2 and 1 in x.shape:
        x = x.ravel()
    if x.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise ValueError(f"{name} has length {x.shape[0]}, expected {n}")
    return x


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def matvec(a: CSRMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (a.n,):
        raise ValueError(f"dimension mismatch: matrix is {a.n}x{a.n}, vector has shape {x.shape}")
    c = active_counters()
    if c is not None:
        c.matvec_count += 1
    return a.to_scipy() @ x


def dot(x, y) -> float:
    x, y = _pair(x, y)
    c = active_counters()
    if c is not None:
        c.dot_count += 1
    return float(np.dot(x, y))


def norm2(x) -> float:
    """Euclidean norm; counted as one inner product."""
    x = np.asarray(x, dtype=np.float64)
    c = active_counters()
    if c is not None:
        c.dot_count += 1
    return float(np.sqrt(np.dot(x, x)))


def axpy(a, x, y) -> np.ndarray:
    """Return ``a*x + y`` as a new vector."""
    x, y = _pair(x, y)
    c = active_counters()
    if c is not None:
        c.axpy_count += 1
    return a * x + y


def scale(a, x) -> np.ndarray:
    c = active_counters()
    if c is not None:
        c.axpy_count += 1
    return a * np.asarray(x, dtype=np.float64)


def transpose(a: CSRMatrix) -> CSRMatrix:
    return CSRMatrix._from_canonical_scipy(sp.csr_matrix(a.to_scipy().T))


def symmetrize(a: CSRMatrix) -> CSRMatrix:
    """Return ``(A + A^T) / 2``; exactly symmetric since fp addition commutes."""
    s = a.to_scipy()
    m = sp.csr_matrix((s + s.T) * 0.5)
    m.eliminate_zeros()
    return CSRMatrix._from_canonical_scipy(m)


def triangular_split(a: CSRMatrix) -> TriangularSplit:
    """Partition ``a`` into strictly lower, diagonal and strictly upper parts.

    Zero diagonal entries do not raise; their row indices are reported in
    ``zero_diagonal`` so callers can refuse relaxation.
    """
    s = a.to_scipy()
    lower = CSRMatrix._from_canonical_scipy(sp.csr_matrix(sp.tril(s, k=-1)))
    upper = CSRMatrix._from_canonical_scipy(sp.csr_matrix(sp.triu(s, k=1)))
    d = np.array(s.diagonal(), dtype=np.float64)
    d.setflags(write=False)
    zero = np.flatnonzero(d == 0.0)
    return TriangularSplit(lower=lower, diag=d, upper=upper, zero_diagonal=zero)
