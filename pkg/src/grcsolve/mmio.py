"""Matrix Market coordinate-format reader/writer.

Only square ``real``/``integer`` matrices in ``general`` or ``symmetric``
storage are read; symmetric storage is expanded to full. Writing always
emits ``coordinate real general`` with 17 significant digits so that a
write/read round trip is exact.
"""
from __future__ import annotations

import io
import os

import numpy as np

from .sparse import CSRMatrix

__all__ = ["MatrixMarketError", "mm_read", "mm_write", "read_vector", "write_vector"]


class MatrixMarketError(ValueError):
    """Malformed or unsupported Matrix Market input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class _TextSource:
    """Text view over a path, bytes, or text/binary stream."""

    def __init__(self, source):
        self._close = self._detach = False
        if isinstance(source, (str, os.PathLike)):
            self.fh = open(source, "r", encoding="ascii", errors="replace")
            self._close = True
        elif isinstance(source, (bytes, bytearray)):
            self.fh = io.StringIO(bytes(source).decode("ascii", errors="replace"))
        elif isinstance(source, io.TextIOBase):
            self.fh = source
        else:
            self.fh = io.TextIOWrapper(source, encoding="ascii", errors="replace")
            self._detach = True

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        if self._close:
            self.fh.close()
        elif self._detach:
            # leave the caller's binary stream open
            self.fh.detach()


def _parse_header(line, lineno):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0].lower() != "%%matrixmarket":
        raise MatrixMarketError("expected '%%MatrixMarket <object> <format> <field> <symmetry>'", lineno)
    obj, fmt, fld, sym = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", lineno)
    return fmt, fld, sym


def mm_read(source) -> CSRMatrix:
    """Read a square coordinate-format matrix.

    ``source`` may be a path, ``bytes``, or a text/binary stream. Duplicate
    coordinates are summed.
    """
    with _TextSource(source) as fh:
        return _read_coordinate(fh)


def _read_coordinate(fh) -> CSRMatrix:
    lineno = 0
    header = None
    for raw in fh:
        lineno += 1
        header = raw
        break
    if header is None:
        raise MatrixMarketError("empty input", 1)
    fmt, fld, sym = _parse_header(header, lineno)
    if fmt != "coordinate":
        raise MatrixMarketError(f"unsupported format {fmt!r} (only 'coordinate')", lineno)
    if fld not in ("real", "integer", "double"):
        raise MatrixMarketError(f"unsupported field {fld!r} (pattern/complex are rejected)", lineno)
    if sym not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry {sym!r}", lineno)

    size = None
    for raw in fh:
        lineno += 1
        s = raw.strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if len(parts) != 3:
            raise MatrixMarketError("size line must be 'rows cols nnz'", lineno)
        try:
            size = tuple(int(p) for p in parts)
        except ValueError:
            raise MatrixMarketError(f"non-integer size line {s!r}", lineno) from None
        break
    if size is None:
        raise MatrixMarketError("missing size line", lineno + 1)
    nrows, ncols, nnz = size
    if nrows != ncols:
        raise MatrixMarketError(f"matrix is not square ({nrows}x{ncols})", lineno)
    if nrows < 0 or nnz < 0:
        raise MatrixMarketError("negative size", lineno)

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    k = 0
    for raw in fh:
        lineno += 1
        s = raw.strip()
        if not s or s.startswith("%"):
            continue
        if k >= nnz:
            raise MatrixMarketError(f"more than the declared {nnz} entries", lineno)
        parts = s.split()
        if len(parts) != 3:
            raise MatrixMarketError(f"expected 'i j value', got {s!r}", lineno)
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"cannot parse entry {s!r}", lineno) from None
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixMarketError(f"index ({i}, {j}) outside {nrows}x{ncols}", lineno)
        if not np.isfinite(v):
            raise MatrixMarketError(f"non-finite value {parts[2]!r}", lineno)
        if sym == "symmetric" and j > i:
            raise MatrixMarketError("symmetric storage must list the lower triangle only", lineno)
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
        k += 1
    if k != nnz:
        raise MatrixMarketError(f"expected {nnz} entries, found {k}", lineno)

    if sym == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    return CSRMatrix.from_coo(nrows, rows, cols, vals)


def mm_write(a: CSRMatrix, target, comment: str | None = None) -> None:
    """Write ``a`` as ``coordinate real general``."""
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="ascii") as fh:
            _write_coordinate(a, fh, comment)
    else:
        _write_coordinate(a, target, comment)


def _write_coordinate(a, fh, comment):
    fh.write("%%MatrixMarket matrix coordinate real general\n")
    if comment:
        for line in comment.splitlines():
            fh.write(f"% {line}\n")
    fh.write(f"{a.n} {a.n} {a.nnz}\n")
    rows = np.repeat(np.arange(a.n, dtype=np.int64), np.diff(a.row_ptr))
    lines = [
        f"{i + 1} {j + 1} {v:.17g}\n"
        for i, j, v in zip(rows.tolist(), a.col_idx.tolist(), a.values.tolist())
    ]
    fh.writelines(lines)


def read_vector(source) -> np.ndarray:
    """Read a dense vector.

    Accepts Matrix Market ``array real general`` with one column, or plain
    whitespace separated numbers (``%``/``#`` comments allowed).
    """
    with _TextSource(source) as fh:
        text = fh.read()
    lines = text.splitlines()
    if lines and lines[0].lower().startswith("%%matrixmarket"):
        fmt, fld, _ = _parse_header(lines[0], 1)
        if fmt != "array" or fld not in ("real", "integer", "double"):
            raise MatrixMarketError("vector files must be 'array real'", 1)
        body = [(n, ln.strip()) for n, ln in enumerate(lines[1:], start=2)
                if ln.strip() and not ln.lstrip().startswith("%")]
        if not body:
            raise MatrixMarketError("missing size line", len(lines) + 1)
        size_line, size = body[0]
        dims = size.split()
        if len(dims) != 2 or dims[1] != "1":
            raise MatrixMarketError("vector array must be 'n 1'", size_line)
        n = int(dims[0])
        entries = body[1:]
        if len(entries) != n:
            raise MatrixMarketError(f"expected {n} values, found {len(entries)}", size_line)
    else:
        entries = [(n, ln.strip()) for n, ln in enumerate(lines, start=1)
                   if ln.strip() and not ln.lstrip().startswith(("%", "#"))]
    out = []
    for lineno, s in entries:
        for tok in s.split():
            try:
                out.append(float(tok))
            except ValueError:
                raise MatrixMarketError(f"cannot parse value {tok!r}", lineno) from None
    return np.array(out, dtype=np.float64)


def write_vector(x, target) -> None:
    x = np.asarray(x, dtype=np.float64).ravel()
    body = "".join(f"{v:.17g}\n" for v in x.tolist())
    text = f"%%MatrixMarket matrix array real general\n{x.size} 1\n{body}"
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        target.write(text)
