"""Minimal MatrixMarket readers: coordinate matrices and array vectors.

Handles the subset the benchmark needs: real (or integer) entries,
``general`` or ``symmetric`` coordinate matrices, single-column array
vectors, transparently gunzipping ``.gz`` files. Duplicate coordinate
entries are summed; symmetric storage is expanded to both triangles.
"""

import gzip

import numpy as np

from .linalg import SparseMatrixCSR, csr_from_triplets

__all__ = ["MatrixMarketError", "mm_read_matrix", "mm_read_vector"]


class MatrixMarketError(ValueError):
    pass


def _open_text(path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt")
    return open(path, "r")


def _read_lines(path):
    """Yield (line_number, stripped_line) skipping comments and blanks."""
    with _open_text(path) as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket"):
            raise MatrixMarketError(f"{path}: missing %%MatrixMarket header")
        yield 1, header.strip()
        for num, line in enumerate(fh, start=2):
            s = line.strip()
            if not s or s.startswith("%"):
                continue
            yield num, s


def _parse_header(header, path):
    tokens = header.split()
    if len(tokens) != 5 or tokens[1].lower() != "matrix":
        raise MatrixMarketError(f"{path}: unsupported header: {header!r}")
    fmt, field, symmetry = (t.lower() for t in tokens[2:5])
    if field not in ("real", "integer"):
        raise MatrixMarketError(f"{path}: unsupported field in header: {header!r}")
    return fmt, field, symmetry


def mm_read_matrix(path) -> SparseMatrixCSR:
    """Read a coordinate-format MatrixMarket file into CSR."""
    lines = _read_lines(path)
    _, header = next(lines)
    fmt, _, symmetry = _parse_header(header, path)
    if fmt != "coordinate":
        raise MatrixMarketError(f"{path}: expected coordinate format, header was {header!r}")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"{path}: unsupported symmetry {symmetry!r}")
    try:
        num, size_line = next(lines)
    except StopIteration:
        raise MatrixMarketError(f"{path}: missing size line") from None
    parts = size_line.split()
    if len(parts) != 3:
        raise MatrixMarketError(f"{path}: line {num}: bad size line {size_line!r}")
    try:
        n_rows, n_cols, nnz = (int(p) for p in parts)
    except ValueError:
        raise MatrixMarketError(f"{path}: line {num}: bad size line {size_line!r}") from None
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    count = 0
    for num, line in lines:
        if count >= nnz:
            raise MatrixMarketError(f"{path}: line {num}: more than {nnz} entries")
        parts = line.split()
        if len(parts) != 3:
            raise MatrixMarketError(f"{path}: line {num}: expected 'i j value', got {line!r}")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"{path}: line {num}: malformed entry {line!r}") from None
        if not (1 <= i <= n_rows and 1 <= j <= n_cols):
            raise MatrixMarketError(f"{path}: line {num}: index ({i}, {j}) out of bounds")
        rows[count] = i - 1
        cols[count] = j - 1
        vals[count] = v
        count += 1
    if count != nnz:
        raise MatrixMarketError(f"{path}: expected {nnz} entries, found {count}")
    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (np.concatenate([rows, cols[off]]),
                            np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, vals[off]]))
    return csr_from_triplets(n_rows, n_cols, rows, cols, vals)


def mm_read_vector(path) -> np.ndarray:
    """Read a single-column array-format MatrixMarket file as a dense vector."""
    lines = _read_lines(path)
    _, header = next(lines)
    fmt, _, symmetry = _parse_header(header, path)
    if fmt != "array":
        raise MatrixMarketError(f"{path}: expected array format, header was {header!r}")
    if symmetry != "general":
        raise MatrixMarketError(f"{path}: unsupported symmetry {symmetry!r}")
    try:
        num, size_line = next(lines)
    except StopIteration:
        raise MatrixMarketError(f"{path}: missing size line") from None
    parts = size_line.split()
    if len(parts) != 2:
        raise MatrixMarketError(f"{path}: line {num}: bad size line {size_line!r}")
    try:
        n_rows, n_cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise MatrixMarketError(f"{path}: line {num}: bad size line {size_line!r}") from None
    if n_cols != 1:
        raise MatrixMarketError(f"{path}: expected a single column, file has {n_cols}")
    out = np.empty(n_rows)
    count = 0
    for num, line in lines:
        for tok in line.split():
            if count >= n_rows:
                raise MatrixMarketError(f"{path}: line {num}: more than {n_rows} values")
            try:
                out[count] = float(tok)
            except ValueError:
                raise MatrixMarketError(f"{path}: line {num}: malformed value {tok!r}") from None
            count += 1
    if count != n_rows:
        raise MatrixMarketError(f"{path}: expected {n_rows} values, found {count}")
    return out
