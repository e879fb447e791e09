"""
fkrylov - Matrix File Readers and Writers

Line-oriented readers for Matrix Market coordinate files and plain edge lists,
plus a Matrix Market writer. Parse failures report the offending line.
"""

import logging
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..utils.error_handling import error_context, parse_error, validation_error, ErrorCategory
from .linalg import as_csr

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MM_BANNER = "%%matrixmarket"
SUPPORTED_FIELDS = ("real", "integer", "complex", "pattern")
SUPPORTED_SYMMETRIES = ("general", "symmetric", "hermitian", "skew-symmetric")


def _check_base(base: int) -> None:
    if base not in (0, 1):
        raise validation_error(f"base index must be 0 or 1, got {base}")


def read_matrix_market(path: PathLike, base: int = 1) -> sp.csr_matrix:
    """
    Read a Matrix Market coordinate file into canonical CSR.

    Symmetric, Hermitian and skew-symmetric storage is expanded to the full
    matrix, pattern entries become 1.0 and duplicate entries are summed.

    Args:
        path: File to read
        base: Index base used by the file body (the format itself is 1-based)

    Returns:
        The matrix in CSR form
    """
    _check_base(base)
    path = Path(path)
    with error_context("read_matrix_market", category=ErrorCategory.FILESYSTEM, file_path=path):
        text = path.read_text()

    lines = text.splitlines()
    if not lines or not lines[0].lower().startswith(MM_BANNER):
        raise parse_error("missing %%MatrixMarket header", path=path, line_number=1)

    header = lines[0].lower().split()
    if len(header) != 5 or header[1] != "matrix" or header[2] != "coordinate":
        raise parse_error(f"unsupported header '{lines[0].strip()}'", path=path, line_number=1)
    field, symmetry = header[3], header[4]
    if field not in SUPPORTED_FIELDS:
        raise parse_error(f"unsupported field '{field}'", path=path, line_number=1)
    if symmetry not in SUPPORTED_SYMMETRIES:
        raise parse_error(f"unsupported symmetry '{symmetry}'", path=path, line_number=1)

    # Size line: first non-comment line after the banner
    index = 1
    while index < len(lines) and (not lines[index].strip() or lines[index].lstrip().startswith('%')):
        index += 1
    if index >= len(lines):
        raise parse_error("missing size line", path=path, line_number=index + 1)
    try:
        n_rows, n_cols, nnz = (int(tok) for tok in lines[index].split())
    except ValueError:
        raise parse_error(f"malformed size line '{lines[index].strip()}'", path=path,
                          line_number=index + 1)
    if n_rows < 0 or n_cols < 0 or nnz < 0:
        raise parse_error("negative dimensions in size line", path=path, line_number=index + 1)

    rows: List[int] = []
    cols: List[int] = []
    vals: List[complex] = []
    n_expected_tokens = {"pattern": 2, "complex": 4}.get(field, 3)
    entries_read = 0

    for line_no in range(index + 2, len(lines) + 1):
        line = lines[line_no - 1].strip()
        if not line or line.startswith('%'):
            continue
        tokens = line.split()
        if len(tokens) != n_expected_tokens:
            raise parse_error(f"expected {n_expected_tokens} fields, found {len(tokens)}",
                              path=path, line_number=line_no)
        try:
            i = int(tokens[0]) - base
            j = int(tokens[1]) - base
            if field == "pattern":
                value: complex = 1.0
            elif field == "complex":
                value = complex(float(tokens[2]), float(tokens[3]))
            else:
                value = float(tokens[2])
        except ValueError:
            raise parse_error(f"malformed entry '{line}'", path=path, line_number=line_no)
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise parse_error(f"index ({tokens[0]}, {tokens[1]}) out of range for "
                              f"{n_rows}x{n_cols} matrix", path=path, line_number=line_no)

        rows.append(i)
        cols.append(j)
        vals.append(value)
        if i != j and symmetry != "general":
            rows.append(j)
            cols.append(i)
            if symmetry == "symmetric":
                vals.append(value)
            elif symmetry == "hermitian":
                vals.append(np.conj(value))
            else:
                vals.append(-value)
        entries_read += 1

    if entries_read != nnz:
        raise parse_error(f"header declares {nnz} entries, file contains {entries_read}",
                          path=path, line_number=len(lines))

    dtype = complex if field == "complex" else float
    data = np.asarray(vals, dtype=dtype) if vals else np.zeros(0, dtype=dtype)
    M = sp.coo_matrix((data, (np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))),
                      shape=(n_rows, n_cols))
    logger.debug(f"Read {n_rows}x{n_cols} {field}/{symmetry} matrix with {entries_read} entries from {path}")
    return as_csr(M)


def write_matrix_market(path: PathLike, A: sp.spmatrix, field: str = "auto",
                        symmetric: bool = False) -> None:
    """
    Write A as a Matrix Market coordinate file with 17 significant digits.

    Args:
        path: Destination file
        A: Matrix to write
        field: 'real', 'complex', 'pattern' or 'auto' (chosen from the dtype)
        symmetric: Store only the lower triangle with a symmetric header
    """
    M = as_csr(A).tocoo()
    if field == "auto":
        field = "complex" if np.iscomplexobj(M.data) else "real"
    if field not in ("real", "complex", "pattern"):
        raise validation_error(f"unsupported field '{field}'")

    entries: List[Tuple[int, int, complex]] = sorted(
        (int(i), int(j), v) for i, j, v in zip(M.row, M.col, M.data)
        if not symmetric or i >= j
    )

    out = [f"%%MatrixMarket matrix coordinate {field} {'symmetric' if symmetric else 'general'}",
           f"{M.shape[0]} {M.shape[1]} {len(entries)}"]
    for i, j, v in entries:
        if field == "pattern":
            out.append(f"{i + 1} {j + 1}")
        elif field == "complex":
            out.append(f"{i + 1} {j + 1} {v.real:.17g} {v.imag:.17g}")
        else:
            out.append(f"{i + 1} {j + 1} {float(np.real(v)):.17g}")

    path = Path(path)
    with error_context("write_matrix_market", category=ErrorCategory.FILESYSTEM, file_path=path):
        path.write_text("\n".join(out) + "\n")


def read_edge_list(path: PathLike, n_nodes: int, directed: bool = True,
                   base: int = 0) -> sp.csr_matrix:
    """
    Read a whitespace-separated edge list into an unweighted adjacency matrix.

    Extra columns (weights, timestamps) are ignored. Duplicate edges keep
    weight 1. Undirected mode inserts both (i, j) and (j, i).

    Args:
        path: File with one `i j` pair per line ('#' and '%' start comments)
        n_nodes: Number of nodes
        directed: Keep edge orientation
        base: Index base of the file (0 or 1)
    """
    _check_base(base)
    if n_nodes < 1:
        raise validation_error(f"n_nodes must be positive, got {n_nodes}")
    path = Path(path)
    with error_context("read_edge_list", category=ErrorCategory.FILESYSTEM, file_path=path):
        text = path.read_text()

    rows: List[int] = []
    cols: List[int] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#%":
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise parse_error(f"expected a node pair, found '{line}'", path=path, line_number=line_no)
        try:
            i = int(tokens[0]) - base
            j = int(tokens[1]) - base
        except ValueError:
            raise parse_error(f"non-integer node index in '{line}'", path=path, line_number=line_no)
        if not (0 <= i < n_nodes and 0 <= j < n_nodes):
            raise parse_error(f"node index out of range for {n_nodes} nodes in '{line}'",
                              path=path, line_number=line_no)
        rows.append(i)
        cols.append(j)
        if not directed:
            rows.append(j)
            cols.append(i)

    data = np.ones(len(rows))
    M = as_csr(sp.coo_matrix((data, (np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))),
                             shape=(n_nodes, n_nodes)))
    # Unweighted graph: summed duplicates clamp back to 1
    M.data[:] = 1.0
    logger.debug(f"Read {len(rows)} edge entries for {n_nodes} nodes from {path}")
    return M
