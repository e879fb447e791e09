"""
fkrylov - Linear Algebra Substrate

Sparse and dense building blocks shared by the Krylov solvers, the oracles and
the applications:
- CSR normalization and validated matrix-vector products
- Classical Gram-Schmidt with one reorthogonalization pass
- Rank-revealing column orthonormalization
- Matrix-free block embedding operator [[A, E], [0, A]]
- Seeded random problem generation
"""

import logging
from typing import NamedTuple, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator, onenormest

from ..utils.error_handling import validation_error

logger = logging.getLogger(__name__)

DEFAULT_BREAKDOWN_TOL = 1e-12
DEFAULT_SEED = 42

MatrixLike = Union[np.ndarray, sp.spmatrix, LinearOperator]


class GramSchmidtStep(NamedTuple):
    """Outcome of orthogonalizing one vector against an orthonormal basis."""
    coeffs: np.ndarray
    residual_norm: float
    q_new: np.ndarray
    breakdown: bool


def make_rng(seed: int = DEFAULT_SEED) -> np.random.Generator:
    """Counter-based 64-bit generator used for every random draw in the package."""
    return np.random.Generator(np.random.Philox(seed))


def as_csr(A: MatrixLike, name: str = "A") -> sp.csr_matrix:
    """
    Normalize a dense or sparse matrix to canonical CSR.

    Canonical means sorted column indices within each row and no duplicate
    entries, so row_ptr/col_idx satisfy the usual CSR invariants.
    """
    if isinstance(A, LinearOperator):
        raise validation_error(f"{name} must be an explicit matrix, got a LinearOperator")
    if sp.issparse(A):
        M = sp.csr_matrix(A)
    else:
        arr = np.asarray(A)
        if arr.ndim != 2:
            raise validation_error(f"{name} must be two-dimensional, got shape {arr.shape}")
        M = sp.csr_matrix(arr)
    M.sum_duplicates()
    M.sort_indices()
    return M


def is_real_data(*items: MatrixLike) -> bool:
    """True when every item has a real dtype."""
    for item in items:
        if item is None:
            continue
        if not np.issubdtype(np.dtype(item.dtype), np.floating) and \
                not np.issubdtype(np.dtype(item.dtype), np.integer):
            return False
    return True


def check_square(A: MatrixLike, name: str = "A") -> int:
    """Return n for a square n x n operand, raise a validation error otherwise."""
    shape = A.shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise validation_error(f"{name} must be square, got shape {shape}")
    return int(shape[0])


def validate_vector(x: np.ndarray, n: Optional[int] = None, name: str = "b") -> np.ndarray:
    """Return x as a 1-D array, checking its length and that all entries are finite."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if n is not None and arr.shape[0] != n:
        raise validation_error(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise validation_error(f"{name} contains NaN or Inf entries")
    if not np.issubdtype(arr.dtype, np.inexact):
        arr = arr.astype(float)
    return arr


def spmv(A: MatrixLike, x: np.ndarray) -> np.ndarray:
    """
    Compute A @ x without mutating either operand.

    Args:
        A: Sparse matrix, dense array or LinearOperator
        x: Vector with len(x) == A.shape[1]

    Returns:
        The product as a new 1-D array
    """
    x = np.asarray(x)
    if A.shape[1] != x.shape[0]:
        raise validation_error(
            f"dimension mismatch in matvec: operator has {A.shape[1]} columns, vector has {x.shape[0]} entries"
        )
    return np.asarray(A @ x).reshape(-1)


def gram_schmidt_step(Q: Optional[np.ndarray], w: np.ndarray, reorth: bool = True,
                      breakdown_tol: float = DEFAULT_BREAKDOWN_TOL) -> GramSchmidtStep:
    """
    Orthogonalize w against the orthonormal columns of Q.

    Classical Gram-Schmidt; with `reorth` a second pass is applied and its
    coefficients are accumulated, which keeps Q*q_new at roundoff level.

    Args:
        Q: n x m matrix with orthonormal columns (m may be 0) or None
        w: Vector to orthogonalize
        reorth: Apply the second pass
        breakdown_tol: Relative threshold on the residual norm

    Returns:
        GramSchmidtStep with coeffs = Q*w, residual norm, unit q_new and a
        breakdown flag set when residual_norm <= breakdown_tol * ||w||.
        On breakdown q_new is the zero vector.
    """
    w = np.asarray(w)
    w_norm = float(np.linalg.norm(w))

    if Q is None or Q.shape[1] == 0:
        coeffs = np.zeros(0, dtype=np.result_type(w.dtype, float))
        residual = w.astype(np.result_type(w.dtype, float), copy=True)
    else:
        coeffs = Q.conj().T @ w
        residual = w - Q @ coeffs
        if reorth:
            correction = Q.conj().T @ residual
            residual = residual - Q @ correction
            coeffs = coeffs + correction

    residual_norm = float(np.linalg.norm(residual))
    breakdown = residual_norm <= breakdown_tol * w_norm
    if breakdown:
        q_new = np.zeros_like(residual)
    else:
        q_new = residual / residual_norm
    return GramSchmidtStep(coeffs, residual_norm, q_new, breakdown)


def orthonormalize_columns(M: np.ndarray, breakdown_tol: float = DEFAULT_BREAKDOWN_TOL,
                           reorth: bool = True) -> np.ndarray:
    """
    Rank-revealing orthonormal basis of the column span of M.

    Columns whose residual falls below `breakdown_tol` relative to their own
    norm are dropped, so the result may have fewer columns than M.
    """
    n = M.shape[0]
    dtype = np.result_type(M.dtype, float)
    Q = np.zeros((n, M.shape[1]), dtype=dtype)
    count = 0
    for j in range(M.shape[1]):
        step = gram_schmidt_step(Q[:, :count], M[:, j], reorth=reorth,
                                 breakdown_tol=breakdown_tol)
        if step.breakdown:
            logger.debug(f"orthonormalize_columns: dropped dependent column {j}")
            continue
        Q[:, count] = step.q_new
        count += 1
    return Q[:, :count]


def block_embedding_operator(A: MatrixLike, E: MatrixLike) -> LinearOperator:
    """
    Matrix-free operator for the 2n x 2n block upper triangular embedding.

    x = [x1; x2]  ->  [A x1 + E x2; A x2]; the adjoint maps
    y = [y1; y2]  ->  [A* y1; E* y1 + A* y2]. The embedding is never formed.
    """
    n = check_square(A, "A")
    if E.shape != (n, n):
        raise validation_error(f"E has shape {E.shape}, expected {(n, n)}")
    opA = aslinearoperator(A)
    opE = aslinearoperator(E)
    dtype = np.result_type(opA.dtype, opE.dtype)

    def matvec(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x).reshape(-1)
        top, bottom = x[:n], x[n:]
        return np.concatenate([opA.matvec(top) + opE.matvec(bottom), opA.matvec(bottom)])

    def rmatvec(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y).reshape(-1)
        top, bottom = y[:n], y[n:]
        return np.concatenate([opA.rmatvec(top), opE.rmatvec(top) + opA.rmatvec(bottom)])

    return LinearOperator((2 * n, 2 * n), matvec=matvec, rmatvec=rmatvec, dtype=dtype)


def to_dense(A: MatrixLike) -> np.ndarray:
    """Dense copy of a sparse matrix, array or (small) LinearOperator."""
    if sp.issparse(A):
        return A.toarray()
    if isinstance(A, LinearOperator):
        return np.asarray(A @ np.eye(A.shape[1], dtype=A.dtype))
    return np.array(A, copy=True)


def one_norm(A: MatrixLike) -> float:
    """||A||_1, estimated for LinearOperators."""
    if sp.issparse(A):
        return float(abs(A).sum(axis=0).max()) if A.nnz else 0.0
    if isinstance(A, LinearOperator):
        return float(onenormest(A))
    arr = np.asarray(A)
    return float(np.linalg.norm(arr, 1)) if arr.size else 0.0


def frobenius_norm(A: MatrixLike) -> float:
    """||A||_F for sparse or dense matrices."""
    if sp.issparse(A):
        return float(np.sqrt((abs(A.data) ** 2).sum())) if A.nnz else 0.0
    return float(np.linalg.norm(to_dense(A), 'fro'))


def random_sparse(n: int, density: float, rng: np.random.Generator,
                  complex_valued: bool = False) -> sp.csr_matrix:
    """Seeded sparse n x n matrix with standard-normal nonzeros."""
    real = sp.random(n, n, density=density, format='csr', random_state=rng,
                     data_rvs=rng.standard_normal)
    if not complex_valued:
        return as_csr(real)
    imag = sp.random(n, n, density=density, format='csr', random_state=rng,
                     data_rvs=rng.standard_normal)
    return as_csr(real + 1j * imag)


def random_vector(n: int, rng: np.random.Generator, complex_valued: bool = False) -> np.ndarray:
    """Seeded standard-normal vector."""
    x = rng.standard_normal(n)
    if complex_valued:
        x = x + 1j * rng.standard_normal(n)
    return x


def random_dense(n: int, rng: np.random.Generator, complex_valued: bool = False) -> np.ndarray:
    """Seeded dense standard-normal n x n matrix."""
    M = rng.standard_normal((n, n))
    if complex_valued:
        M = M + 1j * rng.standard_normal((n, n))
    return M
