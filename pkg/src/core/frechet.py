"""
fkrylov - Baselines, Oracles and Adjoint Identities

Baselines built on the standard Arnoldi method:
- fd_arnoldi: finite difference of two Arnoldi runs
- cs_arnoldi: complex step with a single complex Arnoldi run

Dense references (size guarded):
- oracle_dense_embedding: f of the dense 2n x 2n embedding
- oracle_daleckii_krein: eigendecomposition with divided differences

Adjoint identities relating c* L_f(A,E) b to trace inner products, and the
rank-one reduction used by the centrality sensitivities.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from ..services.resource_service import MemoryGuard, get_memory_guard
from ..utils.error_handling import error_context, validation_error
from .krylov import ArnoldiOptions, arnoldi_fAb, arnoldi_fAb_iterates
from .linalg import (
    MatrixLike, check_square, is_real_data, one_norm, to_dense, validate_vector,
)
from .matfunc import FunctionSpec, divided_difference_matrix, matfun

logger = logging.getLogger(__name__)

DENSE_EMBEDDING_MAX_N = 2000
ADJOINT_MAX_N = 500
EIGVEC_CONDITION_LIMIT = 1e8

FD_EPS_FACTOR = 1e-5
FD_EPS_MIN = 1e-10
FD_EPS_MAX = 1e-2
CS_DEFAULT_EPS = 1e-20


class OracleMethod(Enum):
    """Dense reference used for L_f(A,E)b."""
    DENSE_EMBEDDING = "dense-embedding"
    DALECKII_KREIN = "daleckii-krein"


@dataclass
class FrechetProblem:
    """The data A, E, b, f of L_f(A,E)b."""
    A: MatrixLike
    E: MatrixLike
    b: np.ndarray
    f: FunctionSpec

    def __post_init__(self) -> None:
        n = check_square(self.A, "A")
        if self.E.shape != (n, n):
            raise validation_error(f"E has shape {self.E.shape}, expected {(n, n)}")
        self.b = validate_vector(self.b, n)

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    @property
    def is_real(self) -> bool:
        return is_real_data(self.A, self.E, self.b)


@dataclass
class OracleResult:
    """Reference values for L_f(A,E)b and f(A)b."""
    Lb: np.ndarray
    fAb: np.ndarray
    method: OracleMethod
    eigenvalues: Optional[np.ndarray] = None
    eigvec_condition: float = 1.0
    ill_conditioned: bool = False

    def __post_init__(self) -> None:
        if not (np.all(np.isfinite(self.Lb)) and np.all(np.isfinite(self.fAb))):
            raise validation_error(f"{self.method.value} oracle produced non-finite entries")


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def default_fd_eps(A: MatrixLike, E: MatrixLike) -> float:
    """1e-5 * ||A||_1 / ||E||_1 clamped to [1e-10, 1e-2]."""
    norm_e = one_norm(E)
    if norm_e == 0.0:
        return FD_EPS_FACTOR
    eps = FD_EPS_FACTOR * one_norm(A) / norm_e
    return float(min(max(eps, FD_EPS_MIN), FD_EPS_MAX))


def _same_pattern(A: sp.spmatrix, E: sp.spmatrix) -> bool:
    a, e = sp.csr_matrix(A), sp.csr_matrix(E)
    a.sort_indices()
    e.sort_indices()
    return (a.nnz == e.nnz and np.array_equal(a.indptr, e.indptr)
            and np.array_equal(a.indices, e.indices))


def shifted_operator(A: MatrixLike, E: MatrixLike, shift: complex) -> MatrixLike:
    """
    A + shift * E.

    Formed explicitly for dense operands or sparse operands sharing one
    sparsity pattern, otherwise applied lazily as a sum of operators.
    """
    if isinstance(A, np.ndarray) and isinstance(E, np.ndarray):
        return A + shift * E
    if sp.issparse(A) and sp.issparse(E) and _same_pattern(A, E):
        return sp.csr_matrix(A) + shift * sp.csr_matrix(E)
    return aslinearoperator(A) + aslinearoperator(E) * shift


def _check_eps(eps: float) -> float:
    if not eps > 0:
        raise validation_error(f"step size eps must be positive, got {eps}")
    return float(eps)


def _check_real(problem: FrechetProblem) -> None:
    if not problem.is_real:
        raise validation_error("complex step requires real A, E and b")


def fd_arnoldi(problem: FrechetProblem, eps: Optional[float] = None, k: int = 30,
               options: Optional[ArnoldiOptions] = None) -> np.ndarray:
    """(f_k(A + eps E) b - f_k(A) b) / eps with f_k the Arnoldi approximation."""
    eps = _check_eps(default_fd_eps(problem.A, problem.E) if eps is None else eps)
    perturbed = shifted_operator(problem.A, problem.E, eps)
    y_eps, _ = arnoldi_fAb(perturbed, problem.b, problem.f, k, options, record_history=False)
    y, _ = arnoldi_fAb(problem.A, problem.b, problem.f, k, options, record_history=False)
    return (y_eps - y) / eps


def cs_arnoldi(problem: FrechetProblem, eps: float = CS_DEFAULT_EPS, k: int = 30,
               options: Optional[ArnoldiOptions] = None) -> np.ndarray:
    """Im(f_k(A + i eps E) b) / eps from one complex Arnoldi run; real data only."""
    _check_real(problem)
    eps = _check_eps(eps)
    perturbed = shifted_operator(problem.A, problem.E, 1j * eps)
    y, _ = arnoldi_fAb(perturbed, problem.b.astype(complex), problem.f, k, options,
                       record_history=False)
    return np.imag(y) / eps


def fd_arnoldi_iterates(problem: FrechetProblem, eps: Optional[float], k_max: int,
                        options: Optional[ArnoldiOptions] = None,
                        skip_failures: bool = False) -> List[np.ndarray]:
    """fd_arnoldi for every k = 1..k_max from two Arnoldi runs."""
    eps = _check_eps(default_fd_eps(problem.A, problem.E) if eps is None else eps)
    perturbed = arnoldi_fAb_iterates(shifted_operator(problem.A, problem.E, eps),
                                     problem.b, problem.f, k_max, options, skip_failures)
    plain = arnoldi_fAb_iterates(problem.A, problem.b, problem.f, k_max, options, skip_failures)
    return [(y_eps - y) / eps for y_eps, y in zip(perturbed, plain)]


def cs_arnoldi_iterates(problem: FrechetProblem, eps: float, k_max: int,
                        options: Optional[ArnoldiOptions] = None,
                        skip_failures: bool = False) -> List[np.ndarray]:
    """cs_arnoldi for every k = 1..k_max from one complex Arnoldi run."""
    _check_real(problem)
    eps = _check_eps(eps)
    iterates = arnoldi_fAb_iterates(shifted_operator(problem.A, problem.E, 1j * eps),
                                    problem.b.astype(complex), problem.f, k_max, options,
                                    skip_failures)
    return [np.imag(y) / eps for y in iterates]


# ---------------------------------------------------------------------------
# Dense oracles
# ---------------------------------------------------------------------------

def _guard_size(n: int, limit: int, operation: str) -> None:
    if n > limit:
        raise validation_error(f"{operation} refuses n = {n} (limit {limit}); "
                               f"use a smaller problem or a diagonal/Hermitian A")


def _realify(x: np.ndarray, real: bool) -> np.ndarray:
    """Drop a roundoff-level imaginary part when the exact result is real."""
    if not real or not np.iscomplexobj(x):
        return x
    if np.linalg.norm(np.imag(x)) <= 1e-12 * max(np.linalg.norm(x), np.finfo(float).tiny):
        return np.real(x).copy()
    return x


def dense_frechet(A: MatrixLike, E: MatrixLike, f: FunctionSpec,
                  guard: Optional[MemoryGuard] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Full matrices L_f(A,E) and f(A) from the dense embedding.

    Returns:
        (L, fA) read off the top-right and bottom-right blocks of
        f([[A, E], [0, A]])
    """
    n = check_square(A, "A")
    if E.shape != (n, n):
        raise validation_error(f"E has shape {E.shape}, expected {(n, n)}")
    _guard_size(n, DENSE_EMBEDDING_MAX_N, "dense embedding oracle")
    dense_A, dense_E = to_dense(A), to_dense(E)
    complex_valued = np.iscomplexobj(dense_A) or np.iscomplexobj(dense_E)
    (guard or get_memory_guard()).require_dense(2 * n, complex_valued, "dense embedding oracle")

    M = np.block([[dense_A, dense_E], [np.zeros_like(dense_A), dense_A]])
    F = matfun(M, f)
    return F[:n, n:], F[n:, n:]


def oracle_dense_embedding(problem: FrechetProblem,
                           guard: Optional[MemoryGuard] = None) -> OracleResult:
    """L_f(A,E)b and f(A)b from f of the dense block upper triangular embedding."""
    L, fA = dense_frechet(problem.A, problem.E, problem.f, guard)
    return OracleResult(Lb=L @ problem.b, fAb=fA @ problem.b,
                        method=OracleMethod.DENSE_EMBEDDING)


def is_hermitian(A: MatrixLike) -> bool:
    """Exact Hermitian test (sparse) or with a roundoff tolerance (dense)."""
    if sp.issparse(A):
        diff = sp.csr_matrix(A) - sp.csr_matrix(A).conj().T
        return diff.count_nonzero() == 0
    if isinstance(A, LinearOperator):
        A = to_dense(A)
    arr = np.asarray(A)
    scale = max(float(np.abs(arr).max()) if arr.size else 0.0, 1.0)
    return bool(np.allclose(arr, arr.conj().T, rtol=0.0, atol=1e-13 * scale))


def oracle_daleckii_krein(problem: FrechetProblem,
                          guard: Optional[MemoryGuard] = None) -> OracleResult:
    """
    L_f(A,E)b = X (D o (X^-1 E X)) X^-1 b with A = X diag(lambda) X^-1 and
    D[i, j] = f[lambda_i, lambda_j].

    Hermitian A uses eigh (X unitary); otherwise eig, and the eigenvector
    condition number is reported, flagging the result above 1e8.
    """
    n = problem.n
    dense_A, dense_E = to_dense(problem.A), to_dense(problem.E)
    complex_valued = np.iscomplexobj(dense_A) or np.iscomplexobj(dense_E)
    (guard or get_memory_guard()).require_dense(n, complex_valued, "Daleckii-Krein oracle")

    hermitian = is_hermitian(dense_A)
    with error_context("oracle_daleckii_krein"):
        if hermitian:
            lam, X = scipy.linalg.eigh(dense_A)
            X_inv = X.conj().T
            condition = 1.0
        else:
            lam, X = scipy.linalg.eig(dense_A)
            X_inv = scipy.linalg.inv(X)
            condition = float(np.linalg.cond(X))

    ill_conditioned = condition > EIGVEC_CONDITION_LIMIT
    if ill_conditioned:
        logger.warning(f"eigenvector condition number {condition:.2e} exceeds "
                       f"{EIGVEC_CONDITION_LIMIT:g}; Daleckii-Krein reference is unreliable")

    D = divided_difference_matrix(problem.f, lam)
    b_hat = X_inv @ problem.b
    Lb = X @ ((D * (X_inv @ dense_E @ X)) @ b_hat)
    fAb = X @ (problem.f(lam) * b_hat)

    real = problem.is_real
    return OracleResult(Lb=_realify(Lb, real), fAb=_realify(fAb, real),
                        method=OracleMethod.DALECKII_KREIN, eigenvalues=lam,
                        eigvec_condition=condition, ill_conditioned=ill_conditioned)


def reference_oracle(problem: FrechetProblem,
                     guard: Optional[MemoryGuard] = None) -> OracleResult:
    """Daleckii-Krein for Hermitian A, the dense embedding otherwise."""
    if is_hermitian(problem.A):
        return oracle_daleckii_krein(problem, guard)
    if problem.n > DENSE_EMBEDDING_MAX_N:
        raise validation_error(
            f"no reference for non-Hermitian A of size {problem.n}: the dense embedding oracle "
            f"is limited to n <= {DENSE_EMBEDDING_MAX_N}; use a Hermitian or smaller A")
    return oracle_dense_embedding(problem, guard)


# ---------------------------------------------------------------------------
# Adjoint identities
# ---------------------------------------------------------------------------

def _adjoint_sides(A: MatrixLike, E: MatrixLike, b: np.ndarray, c: np.ndarray,
                   f: FunctionSpec, adjoint_first: bool) -> Tuple[complex, complex]:
    n = check_square(A, "A")
    _guard_size(n, ADJOINT_MAX_N, "adjoint identity")
    b = validate_vector(b, n, "b")
    c = validate_vector(c, n, "c")
    dense_A, dense_E = to_dense(A), to_dense(E)

    L, _ = dense_frechet(dense_A, dense_E, f)
    lhs = np.vdot(c, L @ b)
    base = dense_A.conj().T if adjoint_first else dense_A
    L_dual, _ = dense_frechet(base, np.outer(c, b.conj()), f)
    # <X, Y> = trace(X* Y)
    rhs = np.vdot(L_dual, dense_E)
    return complex(lhs), complex(rhs)


def _relative_gap(lhs: complex, rhs: complex) -> float:
    scale = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def adjoint_identity_residual(A: MatrixLike, E: MatrixLike, b: np.ndarray, c: np.ndarray,
                              f: FunctionSpec) -> float:
    """|c* L_f(A,E) b - <L_f(A*, c b*), E>| relative to the larger side."""
    return _relative_gap(*_adjoint_sides(A, E, b, c, f, adjoint_first=True))


def adjoint_statement_residual(A: MatrixLike, E: MatrixLike, b: np.ndarray, c: np.ndarray,
                               f: FunctionSpec) -> float:
    """
    Same comparison with L_f(A, c b*) in place of L_f(A*, c b*).

    Agrees with adjoint_identity_residual for Hermitian A only.
    """
    return _relative_gap(*_adjoint_sides(A, E, b, c, f, adjoint_first=False))


def rank_one_reduction(A: MatrixLike, x: np.ndarray, y: np.ndarray, b: np.ndarray,
                       c: np.ndarray, f: FunctionSpec) -> Tuple[complex, complex]:
    """
    lhs = c* L_f(A, x y*) b and rhs = conj(x* L_f(A*, c b*) y), both dense.
    """
    n = check_square(A, "A")
    _guard_size(n, ADJOINT_MAX_N, "rank-one reduction")
    x, y = validate_vector(x, n, "x"), validate_vector(y, n, "y")
    b, c = validate_vector(b, n, "b"), validate_vector(c, n, "c")
    dense_A = to_dense(A)

    L, _ = dense_frechet(dense_A, np.outer(x, y.conj()), f)
    lhs = np.vdot(c, L @ b)
    L_dual, _ = dense_frechet(dense_A.conj().T, np.outer(c, b.conj()), f)
    rhs = np.conj(np.vdot(x, L_dual @ y))
    return complex(lhs), complex(rhs)
