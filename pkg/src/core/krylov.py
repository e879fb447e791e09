"""
fkrylov - Krylov Solvers

Arnoldi-based approximations of f(A)b and of the Fréchet derivative action
L_f(A, E)b:

- arnoldi / arnoldi_fAb: the standard method for f(A)b
- block_embedding_arnoldi: Arnoldi on the 2n x 2n embedding [[A, E], [0, A]]
- modified_arnoldi_basic: Krylov basis of the embedding split into top and
  bottom halves, each orthonormalized, then projected block-diagonally
- SeparateOrthonormalization / modified_arnoldi: the same projection built
  incrementally from two orthonormal bases U, V and a strictly upper
  triangular coupling factor R, so that [U R; V] spans K_i(𝒜, [0; b])

The block-diagonal projection keeps the compressed matrix block upper
triangular with diagonal blocks U*AU and V*AV, whose spectra lie in the
numerical range of A.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from ..utils.error_handling import BranchError, validation_error
from .linalg import (
    DEFAULT_BREAKDOWN_TOL, MatrixLike, block_embedding_operator, check_square,
    frobenius_norm, gram_schmidt_step, orthonormalize_columns, spmv, to_dense,
    validate_vector,
)
from .matfunc import (
    FunctionSpec, SpectralInterval, chebyshev_uniform_error, matfun,
    polynomial_frechet_action,
)

logger = logging.getLogger(__name__)

History = List[Tuple[int, float]]


@dataclass
class ArnoldiOptions:
    """Tunables shared by the Krylov solvers."""
    breakdown_tol: float = DEFAULT_BREAKDOWN_TOL
    reorth: bool = True
    check_every: int = 5
    stop_tol: float = 0.0
    keep_iterates: bool = False
    # 'alpha' divides the coupling update by alpha instead of beta; self-check hook only
    r_update_divisor: str = "beta"

    def __post_init__(self) -> None:
        if self.check_every < 1:
            raise validation_error(f"check_every must be >= 1, got {self.check_every}")
        if self.stop_tol < 0:
            raise validation_error(f"stop_tol must be >= 0, got {self.stop_tol}")
        if self.r_update_divisor not in ("beta", "alpha"):
            raise validation_error(f"unknown r_update_divisor '{self.r_update_divisor}'")


@dataclass
class ArnoldiDecomposition:
    """
    Orthonormal Krylov basis Q and Hessenberg compression H.

    Without breakdown Q is n x (k+1) and H is (k+1) x k. After a lucky
    breakdown at step m, Q is n x m and H is the square m x m compression.
    """
    Q: np.ndarray
    H: np.ndarray
    beta0: float
    breakdown: bool = False

    @property
    def steps(self) -> int:
        return self.H.shape[1]

    def compressed(self, j: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Basis Q_j and square compression H_j for the first j steps."""
        j = self.steps if j is None else min(j, self.steps)
        return self.Q[:, :j], self.H[:j, :j]


@dataclass
class StructuredKrylovBasis:
    """
    Torn basis of the embedding's Krylov space.

    Columns of [U R; V S] with S = [I_q | 0] span the Krylov space; the
    cached products make the compressed matrix free of large matvecs.
    """
    U: np.ndarray
    V: np.ndarray
    R: np.ndarray
    AU: np.ndarray
    EV: np.ndarray
    VAV: np.ndarray
    b: np.ndarray
    bottom_closed: bool = False
    exhausted: bool = False
    deflations: int = 0

    @property
    def dimension(self) -> int:
        """Number of Krylov basis columns represented."""
        return self.R.shape[1]


class CompressedBlockMatrix(NamedTuple):
    """Projected embedding [[Huu, Huv], [0, Hvv]]; the zero block is never stored."""
    Huu: np.ndarray
    Huv: np.ndarray
    Hvv: np.ndarray

    def full(self) -> np.ndarray:
        p, q = self.Huu.shape[0], self.Hvv.shape[0]
        dtype = np.result_type(self.Huu.dtype, self.Huv.dtype, self.Hvv.dtype)
        M = np.zeros((p + q, p + q), dtype=dtype)
        M[:p, :p] = self.Huu
        M[:p, p:] = self.Huv
        M[p:, p:] = self.Hvv
        return M


@dataclass
class FrechetResult:
    """Approximations v1 ≈ L_f(A,E)b and v2 ≈ f(A)b with their convergence history."""
    v1: np.ndarray
    v2: np.ndarray
    history: History = field(default_factory=list)
    iterations: int = 0
    breakdown: bool = False
    converged: bool = False
    iterates: Dict[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)
    basis: Optional[StructuredKrylovBasis] = None


class BoundCheck(NamedTuple):
    """Both sides of the convergence bound for Hermitian A."""
    lhs: float
    rhs: float
    interval: SpectralInterval


def _update_norm(current: np.ndarray, previous: Optional[np.ndarray]) -> float:
    """Relative change between successive iterates (absolute when the iterate vanishes)."""
    if previous is None:
        return 1.0 if np.linalg.norm(current) > 0 else 0.0
    diff = float(np.linalg.norm(current - previous))
    scale = float(np.linalg.norm(current))
    return diff / scale if scale > 0 else diff


def _history_from_iterates(iterates: List[np.ndarray]) -> History:
    history: History = []
    previous: Optional[np.ndarray] = None
    for j, y in enumerate(iterates, start=1):
        history.append((j, _update_norm(y, previous)))
        previous = y
    return history


# ---------------------------------------------------------------------------
# Standard Arnoldi
# ---------------------------------------------------------------------------

def arnoldi(A: MatrixLike, b: np.ndarray, k: int,
            options: Optional[ArnoldiOptions] = None) -> ArnoldiDecomposition:
    """
    Arnoldi decomposition of K_k(A, b).

    Args:
        A: Square operator (sparse, dense or LinearOperator)
        b: Nonzero start vector
        k: Number of steps

    Returns:
        ArnoldiDecomposition, flagged on lucky breakdown
    """
    options = options or ArnoldiOptions()
    n = check_square(A, "A")
    b = validate_vector(b, n)
    if k < 1:
        raise validation_error(f"k must be >= 1, got {k}")
    beta0 = float(np.linalg.norm(b))
    if beta0 == 0.0:
        raise validation_error("start vector b must be nonzero")

    dtype = np.result_type(A.dtype, b.dtype, float)
    Q = np.zeros((n, k + 1), dtype=dtype, order='F')
    H = np.zeros((k + 1, k), dtype=dtype)
    Q[:, 0] = b / beta0

    for j in range(k):
        w = spmv(A, Q[:, j])
        step = gram_schmidt_step(Q[:, :j + 1], w, reorth=options.reorth,
                                 breakdown_tol=options.breakdown_tol)
        H[:j + 1, j] = step.coeffs
        H[j + 1, j] = step.residual_norm
        if step.breakdown:
            logger.debug(f"arnoldi: lucky breakdown at step {j + 1}")
            return ArnoldiDecomposition(Q[:, :j + 1].copy(), H[:j + 1, :j + 1].copy(),
                                        beta0, breakdown=True)
        Q[:, j + 1] = step.q_new

    return ArnoldiDecomposition(Q, H, beta0)


def _iterates_from_decomposition(dec: ArnoldiDecomposition, f: FunctionSpec, k_max: int,
                                 skip_failures: bool = False) -> List[np.ndarray]:
    iterates: List[np.ndarray] = []
    for j in range(1, min(k_max, dec.steps) + 1):
        Qj, Hj = dec.compressed(j)
        try:
            iterates.append(Qj @ (matfun(Hj, f)[:, 0] * dec.beta0))
        except BranchError as e:
            if not skip_failures:
                raise
            logger.warning(f"step {j}: {e.message}; recording NaN")
            iterates.append(np.full(dec.Q.shape[0], np.nan, dtype=dec.Q.dtype))
    # Exact after breakdown: repeat the final value
    while len(iterates) < k_max:
        iterates.append(iterates[-1])
    return iterates


def arnoldi_fAb_iterates(A: MatrixLike, b: np.ndarray, f: FunctionSpec, k_max: int,
                         options: Optional[ArnoldiOptions] = None,
                         skip_failures: bool = False) -> List[np.ndarray]:
    """
    All Arnoldi approximations y_1..y_kmax of f(A)b from a single decomposition.

    With `skip_failures`, a step whose compressed square root leaves the
    principal branch yields a NaN vector instead of raising.
    """
    dec = arnoldi(A, b, k_max, options)
    return _iterates_from_decomposition(dec, f, k_max, skip_failures)


def arnoldi_fAb(A: MatrixLike, b: np.ndarray, f: FunctionSpec, k: int,
                options: Optional[ArnoldiOptions] = None,
                record_history: bool = True) -> Tuple[np.ndarray, History]:
    """
    Arnoldi approximation Q_k f(Q_k* A Q_k) Q_k* b of f(A)b.

    Args:
        record_history: Evaluate every intermediate iterate to record per-step
            update norms; otherwise only the final approximation is formed
    """
    dec = arnoldi(A, b, k, options)
    if record_history:
        iterates = _iterates_from_decomposition(dec, f, k)
        return iterates[-1], _history_from_iterates(iterates)
    Qk, Hk = dec.compressed()
    return Qk @ (matfun(Hk, f)[:, 0] * dec.beta0), []


# ---------------------------------------------------------------------------
# Block embedding
# ---------------------------------------------------------------------------

def _embedding_start(A: MatrixLike, E: MatrixLike, b: np.ndarray) -> Tuple[int, np.ndarray]:
    n = check_square(A, "A")
    if E.shape != (n, n):
        raise validation_error(f"E has shape {E.shape}, expected {(n, n)}")
    b = validate_vector(b, n)
    if np.linalg.norm(b) == 0:
        raise validation_error("start vector b must be nonzero")
    return n, np.concatenate([np.zeros_like(b), b])


def block_embedding_iterates(A: MatrixLike, E: MatrixLike, b: np.ndarray, f: FunctionSpec,
                             k_max: int, options: Optional[ArnoldiOptions] = None,
                             skip_failures: bool = False
                             ) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(v1, v2) for every k = 1..k_max of Arnoldi on the embedding."""
    n, start = _embedding_start(A, E, b)
    iterates = arnoldi_fAb_iterates(block_embedding_operator(A, E), start, f, k_max, options,
                                    skip_failures)
    return [(y[:n], y[n:]) for y in iterates]


def block_embedding_arnoldi(A: MatrixLike, E: MatrixLike, b: np.ndarray, f: FunctionSpec,
                            k: int, options: Optional[ArnoldiOptions] = None) -> FrechetResult:
    """
    Arnoldi on x -> 𝒜x with start [0; b]; the top half approximates L_f(A,E)b.

    The embedding is applied matrix-free and never formed.
    """
    n, start = _embedding_start(A, E, b)
    dec = arnoldi(block_embedding_operator(A, E), start, k, options)
    iterates = _iterates_from_decomposition(dec, f, k)
    tops = [y[:n] for y in iterates]
    y = iterates[-1]
    return FrechetResult(v1=y[:n], v2=y[n:], history=_history_from_iterates(tops),
                         iterations=dec.steps, breakdown=dec.breakdown)


# ---------------------------------------------------------------------------
# Modified Arnoldi, basic version
# ---------------------------------------------------------------------------

def _project(U: np.ndarray, V: np.ndarray, AU: np.ndarray, EV: np.ndarray, VAV: np.ndarray,
             b: np.ndarray, f: FunctionSpec) -> Tuple[np.ndarray, np.ndarray]:
    """v1 = U F12 V*b and v2 = V F22 V*b for F = f([[U*AU, U*EV], [0, V*AV]])."""
    compressed = CompressedBlockMatrix(U.conj().T @ AU, U.conj().T @ EV, VAV)
    p = U.shape[1]
    F = matfun(compressed.full(), f)
    coeffs = V.conj().T @ b
    v1 = U @ (F[:p, p:] @ coeffs)
    v2 = V @ (F[p:, p:] @ coeffs)
    return v1, v2


def modified_arnoldi_basic(A: MatrixLike, E: MatrixLike, b: np.ndarray, f: FunctionSpec,
                           k: int, options: Optional[ArnoldiOptions] = None) -> FrechetResult:
    """
    Basic modified Arnoldi.

    Builds a basis of K_{k+1}(𝒜, [0; b]), splits it into top block C and
    bottom block D, orthonormalizes each with rank-revealing Gram-Schmidt (the
    first top column is zero and always dropped) and projects with diag(U, V).
    The Krylov dimension matches modified_arnoldi with the same k.
    """
    options = options or ArnoldiOptions()
    n, start = _embedding_start(A, E, b)
    dec = arnoldi(block_embedding_operator(A, E), start, k, options)
    W = dec.Q

    U = orthonormalize_columns(W[:n], options.breakdown_tol, options.reorth)
    V = orthonormalize_columns(W[n:], options.breakdown_tol, options.reorth)
    logger.debug(f"modified_arnoldi_basic: k={k}, dim U={U.shape[1]}, dim V={V.shape[1]}")

    AU = np.asarray(A @ U) if U.shape[1] else np.zeros((n, 0), dtype=V.dtype)
    EV = np.asarray(E @ V)
    VAV = V.conj().T @ np.asarray(A @ V)
    v1, v2 = _project(U, V, AU, EV, VAV, validate_vector(b, n), f)
    return FrechetResult(v1=v1, v2=v2, iterations=dec.steps, breakdown=dec.breakdown)


# ---------------------------------------------------------------------------
# Modified Arnoldi with separate orthonormalization
# ---------------------------------------------------------------------------

class SeparateOrthonormalization:
    """
    Incremental builder of the torn basis [U R; V S].

    Each step applies 𝒜 to the last basis column [U r; v], orthonormalizes the
    bottom part A v against V and the top part A U r + E v against U, and
    records the coupling in a new column of R:

        R_i = [[R_{i-1}, (g - R_{i-1} h) / beta], [0, alpha / beta]]

    Three large matvecs per step (A v, E v, A u) fill the caches AU, EV and
    V*AV; V*AV is taken from the Gram-Schmidt coefficients, so V and V*AV
    coincide with the plain Arnoldi basis and Hessenberg matrix of K(A, b).

    Breakdown handling:
    - alpha-breakdown (top direction dependent): U does not grow, R still gains
      a column.
    - beta-breakdown (K(A, b) invariant): V stops growing; the recurrence then
      continues on the top block alone until the embedding's Krylov space
      is invariant, at which point the builder is exhausted.
    """

    def __init__(self, A: MatrixLike, E: MatrixLike, b: np.ndarray, max_steps: int,
                 options: Optional[ArnoldiOptions] = None):
        self.options = options or ArnoldiOptions()
        if max_steps < 1:
            raise validation_error(f"k must be >= 1, got {max_steps}")
        n, _ = _embedding_start(A, E, b)
        self.A = A
        self.E = E
        self.b = validate_vector(b, n)
        self.n = n
        self.max_steps = max_steps
        dtype = np.result_type(A.dtype, E.dtype, self.b.dtype, float)

        self.U = np.zeros((n, max_steps), dtype=dtype, order='F')
        self.AU = np.zeros((n, max_steps), dtype=dtype, order='F')
        self.V = np.zeros((n, max_steps + 1), dtype=dtype, order='F')
        self.EV = np.zeros((n, max_steps + 1), dtype=dtype, order='F')
        self.VAV = np.zeros((max_steps + 1, max_steps + 1), dtype=dtype)
        self.R = np.zeros((max_steps, max_steps + 1), dtype=dtype)
        self.p = 0
        self.q = 0
        self.columns = 1          # column 0 of R is zero: basis column [0; v0]
        self.steps_taken = 0
        self.bottom_closed = False
        self.closed_at = 0        # first column with a zero bottom part
        self.exhausted = False
        self.deflations = 0

        beta0 = float(np.linalg.norm(self.b))
        self._append_v(self.b / beta0)

    # -- cache maintenance -------------------------------------------------

    def _append_v(self, v: np.ndarray) -> None:
        q = self.q
        self.V[:, q] = v
        self.EV[:, q] = spmv(self.E, v)
        self.q = q + 1
        # Orthogonalize A v now so V*AV is complete at every snapshot
        self._next_bottom = gram_schmidt_step(self.V[:, :self.q], spmv(self.A, v),
                                              reorth=self.options.reorth,
                                              breakdown_tol=self.options.breakdown_tol)
        self.VAV[:self.q, q] = self._next_bottom.coeffs

    def _append_u(self, u: np.ndarray) -> None:
        self.U[:, self.p] = u
        self.AU[:, self.p] = spmv(self.A, u)
        self.p += 1

    def _orthogonalize_top(self, u_tilde: np.ndarray):
        return gram_schmidt_step(self.U[:, :self.p], u_tilde, reorth=self.options.reorth,
                                 breakdown_tol=self.options.breakdown_tol)

    # -- recurrence --------------------------------------------------------

    def step(self) -> bool:
        """
        Advance by one Krylov dimension.

        Returns:
            False when the builder is (or becomes) exhausted
        """
        if self.exhausted or self.steps_taken >= self.max_steps:
            return False
        self.steps_taken += 1
        if self.bottom_closed:
            self._closed_step()
        else:
            self._open_step()
        return not self.exhausted

    def _open_step(self) -> None:
        p, q, c = self.p, self.q, self.columns
        r = self.R[:p, c - 1]
        bottom = self._next_bottom
        h = bottom.coeffs

        u_tilde = self.AU[:, :p] @ r + self.EV[:, q - 1]
        top = self._orthogonalize_top(u_tilde)
        g, alpha = top.coeffs, top.residual_norm
        coupling = g - self.R[:p, :c] @ h

        if bottom.breakdown:
            self._close_bottom(coupling, top, u_tilde, h)
            return

        beta = bottom.residual_norm
        if top.breakdown:
            self.deflations += 1
            logger.debug(f"separate orthonormalization: alpha-breakdown at step {self.steps_taken}, deflating")
            self.R[:p, c] = coupling / beta
        else:
            if self.options.r_update_divisor == "alpha":
                self.R[:p, c] = -(self.R[:p, :c] @ h) / beta + g / alpha
            else:
                self.R[:p, c] = coupling / beta
            self.R[p, c] = alpha / beta
            self._append_u(top.q_new)

        self.VAV[q, q - 1] = beta
        self.columns = c + 1
        self._append_v(bottom.q_new)

    def _close_bottom(self, coupling: np.ndarray, top, u_tilde: np.ndarray,
                      h: np.ndarray) -> None:
        """beta-breakdown: the new basis column has no bottom part."""
        p, c = self.p, self.columns
        self.bottom_closed = True
        self.closed_at = c
        logger.debug(f"separate orthonormalization: beta-breakdown at step {self.steps_taken}, "
                     f"bottom space closed at dimension {self.q}")

        x = coupling if top.breakdown else np.concatenate([coupling, [top.residual_norm]])
        scale = float(np.hypot(np.linalg.norm(u_tilde), np.linalg.norm(h)))
        x_norm = float(np.linalg.norm(x))
        if x_norm <= self.options.breakdown_tol * scale:
            self.exhausted = True
            self.steps_taken -= 1
            logger.debug("separate orthonormalization: embedding Krylov space invariant")
            return

        self.R[:x.shape[0], c] = x / x_norm
        if not top.breakdown:
            self._append_u(top.q_new)
        else:
            self.deflations += 1
        self.columns = c + 1

    def _closed_step(self) -> None:
        """Top-only continuation: the last column is [U r; 0] and 𝒜 maps it to [A U r; 0]."""
        p, c = self.p, self.columns
        r = self.R[:p, c - 1]
        top = self._orthogonalize_top(self.AU[:, :p] @ r)
        x = top.coeffs if top.breakdown else np.concatenate([top.coeffs, [top.residual_norm]])

        # Remove the part already spanned by earlier columns without bottom part
        previous = self.R[:x.shape[0], self.closed_at:c]
        reduced = gram_schmidt_step(previous, x, reorth=self.options.reorth,
                                    breakdown_tol=self.options.breakdown_tol)
        if reduced.breakdown:
            self.exhausted = True
            self.steps_taken -= 1
            logger.debug("separate orthonormalization: embedding Krylov space invariant")
            return

        self.R[:x.shape[0], c] = reduced.q_new
        if not top.breakdown:
            self._append_u(top.q_new)
        else:
            self.deflations += 1
        self.columns = c + 1

    # -- snapshots ---------------------------------------------------------

    def basis(self) -> StructuredKrylovBasis:
        """Current basis as views into the builder's workspace."""
        p, q, c = self.p, self.q, self.columns
        return StructuredKrylovBasis(
            U=self.U[:, :p], V=self.V[:, :q], R=self.R[:p, :c],
            AU=self.AU[:, :p], EV=self.EV[:, :q], VAV=self.VAV[:q, :q], b=self.b,
            bottom_closed=self.bottom_closed, exhausted=self.exhausted,
            deflations=self.deflations,
        )


def separate_orthonormalization(A: MatrixLike, E: MatrixLike, b: np.ndarray, k: int,
                                options: Optional[ArnoldiOptions] = None) -> StructuredKrylovBasis:
    """Run k steps of the separate orthonormalization recurrence (fewer if exhausted)."""
    builder = SeparateOrthonormalization(A, E, b, k, options)
    while builder.step():
        pass
    return builder.basis()


def assemble_compressed(basis: StructuredKrylovBasis) -> CompressedBlockMatrix:
    """Compressed matrix from the cached products only."""
    Ustar = basis.U.conj().T
    return CompressedBlockMatrix(Ustar @ basis.AU, Ustar @ basis.EV, basis.VAV)


def structured_span_basis(basis: StructuredKrylovBasis) -> np.ndarray:
    """The explicit 2n x i matrix [U R; V S] with S = [I_q | 0]."""
    n, q, cols = basis.V.shape[0], basis.V.shape[1], basis.R.shape[1]
    S = np.zeros((q, cols), dtype=basis.V.dtype)
    width = min(q, cols)
    S[:width, :width] = np.eye(width)
    top = basis.U @ basis.R if basis.U.shape[1] else np.zeros((n, cols), dtype=basis.V.dtype)
    return np.vstack([top, basis.V @ S])


def frechet_approximation(basis: StructuredKrylovBasis,
                          f: FunctionSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(v1, v2) from a structured basis: f applied to the full compressed matrix."""
    return _project(basis.U, basis.V, basis.AU, basis.EV, basis.VAV, basis.b, f)


def modified_arnoldi(A: MatrixLike, E: MatrixLike, b: np.ndarray, f: FunctionSpec, k: int,
                     stop_tol: Optional[float] = None,
                     options: Optional[ArnoldiOptions] = None) -> FrechetResult:
    """
    Modified Arnoldi with separate orthonormalization.

    Every `check_every` steps (and at the last step) the compressed matrix is
    assembled and v1, v2 are formed; the run stops early when the relative
    update of v1 since the previous check drops to `stop_tol` (a zero
    tolerance disables early stopping).

    Args:
        A, E: Square operators of equal size (E may be a lazy LinearOperator)
        b: Nonzero vector
        f: Scalar function
        k: Maximum number of steps
        stop_tol: Overrides options.stop_tol
        options: Solver tunables
    """
    options = options or ArnoldiOptions()
    tol = options.stop_tol if stop_tol is None else stop_tol
    builder = SeparateOrthonormalization(A, E, b, k, options)

    history: History = []
    iterates: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
    previous: Optional[np.ndarray] = None
    converged = False
    v1 = v2 = np.zeros(0)

    for i in range(1, k + 1):
        builder.step()
        at_check = i % options.check_every == 0 or i == k or builder.exhausted
        if not at_check:
            continue

        v1, v2 = frechet_approximation(builder.basis(), f)
        update = _update_norm(v1, previous)
        history.append((i, update))
        if options.keep_iterates:
            iterates[i] = (v1, v2)
        logger.debug(f"modified_arnoldi: step {i}, dim U={builder.p}, dim V={builder.q}, update {update:.3e}")

        if previous is not None and tol > 0 and update <= tol:
            converged = True
            break
        if builder.exhausted:
            converged = True
            break
        previous = v1

    return FrechetResult(
        v1=v1, v2=v2, history=history, iterations=builder.steps_taken,
        breakdown=builder.bottom_closed or builder.deflations > 0 or builder.exhausted,
        converged=converged, iterates=iterates, basis=builder.basis(),
    )


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def exactness_check(A: MatrixLike, E: MatrixLike, b: np.ndarray, p_coeffs, k: int,
                    options: Optional[ArnoldiOptions] = None) -> float:
    """Relative error of modified Arnoldi for a polynomial against the monomial-sum formula."""
    f = FunctionSpec.polynomial(p_coeffs)
    result = modified_arnoldi(A, E, b, f, k, options=options)
    exact = polynomial_frechet_action(A, E, validate_vector(b), p_coeffs)
    scale = float(np.linalg.norm(exact))
    error = float(np.linalg.norm(result.v1 - exact))
    return error / scale if scale > 0 else error


def verify_theorem_bound(A: MatrixLike, E: MatrixLike, b: np.ndarray, f: FunctionSpec, k: int,
                         variant: str = "separate",
                         options: Optional[ArnoldiOptions] = None) -> BoundCheck:
    """
    Both sides of the a-priori bound for Hermitian A:

        ||L_f(A,E)b - v1|| <= 2 ||b|| ||E||_F  min_{q in P_{k-2}} max_{[lmin, lmax]} |f' - q|

    The right-hand side uses the Chebyshev interpolant of degree k-2.

    Args:
        variant: 'separate' (modified_arnoldi) or 'basic' (modified_arnoldi_basic)
    """
    if k < 2:
        raise validation_error(f"the bound needs k >= 2, got {k}")
    if variant not in ("separate", "basic"):
        raise validation_error(f"unknown variant '{variant}'")
    from .frechet import FrechetProblem, oracle_daleckii_krein

    dense_A = to_dense(A)
    if not np.allclose(dense_A, dense_A.conj().T, rtol=0, atol=1e-13 * max(1.0, np.abs(dense_A).max())):
        raise validation_error("the bound check requires Hermitian A")

    oracle = oracle_daleckii_krein(FrechetProblem(A, E, b, f))
    eigenvalues = np.real(oracle.eigenvalues)
    interval = SpectralInterval(float(eigenvalues.min()), float(eigenvalues.max()))

    if variant == "basic":
        result = modified_arnoldi_basic(A, E, b, f, k, options)
    else:
        result = modified_arnoldi(A, E, b, f, k, options=options)

    lhs = float(np.linalg.norm(oracle.Lb - result.v1))
    estimate = chebyshev_uniform_error(f.derivative, interval, k - 2)
    rhs = 2.0 * float(np.linalg.norm(b)) * frobenius_norm(E) * estimate.error
    logger.debug(f"bound check k={k}: lhs={lhs:.3e}, rhs={rhs:.3e}")
    return BoundCheck(lhs, rhs, interval)
