"""
fkrylov - Self-Check Suite

Seeded synthetic checks of the identities and structural properties the
solvers rely on. Each check reports a measured value against a threshold.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ..core.frechet import adjoint_identity_residual, rank_one_reduction
from ..core.krylov import (
    ArnoldiOptions, arnoldi, arnoldi_fAb, exactness_check, modified_arnoldi,
    separate_orthonormalization, structured_span_basis, verify_theorem_bound,
)
from ..core.linalg import (
    block_embedding_operator, make_rng, random_dense, random_sparse, random_vector,
)
from ..core.matfunc import FunctionSpec

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10
EXACTNESS_TOL = 1e-10
SPAN_ANGLE_TOL = 1e-8
BOTTOM_TRACK_TOL = 1e-12
ORTHONORMALITY_TOL = 1e-10
BOUND_STEPS = (10, 20, 40)


@dataclass
class CheckOutcome:
    """Result of one property check."""
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def describe(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: {self.measured:.3e} (threshold {self.threshold:.1e})"
        return f"{text} {self.detail}".rstrip()


def _complex_instance(n: int, rng: np.random.Generator):
    A = random_dense(n, rng, complex_valued=True) / np.sqrt(2 * n)
    E = random_dense(n, rng, complex_valued=True) / np.sqrt(2 * n)
    return A, E


def check_adjoint_identities(rng: np.random.Generator, instances: int = 10,
                             n: int = 10) -> List[CheckOutcome]:
    """Trace-pairing identity and its rank-one form on random complex instances."""
    f = FunctionSpec.exp()
    adjoint_worst = 0.0
    rank_one_worst = 0.0
    for _ in range(instances):
        A, E = _complex_instance(n, rng)
        b, c, x, y = (random_vector(n, rng, complex_valued=True) for _ in range(4))
        adjoint_worst = max(adjoint_worst, adjoint_identity_residual(A, E, b, c, f))
        lhs, rhs = rank_one_reduction(A, x, y, b, c, f)
        rank_one_worst = max(rank_one_worst, abs(lhs - rhs) / max(abs(lhs), np.finfo(float).tiny))
    return [
        CheckOutcome("adjoint identity", adjoint_worst <= IDENTITY_TOL, adjoint_worst, IDENTITY_TOL,
                     f"({instances} complex {n}x{n} instances)"),
        CheckOutcome("rank-one reduction", rank_one_worst <= IDENTITY_TOL, rank_one_worst,
                     IDENTITY_TOL, f"({instances} complex {n}x{n} instances)"),
    ]


def check_theorem_bound(rng: np.random.Generator,
                        options: Optional[ArnoldiOptions] = None) -> List[CheckOutcome]:
    """A priori bound for A = diag(1..100), f = sqrt: lhs <= rhs and rhs decreasing in k."""
    n = 100
    A = sp.diags(np.arange(1.0, n + 1)).tocsr()
    E = random_dense(n, rng)
    b = random_vector(n, rng)
    checks = [verify_theorem_bound(A, E, b, FunctionSpec.sqrt(), k, options=options)
              for k in BOUND_STEPS]
    ratio = max(check.lhs / check.rhs if check.rhs > 0 else np.inf for check in checks)
    decreasing = all(later.rhs < earlier.rhs for earlier, later in zip(checks, checks[1:]))
    detail = ", ".join(f"k={k}: {c.lhs:.2e} <= {c.rhs:.2e}" for k, c in zip(BOUND_STEPS, checks))
    if not decreasing:
        detail += " (bound not decreasing)"
    return [CheckOutcome("convergence bound", ratio <= 1.0 and decreasing, ratio, 1.0, f"({detail})")]


def check_polynomial_exactness(rng: np.random.Generator, instances: int = 20, n: int = 30,
                               options: Optional[ArnoldiOptions] = None) -> List[CheckOutcome]:
    """Polynomials of degree below k are reproduced exactly."""
    worst = 0.0
    for _ in range(instances):
        A = random_sparse(n, 0.15, rng)
        E = random_sparse(n, 0.15, rng)
        b = random_vector(n, rng)
        k = int(rng.integers(1, 7))
        degree = int(rng.integers(0, k))
        coeffs = rng.standard_normal(degree + 1)
        worst = max(worst, exactness_check(A, E, b, list(coeffs), k, options))
    return [CheckOutcome("polynomial exactness", worst <= EXACTNESS_TOL, worst, EXACTNESS_TOL,
                         f"({instances} instances, n={n})")]


def _sparse_instance(n: int, density: float, rng: np.random.Generator):
    A = random_sparse(n, density, rng)
    E = random_sparse(n, density, rng)
    return A, E, random_vector(n, rng)


def check_span_property(rng: np.random.Generator, n: int = 40, k: int = 8,
                        options: Optional[ArnoldiOptions] = None) -> List[CheckOutcome]:
    """[U R; V S] spans the Krylov space of the embedding."""
    A, E, b = _sparse_instance(n, 0.2, rng)
    basis = separate_orthonormalization(A, E, b, k, options)
    structured = structured_span_basis(basis)
    reference = arnoldi(block_embedding_operator(A, E), np.concatenate([np.zeros(n), b]), k).Q
    if structured.shape[1] != reference.shape[1]:
        return [CheckOutcome("span property", False, np.inf, SPAN_ANGLE_TOL,
                             f"(dimension {structured.shape[1]} vs {reference.shape[1]})")]
    angle = float(np.max(scipy.linalg.subspace_angles(structured, reference)))
    return [CheckOutcome("span property", angle <= SPAN_ANGLE_TOL, angle, SPAN_ANGLE_TOL,
                         f"(n={n}, k={k})")]


def check_bottom_track(rng: np.random.Generator, n: int = 60, k: int = 10,
                       options: Optional[ArnoldiOptions] = None) -> List[CheckOutcome]:
    """v2 of modified Arnoldi equals the standard Arnoldi approximation of f(A)b."""
    A, E, b = _sparse_instance(n, 0.1, rng)
    f = FunctionSpec.exp()
    v2 = modified_arnoldi(A, E, b, f, k, options=options).v2
    y, _ = arnoldi_fAb(A, b, f, k + 1, record_history=False)
    error = float(np.linalg.norm(v2 - y) / np.linalg.norm(y))
    return [CheckOutcome("bottom track", error <= BOTTOM_TRACK_TOL, error, BOTTOM_TRACK_TOL,
                         f"(n={n}, k={k})")]


def check_orthonormality(rng: np.random.Generator, n: int = 200, k: int = 50,
                         options: Optional[ArnoldiOptions] = None) -> List[CheckOutcome]:
    """U and V orthonormal, R strictly upper triangular."""
    A, E, b = _sparse_instance(n, 0.05, rng)
    basis = separate_orthonormalization(A, E, b, k, options)
    error_u = float(np.max(np.abs(basis.U.conj().T @ basis.U - np.eye(basis.U.shape[1]))))
    error_v = float(np.max(np.abs(basis.V.conj().T @ basis.V - np.eye(basis.V.shape[1]))))
    worst = max(error_u, error_v)
    triangular = not np.any(np.tril(basis.R))
    detail = f"(U: {error_u:.1e}, V: {error_v:.1e}, R strictly upper: {triangular})"
    return [CheckOutcome("orthonormality", worst <= ORTHONORMALITY_TOL and triangular, worst,
                         ORTHONORMALITY_TOL, detail)]


def run_check_suite(seed: int, inject_r_update_bug: bool = False,
                    progress: Optional[Callable[[str], None]] = None) -> List[CheckOutcome]:
    """
    Run every check with generators derived from `seed`.

    Args:
        inject_r_update_bug: Use the g/alpha coupling update, which must make
            the span property fail
        progress: Called with each check's name before it runs
    """
    options = ArnoldiOptions(r_update_divisor="alpha" if inject_r_update_bug else "beta")
    suites = [
        ("adjoint identities", lambda rng: check_adjoint_identities(rng)),
        ("convergence bound", lambda rng: check_theorem_bound(rng, options)),
        ("polynomial exactness", lambda rng: check_polynomial_exactness(rng, options=options)),
        ("span property", lambda rng: check_span_property(rng, options=options)),
        ("bottom track", lambda rng: check_bottom_track(rng, options=options)),
        ("orthonormality", lambda rng: check_orthonormality(rng, options=options)),
    ]
    outcomes: List[CheckOutcome] = []
    for index, (name, suite) in enumerate(suites):
        if progress:
            progress(name)
        outcomes.extend(suite(make_rng(seed + index)))
    for outcome in outcomes:
        logger.debug(outcome.describe())
    return outcomes
