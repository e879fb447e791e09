#!/usr/bin/env python3
"""
fkrylov - Baseline, Oracle and Identity Tests
"""

import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

# Add repository root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.core.frechet import (
    DENSE_EMBEDDING_MAX_N, FrechetProblem, OracleMethod, adjoint_identity_residual,
    adjoint_statement_residual, cs_arnoldi, cs_arnoldi_iterates, default_fd_eps, dense_frechet,
    fd_arnoldi, fd_arnoldi_iterates, is_hermitian, oracle_daleckii_krein, oracle_dense_embedding,
    rank_one_reduction, reference_oracle, shifted_operator,
)
from src.core.krylov import modified_arnoldi
from src.core.linalg import make_rng, random_dense, random_sparse, random_vector
from src.core.matfunc import FunctionSpec
from src.services.resource_service import MemoryGuard
from src.utils.error_handling import ResourceError, ValidationError


def rel(x, y):
    return np.linalg.norm(x - y) / np.linalg.norm(y)


@pytest.fixture
def rng():
    return make_rng(5)


@pytest.fixture
def diagonal_problem(rng):
    """A = diag(1..60) with a dense direction; 60 Arnoldi steps are exhaustive."""
    n = 60
    A = sp.diags(np.arange(1.0, n + 1)).tocsr()
    return FrechetProblem(A, random_dense(n, rng), random_vector(n, rng), FunctionSpec.sqrt())


# ---------------------------------------------------------------------------
# Problem and step sizes
# ---------------------------------------------------------------------------

def test_problem_validation(rng):
    with pytest.raises(ValidationError):
        FrechetProblem(np.eye(3), np.eye(4), np.ones(3), FunctionSpec.exp())
    with pytest.raises(ValidationError):
        FrechetProblem(np.eye(3), np.eye(3), np.ones(2), FunctionSpec.exp())
    problem = FrechetProblem(np.eye(3), np.eye(3) * 1j, np.ones(3), FunctionSpec.exp())
    assert not problem.is_real
    assert problem.n == 3


def test_default_fd_eps_clamped():
    A = np.eye(4)
    assert default_fd_eps(A, np.eye(4)) == pytest.approx(1e-5)
    assert default_fd_eps(1e8 * A, np.eye(4)) == 1e-2
    assert default_fd_eps(A, 1e8 * np.eye(4)) == 1e-10
    assert default_fd_eps(A, np.zeros((4, 4))) == pytest.approx(1e-5)


def test_shifted_operator_forms(rng):
    A = random_sparse(10, 0.3, rng)
    pattern = A.copy()
    pattern.data = np.ones_like(pattern.data)
    assert sp.issparse(shifted_operator(A, pattern, 0.5))
    assert isinstance(shifted_operator(A, random_dense(10, rng), 0.5), LinearOperator)
    dense = random_dense(10, rng)
    assert np.allclose(shifted_operator(dense, dense, 1.0), 2 * dense)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def test_cs_of_linear_polynomial_is_exact(rng):
    """f(z) = z: the complex step returns E b without cancellation"""
    A = random_sparse(30, 0.2, rng)
    E = random_sparse(30, 0.2, rng)
    b = random_vector(30, rng)
    problem = FrechetProblem(A, E, b, FunctionSpec.polynomial([0.0, 1.0]))
    assert rel(cs_arnoldi(problem, k=3), E @ b) <= 1e-10


def test_cs_rejects_complex_data(rng):
    problem = FrechetProblem(np.eye(4) * (1 + 1j), np.eye(4), np.ones(4), FunctionSpec.exp())
    with pytest.raises(ValidationError):
        cs_arnoldi(problem)
    with pytest.raises(ValidationError):
        cs_arnoldi_iterates(problem, 1e-20, 3)


def test_fd_rejects_nonpositive_step(diagonal_problem):
    with pytest.raises(ValidationError):
        fd_arnoldi(diagonal_problem, eps=0.0)


def test_baseline_error_floors(diagonal_problem):
    """Complex step reaches a far lower floor than finite differences"""
    reference = oracle_daleckii_krein(diagonal_problem).Lb
    fd = fd_arnoldi(diagonal_problem, eps=1e-8, k=60)
    cs = cs_arnoldi(diagonal_problem, eps=1e-20, k=60)
    fd_error, cs_error = rel(fd, reference), rel(cs, reference)
    assert fd_error < 1e-4
    assert cs_error * 100 <= fd_error


def test_baseline_iterates_match_single_runs(diagonal_problem):
    fd_all = fd_arnoldi_iterates(diagonal_problem, 1e-6, 12)
    cs_all = cs_arnoldi_iterates(diagonal_problem, 1e-20, 12)
    assert len(fd_all) == len(cs_all) == 12
    assert rel(fd_all[-1], fd_arnoldi(diagonal_problem, eps=1e-6, k=12)) <= 1e-12
    assert rel(cs_all[-1], cs_arnoldi(diagonal_problem, eps=1e-20, k=12)) <= 1e-12


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def test_oracles_agree_on_hermitian(rng):
    B = random_dense(10, rng)
    A = (B + B.T) / 4
    problem = FrechetProblem(A, random_dense(10, rng), random_vector(10, rng), FunctionSpec.exp())
    dk = oracle_daleckii_krein(problem)
    dense = oracle_dense_embedding(problem)
    assert dk.method == OracleMethod.DALECKII_KREIN
    assert rel(dk.Lb, dense.Lb) <= 1e-9
    assert rel(dk.fAb, dense.fAb) <= 1e-9
    assert not np.iscomplexobj(dk.Lb)


def test_oracles_agree_on_diagonalizable(rng):
    n = 20
    A = random_dense(n, rng) / np.sqrt(n)
    problem = FrechetProblem(A, random_dense(n, rng), random_vector(n, rng), FunctionSpec.exp())
    dk = oracle_daleckii_krein(problem)
    assert not dk.ill_conditioned
    assert dk.eigvec_condition > 1.0
    assert rel(dk.Lb, oracle_dense_embedding(problem).Lb) <= 1e-9


def test_oracle_linear_in_direction(rng):
    n = 12
    A = random_dense(n, rng) / np.sqrt(n)
    E1, E2 = random_dense(n, rng), random_dense(n, rng)
    b = random_vector(n, rng)
    f = FunctionSpec.exp()
    L1, _ = dense_frechet(A, E1, f)
    L2, _ = dense_frechet(A, E2, f)
    L12, _ = dense_frechet(A, 2.5 * E1 + E2, f)
    assert rel(L12 @ b, 2.5 * (L1 @ b) + L2 @ b) <= 1e-11


def test_dense_embedding_size_guards():
    n = DENSE_EMBEDDING_MAX_N + 1
    A = sp.diags([np.ones(n), np.ones(n - 1)], [0, 1]).tocsr()
    problem = FrechetProblem(A, A, np.ones(n), FunctionSpec.exp())
    with pytest.raises(ValidationError):
        reference_oracle(problem)
    with pytest.raises(ResourceError):
        dense_frechet(np.eye(50), np.eye(50), FunctionSpec.exp(), guard=MemoryGuard(available_bytes=1000))


def test_reference_oracle_selection(rng):
    f = FunctionSpec.exp()
    hermitian = FrechetProblem(sp.diags(np.arange(1.0, 6.0)).tocsr(), np.eye(5), np.ones(5), f)
    assert reference_oracle(hermitian).method == OracleMethod.DALECKII_KREIN
    general = FrechetProblem(random_dense(5, rng), np.eye(5), np.ones(5), f)
    assert reference_oracle(general).method == OracleMethod.DENSE_EMBEDDING


def test_is_hermitian():
    assert is_hermitian(np.array([[1.0, 2.0 - 1j], [2.0 + 1j, 3.0]]))
    assert not is_hermitian(np.array([[1.0, 2.0], [0.0, 3.0]]))
    assert is_hermitian(sp.diags([1.0, 2.0]).tocsr())


@pytest.mark.parametrize("seed", [5, 42, 7])
def test_modified_arnoldi_matches_daleckii_krein(seed):
    """diag(1..100), f = sqrt, 60 steps"""
    rng = make_rng(seed)
    n = 100
    A = sp.diags(np.arange(1.0, n + 1)).tocsr()
    problem = FrechetProblem(A, random_dense(n, rng), random_vector(n, rng), FunctionSpec.sqrt())
    reference = oracle_daleckii_krein(problem)
    result = modified_arnoldi(problem.A, problem.E, problem.b, problem.f, 60)
    assert rel(result.v1, reference.Lb) <= 1e-8
    assert rel(result.v2, reference.fAb) <= 1e-8


# ---------------------------------------------------------------------------
# Adjoint identities
# ---------------------------------------------------------------------------

def test_adjoint_identity_complex(rng):
    f = FunctionSpec.exp()
    for _ in range(3):
        A = random_dense(8, rng, complex_valued=True) / 4
        E = random_dense(8, rng, complex_valued=True)
        b, c = random_vector(8, rng, True), random_vector(8, rng, True)
        assert adjoint_identity_residual(A, E, b, c, f) <= 1e-10


def test_adjoint_statement_form_needs_hermitian(rng):
    f = FunctionSpec.exp()
    B = random_dense(10, rng)
    symmetric = (B + B.T) / 4
    E = random_dense(10, rng)
    b, c = random_vector(10, rng), random_vector(10, rng)
    assert adjoint_statement_residual(symmetric, E, b, c, f) <= 1e-10

    general = random_dense(10, rng, complex_valued=True) / 2
    assert adjoint_statement_residual(general, E, b, c, f) > 1e-6
    assert adjoint_identity_residual(general, E, b, c, f) <= 1e-10


def test_rank_one_reduction(rng):
    A = random_dense(8, rng, complex_valued=True) / 4
    x, y, b, c = (random_vector(8, rng, complex_valued=True) for _ in range(4))
    lhs, rhs = rank_one_reduction(A, x, y, b, c, FunctionSpec.exp())
    assert abs(lhs - rhs) <= 1e-10 * abs(lhs)
