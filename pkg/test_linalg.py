#!/usr/bin/env python3
"""
fkrylov - Linear Algebra and File Format Tests
Gram-Schmidt, CSR handling, the embedding operator and the matrix readers
"""

import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

# Add repository root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.core.linalg import (
    as_csr, block_embedding_operator, check_square, frobenius_norm, gram_schmidt_step,
    make_rng, one_norm, orthonormalize_columns, random_dense, random_sparse, random_vector,
    spmv, to_dense, validate_vector,
)
from src.core.matrix_io import read_edge_list, read_matrix_market, write_matrix_market
from src.services.resource_service import MemoryGuard
from src.utils.error_handling import ParseError, ResourceError, ValidationError


@pytest.fixture
def rng():
    return make_rng(42)


def test_make_rng_reproducible():
    """Same seed, same draws"""
    assert np.array_equal(make_rng(7).standard_normal(5), make_rng(7).standard_normal(5))
    assert not np.array_equal(make_rng(7).standard_normal(5), make_rng(8).standard_normal(5))


def test_as_csr_canonical():
    """Duplicates are summed and column indices sorted"""
    coo = sp.coo_matrix((np.array([1.0, 2.0, 3.0]), (np.array([0, 0, 1]), np.array([2, 2, 0]))),
                        shape=(3, 3))
    M = as_csr(coo)
    assert M.has_canonical_format
    assert M[0, 2] == 3.0
    assert M.nnz == 2


def test_as_csr_rejects_operator():
    op = block_embedding_operator(np.eye(2), np.eye(2))
    with pytest.raises(ValidationError):
        as_csr(op)


def test_check_square_and_validate_vector():
    assert check_square(np.zeros((4, 4))) == 4
    with pytest.raises(ValidationError):
        check_square(np.zeros((3, 4)))
    with pytest.raises(ValidationError):
        validate_vector(np.array([1.0, np.nan]))
    with pytest.raises(ValidationError):
        validate_vector(np.ones(3), n=4)
    assert validate_vector(np.array([1, 2])).dtype == float


def test_spmv_dimension_mismatch():
    with pytest.raises(ValidationError):
        spmv(sp.identity(3, format='csr'), np.ones(4))


def test_adjoint_consistency_of_spmv(rng):
    """y*(A x) equals (A* y)* x"""
    A = random_sparse(60, 0.1, rng, complex_valued=True)
    x = random_vector(60, rng, complex_valued=True)
    y = random_vector(60, rng, complex_valued=True)
    lhs = np.vdot(y, spmv(A, x))
    rhs = np.vdot(spmv(A.conj().T, y), x)
    assert abs(lhs - rhs) <= 1e-13 * abs(lhs)


def test_gram_schmidt_step_orthogonal(rng):
    Q, _ = np.linalg.qr(random_dense(20, rng)[:, :5])
    w = random_vector(20, rng)
    step = gram_schmidt_step(Q, w)
    assert not step.breakdown
    assert np.max(np.abs(Q.T @ step.q_new)) <= 1e-14
    assert np.linalg.norm(step.q_new) == pytest.approx(1.0)
    assert np.allclose(Q @ step.coeffs + step.residual_norm * step.q_new, w, atol=1e-13)


def test_gram_schmidt_step_breakdown(rng):
    Q, _ = np.linalg.qr(random_dense(10, rng)[:, :3])
    w = Q @ np.array([1.0, -2.0, 0.5])
    step = gram_schmidt_step(Q, w)
    assert step.breakdown
    assert not np.any(step.q_new)


def test_gram_schmidt_step_empty_basis():
    step = gram_schmidt_step(np.zeros((3, 0)), np.array([3.0, 0.0, 4.0]))
    assert step.coeffs.shape == (0,)
    assert step.residual_norm == pytest.approx(5.0)
    assert np.allclose(step.q_new, [0.6, 0.0, 0.8])


def test_accumulated_gram_schmidt_stays_orthonormal(rng):
    """200 reorthogonalized steps keep Q*Q within 1e-12 of the identity"""
    n, m = 400, 200
    Q = np.zeros((n, m))
    count = 0
    for _ in range(m):
        step = gram_schmidt_step(Q[:, :count], random_vector(n, rng))
        Q[:, count] = step.q_new
        count += 1
    assert np.max(np.abs(Q.T @ Q - np.eye(m))) <= 1e-12


def test_orthonormalize_columns_drops_dependent(rng):
    a, b = random_vector(8, rng), random_vector(8, rng)
    Q = orthonormalize_columns(np.column_stack([np.zeros(8), a, b, a + 2 * b]))
    assert Q.shape == (8, 2)
    assert np.allclose(Q.T @ Q, np.eye(2), atol=1e-14)


def test_block_embedding_operator_matches_dense(rng):
    A = random_sparse(15, 0.3, rng, complex_valued=True)
    E = random_dense(15, rng, complex_valued=True)
    op = block_embedding_operator(A, E)
    M = np.block([[A.toarray(), E], [np.zeros((15, 15)), A.toarray()]])
    x = random_vector(30, rng, complex_valued=True)
    assert np.allclose(op.matvec(x), M @ x, atol=1e-12)
    assert np.allclose(op.rmatvec(x), M.conj().T @ x, atol=1e-12)
    assert np.allclose(to_dense(op), M, atol=1e-12)


def test_block_embedding_operator_shape_mismatch():
    with pytest.raises(ValidationError):
        block_embedding_operator(np.eye(3), np.eye(4))


def test_norms_agree_for_sparse_and_dense(rng):
    A = random_sparse(30, 0.2, rng)
    assert one_norm(A) == pytest.approx(np.linalg.norm(A.toarray(), 1))
    assert frobenius_norm(A) == pytest.approx(np.linalg.norm(A.toarray(), 'fro'))
    assert one_norm(sp.csr_matrix((4, 4))) == 0.0


# ---------------------------------------------------------------------------
# Matrix Market and edge lists
# ---------------------------------------------------------------------------

def test_matrix_market_write_read(tmp_path, rng):
    A = random_sparse(12, 0.3, rng)
    path = tmp_path / "a.mtx"
    write_matrix_market(path, A)
    B = read_matrix_market(path)
    assert (abs(A - B) > 0).nnz == 0


def test_matrix_market_symmetric_expansion(tmp_path):
    path = tmp_path / "sym.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "% comment\n"
                    "3 3 2\n"
                    "2 1 5.0\n"
                    "3 3 1.5\n")
    A = read_matrix_market(path).toarray()
    assert A[1, 0] == 5.0 and A[0, 1] == 5.0
    assert A[2, 2] == 1.5


def test_matrix_market_pattern_and_zero_based(tmp_path):
    path = tmp_path / "pattern.mtx"
    path.write_text("%%MatrixMarket matrix coordinate pattern general\n2 2 2\n0 1\n1 0\n")
    A = read_matrix_market(path, base=0).toarray()
    assert np.array_equal(A, [[0.0, 1.0], [1.0, 0.0]])


@pytest.mark.parametrize("body, line", [
    ("2 2 1\n1 1\n", 3),             # missing value
    ("2 2 1\n3 1 1.0\n", 3),         # index out of range
    ("2 2 2\n1 1 1.0\n", 3),         # entry count mismatch
    ("2 2\n", 2),                    # malformed size line
])
def test_matrix_market_parse_errors(tmp_path, body, line):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n" + body)
    with pytest.raises(ParseError) as info:
        read_matrix_market(path)
    assert info.value.line_number == line


def test_matrix_market_missing_header(tmp_path):
    path = tmp_path / "nohdr.mtx"
    path.write_text("2 2 1\n1 1 1.0\n")
    with pytest.raises(ParseError):
        read_matrix_market(path)


def test_edge_list_undirected_and_duplicates(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# toy graph\n0 1\n1 2 0.7\n0 1\n")
    A = read_edge_list(path, 3, directed=False).toarray()
    assert np.array_equal(A, A.T)
    assert A[0, 1] == 1.0 and A[2, 1] == 1.0
    directed = read_edge_list(path, 3).toarray()
    assert directed[1, 0] == 0.0


def test_edge_list_bad_line(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("0 1\n1 x\n")
    with pytest.raises(ParseError) as info:
        read_edge_list(path, 3)
    assert info.value.line_number == 2


# ---------------------------------------------------------------------------
# Memory guard
# ---------------------------------------------------------------------------

def test_memory_guard_refuses_large_dense_work():
    guard = MemoryGuard(available_bytes=1_000_000)
    assert guard.require_dense(50).is_sufficient
    with pytest.raises(ResourceError):
        guard.require_dense(1000, complex_valued=True)
