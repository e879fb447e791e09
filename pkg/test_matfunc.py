#!/usr/bin/env python3
"""
fkrylov - Dense Matrix Function Tests
"""

import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

# Add repository root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.core.linalg import make_rng, random_dense, random_sparse, random_vector
from src.core.matfunc import (
    FunctionKind, FunctionSpec, SpectralInterval, chebyshev_uniform_error, divided_difference,
    divided_difference_matrix, expm, matfun, polym, polynomial_frechet_action, sqrtm,
)
from src.utils.error_handling import BranchError, ValidationError


@pytest.fixture
def rng():
    return make_rng(3)


def test_expm_diagonal():
    assert np.allclose(expm(np.diag([1.0, 2.0])), np.diag([np.e, np.e ** 2]), rtol=1e-14, atol=0)


def test_expm_matches_scipy_with_squaring(rng):
    H = 3.0 * random_dense(10, rng)
    reference = scipy.linalg.expm(H)
    assert np.linalg.norm(expm(H) - reference) <= 1e-10 * np.linalg.norm(reference)


def test_expm_group_property(rng):
    H = random_dense(10, rng)
    H *= 10.0 / np.linalg.norm(H, 1)
    product = expm(H) @ expm(-H)
    assert np.linalg.norm(product - np.eye(10), 'fro') <= 1e-12 * np.linalg.norm(expm(H), 'fro') \
        * np.linalg.norm(expm(-H), 'fro')


def test_expm_empty_matrix():
    assert expm(np.zeros((0, 0))).shape == (0, 0)


def test_sqrtm_residual_spd(rng):
    B = random_dense(12, rng)
    H = B @ B.T + np.eye(12)
    X = sqrtm(H)
    assert np.linalg.norm(X @ X - H, 'fro') <= 1e-10 * np.linalg.norm(H, 'fro')
    assert np.allclose(X, scipy.linalg.sqrtm(H).real, rtol=1e-9, atol=1e-9)


def test_sqrtm_residual_upper_triangular(rng):
    H = np.triu(random_dense(8, rng), 1) + np.diag(np.arange(1.0, 9.0))
    X = sqrtm(H)
    assert np.linalg.norm(X @ X - H, 'fro') <= 1e-10 * np.linalg.norm(H, 'fro')


def test_sqrtm_complex_input(rng):
    H = np.diag([1.0 + 1.0j, 4.0, 9.0 - 2.0j]) + np.triu(random_dense(3, rng), 1)
    X = sqrtm(H)
    assert np.linalg.norm(X @ X - H, 'fro') <= 1e-10 * np.linalg.norm(H, 'fro')


def test_sqrtm_negative_eigenvalue_raises():
    """A real matrix with a negative eigenvalue has no real principal square root"""
    with pytest.raises(BranchError):
        sqrtm(np.diag([-1.0, 2.0]))


def test_sqrtm_zero_matrix():
    assert not np.any(sqrtm(np.zeros((3, 3))))


def test_polym_horner(rng):
    H = random_dense(6, rng)
    expected = np.eye(6) + 2 * H + 3 * H @ H
    assert np.allclose(polym(H, [1.0, 2.0, 3.0]), expected, atol=1e-12)
    with pytest.raises(ValidationError):
        polym(H, [])


def test_matfun_block_triangular_structure(rng):
    """f of a block upper triangular matrix keeps the structure and the diagonal blocks"""
    A11, A22 = random_dense(4, rng) / 2, random_dense(3, rng) / 2
    M = np.block([[A11, random_dense(4, rng)[:, :3]], [np.zeros((3, 4)), A22]])
    F = matfun(M, FunctionSpec.exp())
    assert np.max(np.abs(F[4:, :4])) <= 1e-12
    assert np.allclose(F[:4, :4], expm(A11), atol=1e-12)
    assert np.allclose(F[4:, 4:], expm(A22), atol=1e-12)


def test_matfun_time_scale(rng):
    H = random_dense(5, rng) / 3
    assert np.allclose(matfun(H, FunctionSpec.exp(2.0)), scipy.linalg.expm(2.0 * H), atol=1e-12)


@pytest.mark.parametrize("text, kind, extra", [
    ("exp", FunctionKind.EXP, 1.0),
    ("exp:0.5", FunctionKind.EXP, 0.5),
    ("SQRT", FunctionKind.SQRT, None),
    ("poly:0,0,1", FunctionKind.POLYNOMIAL, (0.0, 0.0, 1.0)),
])
def test_function_spec_parse(text, kind, extra):
    spec = FunctionSpec.parse(text)
    assert spec.kind == kind
    if kind == FunctionKind.EXP:
        assert spec.time_scale == extra
    if kind == FunctionKind.POLYNOMIAL:
        assert spec.coefficients == extra
        assert spec.degree == 2


@pytest.mark.parametrize("text", ["cos", "sqrt:2", "poly:", "poly:1,a", "exp:x"])
def test_function_spec_parse_rejects(text):
    with pytest.raises(ValidationError):
        FunctionSpec.parse(text)


def test_function_spec_derivatives():
    z = np.array([1.0, 4.0])
    assert np.allclose(FunctionSpec.sqrt().derivative(z), [0.5, 0.25])
    assert np.allclose(FunctionSpec.exp(2.0).derivative(z), 2 * np.exp(2 * z))
    assert np.allclose(FunctionSpec.polynomial([1.0, 2.0, 3.0]).derivative(z), 2 + 6 * z)
    assert not np.any(FunctionSpec.polynomial([5.0]).derivative(z))
    assert FunctionSpec.sqrt().degree == -1


def test_function_spec_describe_roundtrip():
    for text in ("exp", "exp:0.25", "sqrt", "poly:1,0,-2"):
        assert FunctionSpec.parse(FunctionSpec.parse(text).describe()) == FunctionSpec.parse(text)


def test_divided_difference_distinct_and_confluent():
    f = FunctionSpec.exp()
    assert divided_difference(f, 2.0, 1.0) == pytest.approx(np.e ** 2 - np.e, rel=1e-14)
    assert divided_difference(f, 1.0, 1.0) == pytest.approx(np.e, rel=1e-14)
    assert divided_difference(f, 1.0, 1.0 + 1e-9) == pytest.approx(np.e, rel=1e-8)
    assert divided_difference(f, 3.0, -1.0) == divided_difference(f, -1.0, 3.0)


def test_divided_difference_matrix(rng):
    f = FunctionSpec.sqrt()
    lam = np.array([1.0, 2.0, 2.0, 9.0])
    D = divided_difference_matrix(f, lam)
    assert np.array_equal(D, D.T)
    assert np.allclose(np.diag(D), 0.5 / np.sqrt(lam))
    assert D[0, 3] == pytest.approx((3.0 - 1.0) / 8.0)
    assert D[1, 2] == pytest.approx(0.5 / np.sqrt(2.0))


def test_chebyshev_error_polynomial_is_exact():
    """f' of degree 2 is reproduced by a degree-2 interpolant"""
    f = FunctionSpec.polynomial([0.0, 0.0, 0.0, 1.0])
    estimate = chebyshev_uniform_error(f.derivative, SpectralInterval(-1.0, 2.0), 2)
    assert estimate.error <= 1e-12
    assert estimate.lebesgue_factor >= 1.0


def test_chebyshev_error_decreases_for_sqrt():
    f = FunctionSpec.sqrt()
    interval = SpectralInterval(1.0, 100.0)
    errors = [chebyshev_uniform_error(f.derivative, interval, d).error for d in (5, 10, 20, 40)]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))


def test_spectral_interval_validation():
    with pytest.raises(ValidationError):
        SpectralInterval(2.0, 1.0)
    with pytest.raises(ValidationError):
        chebyshev_uniform_error(np.sqrt, SpectralInterval(1.0, 2.0), -1)


def test_polynomial_frechet_action_square(rng):
    """L_{z^2}(A, E) = AE + EA"""
    A = random_sparse(20, 0.2, rng)
    E = random_sparse(20, 0.2, rng)
    b = random_vector(20, rng)
    expected = (A @ (E @ b)) + (E @ (A @ b))
    assert np.allclose(polynomial_frechet_action(A, E, b, [0.0, 0.0, 1.0]), expected, atol=1e-12)
    assert not np.any(polynomial_frechet_action(A, E, b, [4.0]))
