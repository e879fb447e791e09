#!/usr/bin/env python3
"""
fkrylov - Application Tests
Centrality sensitivities and heat equation parameter fitting
"""

import sys
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp

# Add repository root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.core.centrality_sensitivity import (
    DATASET_INDICES, SensitivityMeasure, SensitivityQuery, dataset_query, direction_operator,
    full_rank_direction, ones_outer_operator, sensitivity_entry, sensitivity_full_rank,
    sensitivity_history,
)
from src.core.frechet import dense_frechet
from src.core.heat_fitting import (
    HeatFitConfig, LineSearchDivergence, assemble_laplacian_2d, heat_fit,
    heat_objective_and_gradient, initial_condition, reference_solution,
)
from src.core.linalg import make_rng
from src.core.matfunc import FunctionSpec
from src.utils.error_handling import ConfigurationError, ConvergenceError, ValidationError

TN = SensitivityMeasure.TOTAL_COMMUNICABILITY
SC = SensitivityMeasure.SUBGRAPH_CENTRALITY
EI = SensitivityMeasure.ESTRADA_INDEX


def random_digraph(n: int, density: float, seed: int) -> sp.csr_matrix:
    rng = make_rng(seed)
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    return sp.csr_matrix(mask.astype(float))


def path_graph(n: int) -> sp.csr_matrix:
    return sp.diags([np.ones(n - 1), np.ones(n - 1)], [-1, 1]).tocsr()


def unreduced(A: sp.csr_matrix, i: int, j: int) -> np.ndarray:
    """Dense L_exp(A, e_i e_j^T)."""
    n = A.shape[0]
    E = np.zeros((n, n))
    E[i, j] = 1.0
    L, _ = dense_frechet(A.toarray(), E, FunctionSpec.exp())
    return L


def assert_close(value: float, expected: float, rtol: float = 1e-9) -> None:
    assert abs(value - expected) <= rtol * max(abs(expected), 1e-12)


# ---------------------------------------------------------------------------
# Centrality sensitivity
# ---------------------------------------------------------------------------

def test_total_communicability_path_graph():
    A = path_graph(5)
    L = unreduced(A, 0, 4)
    value = sensitivity_entry(A, SensitivityQuery(TN, 0, 4), k=30)
    assert_close(value, np.ones(5) @ L @ np.ones(5))


def test_subgraph_centrality_two_nodes():
    A = path_graph(2)
    L = unreduced(A, 0, 1)
    value = sensitivity_entry(A, SensitivityQuery(SC, 0, 1, node=0), k=10)
    assert_close(value, L[0, 0])


def test_cycle_graph_total_communicability():
    n = 6
    A = sp.csr_matrix(np.roll(np.eye(n), 1, axis=1) + np.roll(np.eye(n), -1, axis=1))
    L = unreduced(A, 2, 5)
    value = sensitivity_entry(A, SensitivityQuery(TN, 2, 5), k=30)
    assert_close(value, np.ones(n) @ L @ np.ones(n))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_reductions_match_unreduced_definitions(seed):
    """Reduced single derivative actions agree with the dense definitions on directed graphs"""
    n = 12
    A = random_digraph(n, 0.3, seed)
    i, j, node = 3, 7, 5
    L = unreduced(A, i, j)
    ones = np.ones(n)

    assert_close(sensitivity_entry(A, SensitivityQuery(TN, i, j), k=40), ones @ L @ ones)
    assert_close(sensitivity_entry(A, SensitivityQuery(SC, i, j, node=node), k=40), L[node, node])
    assert_close(sensitivity_entry(A, SensitivityQuery(EI, i, j), k=40), np.trace(L))


def test_full_rank_direction_matches_dense():
    n = 12
    A = random_digraph(n, 0.3, 9)
    E = full_rank_direction(A)
    assert np.array_equal(E.toarray(), (A.toarray() != 0).astype(float))
    L, _ = dense_frechet(A.toarray(), E.toarray(), FunctionSpec.exp())
    expected = np.ones(n) @ L @ np.ones(n)
    assert_close(sensitivity_full_rank(A, 0, 1, k=40), expected)


def test_sensitivity_history_converges():
    A = random_digraph(15, 0.25, 4)
    query = SensitivityQuery(TN, 1, 2)
    rows, converged = sensitivity_history(A, query, k=40, stop_tol=1e-10)
    assert converged
    steps = [step for step, _, _ in rows]
    assert steps == sorted(steps) and steps[0] == 1
    assert_close(rows[-1][1], sensitivity_entry(A, query, k=40))


def test_stopping_is_consistent_in_k():
    A = random_digraph(15, 0.25, 6)
    query = SensitivityQuery(TN, 4, 9)
    first = sensitivity_entry(A, query, k=40, stop_tol=1e-10)
    second = sensitivity_entry(A, query, k=45, stop_tol=1e-10)
    assert first == second


def test_query_validation():
    with pytest.raises(ValidationError):
        SensitivityQuery(TN, 0, 5).validate(5)
    with pytest.raises(ValidationError):
        SensitivityQuery(SC, 0, 1).validate(5)
    with pytest.raises(ValidationError):
        SensitivityQuery(SC, 0, 1, node=7).validate(5)
    SensitivityQuery(EI, 0, 4).validate(5)


def test_dataset_queries():
    query = dataset_query("Air500")
    assert (query.i, query.j) == DATASET_INDICES["Air500"] == (256, 123)
    with pytest.raises(ValidationError):
        dataset_query("unknown-graph")


def test_direction_operators():
    x = np.arange(4.0)
    assert np.allclose(ones_outer_operator(4).matvec(x), np.full(4, 6.0))
    assert np.allclose(direction_operator(SensitivityQuery(SC, 0, 1, node=2), 4).matvec(x),
                       [0.0, 0.0, 2.0, 0.0])
    assert np.allclose(direction_operator(SensitivityQuery(EI, 0, 1), 4) @ x, x)


# ---------------------------------------------------------------------------
# Heat equation fitting
# ---------------------------------------------------------------------------

def test_laplacian_eigenvalues_closed_form():
    m = 3
    h = 2.0 / (m + 1)
    angles = np.cos(np.arange(1, m + 1) * np.pi / (m + 1))
    expected = np.sort([(2 / h ** 2) * (cp + cq - 2) for cp in angles for cq in angles])
    computed = np.linalg.eigvalsh(assemble_laplacian_2d(m).toarray())
    assert np.allclose(computed, expected, rtol=0, atol=1e-11)


def test_laplacian_structure():
    L = assemble_laplacian_2d(10)
    assert L.shape == (100, 100)
    assert (abs(L - L.T) > 0).nnz == 0
    with pytest.raises(ValidationError):
        assemble_laplacian_2d(2)


def test_initial_condition_is_eigenvector():
    m = 12
    h = 2.0 / (m + 1)
    u0 = initial_condition(m)
    lam = 4 * (np.cos(np.pi * h / 2) - 1) / h ** 2
    residual = assemble_laplacian_2d(m) @ u0 - lam * u0
    assert np.linalg.norm(residual) <= 1e-10 * np.linalg.norm(lam * u0)


def test_objective_vanishes_at_reference():
    config = HeatFitConfig(grid_points_per_dim=10)
    s_ref = reference_solution(config)
    f_val, grad = heat_objective_and_gradient(config, config.sigma_ref, s_ref)
    assert f_val <= 1e-24
    assert abs(grad) <= 1e-12


@pytest.mark.parametrize("sigma", [0.9, 1.0, 1.1])
def test_gradient_matches_finite_difference(sigma):
    config = HeatFitConfig(grid_points_per_dim=20)
    s_ref = reference_solution(config)
    _, grad = heat_objective_and_gradient(config, sigma, s_ref)
    delta = 1e-6
    f_plus, _ = heat_objective_and_gradient(config, sigma + delta, s_ref)
    f_minus, _ = heat_objective_and_gradient(config, sigma - delta, s_ref)
    assert grad == pytest.approx((f_plus - f_minus) / (2 * delta), rel=1e-5)
    assert (grad > 0) == (sigma > config.sigma_ref)


def test_general_initial_state_needs_larger_krylov_space():
    """A random u0 excites the whole spectrum; too few steps must not pass silently"""
    m = 20
    laplacian = assemble_laplacian_2d(m)
    u0 = make_rng(11).standard_normal(m * m)

    short = HeatFitConfig(grid_points_per_dim=m, krylov_k=40)
    with pytest.raises(ConvergenceError):
        heat_objective_and_gradient(short, 1.0, np.zeros(m * m), laplacian, u0)

    config = HeatFitConfig(grid_points_per_dim=m, krylov_k=150)
    s_ref = reference_solution(config, laplacian, u0)
    _, grad = heat_objective_and_gradient(config, 1.0, s_ref, laplacian, u0)
    delta = 1e-6
    f_plus, _ = heat_objective_and_gradient(config, 1.0 + delta, s_ref, laplacian, u0)
    f_minus, _ = heat_objective_and_gradient(config, 1.0 - delta, s_ref, laplacian, u0)
    assert grad == pytest.approx((f_plus - f_minus) / (2 * delta), rel=1e-5)


def test_objective_rejects_nonpositive_sigma():
    config = HeatFitConfig(grid_points_per_dim=5)
    with pytest.raises(ValidationError):
        heat_objective_and_gradient(config, 0.0, np.zeros(25))


def test_heat_fit_small_grid():
    result = heat_fit(HeatFitConfig(grid_points_per_dim=20))
    assert result.converged
    assert abs(result.sigma - 0.85) <= 1e-4
    assert result.f_trajectory[-1] <= 1e-8
    assert result.sigma_trajectory[0] == 1.0
    assert all(later <= earlier for earlier, later in zip(result.f_trajectory, result.f_trajectory[1:]))
    assert len(result.sigma_trajectory) == result.iterations + 1


@pytest.mark.slow
def test_heat_fit_default_grid():
    result = heat_fit(HeatFitConfig())
    assert result.converged
    assert abs(result.sigma - 0.85) <= 1e-4
    assert result.f_trajectory[-1] <= 1e-8
    assert all(later <= earlier for earlier, later in zip(result.f_trajectory, result.f_trajectory[1:]))


def test_heat_fit_line_search_divergence():
    """On the default grid the first trial step overshoots"""
    with pytest.raises(LineSearchDivergence) as info:
        heat_fit(HeatFitConfig(max_backtracks=1))
    assert info.value.sigma_trajectory == [1.0]
    assert len(info.value.f_trajectory) == 1


@pytest.mark.parametrize("kwargs", [
    {"grid_points_per_dim": 2},
    {"sigma0": 0.0},
    {"armijo_c": 1.5},
    {"krylov_k": 0},
])
def test_heat_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        HeatFitConfig(**kwargs)
