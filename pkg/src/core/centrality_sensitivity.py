"""
fkrylov - Network Centrality Sensitivity

Sensitivity of exponential centrality measures to a perturbation of one edge
weight A_ij, for adjacency matrices A:

- total network communicability  S_TN = 1^T L_exp(A, e_i e_j^T) 1
- subgraph centrality of node l  S_SC = e_l^T L_exp(A, e_i e_j^T) e_l
- Estrada index                  S_EI = trace L_exp(A, e_i e_j^T)

Each is reduced to a single derivative action at A^T,

    S = e_i^T L_exp(A^T, G) e_j   with G = 1 1^T, e_l e_l^T or I,

and evaluated by modified Arnoldi with b = e_j. The rank-one directions are
applied lazily. A perturbation of every edge at once (E_ij = 1 where
A_ij != 0) has no such reduction and is evaluated as 1^T L_exp(A, E) 1.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator

from ..utils.error_handling import validation_error
from .krylov import ArnoldiOptions, FrechetResult, modified_arnoldi
from .linalg import MatrixLike, as_csr, check_square
from .matfunc import FunctionSpec

logger = logging.getLogger(__name__)

# Row/column index pairs used for the benchmark networks (0-based)
DATASET_INDICES: Dict[str, Tuple[int, int]] = {
    "Air500": (256, 123),
    "Autobahn": (218, 605),
    "USPowerGrid": (3579, 2400),
    "as-735": (3105, 5000),
    "ca-HepTh": (7200, 6969),
}


class SensitivityMeasure(Enum):
    """Centrality measure whose sensitivity is computed."""
    TOTAL_COMMUNICABILITY = "tn"
    SUBGRAPH_CENTRALITY = "sc"
    ESTRADA_INDEX = "ei"


@dataclass(frozen=True)
class SensitivityQuery:
    """Which entry S_ij of which measure; `node` is l for subgraph centrality."""
    measure: SensitivityMeasure
    i: int
    j: int
    node: Optional[int] = None
    full_rank_direction: bool = False

    def validate(self, n: int) -> None:
        for name, index in (("i", self.i), ("j", self.j)):
            if not 0 <= index < n:
                raise validation_error(f"index {name} = {index} out of range for {n} nodes")
        if self.measure == SensitivityMeasure.SUBGRAPH_CENTRALITY and not self.full_rank_direction:
            if self.node is None:
                raise validation_error("subgraph centrality needs a node index")
            if not 0 <= self.node < n:
                raise validation_error(f"node {self.node} out of range for {n} nodes")


def dataset_query(name: str, measure: SensitivityMeasure = SensitivityMeasure.TOTAL_COMMUNICABILITY,
                  node: Optional[int] = None) -> SensitivityQuery:
    """Query with the index pair registered for a benchmark network."""
    if name not in DATASET_INDICES:
        known = ", ".join(sorted(DATASET_INDICES))
        raise validation_error(f"unknown dataset '{name}' (known: {known})")
    i, j = DATASET_INDICES[name]
    return SensitivityQuery(measure, i, j, node=node)


def ones_outer_operator(n: int) -> LinearOperator:
    """x -> 1 (1^T x) without forming the dense matrix."""
    def matvec(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x).reshape(-1)
        return np.full(n, x.sum(), dtype=x.dtype)

    return LinearOperator((n, n), matvec=matvec, rmatvec=matvec, dtype=float)


def unit_outer_operator(n: int, node: int) -> LinearOperator:
    """x -> e_l x_l."""
    def matvec(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x).reshape(-1)
        y = np.zeros(n, dtype=x.dtype)
        y[node] = x[node]
        return y

    return LinearOperator((n, n), matvec=matvec, rmatvec=matvec, dtype=float)


def direction_operator(query: SensitivityQuery, n: int) -> MatrixLike:
    """Direction G of the reduced derivative for the query's measure."""
    if query.measure == SensitivityMeasure.TOTAL_COMMUNICABILITY:
        return ones_outer_operator(n)
    if query.measure == SensitivityMeasure.SUBGRAPH_CENTRALITY:
        return unit_outer_operator(n, int(query.node))
    return sp.identity(n, format='csr')


def full_rank_direction(A: MatrixLike) -> sp.csr_matrix:
    """E with E_ij = 1 exactly where A_ij != 0."""
    E = as_csr(A).copy()
    E.eliminate_zeros()
    E.data = np.ones_like(E.data, dtype=float)
    return E.astype(float)


def _unit(n: int, index: int) -> np.ndarray:
    e = np.zeros(n)
    e[index] = 1.0
    return e


def _run_entry(A: MatrixLike, query: SensitivityQuery, k: int, stop_tol: float,
               options: Optional[ArnoldiOptions]) -> FrechetResult:
    A = as_csr(A)
    n = check_square(A, "A")
    query.validate(n)
    f = FunctionSpec.exp(1.0)
    if query.full_rank_direction:
        return modified_arnoldi(A, full_rank_direction(A), np.ones(n), f, k,
                                stop_tol=stop_tol, options=options)
    return modified_arnoldi(as_csr(A.T), direction_operator(query, n), _unit(n, query.j), f, k,
                            stop_tol=stop_tol, options=options)


def _estimate(query: SensitivityQuery, v1: np.ndarray) -> float:
    if query.full_rank_direction:
        return float(np.real(v1.sum()))
    return float(np.real(v1[query.i]))


def sensitivity_entry(A: MatrixLike, query: SensitivityQuery, k: int, stop_tol: float = 0.0,
                      options: Optional[ArnoldiOptions] = None) -> float:
    """
    S_ij for the query's measure, e_i^T v1 of modified Arnoldi on (A^T, G, e_j, exp).

    With `query.full_rank_direction` the all-edges sensitivity is returned instead.
    """
    result = _run_entry(A, query, k, stop_tol, options)
    value = _estimate(query, result.v1)
    logger.debug(f"sensitivity {query.measure.value} ({query.i}, {query.j}): {value:.6e} "
                 f"after {result.iterations} steps")
    return value


def sensitivity_full_rank(A: MatrixLike, i: int, j: int, k: int, stop_tol: float = 0.0,
                          options: Optional[ArnoldiOptions] = None) -> float:
    """1^T L_exp(A, E) 1 with E the sparsity pattern of A; (i, j) is only range-checked."""
    query = SensitivityQuery(SensitivityMeasure.TOTAL_COMMUNICABILITY, i, j,
                             full_rank_direction=True)
    return sensitivity_entry(A, query, k, stop_tol, options)


def sensitivity_history(A: MatrixLike, query: SensitivityQuery, k: int, stop_tol: float = 0.0,
                        check_every: int = 1) -> Tuple[List[Tuple[int, float, float]], bool]:
    """
    Estimates at every check of one modified Arnoldi run.

    Returns:
        Rows (k, estimate, update_norm) and whether the run stopped on stop_tol
        (the last row is then the converged one)
    """
    options = ArnoldiOptions(check_every=check_every, keep_iterates=True)
    result = _run_entry(A, query, k, stop_tol, options)
    rows = [(step, _estimate(query, result.iterates[step][0]), update)
            for step, update in result.history]
    return rows, result.converged
