"""
fkrylov - Command Implementations

Each command turns a validated RunConfig into a CSV file (and optionally an
SVG plot) or, for `check`, into a list of check outcomes:

- convergence: error against a dense reference for every method and k
- sensitivity: estimate and update norm per step for one centrality entry
- heat-fit:    sigma and objective per descent iteration
- check:       identity and structure checks on seeded synthetic problems
"""

import csv
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..core.centrality_sensitivity import (
    SensitivityMeasure, SensitivityQuery, dataset_query, sensitivity_history,
)
from ..core.frechet import (
    CS_DEFAULT_EPS, FrechetProblem, cs_arnoldi_iterates, fd_arnoldi_iterates,
    reference_oracle,
)
from ..core.heat_fitting import HeatFitConfig, LineSearchDivergence, heat_fit
from ..core.krylov import (
    ArnoldiOptions, arnoldi_fAb_iterates, block_embedding_iterates, modified_arnoldi,
)
from ..core.linalg import (
    DEFAULT_SEED, MatrixLike, check_square, make_rng, random_dense, random_vector,
)
from ..core.matfunc import FunctionSpec
from ..core.matrix_io import read_edge_list, read_matrix_market
from ..services.progress_reporting_service import ProgressReporter
from ..utils.error_handling import (
    ErrorCategory, FrechetError, config_error, error_context,
)
from .check_suite import CheckOutcome, run_check_suite
from .plotting import emit_plot

logger = logging.getLogger(__name__)

Row = Sequence[Union[str, int, float]]

CONVERGENCE_HEADER = ("method", "k", "rel_error")
SENSITIVITY_HEADER = ("k", "estimate", "update_norm")
HEAT_FIT_HEADER = ("iter", "sigma", "f_value")

DEFAULT_FD_EPS = 1e-8
RANDOM_SHIFT = 3.0


class Method(Enum):
    """Approximations compared by the convergence study."""
    MODIFIED = "modified"
    BLOCK = "block"
    FD = "fd"
    CS = "cs"
    FAB = "fab"

    @classmethod
    def parse_list(cls, text: str) -> Tuple['Method', ...]:
        names = [token.strip().lower() for token in text.split(',') if token.strip()]
        try:
            methods = tuple(cls(name) for name in names)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise config_error(f"unknown method in '{text}' (valid: {valid})")
        if not methods:
            raise config_error("method list is empty")
        return methods


@dataclass
class RunConfig:
    """Validated configuration of one CLI command."""
    command: str
    output: Optional[Path] = None
    plot: Optional[Path] = None
    seed: int = DEFAULT_SEED
    k_max: int = 80
    stop_tol: float = 0.0
    show_progress: bool = True
    verbose: bool = False

    # convergence
    methods: Tuple[Method, ...] = tuple(Method)
    function: FunctionSpec = field(default_factory=FunctionSpec.sqrt)
    diag: Optional[Tuple[float, float]] = None
    random_n: Optional[int] = None
    matrix_a: Optional[Path] = None
    matrix_e: Optional[Path] = None
    zero_e: bool = False
    fd_eps: Optional[float] = DEFAULT_FD_EPS
    cs_eps: float = CS_DEFAULT_EPS

    # sensitivity
    graph: Optional[Path] = None
    graph_format: str = "mtx"
    n_nodes: Optional[int] = None
    undirected: bool = False
    base: Optional[int] = None
    measure: SensitivityMeasure = SensitivityMeasure.TOTAL_COMMUNICABILITY
    i: Optional[int] = None
    j: Optional[int] = None
    node: Optional[int] = None
    full_rank: bool = False
    dataset: Optional[str] = None
    check_every: int = 1

    # heat-fit
    heat: Optional[HeatFitConfig] = None

    # check
    inject_r_update_bug: bool = False

    def __post_init__(self) -> None:
        if self.k_max < 1:
            raise config_error(f"--kmax must be >= 1, got {self.k_max}")
        if self.stop_tol < 0:
            raise config_error(f"--stop-tol must be >= 0, got {self.stop_tol}")
        if self.check_every < 1:
            raise config_error(f"--check-every must be >= 1, got {self.check_every}")
        if self.command == "convergence":
            sources = sum(x is not None for x in (self.diag, self.random_n, self.matrix_a))
            if sources != 1:
                raise config_error("give exactly one of --diag, --random or --matrix-a")
            if self.matrix_e is not None and self.matrix_a is None:
                raise config_error("--matrix-e requires --matrix-a")
            if self.diag is not None and self.diag[0] > self.diag[1]:
                raise config_error(f"--diag range {self.diag[0]:g}:{self.diag[1]:g} is empty")
            if self.random_n is not None and self.random_n < 1:
                raise config_error(f"--random needs a positive size, got {self.random_n}")
        if self.command == "sensitivity":
            if self.graph is None:
                raise config_error("sensitivity needs a graph file")
            if self.graph_format not in ("mtx", "edges"):
                raise config_error(f"unknown graph format '{self.graph_format}'")
            if self.graph_format == "edges" and self.n_nodes is None:
                raise config_error("edge lists need --n-nodes")
            if self.dataset is None and (self.i is None or self.j is None):
                raise config_error("give --i and --j, or --dataset")


def write_csv(path: Path, header: Sequence[str], rows: List[Row]) -> Path:
    """UTF-8 CSV with LF line endings; floats use 17 significant digits."""
    def fmt(value: Union[str, int, float]) -> str:
        if isinstance(value, (bool, np.bool_)):
            return str(int(value))
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return "%.17g" % float(value)
        return str(value)

    path = Path(path)
    with error_context("write_csv", category=ErrorCategory.FILESYSTEM, file_path=path):
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(value) for value in row])
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return path


def _finish(config: RunConfig, path: Path) -> Path:
    if config.plot is not None:
        emit_plot(path, config.plot)
        logger.info(f"Wrote plot to {config.plot}")
    return path


def relative_error(approx: np.ndarray, reference: np.ndarray) -> float:
    """||approx - reference|| / ||reference||, absolute when the reference vanishes."""
    error = float(np.linalg.norm(approx - reference))
    scale = float(np.linalg.norm(reference))
    return error / scale if scale > 0 else error


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------

def build_convergence_problem(config: RunConfig) -> FrechetProblem:
    """
    Problem of the convergence study.

    --diag LO:HI gives A = diag(LO, LO+1, ..., HI); --random N a dense
    N(0, 1/N) matrix shifted by 3 I. E and b are standard normal draws from
    the seeded generator unless E is read from a file or zeroed.
    """
    rng = make_rng(config.seed)
    A: MatrixLike
    if config.diag is not None:
        lo, hi = config.diag
        A = sp.diags(np.arange(lo, hi + 1, dtype=float)).tocsr()
    elif config.random_n is not None:
        n = config.random_n
        A = random_dense(n, rng) / np.sqrt(n) + RANDOM_SHIFT * np.eye(n)
    else:
        A = read_matrix_market(config.matrix_a)
    n = check_square(A, "A")

    E: MatrixLike
    if config.zero_e:
        E = sp.csr_matrix((n, n))
    elif config.matrix_e is not None:
        E = read_matrix_market(config.matrix_e)
    else:
        E = random_dense(n, rng)
    b = random_vector(n, rng)
    return FrechetProblem(A, E, b, config.function)


def _pad(values: Dict[int, np.ndarray], k_max: int) -> List[np.ndarray]:
    """Iterates for k = 1..k_max, repeating the last one after early termination."""
    padded: List[np.ndarray] = []
    for k in range(1, k_max + 1):
        padded.append(values[k] if k in values else padded[-1])
    return padded


def method_iterates(method: Method, problem: FrechetProblem, config: RunConfig) -> List[np.ndarray]:
    """Approximations for k = 1..k_max (of L_f(A,E)b, or of f(A)b for fab)."""
    A, E, b, f, k_max = problem.A, problem.E, problem.b, problem.f, config.k_max
    if method == Method.MODIFIED:
        options = ArnoldiOptions(check_every=1, keep_iterates=True)
        result = modified_arnoldi(A, E, b, f, k_max, options=options)
        return _pad({k: v1 for k, (v1, _) in result.iterates.items()}, k_max)
    if method == Method.BLOCK:
        return [v1 for v1, _ in block_embedding_iterates(A, E, b, f, k_max, skip_failures=True)]
    if method == Method.FD:
        return fd_arnoldi_iterates(problem, config.fd_eps, k_max, skip_failures=True)
    if method == Method.CS:
        return cs_arnoldi_iterates(problem, config.cs_eps, k_max, skip_failures=True)
    return arnoldi_fAb_iterates(A, b, f, k_max, skip_failures=True)


def cmd_convergence(config: RunConfig, reporter: Optional[ProgressReporter] = None) -> Path:
    """Write `method,k,rel_error` rows for every requested method."""
    problem = build_convergence_problem(config)
    oracle = reference_oracle(problem)
    logger.info(f"n = {problem.n}, f = {problem.f.describe()}, reference: {oracle.method.value}")
    if oracle.ill_conditioned:
        logger.warning("reference is unreliable (ill-conditioned eigenvectors)")

    rows: List[Row] = []
    for method in config.methods:
        if method == Method.CS and not problem.is_real:
            logger.warning("skipping cs: complex step needs real A, E and b")
            continue
        if reporter:
            reporter.start_step(method.value, config.k_max, description=f"Method {method.value}")
        reference = oracle.fAb if method == Method.FAB else oracle.Lb
        failed = False
        try:
            iterates = method_iterates(method, problem, config)
        except FrechetError as e:
            logger.warning(f"{method.value} failed: {e.message}")
            if reporter:
                reporter.fail_step(method.value, e.message)
            iterates = [np.full(problem.n, np.nan)] * config.k_max
            failed = True

        errors = [relative_error(y, reference) for y in iterates]
        if reporter and not failed:
            for k, err in enumerate(errors, start=1):
                reporter.update_step(method.value, k, f"error {err:.2e}")
            reporter.complete_step(method.value)
        rows.extend((method.value, k, err) for k, err in enumerate(errors, start=1))
        logger.info(f"{method.value}: error {errors[-1]:.3e} at k = {config.k_max}")

    return _finish(config, write_csv(config.output, CONVERGENCE_HEADER, rows))


# ---------------------------------------------------------------------------
# sensitivity
# ---------------------------------------------------------------------------

def load_graph(config: RunConfig) -> sp.csr_matrix:
    """Adjacency matrix from a Matrix Market file or an edge list."""
    if config.graph_format == "edges":
        base = 0 if config.base is None else config.base
        return read_edge_list(config.graph, int(config.n_nodes), directed=not config.undirected,
                              base=base)
    base = 1 if config.base is None else config.base
    return read_matrix_market(config.graph, base=base)


def build_query(config: RunConfig) -> SensitivityQuery:
    if config.dataset is not None:
        query = dataset_query(config.dataset, config.measure, config.node)
        return SensitivityQuery(query.measure, query.i, query.j, query.node, config.full_rank)
    return SensitivityQuery(config.measure, int(config.i), int(config.j), config.node,
                            config.full_rank)


def cmd_sensitivity(config: RunConfig) -> Path:
    """Write `k,estimate,update_norm` rows for one sensitivity entry."""
    A = load_graph(config)
    query = build_query(config)
    rows, converged = sensitivity_history(A, query, config.k_max, config.stop_tol,
                                          config.check_every)
    k, estimate, update = rows[-1]
    label = "full-rank" if query.full_rank_direction else query.measure.value
    if converged:
        logger.info(f"{label} sensitivity ({query.i}, {query.j}) converged at k = {k}: {estimate:.12g} "
                    f"(update {update:.2e})")
    else:
        logger.warning(f"{label} sensitivity ({query.i}, {query.j}) not converged after k = {k}: "
                       f"{estimate:.12g} (update {update:.2e})")
    return _finish(config, write_csv(config.output, SENSITIVITY_HEADER, rows))


# ---------------------------------------------------------------------------
# heat-fit
# ---------------------------------------------------------------------------

def cmd_heat_fit(config: RunConfig, reporter: Optional[ProgressReporter] = None) -> Path:
    """
    Write `iter,sigma,f_value` rows of the descent.

    A diverging line search still writes the partial trajectory before the
    error propagates.
    """
    heat = config.heat or HeatFitConfig()
    try:
        result = heat_fit(heat, reporter)
    except LineSearchDivergence as e:
        rows = list(zip(range(len(e.sigma_trajectory)), e.sigma_trajectory, e.f_trajectory))
        write_csv(config.output, HEAT_FIT_HEADER, rows)
        raise
    rows = list(zip(range(len(result.sigma_trajectory)), result.sigma_trajectory,
                    result.f_trajectory))
    if result.converged:
        logger.info(f"sigma = {result.sigma:.10f} after {result.iterations} iterations")
    else:
        logger.warning(f"no convergence after {result.iterations} iterations "
                       f"(f = {result.f_trajectory[-1]:.3e})")
    return _finish(config, write_csv(config.output, HEAT_FIT_HEADER, rows))


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def cmd_check(config: RunConfig) -> List[CheckOutcome]:
    """Run the self-check suite and print one PASS/FAIL line per property."""
    def announce(name: str) -> None:
        logger.debug(f"running {name} checks")

    outcomes = run_check_suite(config.seed, config.inject_r_update_bug, announce)
    for outcome in outcomes:
        print(f"{'✅' if outcome.passed else '❌'} {outcome.describe()}")
    return outcomes
