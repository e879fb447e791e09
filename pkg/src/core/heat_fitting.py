"""
fkrylov - Heat Equation Parameter Fitting

Fits the diffusion coefficient sigma of

    u_t = sigma * Laplace(u) on [-1, 1]^2, homogeneous Dirichlet boundary,

to a reference state at time T by gradient descent. The semi-discrete
solution is s(sigma) = exp(T sigma Delta_h) u0 with the 5-point Laplacian
Delta_h, and one modified Arnoldi run on (T sigma Delta_h, T Delta_h, u0)
yields both s(sigma) (bottom track) and ds/dsigma (top track).

The default u0 is an exact eigenvector of Delta_h, so every Krylov run
stops within a few steps and krylov_k = 40 is ample. A general u0 needs a
larger krylov_k (about 120 on a 20 x 20 grid); a run that exhausts krylov_k
without meeting krylov_tol raises ConvergenceError.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..services.progress_reporting_service import ProgressReporter
from ..utils.error_handling import ConvergenceError, config_error, validation_error
from .krylov import ArnoldiOptions, modified_arnoldi
from .matfunc import FunctionSpec

logger = logging.getLogger(__name__)


@dataclass
class HeatFitConfig:
    """Grid, parameters and descent settings of the fitting run."""
    grid_points_per_dim: int = 75
    final_time: float = 1.0
    sigma0: float = 1.0
    sigma_ref: float = 0.85
    step0: float = 0.5
    abs_tol: float = 1e-8
    max_iters: int = 200
    krylov_k: int = 40                # enough for the eigenvector u0 only
    krylov_tol: float = 1e-12
    max_backtracks: int = 30
    armijo_c: float = 0.5

    def __post_init__(self) -> None:
        if self.grid_points_per_dim < 3:
            raise config_error(f"grid needs at least 3 points per dimension, got {self.grid_points_per_dim}")
        for name in ("final_time", "sigma0", "sigma_ref", "step0"):
            if not getattr(self, name) > 0:
                raise config_error(f"{name} must be positive, got {getattr(self, name)}")
        if self.abs_tol < 0 or self.krylov_tol < 0:
            raise config_error("tolerances must be nonnegative")
        if self.max_iters < 0 or self.krylov_k < 1 or self.max_backtracks < 1:
            raise config_error("iteration limits must be positive")
        if not 0 < self.armijo_c < 1:
            raise config_error(f"armijo_c must lie in (0, 1), got {self.armijo_c}")


@dataclass
class HeatFitResult:
    """Trajectories of the descent; entry 0 is the initial guess."""
    sigma_trajectory: List[float] = field(default_factory=list)
    f_trajectory: List[float] = field(default_factory=list)
    gradient_trajectory: List[float] = field(default_factory=list)
    step_trajectory: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False

    @property
    def sigma(self) -> float:
        return self.sigma_trajectory[-1]


class LineSearchDivergence(ConvergenceError):
    """Backtracking failed to decrease f; carries the trajectory so far."""

    def __init__(self, message: str, sigma_trajectory: List[float],
                 f_trajectory: List[float], **kwargs):
        super().__init__(message, **kwargs)
        self.sigma_trajectory = list(sigma_trajectory)
        self.f_trajectory = list(f_trajectory)


def _grid(m: int) -> Tuple[np.ndarray, float]:
    h = 2.0 / (m + 1)
    return -1.0 + h * np.arange(1, m + 1), h


def assemble_laplacian_2d(m: int) -> sp.csr_matrix:
    """
    5-point Laplacian on the m x m interior grid of [-1, 1]^2, h = 2/(m+1).

    Unknowns are ordered row by row; diagonal -4/h^2, neighbours 1/h^2.
    """
    if m < 3:
        raise validation_error(f"grid needs at least 3 points per dimension, got {m}")
    _, h = _grid(m)
    T = sp.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1]) / h ** 2
    I = sp.identity(m)
    return sp.csr_matrix(sp.kron(I, T) + sp.kron(T, I))


def initial_condition(m: int) -> np.ndarray:
    """u0(x, y) = cos(pi x / 2) cos(pi y / 2) on the interior grid."""
    x, _ = _grid(m)
    profile = np.cos(np.pi * x / 2)
    return np.kron(profile, profile)


def _propagate(config: HeatFitConfig, laplacian: sp.csr_matrix, sigma: float,
               u0: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(s(sigma), ds/dsigma) from one modified Arnoldi run."""
    if not np.any(u0):
        zero = np.zeros_like(u0, dtype=float)
        return zero, zero
    T = config.final_time
    result = modified_arnoldi(sigma * T * laplacian, T * laplacian, u0, FunctionSpec.exp(1.0),
                              config.krylov_k, stop_tol=config.krylov_tol,
                              options=ArnoldiOptions())
    if not result.converged:
        raise ConvergenceError(
            f"Krylov propagation at sigma={sigma:g} did not reach tolerance {config.krylov_tol:g} "
            f"within {config.krylov_k} steps; increase krylov_k")
    return np.real(result.v2), np.real(result.v1)


def reference_solution(config: HeatFitConfig, laplacian: Optional[sp.csr_matrix] = None,
                       u0: Optional[np.ndarray] = None) -> np.ndarray:
    """s(sigma_ref), the state the fit tries to reproduce."""
    m = config.grid_points_per_dim
    laplacian = assemble_laplacian_2d(m) if laplacian is None else laplacian
    u0 = initial_condition(m) if u0 is None else u0
    state, _ = _propagate(config, laplacian, config.sigma_ref, u0)
    return state


def heat_objective_and_gradient(config: HeatFitConfig, sigma: float, s_ref: np.ndarray,
                                laplacian: Optional[sp.csr_matrix] = None,
                                u0: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """
    f(sigma) = ||s(sigma) - s_ref||^2 and f'(sigma) = 2 Re <s(sigma) - s_ref, ds/dsigma>.
    """
    if not sigma > 0:
        raise validation_error(f"sigma must be positive, got {sigma}")
    m = config.grid_points_per_dim
    laplacian = assemble_laplacian_2d(m) if laplacian is None else laplacian
    u0 = initial_condition(m) if u0 is None else u0
    state, derivative = _propagate(config, laplacian, sigma, u0)
    residual = state - s_ref
    f_val = float(np.vdot(residual, residual).real)
    grad = float(2.0 * np.vdot(residual, derivative).real)
    return f_val, grad


def heat_fit(config: HeatFitConfig, reporter: Optional[ProgressReporter] = None) -> HeatFitResult:
    """
    Gradient descent with Armijo backtracking on f(sigma).

    Each iteration starts from config.step0 and halves the step until
    f(sigma - t g) <= f - c t g^2 with the trial sigma positive. Stops once
    f <= abs_tol or after max_iters iterations.

    Raises:
        LineSearchDivergence: no acceptable step after max_backtracks halvings
    """
    m = config.grid_points_per_dim
    laplacian = assemble_laplacian_2d(m)
    u0 = initial_condition(m)
    s_ref = reference_solution(config, laplacian, u0)

    def objective(sigma: float) -> Tuple[float, float]:
        return heat_objective_and_gradient(config, sigma, s_ref, laplacian, u0)

    sigma = config.sigma0
    f_val, grad = objective(sigma)
    result = HeatFitResult([sigma], [f_val], [grad], [0.0])

    if reporter:
        reporter.start_step("heat_fit", config.max_iters, f"grid {m}x{m}, sigma0 = {sigma:g}",
                            description="Fitting sigma", unit="it")

    for iteration in range(1, config.max_iters + 1):
        if f_val <= config.abs_tol:
            break
        step = config.step0
        backtracks = 0
        while True:
            trial = sigma - step * grad
            if trial > 0:
                f_trial, g_trial = objective(trial)
                if f_trial <= f_val - config.armijo_c * step * grad * grad:
                    break
            backtracks += 1
            if backtracks >= config.max_backtracks:
                if reporter:
                    reporter.fail_step("heat_fit", "line search diverged")
                raise LineSearchDivergence(
                    f"line search found no decrease after {backtracks} backtracks "
                    f"at iteration {iteration} (sigma = {sigma:.6g}, f = {f_val:.3e})",
                    result.sigma_trajectory, result.f_trajectory)
            step /= 2

        sigma, f_val, grad = trial, f_trial, g_trial
        result.sigma_trajectory.append(sigma)
        result.f_trajectory.append(f_val)
        result.gradient_trajectory.append(grad)
        result.step_trajectory.append(step)
        result.iterations = iteration
        logger.debug(f"heat fit iteration {iteration}: sigma = {sigma:.10f}, f = {f_val:.3e}, "
                     f"step = {step:g}")
        if reporter:
            reporter.update_step("heat_fit", iteration, f"f = {f_val:.2e}")

    result.converged = f_val <= config.abs_tol
    if reporter:
        if result.converged:
            reporter.complete_step("heat_fit", f"sigma = {sigma:.8f} after {result.iterations} iterations")
        else:
            reporter.fail_step("heat_fit", f"f = {f_val:.3e} after {result.iterations} iterations")
    return result
