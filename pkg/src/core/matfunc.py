"""
fkrylov - Dense Matrix Function Kernels

Small dense matrix functions applied to compressed Krylov matrices, the scalar
function description shared by every solver, divided differences for the
eigendecomposition oracle, and the Chebyshev approximation error entering the
convergence bound.

Kernels:
- expm: degree-13 Padé approximant with scaling and squaring
- sqrtm: scaled Denman-Beavers iteration with an a-posteriori residual check
- polym: Horner evaluation
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
from numpy.polynomial import chebyshev as cheb
from numpy.polynomial import polynomial as poly

from ..utils.error_handling import (
    BranchError, ConvergenceError, error_context, validation_error,
)

logger = logging.getLogger(__name__)

Scalar = Union[float, complex]

# Padé [13/13] coefficients and the matching 1-norm threshold
PADE13_COEFFS = (
    64764752532480000., 32382376266240000., 7771770303897600.,
    1187353796428800., 129060195264000., 10559470521600., 670442572800.,
    33522128640., 1323241920., 40840800., 960960., 16380., 182., 1.,
)
THETA_13 = 5.371920351148152

SQRTM_MAX_ITER = 50
SQRTM_TOL = 1e-14
SQRTM_STAGNATION_TOL = 1e-9
SQRTM_RESIDUAL_TOL = 1e-10
SQRTM_SCALING_SWITCH = 1e-2

CONFLUENT_GAP = 1e-7
CHEBYSHEV_GRID_POINTS = 1000


class FunctionKind(Enum):
    """Scalar functions supported by the solvers."""
    EXP = "exp"
    SQRT = "sqrt"
    POLYNOMIAL = "poly"


@dataclass(frozen=True)
class FunctionSpec:
    """
    Tagged description of the scalar function f.

    EXP evaluates exp(t*z) with t = time_scale. POLYNOMIAL uses ascending
    coefficients c0 + c1 z + c2 z^2 + ...
    """
    kind: FunctionKind
    time_scale: float = 1.0
    coefficients: Tuple[complex, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind == FunctionKind.POLYNOMIAL and len(self.coefficients) == 0:
            raise validation_error("polynomial coefficient list must be nonempty")

    @classmethod
    def exp(cls, time_scale: float = 1.0) -> 'FunctionSpec':
        return cls(FunctionKind.EXP, time_scale=float(time_scale))

    @classmethod
    def sqrt(cls) -> 'FunctionSpec':
        return cls(FunctionKind.SQRT)

    @classmethod
    def polynomial(cls, coefficients: Sequence[Scalar]) -> 'FunctionSpec':
        return cls(FunctionKind.POLYNOMIAL, coefficients=tuple(coefficients))

    @classmethod
    def parse(cls, text: str) -> 'FunctionSpec':
        """
        Parse the CLI notation: `exp`, `exp:T`, `sqrt`, `poly:c0,c1,...`.
        """
        name, _, arg = text.strip().lower().partition(':')
        try:
            if name == "exp":
                return cls.exp(float(arg) if arg else 1.0)
            if name == "sqrt" and not arg:
                return cls.sqrt()
            if name == "poly" and arg:
                return cls.polynomial([float(tok) for tok in arg.split(',')])
        except ValueError:
            pass
        raise validation_error(f"cannot parse function '{text}' (use exp, exp:T, sqrt or poly:c0,c1,...)")

    @property
    def degree(self) -> int:
        """Polynomial degree, -1 for non-polynomial kinds."""
        if self.kind != FunctionKind.POLYNOMIAL:
            return -1
        return len(self.coefficients) - 1

    def __call__(self, z: np.ndarray) -> np.ndarray:
        """Evaluate f elementwise (principal branch for the square root)."""
        z = np.asarray(z)
        if self.kind == FunctionKind.EXP:
            return np.exp(self.time_scale * z)
        if self.kind == FunctionKind.SQRT:
            return np.emath.sqrt(z)
        return poly.polyval(z, np.asarray(self.coefficients))

    def derivative(self, z: np.ndarray) -> np.ndarray:
        """Evaluate f' elementwise."""
        z = np.asarray(z)
        if self.kind == FunctionKind.EXP:
            return self.time_scale * np.exp(self.time_scale * z)
        if self.kind == FunctionKind.SQRT:
            return 0.5 / np.emath.sqrt(z)
        coeffs = np.asarray(self.coefficients)
        if len(coeffs) == 1:
            return np.zeros_like(z, dtype=np.result_type(z.dtype, coeffs.dtype, float))
        return poly.polyval(z, poly.polyder(coeffs))

    def describe(self) -> str:
        if self.kind == FunctionKind.EXP:
            return "exp" if self.time_scale == 1.0 else f"exp:{self.time_scale:g}"
        if self.kind == FunctionKind.SQRT:
            return "sqrt"
        return "poly:" + ",".join(f"{c:g}" for c in self.coefficients)


@dataclass(frozen=True)
class SpectralInterval:
    """Real interval [lo, hi] containing the numerical range of a Hermitian matrix."""
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise validation_error(f"interval lower end {self.lo} exceeds upper end {self.hi}")


class ChebyshevEstimate(NamedTuple):
    """Uniform error of a Chebyshev interpolant and its Lebesgue-constant bound factor."""
    error: float
    lebesgue_factor: float


def _square(H: np.ndarray, operation: str) -> np.ndarray:
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise validation_error(f"{operation} requires a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise validation_error(f"{operation} requires finite entries")
    if not np.issubdtype(H.dtype, np.inexact):
        H = H.astype(float)
    return H


def expm(H: np.ndarray) -> np.ndarray:
    """
    Matrix exponential by Padé [13/13] approximation with scaling and squaring.

    Args:
        H: Square dense matrix

    Returns:
        exp(H)
    """
    H = _square(H, "expm")
    n = H.shape[0]
    if n == 0:
        return H.copy()

    norm1 = float(np.linalg.norm(H, 1))
    s = max(0, int(math.ceil(math.log2(norm1 / THETA_13)))) if norm1 > THETA_13 else 0
    a = H / (2.0 ** s)

    b = PADE13_COEFFS
    ident = np.eye(n, dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2
             + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident

    with error_context("expm", error_type=ConvergenceError):
        r = scipy.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def sqrtm(H: np.ndarray, max_iter: int = SQRTM_MAX_ITER, tol: float = SQRTM_TOL) -> np.ndarray:
    """
    Principal square root by the determinant-scaled Denman-Beavers iteration.

    Y0 = H, Z0 = I; Y converges to H^{1/2} and Z to H^{-1/2}. Scaling is
    switched off once the iterates change by less than 1e-2; the iteration
    stops when the relative change drops below `tol` or stagnates at roundoff.

    Raises:
        BranchError: singular iterate, no convergence, or a failed residual check
    """
    H = _square(H, "sqrtm")
    n = H.shape[0]
    if n == 0:
        return H.copy()
    h_norm = float(np.linalg.norm(H, 'fro'))
    if h_norm == 0.0:
        return np.zeros_like(H)

    Y = H.copy()
    Z = np.eye(n, dtype=H.dtype)
    scaling = True
    converged = False
    prev_change = np.inf

    with error_context("sqrtm", error_type=BranchError):
        for iteration in range(1, max_iter + 1):
            mu = 1.0
            if scaling:
                sign_y, logdet_y = np.linalg.slogdet(Y)
                sign_z, logdet_z = np.linalg.slogdet(Z)
                if sign_y == 0 or sign_z == 0:
                    raise BranchError("singular iterate in square root iteration (eigenvalue at 0?)")
                mu = math.exp(-(logdet_y + logdet_z) / (2 * n))

            Y_inv = np.linalg.inv(Y)
            Z_inv = np.linalg.inv(Z)
            Y_next = 0.5 * (mu * Y + Z_inv / mu)
            Z = 0.5 * (mu * Z + Y_inv / mu)

            change = float(np.linalg.norm(Y_next - Y, 'fro')) / max(float(np.linalg.norm(Y, 'fro')),
                                                                    np.finfo(float).tiny)
            Y = Y_next
            if not np.all(np.isfinite(Y)):
                raise BranchError("square root iteration produced non-finite entries")

            if change <= tol:
                converged = True
                break
            if scaling:
                if change < SQRTM_SCALING_SWITCH:
                    scaling = False
            elif change <= SQRTM_STAGNATION_TOL and change > prev_change / 2:
                # Roundoff floor reached
                converged = True
                break
            prev_change = change

    if not converged:
        raise BranchError(f"square root iteration did not converge in {max_iter} iterations "
                          f"(eigenvalues on the closed negative real axis?)")

    residual = float(np.linalg.norm(Y @ Y - H, 'fro'))
    if residual > SQRTM_RESIDUAL_TOL * h_norm:
        raise BranchError(f"square root residual {residual:.3e} exceeds "
                          f"{SQRTM_RESIDUAL_TOL:g} * ||H||_F = {SQRTM_RESIDUAL_TOL * h_norm:.3e}")
    logger.debug(f"sqrtm: n={n}, {iteration} iterations, residual {residual:.2e}")
    return Y


def polym(H: np.ndarray, coeffs: Sequence[Scalar]) -> np.ndarray:
    """Evaluate the polynomial with ascending coefficients at H by Horner's rule."""
    if len(coeffs) == 0:
        raise validation_error("polynomial coefficient list must be nonempty")
    H = _square(H, "polym")
    n = H.shape[0]
    dtype = np.result_type(H.dtype, np.asarray(coeffs).dtype, float)
    ident = np.eye(n, dtype=dtype)
    result = coeffs[-1] * ident
    for c in reversed(coeffs[:-1]):
        result = H @ result + c * ident
    return result


def matfun(H: np.ndarray, f: FunctionSpec) -> np.ndarray:
    """Dispatch f(H) to the matching dense kernel."""
    if f.kind == FunctionKind.EXP:
        return expm(f.time_scale * _square(H, "matfun"))
    if f.kind == FunctionKind.SQRT:
        return sqrtm(H)
    return polym(H, f.coefficients)


def divided_difference(f: FunctionSpec, x: Scalar, y: Scalar) -> Scalar:
    """
    First divided difference f[x, y].

    Switches to f'((x+y)/2) when |x - y| <= 1e-7 * max(|x|, |y|, 1). The
    midpoint form keeps the result exactly symmetric in (x, y).
    """
    if abs(x - y) > CONFLUENT_GAP * max(abs(x), abs(y), 1.0):
        return (f(x) - f(y)) / (x - y)
    return f.derivative((x + y) / 2)


def divided_difference_matrix(f: FunctionSpec, eigenvalues: np.ndarray) -> np.ndarray:
    """Matrix D[i, j] = f[lambda_i, lambda_j], same confluence rule as divided_difference."""
    lam = np.asarray(eigenvalues)
    x, y = lam[:, None], lam[None, :]
    gap = x - y
    scale = np.maximum(np.maximum(np.abs(x), np.abs(y)), 1.0)
    confluent = np.abs(gap) <= CONFLUENT_GAP * scale

    f_lam = f(lam)
    with np.errstate(divide='ignore', invalid='ignore'):
        quotient = (f_lam[:, None] - f_lam[None, :]) / np.where(confluent, 1.0, gap)
        slope = f.derivative((x + y) / 2)
    return np.where(confluent, slope, quotient)


def chebyshev_uniform_error(f_prime: Callable[[np.ndarray], np.ndarray],
                            interval: SpectralInterval, degree: int) -> ChebyshevEstimate:
    """
    Uniform error of the Chebyshev interpolant of f' on the interval.

    The sup is taken over a 1000-point grid. The interpolant overestimates
    the best uniform approximation error by at most the Lebesgue factor
    (2/pi) log(degree + 1) + 1 reported alongside.

    Args:
        f_prime: Vectorized scalar function
        interval: Approximation interval
        degree: Interpolation degree (>= 0)
    """
    if degree < 0:
        raise validation_error(f"degree must be nonnegative, got {degree}")
    lebesgue = 2.0 / math.pi * math.log(degree + 1) + 1.0
    if interval.lo == interval.hi:
        return ChebyshevEstimate(0.0, lebesgue)

    domain = [interval.lo, interval.hi]
    interpolant = cheb.Chebyshev.interpolate(f_prime, degree, domain=domain)
    grid = np.linspace(interval.lo, interval.hi, CHEBYSHEV_GRID_POINTS)
    error = float(np.max(np.abs(f_prime(grid) - interpolant(grid))))
    return ChebyshevEstimate(error, lebesgue)


def polynomial_frechet_action(A, E, b: np.ndarray, coeffs: Sequence[Scalar]) -> np.ndarray:
    """
    L_p(A, E) b for p(z) = sum_j c_j z^j using only matrix-vector products.

    With y_j = A^j b and z_j = L_{z^j}(A, E) b the monomial sums obey
    z_j = A z_{j-1} + E y_{j-1}, z_0 = 0.
    """
    if len(coeffs) == 0:
        raise validation_error("polynomial coefficient list must be nonempty")
    b = np.asarray(b)
    dtype = np.result_type(A.dtype, E.dtype, b.dtype, np.asarray(coeffs).dtype, float)
    y = b.astype(dtype)
    z = np.zeros_like(y)
    total = np.zeros_like(y)
    for j in range(1, len(coeffs)):
        z = A @ z + E @ y
        y = A @ y
        if coeffs[j] != 0:
            total = total + coeffs[j] * z
    return total
