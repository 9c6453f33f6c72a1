"""
Gramian Service - Internal API for controllability Gramians

Finite-horizon Gramians integrate the differential Lyapunov equation
dW/dt = A W + W A^T + B B^T from W(0) = 0 with fixed-step RK4. The
infinite-horizon limit solves A W + W A^T = -B B^T directly.
"""

import math
from typing import Optional

import numpy as np
from loguru import logger
from scipy import linalg

from ...core.exceptions import ModelError, NumericalError
from ...core.gramian.gramian_models import ExtendedInverse, Gramian
from ...core.ode import rk4_integrate
from ..system.system_service import SystemService

MIN_STEPS = 2000
STEPS_PER_CHARACTERISTIC_TIME = 200
# big_m = BIG_M_FACTOR / lambda_max keeps M "very large" relative to the problem scale
BIG_M_FACTOR = 1e12


class GramianService:
    """Service for Gramians, their extended inverses and the matrix exponential"""

    def __init__(self):
        self.logger = logger
        self.system_service = SystemService()

    def matrix_exponential(self, a: np.ndarray, t: float = 1.0) -> np.ndarray:
        """e^{A t} by scaling and squaring with Pade approximation (scipy expm)"""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ModelError(f"matrix exponential needs a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NumericalError("matrix exponential of a non-finite matrix")
        with np.errstate(over='ignore', invalid='ignore'):
            result = linalg.expm(a * t)
        if not np.all(np.isfinite(result)):
            raise NumericalError(f"matrix exponential overflowed (||A t||_1 = {np.linalg.norm(a * t, 1):.3g})")
        return result

    def default_steps(self, a: np.ndarray, horizon: float) -> int:
        """max(2000, 200 * horizon / T_sys); T_sys = inf for non-stable A gives 2000"""
        t_sys = self.system_service.characteristic_time(a)
        if math.isinf(t_sys) or horizon <= 0:
            return MIN_STEPS
        return max(MIN_STEPS, math.ceil(STEPS_PER_CHARACTERISTIC_TIME * horizon / t_sys))

    def gramian(self, a: np.ndarray, b: np.ndarray, horizon: float, steps: Optional[int] = None) -> Gramian:
        """Finite-horizon controllability Gramian W over [0, horizon]"""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        self._check_pair(a, b)
        if horizon < 0:
            raise ModelError(f"horizon must be >= 0, got {horizon}")
        n = a.shape[0]
        if horizon == 0:
            return Gramian.from_matrix(np.zeros((n, n)), horizon=0.0)

        steps = steps if steps is not None else self.default_steps(a, horizon)
        if steps < 1:
            raise ModelError("steps must be >= 1")
        forcing = b @ b.T

        def lyapunov_rhs(_t: float, w: np.ndarray) -> np.ndarray:
            return a @ w + w @ a.T + forcing

        w = rk4_integrate(lyapunov_rhs, np.zeros((n, n)), 0.0, horizon, steps)
        gram = Gramian.from_matrix(w, horizon=horizon)
        self.logger.debug(
            f"Gramian over {horizon:g} ({steps} RK4 steps): rank {gram.numerical_rank}/{n}, "
            f"lambda_max {gram.lambda_max:.6g}"
        )
        return gram

    def solve_lyapunov(self, a: np.ndarray, q: np.ndarray) -> np.ndarray:
        """X with A X + X A^T + Q = 0 via the vectorized system (I kron A + A kron I) vec X = -vec Q"""
        a, q = np.asarray(a, dtype=float), np.asarray(q, dtype=float)
        n = a.shape[0]
        eye = np.eye(n)
        operator = np.kron(eye, a) + np.kron(a, eye)
        try:
            x = linalg.solve(operator, -q.reshape(-1, order='F'))
        except linalg.LinAlgError as e:
            raise NumericalError(f"Lyapunov operator is singular (eigenvalues with lambda_i + lambda_j = 0): {e}")
        x = x.reshape((n, n), order='F')
        return (x + x.T) / 2

    def gramian_infinite(self, a: np.ndarray, b: np.ndarray) -> Gramian:
        """Lyapunov limit W(inf) for stable A"""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        self._check_pair(a, b)
        stability = self.system_service.is_stable(a)
        if not stability.is_stable:
            raise ModelError(
                f"Infinite-horizon Gramian needs a stable A (spectral abscissa {stability.abscissa:.6g})"
            )
        w = self.solve_lyapunov(a, b @ b.T)
        return Gramian.from_matrix(w, horizon=math.inf)

    def defender_tilde_gramian(self, a: np.ndarray, w_d: Gramian, defense_span: Optional[float] = None) -> Gramian:
        """W~_d = E W_d E^T with E = e^{-A span}: the defender Gramian seen from the attack end"""
        span = w_d.horizon if defense_span is None else defense_span
        if not span > 0 or math.isinf(span):
            raise ModelError(f"defense span must be finite and > 0, got {span}")
        if not math.isclose(span, w_d.horizon, rel_tol=1e-12):
            raise ModelError(f"W_d was computed over {w_d.horizon:g}, not the defense span {span:g}")
        backward = self.matrix_exponential(a, -span)
        w_tilde = backward @ w_d.w @ backward.T
        if not np.all(np.isfinite(w_tilde)):
            raise NumericalError(f"W~_d overflowed for defense span {span:g}")
        return Gramian.from_matrix(w_tilde, horizon=span)

    def extended_inverse(self, g: Gramian, big_m: Optional[float] = None) -> ExtendedInverse:
        """1/lambda on the numerically reachable part, M on the unreachable part"""
        if g.lambda_max <= 0:
            big_m = big_m if big_m is not None else BIG_M_FACTOR
            return ExtendedInverse(basis=g.eigenvectors, inverse_eigenvalues=np.full(g.n, big_m), big_m=big_m)

        big_m = big_m if big_m is not None else BIG_M_FACTOR / g.lambda_max
        rank = g.numerical_rank
        positive = g.eigenvalues[:rank]
        if rank and big_m <= 1.0 / positive[-1]:
            self.logger.warning(
                f"big_m={big_m:.3g} does not exceed 1/lambda_min={1.0 / positive[-1]:.3g} of the reachable part"
            )
        inverse = np.concatenate([1.0 / positive, np.full(g.n - rank, big_m)])
        return ExtendedInverse(basis=g.eigenvectors, inverse_eigenvalues=inverse, big_m=big_m)

    def inverse_quadratic_form(self, g: Gramian, x: np.ndarray, big_m: Optional[float] = None) -> float:
        """x^T W^-1 x: Cholesky solve when W is full rank, extended inverse otherwise"""
        x = np.asarray(x, dtype=float)
        if g.is_full_rank:
            try:
                factor = linalg.cho_factor(g.w, lower=True)
                return float(x @ linalg.cho_solve(factor, x))
            except linalg.LinAlgError:
                self.logger.debug("Cholesky failed on a numerically full-rank Gramian; using the extended inverse")
        return self.extended_inverse(g, big_m).quadratic_form(x)

    def unreachable_component(self, g: Gramian, x: np.ndarray) -> float:
        """Norm of the part of x outside the numerically ranked range of W"""
        null = g.null_basis()
        if null.shape[1] == 0:
            return 0.0
        return float(np.linalg.norm(null.T @ np.asarray(x, dtype=float)))

    def _check_pair(self, a: np.ndarray, b: np.ndarray) -> None:
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ModelError(f"A must be square, got shape {a.shape}")
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise ModelError(f"B must have {a.shape[0]} rows, got shape {b.shape}")


