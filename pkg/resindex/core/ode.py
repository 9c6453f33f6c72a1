"""
Fixed-step classical Runge-Kutta integration

Fixed steps keep regression numbers reproducible; every integrator here checks
intermediate values for finiteness and raises NumericalError when the chosen
step count is too coarse for the dynamics.
"""

from typing import Callable

import numpy as np

from .exceptions import NumericalError


def rk4_step(rhs: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, h: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of dy/dt = rhs(t, y)"""
    k1 = rhs(t, y)
    k2 = rhs(t + h / 2, y + (h / 2) * k1)
    k3 = rhs(t + h / 2, y + (h / 2) * k2)
    k4 = rhs(t + h, y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_integrate(rhs: Callable[[float, np.ndarray], np.ndarray], y0: np.ndarray,
                  t0: float, t1: float, steps: int) -> np.ndarray:
    """Integrate from t0 to t1 in `steps` equal steps and return y(t1)"""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = (t1 - t0) / steps
    y = np.array(y0, dtype=float)
    for k in range(steps):
        y = rk4_step(rhs, t0 + k * h, y, h)
        if not np.all(np.isfinite(y)):
            raise NumericalError(
                f"Non-finite state at t={t0 + (k + 1) * h:.6g} after {k + 1} RK4 steps; "
                f"increase the step count or check the dynamics"
            )
    return y


def propagate_linear(a: np.ndarray, b: np.ndarray, x0: np.ndarray,
                     stage_inputs: np.ndarray, h: float) -> np.ndarray:
    """RK4 for dx/dt = A x + B u(t) with the input known at every stage time

    `stage_inputs` has 2*N + 1 rows: u at the start, midpoint and end of each of
    the N steps (consecutive steps share their boundary row). Returns the N + 1
    states at the step boundaries.
    """
    n_steps = (len(stage_inputs) - 1) // 2
    if len(stage_inputs) != 2 * n_steps + 1 or n_steps < 1:
        raise ValueError("stage_inputs must hold 2*N + 1 rows for N >= 1 steps")

    forcing = stage_inputs @ b.T
    states = np.empty((n_steps + 1, len(x0)))
    x = np.array(x0, dtype=float)
    states[0] = x
    for k in range(n_steps):
        f0, f_mid, f1 = forcing[2 * k], forcing[2 * k + 1], forcing[2 * k + 2]
        k1 = a @ x + f0
        k2 = a @ (x + (h / 2) * k1) + f_mid
        k3 = a @ (x + (h / 2) * k2) + f_mid
        k4 = a @ (x + h * k3) + f1
        x = x + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k + 1] = x
    if not np.all(np.isfinite(states)):
        raise NumericalError("Non-finite state while propagating trajectory")
    return states
