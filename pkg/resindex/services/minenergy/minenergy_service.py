"""
Minimum-Energy Service - Internal API for open-loop minimum-energy transfers

u*(t) = B^T e^{A^T (t1 - t)} W^-1 dx with dx = x_goal - e^{A span} x_start;
the achieved energy is dx^T W^-1 dx.
"""

import numpy as np
from loguru import logger
from scipy import integrate, linalg

from ...core.exceptions import ModelError, UnreachableTargetError
from ...core.gramian.gramian_models import Gramian
from ...core.minenergy.minenergy_models import TransferTask, Trajectory
from ...core.ode import propagate_linear
from ..gramian.gramian_service import GramianService

DEFAULT_SAMPLES = 2000
# RK4 steps between consecutive trajectory samples
DEFAULT_SUBSTEPS = 4
# dx components outside the ranked range of W beyond this fraction of ||dx|| are unreachable
UNREACHABLE_TOLERANCE = 1e-6


class MinEnergyService:
    """Service for minimum-energy control laws, energies and trajectories"""

    def __init__(self):
        self.logger = logger
        self.gramian_service = GramianService()

    def delta_x(self, task: TransferTask, a: np.ndarray) -> np.ndarray:
        """x_goal - e^{A span} x_start"""
        return task.x_goal - self.gramian_service.matrix_exponential(a, task.span) @ task.x_start

    def _check_gramian(self, task: TransferTask, g: Gramian) -> None:
        if g.n != task.n:
            raise ModelError(f"Gramian is {g.n} x {g.n} but the task has {task.n} states")
        if not np.isclose(g.horizon, task.span, rtol=1e-12):
            raise ModelError(f"Gramian horizon {g.horizon:g} does not match the task span {task.span:g}")

    def _check_reachable(self, g: Gramian, dx: np.ndarray, allow_unreachable: bool) -> None:
        norm = float(np.linalg.norm(dx))
        outside = self.gramian_service.unreachable_component(g, dx)
        if norm > 0 and outside > UNREACHABLE_TOLERANCE * norm:
            energy = self.gramian_service.extended_inverse(g).quadratic_form(dx)
            message = (
                f"unreachable target: {outside / norm:.3g} of dx lies outside the reachable subspace "
                f"(dimension {g.numerical_rank} of {g.n}); extended-inverse energy {energy:.6g}"
            )
            if not allow_unreachable:
                raise UnreachableTargetError(message, energy=energy, residual=outside)
            self.logger.warning(message)

    def _weight(self, g: Gramian, dx: np.ndarray) -> np.ndarray:
        """W^-1 dx by linear solve; extended inverse when W is rank deficient"""
        if g.is_full_rank:
            try:
                return linalg.cho_solve(linalg.cho_factor(g.w, lower=True), dx)
            except linalg.LinAlgError:
                self.logger.debug("Cholesky failed; falling back to the extended inverse")
        return self.gramian_service.extended_inverse(g).apply(dx)

    def optimal_energy(self, task: TransferTask, g: Gramian, a: np.ndarray,
                       allow_unreachable: bool = False) -> float:
        """Minimum control energy dx^T W^-1 dx for the transfer"""
        self._check_gramian(task, g)
        dx = self.delta_x(task, a)
        if not np.any(dx):
            return 0.0
        self._check_reachable(g, dx, allow_unreachable)
        energy = self.gramian_service.inverse_quadratic_form(g, dx)
        return max(energy, 0.0)

    def control_law(self, task: TransferTask, g: Gramian, a: np.ndarray, b: np.ndarray,
                    times: np.ndarray, allow_unreachable: bool = False) -> np.ndarray:
        """u*(t) at the given instants (rows), computed from the costate e^{A^T (t1 - t)} W^-1 dx"""
        self._check_gramian(task, g)
        dx = self.delta_x(task, a)
        if not np.any(dx):
            return np.zeros((len(times), b.shape[1]))
        self._check_reachable(g, dx, allow_unreachable)
        costate_end = self._weight(g, dx)
        return self._costate_inputs(a, b, costate_end, task.t_end, times)

    def _costate_inputs(self, a: np.ndarray, b: np.ndarray, costate_end: np.ndarray,
                        t_end: float, times: np.ndarray) -> np.ndarray:
        """B^T p(t) with p(t) = e^{A^T (t_end - t)} p_end on a uniform grid ending at t_end

        The costate is stepped backwards from t_end with one exponential of the grid
        step, so the whole grid costs a single expm.
        """
        h = times[1] - times[0]
        step_back = self.gramian_service.matrix_exponential(a.T, h)
        costates = np.empty((len(times), len(costate_end)))
        p = costate_end
        costates[-1] = p
        for k in range(len(times) - 2, -1, -1):
            p = step_back @ p
            costates[k] = p
        return costates @ b

    def optimal_control(self, task: TransferTask, g: Gramian, a: np.ndarray, b: np.ndarray,
                        samples: int = DEFAULT_SAMPLES, substeps: int = DEFAULT_SUBSTEPS,
                        allow_unreachable: bool = False) -> Trajectory:
        """Sampled minimum-energy input and the RK4-integrated state response"""
        if samples < 2:
            raise ModelError("optimal_control needs at least 2 samples")
        if substeps < 1:
            raise ModelError("substeps must be >= 1")
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)

        # Stage grid: every RK4 step needs u at its start, midpoint and end
        stage_count = 2 * substeps * (samples - 1) + 1
        stage_times = np.linspace(task.t_start, task.t_end, stage_count)
        stage_inputs = self.control_law(task, g, a, b, stage_times, allow_unreachable)

        h = task.span / (substeps * (samples - 1))
        fine_states = propagate_linear(a, b, task.x_start, stage_inputs, h)

        states = fine_states[::substeps]
        states[0] = task.x_start
        inputs = stage_inputs[::2 * substeps]
        times = stage_times[::2 * substeps]
        energy = self.integrate_energy(inputs, times[1] - times[0])

        goal_error = float(np.linalg.norm(states[-1] - task.x_goal))
        self.logger.debug(
            f"Minimum-energy transfer over {task.span:g}: energy {energy:.6g}, terminal error {goal_error:.3g}"
        )
        return Trajectory(times=times, states=states, inputs=inputs, energy=energy)

    def free_response(self, x_start: np.ndarray, a: np.ndarray, t_start: float, t_end: float,
                      samples: int = DEFAULT_SAMPLES, input_dim: int = 1) -> Trajectory:
        """Unforced motion dx/dt = A x sampled on a uniform grid (zero input, zero energy)"""
        a = np.asarray(a, dtype=float)
        times = np.linspace(t_start, t_end, samples)
        step = self.gramian_service.matrix_exponential(a, times[1] - times[0])
        states = np.empty((samples, len(x_start)))
        states[0] = x_start
        for k in range(1, samples):
            states[k] = step @ states[k - 1]
        return Trajectory(times=times, states=states, inputs=np.zeros((samples, input_dim)), energy=0.0)

    def integrate_energy(self, inputs: np.ndarray, dt: float) -> float:
        """Integral of |u(t)|^2 on a uniform grid: Simpson for >= 3 samples, trapezoid for 2"""
        inputs = np.asarray(inputs, dtype=float)
        if inputs.ndim == 1:
            inputs = inputs[:, None]
        if len(inputs) < 2:
            raise ModelError("integrate_energy needs at least 2 samples")
        power = np.sum(inputs ** 2, axis=1)
        if len(power) == 2:
            return float(integrate.trapezoid(power, dx=dt))
        return max(float(integrate.simpson(power, dx=dt)), 0.0)
