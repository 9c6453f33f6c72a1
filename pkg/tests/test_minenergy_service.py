"""
Tests for MinEnergyService - minimum-energy transfers and trajectories

Test Plan:
1. Scalar transfer: energy closed form, trajectory reaches the goal
2. Achieved energy matches dx^T W^-1 dx
3. Brute-force piecewise-constant least-norm oracle on the pendula
4. Unreachable targets raise, or warn with the extended-inverse energy
5. Transfer demand, optimality against null-space perturbations, quadratic scaling
6. Energy quadrature and grid validation
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate, linalg

from resindex.core.exceptions import ModelError, UnreachableTargetError
from resindex.core.minenergy.minenergy_models import TransferTask, Trajectory
from resindex.services.gramian.gramian_service import GramianService
from resindex.services.minenergy.minenergy_service import MinEnergyService


@pytest.fixture
def service():
    return MinEnergyService()


@pytest.fixture
def gramians():
    return GramianService()


def piecewise_constant_energy(a: np.ndarray, b: np.ndarray, span: float, target: np.ndarray,
                              segments: int) -> float:
    """Least-norm energy to reach target from 0 with piecewise-constant inputs"""
    n, m = b.shape
    tau = span / segments
    augmented = np.zeros((n + m, n + m))
    augmented[:n, :n] = a
    augmented[:n, n:] = b
    block = linalg.expm(augmented * tau)
    step, held = block[:n, :n], block[:n, n:]

    columns = []
    propagated = held
    for _ in range(segments):
        columns.append(propagated)
        propagated = step @ propagated
    reach = np.hstack(columns[::-1])
    u, *_ = np.linalg.lstsq(reach, target, rcond=None)
    return tau * float(u @ u)


class TestScalarTransfer:
    """dx/dt = -x + u from 0 to 1 in one second"""

    def test_energy_closed_form(self, service, gramians):
        gram = gramians.gramian([[-1.0]], [[1.0]], 1.0)
        task = TransferTask(x_start=[0.0], x_goal=[1.0], span=1.0)
        expected = 2.0 / (1.0 - math.exp(-2.0))
        assert service.optimal_energy(task, gram, np.array([[-1.0]])) == pytest.approx(expected, rel=1e-10)

    def test_trajectory_reaches_goal(self, service, gramians):
        a, b = np.array([[-1.0]]), np.array([[1.0]])
        gram = gramians.gramian(a, b, 1.0)
        task = TransferTask(x_start=[0.0], x_goal=[1.0], span=1.0)
        trajectory = service.optimal_control(task, gram, a, b, samples=500)

        assert len(trajectory.times) == 500
        assert trajectory.times[0] == 0.0 and trajectory.times[-1] == pytest.approx(1.0)
        assert trajectory.final_state[0] == pytest.approx(1.0, abs=1e-8)
        assert trajectory.energy == pytest.approx(service.optimal_energy(task, gram, a), rel=1e-8)

    def test_shifted_window(self, service, gramians):
        a, b = np.array([[-1.0]]), np.array([[1.0]])
        gram = gramians.gramian(a, b, 1.0)
        task = TransferTask(x_start=[2.0], x_goal=[0.0], span=1.0, t_start=5.0)
        trajectory = service.optimal_control(task, gram, a, b, samples=200)
        assert trajectory.times[0] == 5.0
        assert trajectory.final_state[0] == pytest.approx(0.0, abs=1e-8)

    def test_zero_transfer(self, service, gramians):
        gram = gramians.gramian([[-1.0]], [[1.0]], 1.0)
        task = TransferTask(x_start=[0.0], x_goal=[0.0], span=1.0)
        assert service.optimal_energy(task, gram, np.array([[-1.0]])) == 0.0

    def test_horizon_mismatch(self, service, gramians):
        gram = gramians.gramian([[-1.0]], [[1.0]], 1.0)
        task = TransferTask(x_start=[0.0], x_goal=[1.0], span=2.0)
        with pytest.raises(ModelError):
            service.optimal_energy(task, gram, np.array([[-1.0]]))


class TestDeltaX:
    """Transfer demand x_goal - e^{A span} x_start"""

    def test_from_rest_is_goal(self, service, pendula_all, rng):
        goal = rng.standard_normal(pendula_all.n)
        task = TransferTask(x_start=np.zeros(pendula_all.n), x_goal=goal, span=15.0)
        assert np.array_equal(service.delta_x(task, pendula_all.a), goal)

    def test_free_motion_needs_nothing(self, service, gramians, pendula_all, rng):
        start = rng.standard_normal(pendula_all.n)
        goal = gramians.matrix_exponential(pendula_all.a, 15.0) @ start
        task = TransferTask(x_start=start, x_goal=goal, span=15.0)
        assert np.allclose(service.delta_x(task, pendula_all.a), 0.0, rtol=0, atol=1e-14)

    def test_scalar_half_life(self, service):
        task = TransferTask(x_start=[1.0], x_goal=[0.0], span=math.log(2.0))
        assert service.delta_x(task, np.array([[-1.0]]))[0] == pytest.approx(-0.5, rel=1e-12)


class TestOptimality:
    """u* is the least-energy input among those with the same end state"""

    def test_null_space_perturbations_cost_more(self, service, gramians, rng):
        a, b = np.array([[0.0, 1.0], [-1.0, -0.2]]), np.array([[0.0], [1.0]])
        span, samples = 2.0, 201
        gram = gramians.gramian(a, b, span)
        task = TransferTask(x_start=[0.0, 0.0], x_goal=[1.0, -0.5], span=span)
        trajectory = service.optimal_control(task, gram, a, b, samples=samples)
        dt = trajectory.dt

        # Discrete reachability map under the same quadrature weights the energy uses
        weights = np.array([integrate.simpson(unit, dx=dt) for unit in np.eye(samples)])
        reach = np.hstack([
            weight * (gramians.matrix_exponential(a, span - t) @ b)
            for weight, t in zip(weights, trajectory.times)
        ])
        null = linalg.null_space(reach)
        baseline = service.integrate_energy(trajectory.inputs, dt)
        for _ in range(5):
            perturbation = null @ rng.standard_normal(null.shape[1])
            perturbed = trajectory.inputs + 0.1 * perturbation[:, None]
            assert service.integrate_energy(perturbed, dt) >= baseline * (1 - 1e-6)

    def test_doubling_goal_quadruples_energy(self, service, gramians, pendula_all, rng):
        gram = gramians.gramian(pendula_all.a, pendula_all.b_attack, 15.0)
        goal = rng.standard_normal(pendula_all.n)
        single = TransferTask(x_start=np.zeros(pendula_all.n), x_goal=goal, span=15.0)
        double = TransferTask(x_start=np.zeros(pendula_all.n), x_goal=2 * goal, span=15.0)
        energy = service.optimal_energy(single, gram, pendula_all.a)
        assert service.optimal_energy(double, gram, pendula_all.a) == pytest.approx(4 * energy, rel=1e-12)


class TestPendulaTransfer:
    """Six-state transfers on the coupled pendula"""

    def test_energy_matches_quadratic_form(self, service, gramians, pendula_all, rng):
        span = 15.0
        gram = gramians.gramian(pendula_all.a, pendula_all.b_attack, span)
        target = rng.standard_normal(pendula_all.n)
        task = TransferTask(x_start=np.zeros(pendula_all.n), x_goal=target, span=span)
        trajectory = service.optimal_control(task, gram, pendula_all.a, pendula_all.b_attack)

        expected = float(target @ np.linalg.solve(gram.w, target))
        assert trajectory.energy == pytest.approx(expected, rel=1e-5)
        assert np.linalg.norm(trajectory.final_state - target) <= 1e-5 * np.linalg.norm(target)

    def test_brute_force_oracle(self, service, gramians, pendula_all, rng):
        span = 15.0
        gram = gramians.gramian(pendula_all.a, pendula_all.b_attack, span)
        for _ in range(10):
            target = rng.standard_normal(pendula_all.n)
            task = TransferTask(x_start=np.zeros(pendula_all.n), x_goal=target, span=span)
            energy = service.optimal_energy(task, gram, pendula_all.a)
            oracle = piecewise_constant_energy(pendula_all.a, pendula_all.b_attack, span, target, 400)
            # Piecewise-constant inputs can only cost more
            assert oracle >= energy * (1 - 1e-6)
            assert oracle == pytest.approx(energy, rel=0.01)


class TestUnreachable:
    """Targets outside the reachable subspace"""

    def test_raises_with_energy(self, service, gramians):
        a, b = np.array([[-1.0, 0.0], [0.0, -2.0]]), np.array([[1.0], [0.0]])
        gram = gramians.gramian(a, b, 1.0)
        task = TransferTask(x_start=[0.0, 0.0], x_goal=[0.0, 1.0], span=1.0)
        with pytest.raises(UnreachableTargetError) as excinfo:
            service.optimal_energy(task, gram, a)
        assert excinfo.value.energy > 1e6
        assert excinfo.value.residual == pytest.approx(1.0)

    def test_allowed_returns_extended_energy(self, service, gramians):
        a, b = np.array([[-1.0, 0.0], [0.0, -2.0]]), np.array([[1.0], [0.0]])
        gram = gramians.gramian(a, b, 1.0)
        task = TransferTask(x_start=[0.0, 0.0], x_goal=[0.0, 1.0], span=1.0)
        energy = service.optimal_energy(task, gram, a, allow_unreachable=True)
        assert energy == pytest.approx(gramians.extended_inverse(gram).big_m)


class TestEnergyQuadrature:
    """Integral of |u|^2 on uniform grids"""

    def test_trapezoid_two_samples(self, service):
        assert service.integrate_energy(np.array([[1.0], [1.0]]), 1.0) == pytest.approx(1.0)

    def test_simpson_exact_for_quadratic_power(self, service):
        inputs = np.array([0.0, 1.0, 2.0])
        assert service.integrate_energy(inputs, 1.0) == pytest.approx(8.0 / 3.0, rel=1e-14)

    @pytest.mark.parametrize("samples", [1001, 1000])
    def test_sine_power(self, service, samples):
        times = np.linspace(0.0, math.pi, samples)
        energy = service.integrate_energy(np.sin(times)[:, None], times[1] - times[0])
        assert energy == pytest.approx(math.pi / 2, abs=1e-6)

    def test_multiple_channels(self, service):
        inputs = np.ones((11, 2))
        assert service.integrate_energy(inputs, 0.1) == pytest.approx(2.0, rel=1e-12)

    def test_single_sample(self, service):
        with pytest.raises(ModelError):
            service.integrate_energy(np.array([[1.0]]), 1.0)

    def test_free_response_energy(self, service):
        trajectory = service.free_response(np.array([1.0]), np.array([[-1.0]]), 0.0, 1.0, samples=101)
        assert trajectory.energy == 0.0
        assert trajectory.final_state[0] == pytest.approx(math.exp(-1.0), rel=1e-12)


class TestTrajectoryModel:
    """Grid validation on Trajectory"""

    def test_non_uniform_grid(self):
        with pytest.raises(ValidationError):
            Trajectory(times=[0.0, 1.0, 3.0], states=np.zeros((3, 1)), inputs=np.zeros((3, 1)), energy=0.0)

    def test_row_mismatch(self):
        with pytest.raises(ValidationError):
            Trajectory(times=[0.0, 1.0], states=np.zeros((3, 1)), inputs=np.zeros((2, 1)), energy=0.0)

    def test_peak(self):
        states = np.array([[0.0], [2.0], [-3.0], [1.0]])
        trajectory = Trajectory(times=[0.0, 1.0, 2.0, 3.0], states=states, inputs=np.zeros((4, 1)), energy=0.0)
        assert trajectory.peak() == (2.0, 3.0)
        assert trajectory.dt == 1.0
