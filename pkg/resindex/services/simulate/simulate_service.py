"""
Simulation Service - Internal API for attack/defense episodes

Two scenarios:
- min-energy: the attacker drives 0 -> x1 with minimum energy, then the defender
  drives x1 -> 0 with minimum energy.
- lq-feedback: the attacker drives 0 -> x1 against the closed loop A - B_d K
  while an LQ state feedback defender runs for the whole window.
"""

import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import linalg, optimize, stats

from ...core.exceptions import ConfigError, ModelError, NumericalError
from ...core.minenergy.minenergy_models import TransferTask, Trajectory
from ...core.resilience.resilience_models import ResilienceResult
from ...core.simulate.simulate_models import LqController, ScenarioKind, ScenarioReport
from ...core.system.system_models import LtiSystem
from ..gramian.gramian_service import GramianService
from ..minenergy.minenergy_service import DEFAULT_SAMPLES, MinEnergyService
from ..resilience.resilience_service import ResilienceService
from ..system.system_service import SystemService

MAX_RICCATI_ITERATIONS = 100
RICCATI_TOLERANCE = 1e-12
# Closed-loop characteristic time of the LQ defender
DEFAULT_TARGET_TIME = 4.73
# log10(r) grid searched for a bracket before root finding
CALIBRATION_LOG_RANGE = (-6.0, 6.0)
CALIBRATION_GRID = 25
RANK_CORRELATION_DIGITS = 12

Row = List[Union[float, str]]


class SimulationService:
    """Service for episode simulation, LQ defenders and ranking comparison"""

    def __init__(self):
        self.logger = logger
        self.system_service = SystemService()
        self.gramian_service = GramianService()
        self.minenergy_service = MinEnergyService()
        self.resilience_service = ResilienceService()

    # ==========================================
    # Minimum-energy episode
    # ==========================================

    def run_min_energy_episode(self, system: LtiSystem, x_worst_scale: float = 1.0,
                               attack_horizon: float = 15.0, defense_horizon: float = 15.0,
                               samples: int = DEFAULT_SAMPLES, steps: Optional[int] = None) -> ScenarioReport:
        """Minimum-energy attack to scale * x_worst, then minimum-energy restoration to 0"""
        self._check_samples(samples)
        index = self.resilience_service.resilience_index(system, attack_horizon, defense_horizon, steps)
        x_attack = x_worst_scale * index.x_worst
        zero = np.zeros(system.n)

        attack = self.minenergy_service.optimal_control(
            TransferTask(x_start=zero, x_goal=x_attack, span=attack_horizon),
            index.gramian_attack, system.a, system.b_attack, samples,
        )
        w_defend = self.gramian_service.gramian(system.a, system.b_defend, defense_horizon, steps)
        defense = self.minenergy_service.optimal_control(
            TransferTask(x_start=attack.final_state, x_goal=zero, span=defense_horizon, t_start=attack_horizon),
            w_defend, system.a, system.b_defend, samples,
        )

        report = self._report(
            kind=ScenarioKind.MIN_ENERGY,
            attack=attack,
            defense=defense,
            attack_energy=attack.energy,
            defense_energy=defense.energy,
            index=index,
            x_attack=x_attack,
            metadata={"rho_dynamics": "open-loop", "defender": "minimum-energy"},
        )
        self.logger.info(
            f"Minimum-energy episode: attack {report.attack_energy:.6g}, defense {report.defense_energy:.6g}, "
            f"rho {index.rho:.6g}"
        )
        return report

    # ==========================================
    # LQ feedback defender
    # ==========================================

    def design_lqr(self, system: LtiSystem, q_weight: Optional[np.ndarray] = None,
                   r_weight: Optional[np.ndarray] = None,
                   max_iterations: int = MAX_RICCATI_ITERATIONS) -> LqController:
        """Newton-Kleinman iteration on the algebraic Riccati equation from K = 0"""
        a, b = system.a, system.b_defend
        q, r = self._weights(system, q_weight, r_weight)
        r_factor = linalg.cho_factor(r)
        stability = self.system_service.is_stable(a)

        if not np.any(b):
            if not stability.is_stable:
                raise ModelError("B_d is zero and A is not stable: no stabilizing feedback exists")
            self.logger.warning("B_d is zero; returning K = 0 (the open loop is already stable)")
            p = self.gramian_service.solve_lyapunov(a.T, q)
            return self._controller(a, b, q, r, np.zeros((b.shape[1], system.n)), p, iterations=0)

        if not stability.is_stable:
            raise ModelError(
                f"Newton-Kleinman needs a stabilizing seed; K = 0 does not stabilize A "
                f"(abscissa {stability.abscissa:.6g})"
            )

        gain = np.zeros((b.shape[1], system.n))
        p = None
        for iteration in range(1, max_iterations + 1):
            a_k = a - b @ gain
            p_next = self.gramian_service.solve_lyapunov(a_k.T, q + gain.T @ r @ gain)
            gain = linalg.cho_solve(r_factor, b.T @ p_next)
            if p is not None and np.linalg.norm(p_next - p) <= RICCATI_TOLERANCE * max(1.0, np.linalg.norm(p_next)):
                self.logger.debug(f"Newton-Kleinman converged after {iteration} iterations")
                return self._controller(a, b, q, r, gain, p_next, iterations=iteration)
            p = p_next
        raise NumericalError(f"Riccati iteration did not converge in {max_iterations} iterations")

    def calibrate_lqr(self, system: LtiSystem, target_time: float = DEFAULT_TARGET_TIME,
                      q_weight: Optional[np.ndarray] = None) -> LqController:
        """Q fixed, R = r I with r chosen so the closed loop has the target characteristic time"""
        if not target_time > 0:
            raise ConfigError(f"target time must be > 0, got {target_time}")
        eye = np.eye(system.m_defend)

        def mismatch(log_r: float) -> float:
            controller = self.design_lqr(system, q_weight, 10.0 ** log_r * eye)
            return controller.characteristic_time - target_time

        # Walk from expensive to cheap control and stop at the first bracket
        grid = np.linspace(CALIBRATION_LOG_RANGE[1], CALIBRATION_LOG_RANGE[0], CALIBRATION_GRID)
        hi, f_hi = grid[0], mismatch(grid[0])
        log_r = hi if f_hi == 0 else None
        for lo in grid[1:]:
            if log_r is not None:
                break
            f_lo = mismatch(lo)
            if f_lo == 0:
                log_r = lo
            elif np.sign(f_lo) != np.sign(f_hi):
                log_r = optimize.brentq(mismatch, lo, hi, xtol=1e-8)
            hi, f_hi = lo, f_lo
        if log_r is None:
            raise NumericalError(
                f"No R scale in 10^{CALIBRATION_LOG_RANGE} gives characteristic time {target_time:g}"
            )

        controller = self.design_lqr(system, q_weight, 10.0 ** log_r * eye)
        self.logger.info(
            f"Calibrated LQR: r = {10.0 ** log_r:.6g}, closed-loop characteristic time "
            f"{controller.characteristic_time:.6g}"
        )
        return controller

    def run_lq_episode(self, system: LtiSystem, controller: LqController, attack_horizon: float = 15.0,
                       observe_until: float = 30.0, samples: int = DEFAULT_SAMPLES, x_scale: float = 1.0,
                       steps: Optional[int] = None) -> ScenarioReport:
        """Closed-loop-aware minimum-energy attack against u_d = -K x active throughout"""
        self._check_samples(samples)
        if not observe_until > attack_horizon:
            raise ConfigError(f"observe_until ({observe_until:g}) must exceed the attack horizon ({attack_horizon:g})")
        a_closed = controller.closed_loop(system.a, system.b_defend)
        if not self.system_service.is_stable(a_closed).is_stable:
            raise ModelError("The controller does not stabilize the system")

        closed_system = system.with_dynamics(a_closed)
        index = self.resilience_service.resilience_index(
            closed_system, attack_horizon, observe_until - attack_horizon, steps
        )
        x_attack = x_scale * index.x_worst
        attack = self.minenergy_service.optimal_control(
            TransferTask(x_start=np.zeros(system.n), x_goal=x_attack, span=attack_horizon),
            index.gramian_attack, a_closed, system.b_attack, samples,
        )
        drift = self.minenergy_service.free_response(
            attack.final_state, a_closed, attack_horizon, observe_until, samples, input_dim=system.m_defend
        )

        attack_phase_defense = -attack.states @ controller.gain.T
        defense_inputs = -drift.states @ controller.gain.T
        defense = Trajectory(
            times=drift.times,
            states=drift.states,
            inputs=defense_inputs,
            energy=self.minenergy_service.integrate_energy(defense_inputs, drift.dt),
        )
        defense_energy = self.minenergy_service.integrate_energy(attack_phase_defense, attack.dt) + defense.energy

        report = self._report(
            kind=ScenarioKind.LQ_FEEDBACK,
            attack=attack,
            defense=defense,
            attack_energy=attack.energy,
            defense_energy=defense_energy,
            index=index,
            x_attack=x_attack,
            attack_phase_defense_inputs=attack_phase_defense,
            metadata={"rho_dynamics": "closed-loop", "attack_design": "closed-loop", "defender": "lq-feedback"},
        )
        self.logger.info(
            f"LQ episode: attack {report.attack_energy:.6g}, defense {report.defense_energy:.6g}, "
            f"closed-loop rho {index.rho:.6g}"
        )
        return report

    # ==========================================
    # Comparison and export
    # ==========================================

    def ranking_agreement(self, reports: Sequence[ScenarioReport], indices: Sequence[ResilienceResult]) -> float:
        """Spearman correlation between measured ratios and theoretical indices"""
        if len(reports) != len(indices):
            raise ConfigError(f"{len(reports)} reports but {len(indices)} indices")
        if any(report.measured_ratio is None for report in reports):
            raise ModelError("ranking needs a defined measured ratio in every report")
        return self.rank_correlation([r.measured_ratio for r in reports], [i.rho for i in indices])

    def rank_correlation(self, measured: Sequence[float], theoretical: Sequence[float]) -> float:
        """Spearman rank correlation, ties by average rank"""
        if len(measured) != len(theoretical) or len(measured) < 2:
            raise ConfigError("rank correlation needs two equal-length sequences of at least 2 values")
        correlation = float(stats.spearmanr(measured, theoretical)[0])
        if math.isnan(correlation):
            raise NumericalError("rank correlation is undefined for constant sequences")
        # Rank correlations are ratios of small integers; drop the float residue
        return round(correlation, RANK_CORRELATION_DIGITS)

    def export_trajectory_rows(self, report: ScenarioReport) -> Tuple[List[str], List[Row]]:
        """CSV header and rows: t, x_1..x_n, u_a_1.., u_d_1.., phase"""
        attack, defense = report.attack_trajectory, report.defense_trajectory
        n = attack.states.shape[1]
        m_attack = attack.inputs.shape[1]
        m_defend = defense.inputs.shape[1]
        header = (
            ["t"]
            + [f"x_{i + 1}" for i in range(n)]
            + [f"u_a_{i + 1}" for i in range(m_attack)]
            + [f"u_d_{i + 1}" for i in range(m_defend)]
            + ["phase"]
        )

        attack_defense = report.attack_phase_defense_inputs
        if attack_defense is None:
            attack_defense = np.zeros((len(attack.times), m_defend))
        rows: List[Row] = []
        for k, t in enumerate(attack.times):
            rows.append([float(t), *attack.states[k], *attack.inputs[k], *attack_defense[k], "attack"])
        idle_attacker = np.zeros(m_attack)
        for k, t in enumerate(defense.times):
            rows.append([float(t), *defense.states[k], *idle_attacker, *defense.inputs[k], "defense"])
        return header, rows

    # ==========================================
    # Helpers
    # ==========================================

    def _report(self, kind: ScenarioKind, attack: Trajectory, defense: Trajectory, attack_energy: float,
                defense_energy: float, index: ResilienceResult, x_attack: np.ndarray,
                metadata: dict, attack_phase_defense_inputs: Optional[np.ndarray] = None) -> ScenarioReport:
        peak_time, _ = max(attack.peak(), defense.peak(), key=lambda peak: peak[1])
        return ScenarioReport(
            kind=kind,
            attack_trajectory=attack,
            defense_trajectory=defense,
            attack_phase_defense_inputs=attack_phase_defense_inputs,
            attack_energy=attack_energy,
            defense_energy=defense_energy,
            measured_ratio=attack_energy / defense_energy if defense_energy > 0 else None,
            theoretical_rho=index.rho,
            terminal_error=float(np.linalg.norm(defense.final_state)),
            x_attack=x_attack,
            peak_time=peak_time,
            metadata={"scenario": kind.value, **metadata},
        )

    def _weights(self, system: LtiSystem, q_weight: Optional[np.ndarray],
                 r_weight: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        q = np.eye(system.n) if q_weight is None else np.asarray(q_weight, dtype=float)
        r = np.eye(system.m_defend) if r_weight is None else np.asarray(r_weight, dtype=float)
        if q.shape != (system.n, system.n):
            raise ConfigError(f"Q must be {system.n} x {system.n}, got shape {q.shape}")
        if r.shape != (system.m_defend, system.m_defend):
            raise ConfigError(f"R must be {system.m_defend} x {system.m_defend}, got shape {r.shape}")
        q, r = (q + q.T) / 2, (r + r.T) / 2
        if np.min(linalg.eigvalsh(q)) < -1e-12 * max(1.0, np.max(np.abs(q))):
            raise ConfigError("Q must be positive semidefinite")
        try:
            linalg.cholesky(r)
        except linalg.LinAlgError:
            raise ConfigError("R must be positive definite")
        return q, r

    def _controller(self, a: np.ndarray, b: np.ndarray, q: np.ndarray, r: np.ndarray, gain: np.ndarray,
                    p: np.ndarray, iterations: int) -> LqController:
        r_inverse_bt = linalg.solve(r, b.T)
        residual = a.T @ p + p @ a - p @ b @ r_inverse_bt @ p + q
        abscissa = self.system_service.is_stable(a - b @ gain).abscissa
        if abscissa >= 0:
            raise NumericalError(f"LQ closed loop is not stable (abscissa {abscissa:.6g})")
        return LqController(
            gain=gain,
            riccati=p,
            q_weight=q,
            r_weight=r,
            closed_loop_abscissa=abscissa,
            riccati_residual=float(np.linalg.norm(residual)),
            iterations=iterations,
        )

    def _check_samples(self, samples: int) -> None:
        if samples < 2:
            raise ConfigError(f"samples must be >= 2, got {samples}")
