"""
Resilience Service - Internal API for the attack/defense energy index

rho(t0, t1, t2) = min over x1 of (x1^T W_a^-1 x1) / (x1^T W~_d^-1 x1)
               = 1 / lambda_max(W_a, W~_d)

The eigenvalue form is solved by whitening with the Cholesky factor of W~_d,
so W_a may be singular.
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from scipy import linalg

from ...core.cell_runner import CellRunner
from ...core.exceptions import ConfigError, DocumentError, ModelError, UncontrollableError
from ...core.gramian.gramian_models import Gramian
from ...core.resilience.resilience_models import (
    CellStatus,
    LemmaCheck,
    LemmaSuiteReport,
    PlacementCell,
    PlacementTable,
    ResilienceResult,
    SweepPoint,
)
from ...core.system.system_models import LtiSystem
from ..gramian.gramian_service import GramianService
from ..system.system_service import SystemService

# lambda values within this relative gap of lambda_max share its eigenspace
DEGENERACY_GAP = 1e-8
LEMMA_VALUE_TOLERANCE = 1e-8
LEMMA_ANGLE_TOLERANCE = 1e-6


def _sign_normalized(vector: np.ndarray) -> Tuple[np.ndarray, float]:
    """Unit vector with its first significant component positive, plus the sign applied"""
    vector = vector / np.linalg.norm(vector)
    significant = np.flatnonzero(np.abs(vector) > 1e-12 * np.max(np.abs(vector)))
    sign = -1.0 if vector[significant[0]] < 0 else 1.0
    return sign * vector, sign


class ResilienceService:
    """Service for the resilience index, its lemma checks, sweeps and placement tables"""

    def __init__(self):
        self.logger = logger
        self.system_service = SystemService()
        self.gramian_service = GramianService()

    # ==========================================
    # Index
    # ==========================================

    def resilience_index(self, system: LtiSystem, attack_horizon: float, defense_horizon: float,
                         steps: Optional[int] = None) -> ResilienceResult:
        """rho(0, attack_horizon, attack_horizon + defense_horizon) for x0 = 0"""
        self._check_horizons(attack_horizon, defense_horizon)
        self.system_service.require_controllable(system.a, system.b_defend, role="defender")
        self.system_service.stability_warning(system.a, "resilience index")

        w_attack, w_tilde = self._gramian_pair(system, attack_horizon, defense_horizon, steps)
        result = self.index_from_gramians(w_attack, w_tilde)
        self.logger.info(
            f"Resilience index over {attack_horizon:g} + {defense_horizon:g}: rho = {result.rho:.6g}"
        )
        return result

    def index_from_gramians(self, w_attack: Gramian, w_tilde: Gramian) -> ResilienceResult:
        """Largest eigenpair of W_a v = lambda W~_d v through L^-1 W_a L^-T, W~_d = L L^T"""
        if w_attack.n != w_tilde.n:
            raise ModelError(f"Gramian sizes differ: {w_attack.n} vs {w_tilde.n}")
        try:
            factor = linalg.cholesky(w_tilde.w, lower=True)
        except linalg.LinAlgError:
            unreachable = w_tilde.n - w_tilde.numerical_rank
            raise UncontrollableError(
                f"W~_d is not positive definite (numerical rank {w_tilde.numerical_rank} of {w_tilde.n}); "
                f"the defender cannot reach a subspace of dimension {max(unreachable, 1)}",
                unreachable_dim=max(unreachable, 1),
            )

        half = linalg.solve_triangular(factor, w_attack.w, lower=True)
        whitened = linalg.solve_triangular(factor, half.T, lower=True)
        whitened = (whitened + whitened.T) / 2
        values, vectors = linalg.eigh(whitened)

        lam = float(values[-1])
        top = vectors[:, -1]
        # x_worst = W~_d v = L L^T L^-T y = L y
        x_worst, sign = _sign_normalized(factor @ top)
        eigenvector = sign * linalg.solve_triangular(factor, top, lower=True, trans='T')
        eigenvector = eigenvector / np.linalg.norm(eigenvector)

        # The whitened matrix is PSD; its most negative eigenvalue is the roundoff floor
        roundoff_floor = max(-float(values[0]), 0.0)
        if w_attack.numerical_rank == 0 or lam <= roundoff_floor:
            self.logger.debug("Attacker cannot move the system; rho is infinite")
            rho, multiplicity = math.inf, len(values)
            lam = max(lam, 0.0)
        else:
            rho = 1.0 / lam
            multiplicity = int(np.sum(lam - values <= DEGENERACY_GAP * lam))
            if multiplicity > 1:
                self.logger.warning(
                    f"lambda_max has multiplicity {multiplicity}; the worst-case attack state is not unique"
                )

        return ResilienceResult(
            rho=rho,
            lambda_max=lam,
            x_worst=x_worst,
            eigenvector=eigenvector,
            attack_horizon=w_attack.horizon,
            defense_horizon=w_tilde.horizon,
            multiplicity=multiplicity,
            gramian_attack=w_attack,
            gramian_defense_tilde=w_tilde,
        )

    def energy_ratio_theoretical(self, system: LtiSystem, x1: np.ndarray, attack_horizon: float,
                                 defense_horizon: float, steps: Optional[int] = None) -> float:
        """(x1^T W_a^-1 x1) / (x1^T W~_d^-1 x1), extended inverses where W is singular"""
        self._check_horizons(attack_horizon, defense_horizon)
        w_attack, w_tilde = self._gramian_pair(system, attack_horizon, defense_horizon, steps)
        return self.ratio_from_gramians(w_attack, w_tilde, x1)

    def ratio_from_gramians(self, w_attack: Gramian, w_tilde: Gramian, x1: np.ndarray) -> float:
        x1 = np.asarray(x1, dtype=float)
        if x1.shape != (w_attack.n,):
            raise ModelError(f"x1 must have {w_attack.n} entries, got shape {x1.shape}")
        if not np.any(x1):
            raise ModelError("energy ratio is undefined for x1 = 0")
        if self.gramian_service.unreachable_component(w_attack, x1) > 0:
            self.logger.debug("x1 leaves the attacker's reachable subspace; numerator is big_m-scale")
        attack_energy = self.gramian_service.inverse_quadratic_form(w_attack, x1)
        defense_energy = self.gramian_service.inverse_quadratic_form(w_tilde, x1)
        return attack_energy / defense_energy

    def _gramian_pair(self, system: LtiSystem, attack_horizon: float, defense_horizon: float,
                      steps: Optional[int]) -> Tuple[Gramian, Gramian]:
        w_attack = self.gramian_service.gramian(system.a, system.b_attack, attack_horizon, steps)
        w_defend = self.gramian_service.gramian(system.a, system.b_defend, defense_horizon, steps)
        return w_attack, self.gramian_service.defender_tilde_gramian(system.a, w_defend, defense_horizon)

    def _check_horizons(self, attack_horizon: float, defense_horizon: float) -> None:
        for name, value in (("attack", attack_horizon), ("defense", defense_horizon)):
            if not value > 0 or math.isinf(value):
                raise ConfigError(f"{name} horizon must be finite and > 0, got {value}")

    # ==========================================
    # SPD lemma
    # ==========================================

    def lemma_check(self, a_spd: np.ndarray, b_spd: np.ndarray) -> LemmaCheck:
        """Evaluate the three equivalent Rayleigh-quotient forms with separate eigensolves"""
        a_spd = self._require_spd(a_spd, "A")
        b_spd = self._require_spd(b_spd, "B")
        if a_spd.shape != b_spd.shape:
            raise ModelError(f"A and B differ in shape: {a_spd.shape} vs {b_spd.shape}")
        eye = np.eye(a_spd.shape[0])
        a_inv = linalg.cho_solve(linalg.cho_factor(a_spd), eye)
        b_inv = linalg.cho_solve(linalg.cho_factor(b_spd), eye)

        inverse_values, inverse_vectors = linalg.eigh((a_inv + a_inv.T) / 2, (b_inv + b_inv.T) / 2)
        swapped_values = linalg.eigh(b_spd, a_spd, eigvals_only=True)
        direct_values, direct_vectors = linalg.eigh(a_spd, b_spd)

        x_left = inverse_vectors[:, 0] / np.linalg.norm(inverse_vectors[:, 0])
        x_right = direct_vectors[:, -1] / np.linalg.norm(direct_vectors[:, -1])

        # x_left is only unique up to its eigenspace
        minimum = inverse_values[0]
        left_space = linalg.orth(inverse_vectors[:, inverse_values - minimum <= DEGENERACY_GAP * abs(minimum)])
        mapped = b_spd @ x_right
        mapped = mapped / np.linalg.norm(mapped)
        outside = np.linalg.norm(mapped - left_space @ (left_space.T @ mapped))

        return LemmaCheck(
            min_inverse_ratio=float(minimum),
            min_swapped_ratio=float(swapped_values[0]),
            inverted_max_ratio=float(1.0 / direct_values[-1]),
            relation_angle=float(np.arcsin(min(outside, 1.0))),
            x_left=x_left,
            x_right=x_right,
        )

    def lemma_suite(self, seed: int = 0, count: int = 100, max_dim: int = 6, min_dim: int = 2) -> LemmaSuiteReport:
        """Run lemma_check over seeded random SPD pairs and report the worst disagreement"""
        if count < 1 or min_dim < 1 or max_dim < min_dim:
            raise ConfigError("lemma suite needs count >= 1 and 1 <= min_dim <= max_dim")
        rng = np.random.default_rng(seed)
        worst_spread, worst_angle = 0.0, 0.0
        for _ in range(count):
            n = int(rng.integers(min_dim, max_dim + 1))
            check = self.lemma_check(self._random_spd(rng, n), self._random_spd(rng, n))
            worst_spread = max(worst_spread, check.max_relative_spread)
            worst_angle = max(worst_angle, check.relation_angle)

        report = LemmaSuiteReport(
            seed=seed,
            count=count,
            max_relative_spread=worst_spread,
            max_relation_angle=worst_angle,
            value_tolerance=LEMMA_VALUE_TOLERANCE,
            angle_tolerance=LEMMA_ANGLE_TOLERANCE,
        )
        self.logger.info(
            f"Lemma suite (seed {seed}, {count} pairs): spread {worst_spread:.3g}, angle {worst_angle:.3g} rad"
        )
        return report

    def _random_spd(self, rng: np.random.Generator, n: int) -> np.ndarray:
        g = rng.standard_normal((n, n))
        return g @ g.T + n * np.eye(n)

    def _require_spd(self, matrix: np.ndarray, name: str) -> np.ndarray:
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ModelError(f"{name} must be square, got shape {matrix.shape}")
        if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=0.0):
            raise ModelError(f"{name} is not symmetric")
        try:
            linalg.cholesky(matrix, lower=True)
        except linalg.LinAlgError:
            raise ModelError(f"{name} is not positive definite")
        return (matrix + matrix.T) / 2

    # ==========================================
    # Sweeps and placement tables
    # ==========================================

    def sweep(self, system: LtiSystem, horizons: Sequence[float], steps: Optional[int] = None,
              workers: int = 1) -> List[SweepPoint]:
        """rho(0, dt, 2 dt) for every dt, each computed independently"""
        horizons = [float(dt) for dt in horizons]
        if not horizons:
            raise ConfigError("sweep needs at least one horizon")
        if any(not dt > 0 for dt in horizons):
            raise ConfigError("sweep horizons must be > 0")
        if horizons != sorted(horizons):
            raise ConfigError("sweep horizons must be sorted ascending")
        self.system_service.require_controllable(system.a, system.b_defend, role="defender")

        def evaluate(dt: float) -> SweepPoint:
            return SweepPoint(dt=dt, result=self.resilience_index(system, dt, dt, steps))

        points = CellRunner(max_workers=workers).run_strict(evaluate, horizons)
        self.logger.info(f"Sweep over {len(points)} horizons [{horizons[0]:g}, {horizons[-1]:g}]")
        return points

    def placement_table(self, a: np.ndarray, attacker_options: Dict[str, np.ndarray],
                        defender_options: Dict[str, np.ndarray], attack_horizon: float,
                        defense_horizon: float, steps: Optional[int] = None,
                        workers: int = 1) -> PlacementTable:
        """rho for every attacker/defender option pair, one Gramian per option"""
        a = np.asarray(a, dtype=float)
        self._check_horizons(attack_horizon, defense_horizon)
        if not attacker_options or not defender_options:
            raise ConfigError("placement table needs at least one attacker and one defender option")
        for name, b in {**attacker_options, **defender_options}.items():
            if np.ndim(b) != 2 or np.shape(b)[0] != a.shape[0]:
                raise DocumentError(f"option '{name}' must have {a.shape[0]} rows, got shape {np.shape(b)}")
        self.system_service.stability_warning(a, "placement table")
        runner = CellRunner(max_workers=workers)

        attackers = list(attacker_options)
        defenders = list(defender_options)
        w_attack = dict(zip(attackers, runner.run_strict(
            lambda name: self.gramian_service.gramian(a, attacker_options[name], attack_horizon, steps),
            attackers,
        )))

        def defender_tilde(name: str) -> Gramian:
            self.system_service.require_controllable(a, defender_options[name], role=f"defender '{name}'")
            w_defend = self.gramian_service.gramian(a, defender_options[name], defense_horizon, steps)
            return self.gramian_service.defender_tilde_gramian(a, w_defend, defense_horizon)

        tilde_outcomes = dict(zip(defenders, runner.run(defender_tilde, defenders)))

        def evaluate(pair: Tuple[str, str]) -> PlacementCell:
            attacker, defender = pair
            outcome = tilde_outcomes[defender]
            if not outcome.success:
                status = (CellStatus.UNCONTROLLABLE_DEFENDER if isinstance(outcome.error, UncontrollableError)
                          else CellStatus.FAILED)
                return PlacementCell(attacker=attacker, defender=defender, status=status, message=str(outcome.error))
            result = self.index_from_gramians(w_attack[attacker], outcome.value)
            return PlacementCell(attacker=attacker, defender=defender, rho=result.rho)

        pairs = [(attacker, defender) for attacker in attackers for defender in defenders]
        cells = []
        for pair, outcome in zip(pairs, runner.run(evaluate, pairs)):
            if outcome.success:
                cells.append(outcome.value)
            else:
                cells.append(PlacementCell(attacker=pair[0], defender=pair[1], status=CellStatus.FAILED,
                                           message=str(outcome.error)))

        table = PlacementTable(
            attackers=attackers,
            defenders=defenders,
            cells=[cells[i * len(defenders):(i + 1) * len(defenders)] for i in range(len(attackers))],
            attack_horizon=attack_horizon,
            defense_horizon=defense_horizon,
        )
        for cell in table.failures():
            self.logger.warning(f"Cell {cell.attacker}/{cell.defender}: {cell.status.value}: {cell.message}")
        self.logger.info(f"Placement table {len(attackers)} x {len(defenders)} assembled")
        return table
