"""
Attack/defense scenario models - Core layer
"""

from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..arrays import ARRAY_MODEL_CONFIG, Matrix, Vector, encode_scalar, to_nested_list
from ..minenergy.minenergy_models import Trajectory


class ScenarioKind(str, Enum):
    """Which experiment produced a report"""
    MIN_ENERGY = "min-energy"
    LQ_FEEDBACK = "lq-feedback"


class LqController(BaseModel):
    """State feedback u_d = -K x from the algebraic Riccati equation"""
    model_config = ARRAY_MODEL_CONFIG

    gain: Matrix = Field(..., description="K (m_d x n)")
    riccati: Matrix = Field(..., description="Stabilizing Riccati solution P")
    q_weight: Matrix = Field(..., description="State weight Q (n x n)")
    r_weight: Matrix = Field(..., description="Input weight R (m_d x m_d)")
    closed_loop_abscissa: float = Field(..., description="max Re(eig(A - B_d K))")
    riccati_residual: float = Field(default=0.0, ge=0, description="||A^T P + P A - P B R^-1 B^T P + Q||")
    iterations: int = Field(default=0, ge=0, description="Newton-Kleinman iterations used")

    @property
    def characteristic_time(self) -> float:
        return 1.0 / abs(self.closed_loop_abscissa) if self.closed_loop_abscissa < 0 else float("inf")

    def closed_loop(self, a: np.ndarray, b_defend: np.ndarray) -> np.ndarray:
        """A_cl = A - B_d K"""
        return a - b_defend @ self.gain

    def to_document(self) -> Dict[str, Any]:
        return {
            "gain": to_nested_list(self.gain),
            "q_weight": to_nested_list(self.q_weight),
            "r_weight": to_nested_list(self.r_weight),
            "closed_loop_abscissa": self.closed_loop_abscissa,
            "characteristic_time": encode_scalar(self.characteristic_time),
            "riccati_residual": self.riccati_residual,
            "iterations": self.iterations,
        }


class ScenarioReport(BaseModel):
    """Measured attack/defense energies next to the theoretical index

    attack_trajectory carries u_a; defense_trajectory carries u_d of the phase
    after the attack. In the LQ scenario the defender also acts during the
    attack; those inputs are in attack_phase_defense_inputs.
    """
    model_config = ARRAY_MODEL_CONFIG

    kind: ScenarioKind
    attack_trajectory: Trajectory
    defense_trajectory: Trajectory
    attack_phase_defense_inputs: Optional[Matrix] = None
    attack_energy: float = Field(..., ge=0)
    defense_energy: float = Field(..., ge=0)
    measured_ratio: Optional[float] = Field(default=None, description="None when defense energy is 0")
    theoretical_rho: float = Field(..., ge=0)
    terminal_error: float = Field(..., ge=0, description="||x(t2) - x0||")
    x_attack: Vector = Field(..., description="Attack target state x1")
    peak_time: float = Field(..., description="Time of the largest state deviation")
    metadata: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode='after')
    def validate_handoff(self):
        """Phases share their boundary sample exactly"""
        if not np.array_equal(self.attack_trajectory.final_state, self.defense_trajectory.initial_state):
            raise ValueError('defense trajectory must start where the attack trajectory ends')
        if self.measured_ratio is not None and self.defense_energy > 0 and not self.measured_ratio > 0:
            raise ValueError('measured_ratio must be positive when defense energy is positive')
        return self

    @property
    def ratio_defined(self) -> bool:
        return self.measured_ratio is not None

    @property
    def relative_mismatch(self) -> Optional[float]:
        """|measured - rho| / rho"""
        if self.measured_ratio is None or not np.isfinite(self.theoretical_rho) or self.theoretical_rho == 0:
            return None
        return abs(self.measured_ratio - self.theoretical_rho) / self.theoretical_rho

    def to_document(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "attack_energy": self.attack_energy,
            "defense_energy": self.defense_energy,
            "measured_ratio": encode_scalar(self.measured_ratio),
            "theoretical_rho": encode_scalar(self.theoretical_rho),
            "relative_mismatch": encode_scalar(self.relative_mismatch),
            "terminal_error": self.terminal_error,
            "peak_time": self.peak_time,
            "x_attack": to_nested_list(self.x_attack),
            "metadata": dict(self.metadata),
        }
