"""
Resilience index models - Core layer
"""

import math
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from ..arrays import ARRAY_MODEL_CONFIG, Vector, encode_scalar, to_nested_list
from ..gramian.gramian_models import Gramian


class ResilienceResult(BaseModel):
    """Resilience index rho(t0, t1, t2) with the attaining attack

    rho = 1 / lambda_max of the pencil (W_a, W~_d); rho is +inf when the attacker
    cannot move the system. `eigenvector` solves W_a v = lambda_max W~_d v;
    `x_worst` = W~_d v (normalized) is the attack state that attains rho.
    """
    model_config = ARRAY_MODEL_CONFIG

    rho: float = Field(..., ge=0, description="Resilience index, possibly inf")
    lambda_max: float = Field(..., description="Maximum generalized eigenvalue of (W_a, W~_d)")
    x_worst: Vector = Field(..., description="Worst-case attack state x1, unit norm")
    eigenvector: Vector = Field(..., description="Generalized eigenvector, unit norm")
    attack_horizon: float = Field(..., gt=0, description="t1 - t0")
    defense_horizon: float = Field(..., gt=0, description="t2 - t1")
    multiplicity: int = Field(default=1, ge=1, description="Eigenvalues within the degeneracy gap of lambda_max")
    gramian_attack: Optional[Gramian] = Field(default=None, description="W_a over the attack horizon")
    gramian_defense_tilde: Optional[Gramian] = Field(default=None, description="W~_d over the defense horizon")

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.rho)

    @property
    def degenerate(self) -> bool:
        """x_worst is non-unique (any vector of the top eigenspace attains rho)"""
        return self.multiplicity > 1

    def to_document(self) -> Dict[str, Any]:
        return {
            "rho": encode_scalar(self.rho),
            "lambda_max": encode_scalar(self.lambda_max),
            "x_worst": to_nested_list(self.x_worst),
            "eigenvector": to_nested_list(self.eigenvector),
            "multiplicity": self.multiplicity,
            "horizons": {
                "attack": self.attack_horizon,
                "defense": self.defense_horizon,
            },
        }


class LemmaCheck(BaseModel):
    """The three Rayleigh-quotient forms of the SPD lemma, computed independently"""
    model_config = ARRAY_MODEL_CONFIG

    min_inverse_ratio: float = Field(..., description="min x^T A^-1 x / x^T B^-1 x")
    min_swapped_ratio: float = Field(..., description="min x^T B x / x^T A x")
    inverted_max_ratio: float = Field(..., description="(max x^T A x / x^T B x)^-1")
    relation_angle: float = Field(..., ge=0, description="Angle (rad) between x_l* and B x_mr*")
    x_left: Vector = Field(..., description="Minimizer of the inverse form")
    x_right: Vector = Field(..., description="Maximizer of the direct form")

    @property
    def values(self) -> tuple[float, float, float]:
        return self.min_inverse_ratio, self.min_swapped_ratio, self.inverted_max_ratio

    @property
    def max_relative_spread(self) -> float:
        """Largest pairwise disagreement of the three values, relative to their mean"""
        values = np.array(self.values)
        return float((values.max() - values.min()) / abs(values.mean()))


class LemmaSuiteReport(BaseModel):
    """Summary of a seeded battery of random SPD pairs"""
    seed: int
    count: int
    max_relative_spread: float
    max_relation_angle: float
    value_tolerance: float
    angle_tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_relative_spread <= self.value_tolerance and self.max_relation_angle <= self.angle_tolerance

    def to_document(self) -> Dict[str, Any]:
        document = self.model_dump()
        document["passed"] = self.passed
        return document


class SweepPoint(BaseModel):
    """rho(0, dt, 2 dt) for one dt"""
    dt: float = Field(..., gt=0)
    result: ResilienceResult


class CellStatus(str, Enum):
    """Outcome of one placement-table cell"""
    OK = "ok"
    UNCONTROLLABLE_DEFENDER = "uncontrollable-defender"
    FAILED = "failed"


class PlacementCell(BaseModel):
    """One attacker/defender combination"""
    attacker: str
    defender: str
    status: CellStatus = CellStatus.OK
    rho: Optional[float] = Field(default=None, description="None when the cell failed")
    message: Optional[str] = None


class PlacementTable(BaseModel):
    """Cross product of attacker and defender options with the best/worst picks"""
    attackers: List[str]
    defenders: List[str]
    cells: List[List[PlacementCell]] = Field(..., description="cells[i][j]: attacker i, defender j")
    attack_horizon: float
    defense_horizon: float

    def value(self, attacker: str, defender: str) -> Optional[float]:
        return self.cells[self.attackers.index(attacker)][self.defenders.index(defender)].rho

    def matrix(self) -> np.ndarray:
        """rho values with failed cells as NaN"""
        return np.array([[math.nan if c.rho is None else c.rho for c in row] for row in self.cells])

    def best_defender(self) -> Dict[str, Optional[str]]:
        """Argmax defender per attacker row (the most resilient placement)"""
        picks = {}
        for attacker, row in zip(self.attackers, self.cells):
            usable = [c for c in row if c.rho is not None]
            picks[attacker] = max(usable, key=lambda c: c.rho).defender if usable else None
        return picks

    def worst_attacker(self) -> Dict[str, Optional[str]]:
        """Argmin attacker per defender column (the most damaging access point)"""
        picks = {}
        for j, defender in enumerate(self.defenders):
            usable = [row[j] for row in self.cells if row[j].rho is not None]
            picks[defender] = min(usable, key=lambda c: c.rho).attacker if usable else None
        return picks

    def failures(self) -> List[PlacementCell]:
        return [c for row in self.cells for c in row if c.status != CellStatus.OK]
