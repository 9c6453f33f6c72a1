"""
System models - Core layer
Two-input LTI system dx/dt = A x + B_a u_a + B_d u_d and its diagnostics
"""

from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from ..arrays import ARRAY_MODEL_CONFIG, Matrix, to_nested_list


class LtiSystem(BaseModel):
    """Linear time-invariant system with attacker and defender input maps"""
    model_config = ARRAY_MODEL_CONFIG

    a: Matrix = Field(..., description="State dynamics A (n x n), units 1/time")
    b_attack: Matrix = Field(..., description="Attacker input map B_a (n x m_a)")
    b_defend: Matrix = Field(..., description="Defender input map B_d (n x m_d)")
    labels: Optional[List[str]] = Field(default=None, description="Optional state names")

    @field_validator('a')
    @classmethod
    def validate_square(cls, v):
        """A must be square and at least 1 x 1"""
        if v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ValueError(f'A must be square with n >= 1, got shape {v.shape}')
        return v

    @field_validator('b_attack', 'b_defend')
    @classmethod
    def validate_columns(cls, v):
        """Each input map needs at least one column"""
        if v.shape[1] < 1:
            raise ValueError(f'input matrix needs at least one column, got shape {v.shape}')
        return v

    @model_validator(mode='after')
    def validate_rows(self):
        """Row counts of A, B_a and B_d agree; labels match n"""
        n = self.a.shape[0]
        for name, b in (("Ba", self.b_attack), ("Bd", self.b_defend)):
            if b.shape[0] != n:
                raise ValueError(f'{name} has {b.shape[0]} rows but A is {n} x {n}')
        if self.labels is not None and len(self.labels) != n:
            raise ValueError(f'labels has {len(self.labels)} entries, expected {n}')
        return self

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m_attack(self) -> int:
        return self.b_attack.shape[1]

    @property
    def m_defend(self) -> int:
        return self.b_defend.shape[1]

    def with_dynamics(self, a: np.ndarray) -> "LtiSystem":
        """Same input maps around different dynamics (e.g. a closed loop)"""
        return LtiSystem(a=a, b_attack=self.b_attack, b_defend=self.b_defend, labels=self.labels)

    def with_inputs(self, b_attack: Optional[np.ndarray] = None,
                    b_defend: Optional[np.ndarray] = None) -> "LtiSystem":
        """Swap one or both input maps"""
        return LtiSystem(
            a=self.a,
            b_attack=self.b_attack if b_attack is None else b_attack,
            b_defend=self.b_defend if b_defend is None else b_defend,
            labels=self.labels,
        )

    def state_labels(self) -> List[str]:
        """Labels, or x1..xn when none were given"""
        return list(self.labels) if self.labels else [f"x{i + 1}" for i in range(self.n)]

    def to_document(self) -> Dict[str, Any]:
        """System document: {"A", "Ba", "Bd"[, "labels"]} with row-major nested lists"""
        document: Dict[str, Any] = {
            "A": to_nested_list(self.a),
            "Ba": to_nested_list(self.b_attack),
            "Bd": to_nested_list(self.b_defend),
        }
        if self.labels:
            document["labels"] = list(self.labels)
        return document


class ControllabilityReport(BaseModel):
    """Kalman-matrix rank diagnostics for an (A, B) pair"""
    numerical_rank: int = Field(..., ge=0, description="Rank of [B, AB, ..., A^(n-1)B]")
    n: int = Field(..., ge=1, description="State dimension")
    rank_tolerance: float = Field(..., gt=0, description="Relative singular-value cutoff")
    singular_values: List[float] = Field(default_factory=list, description="Kalman matrix singular values")

    @model_validator(mode='after')
    def validate_rank(self):
        if self.numerical_rank > self.n:
            raise ValueError('numerical_rank cannot exceed n')
        return self

    @property
    def is_controllable(self) -> bool:
        return self.numerical_rank == self.n

    @property
    def unreachable_dim(self) -> int:
        return self.n - self.numerical_rank


class StabilityReport(BaseModel):
    """Spectral abscissa of A and the stability verdict"""
    is_stable: bool = Field(..., description="max Re(eig(A)) < 0")
    abscissa: float = Field(..., description="max real part of the eigenvalues")
    characteristic_time: float = Field(..., description="1/|abscissa| for stable A, inf otherwise")
