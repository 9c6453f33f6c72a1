"""
Coupled pendula benchmark models - Core layer
"""

from typing import List, Tuple

from pydantic import BaseModel, Field, field_validator

# Pendulum names in chain order 1-2-3
PENDULA = ("left", "middle", "right")
ALL = "all"
OPTION_NAMES = (*PENDULA, ALL)


class PendulaParams(BaseModel):
    """Physical parameters of three pendula coupled by springs in a 1-2-3 chain"""
    model_config = {"frozen": True}

    mass: float = Field(default=1.0, gt=0, description="Pendulum mass (kg)")
    length: float = Field(default=1.0, gt=0, description="Pendulum length (m)")
    spring: float = Field(default=10.0, ge=0, description="Spring constant between neighbours (N/m)")
    gravity: float = Field(default=10.0, gt=0, description="Gravitational acceleration (m/s^2)")
    damping: Tuple[float, float, float] = Field(default=(0.1, 0.1, 0.3), description="Damping d_i (1/s)")

    @field_validator('damping')
    @classmethod
    def validate_damping(cls, v):
        """Every pendulum is damped (the free system must be stable)"""
        if any(d <= 0 for d in v):
            raise ValueError('damping factors must be positive')
        return v


def parse_subset(text: str) -> List[str]:
    """'all' -> every pendulum; 'left+right' -> both; order follows the chain"""
    names = [part.strip().lower() for part in text.replace(",", "+").split("+") if part.strip()]
    if not names:
        raise ValueError("empty pendulum selection")
    if ALL in names:
        return list(PENDULA)
    unknown = [name for name in names if name not in PENDULA]
    if unknown:
        raise ValueError(f"unknown pendulum {unknown}; choose from {list(OPTION_NAMES)}")
    return [name for name in PENDULA if name in names]
