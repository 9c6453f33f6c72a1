"""
Minimum-energy control models - Core layer
"""

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..arrays import ARRAY_MODEL_CONFIG, Matrix, Vector

# Relative tolerance for the uniform-grid check
GRID_TOLERANCE = 1e-9


class TransferTask(BaseModel):
    """Move the state from x_start at t0 to x_goal at t1 = t0 + span"""
    model_config = ARRAY_MODEL_CONFIG

    x_start: Vector = Field(..., description="State at window start")
    x_goal: Vector = Field(..., description="State at window end")
    span: float = Field(..., gt=0, description="t1 - t0")
    t_start: float = Field(default=0.0, description="Window start time (only shifts the time grid)")

    @model_validator(mode='after')
    def validate_lengths(self):
        if self.x_start.shape != self.x_goal.shape:
            raise ValueError(f'x_start and x_goal lengths differ: {self.x_start.shape} vs {self.x_goal.shape}')
        return self

    @property
    def n(self) -> int:
        return len(self.x_start)

    @property
    def t_end(self) -> float:
        return self.t_start + self.span


class Trajectory(BaseModel):
    """Uniformly sampled states and inputs with the integrated input energy"""
    model_config = ARRAY_MODEL_CONFIG

    times: Vector = Field(..., description="Uniform, strictly increasing sample instants")
    states: Matrix = Field(..., description="One state row per instant")
    inputs: Matrix = Field(..., description="One input row per instant")
    energy: float = Field(..., ge=0, description="Integral of u^T u over the window")

    @model_validator(mode='after')
    def validate_grid(self):
        """Grid is uniform and strictly increasing; rows align with the grid"""
        if len(self.times) < 2:
            raise ValueError('trajectory needs at least 2 samples')
        steps = np.diff(self.times)
        if np.any(steps <= 0):
            raise ValueError('time grid must be strictly increasing')
        if np.max(np.abs(steps - steps[0])) > GRID_TOLERANCE * max(abs(self.times[-1]), steps[0]):
            raise ValueError('time grid must be uniform')
        if len(self.states) != len(self.times) or len(self.inputs) != len(self.times):
            raise ValueError('states and inputs need one row per sample')
        return self

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def peak(self) -> tuple[float, float]:
        """(time, norm) of the largest state deviation"""
        norms = np.linalg.norm(self.states, axis=1)
        k = int(np.argmax(norms))
        return float(self.times[k]), float(norms[k])
