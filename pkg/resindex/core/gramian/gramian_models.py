"""
Gramian models - Core layer
Controllability Gramians with their spectral split and the extended inverse
"""

import math
from typing import Any, Dict

import numpy as np
from pydantic import BaseModel, Field

from ..arrays import ARRAY_MODEL_CONFIG, Matrix, Vector, encode_scalar, to_nested_list

# Eigenvalues below this fraction of lambda_max count as zero
RANK_TOLERANCE = 1e-9


class Gramian(BaseModel):
    """Symmetric PSD controllability Gramian over a horizon, spectrally decomposed"""
    model_config = ARRAY_MODEL_CONFIG

    w: Matrix = Field(..., description="Symmetric PSD Gramian W")
    horizon: float = Field(..., ge=0, description="Span length t1 - t0; inf for the Lyapunov limit")
    eigenvalues: Vector = Field(..., description="Nonincreasing eigenvalues, negatives clamped to 0")
    eigenvectors: Matrix = Field(..., description="Orthogonal eigenvector columns")
    numerical_rank: int = Field(..., ge=0, description="Eigenvalues above RANK_TOLERANCE * lambda_max")

    @classmethod
    def from_matrix(cls, w: np.ndarray, horizon: float, rank_tolerance: float = RANK_TOLERANCE) -> "Gramian":
        """Symmetrize, decompose, clamp roundoff negatives and rank the spectrum"""
        w = np.asarray(w, dtype=float)
        w = (w + w.T) / 2
        values, vectors = np.linalg.eigh(w)
        order = np.argsort(values)[::-1]
        values, vectors = values[order], vectors[:, order]

        lam_max = max(values[0], 0.0) if len(values) else 0.0
        cutoff = rank_tolerance * lam_max
        # PSD up to roundoff: small negatives are clamped, larger ones are kept so callers can see them
        values = np.where((values < 0) & (values >= -max(cutoff, np.finfo(float).tiny)), 0.0, values)
        rank = int(np.sum(values > cutoff)) if lam_max > 0 else 0
        return cls(w=w, horizon=horizon, eigenvalues=values, eigenvectors=vectors, numerical_rank=rank)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def is_full_rank(self) -> bool:
        return self.numerical_rank == self.n

    @property
    def is_infinite_horizon(self) -> bool:
        return math.isinf(self.horizon)

    def null_basis(self) -> np.ndarray:
        """Orthonormal basis of the numerically unreachable subspace"""
        return self.eigenvectors[:, self.numerical_rank:]

    def to_document(self) -> Dict[str, Any]:
        return {
            "horizon": encode_scalar(self.horizon),
            "W": to_nested_list(self.w),
            "eigenvalues": to_nested_list(self.eigenvalues),
            "numerical_rank": self.numerical_rank,
        }


class ExtendedInverse(BaseModel):
    """U diag(1/lambda_1..1/lambda_k, M..M) U^T for a semidefinite Gramian"""
    model_config = ARRAY_MODEL_CONFIG

    basis: Matrix = Field(..., description="Orthogonal eigenvectors of the Gramian")
    inverse_eigenvalues: Vector = Field(..., description="1/lambda on the range, M on the null part")
    big_m: float = Field(..., gt=0, description="The very large stand-in for 1/0")

    def apply(self, x: np.ndarray) -> np.ndarray:
        """W^-1 x in the extended sense"""
        return self.basis @ (self.inverse_eigenvalues * (self.basis.T @ x))

    def quadratic_form(self, x: np.ndarray) -> float:
        """x^T W^-1 x in the extended sense"""
        coords = self.basis.T @ np.asarray(x, dtype=float)
        return float(np.sum(self.inverse_eigenvalues * coords ** 2))
