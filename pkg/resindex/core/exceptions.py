"""
Core exceptions for resindex

Every exception carries the CLI exit code it maps to.
"""

from typing import Optional


class ResindexError(Exception):
    """Base exception for resindex"""
    exit_code: int = 4


class ConfigError(ResindexError):
    """Configuration and run-setting errors"""
    exit_code = 2


class DocumentError(ConfigError):
    """System document parse and validation errors"""
    pass


class ServiceError(ResindexError):
    """Service layer errors"""
    pass


class ModelError(ServiceError):
    """The model lacks a property the computation requires"""
    exit_code = 3


class UncontrollableError(ModelError):
    """(A, B) pair is not controllable"""

    def __init__(self, message: str, unreachable_dim: int):
        super().__init__(message)
        self.unreachable_dim = unreachable_dim


class UnreachableTargetError(ModelError):
    """Target state has a component outside the reachable subspace"""

    def __init__(self, message: str, energy: float, residual: Optional[float] = None):
        super().__init__(message)
        self.energy = energy
        self.residual = residual


class NumericalError(ServiceError):
    """Non-finite values, overflow or non-convergence"""
    pass
