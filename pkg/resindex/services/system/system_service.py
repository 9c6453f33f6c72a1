"""
System Service - Internal API for LTI system documents and diagnostics
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from loguru import logger
from pydantic import ValidationError
from scipy import linalg

from ...core.config import ConfigLoader
from ...core.exceptions import ConfigError, DocumentError, NumericalError, UncontrollableError
from ...core.system.system_models import ControllabilityReport, LtiSystem, StabilityReport

# Relative singular-value cutoff for the Kalman matrix rank
KALMAN_RANK_TOLERANCE = 1e-9

SYSTEM_KEYS = ["A", "Ba", "Bd"]
PENDULA_PREFIX = "pendula"


class SystemService:
    """Service for loading, saving and diagnosing two-input LTI systems"""

    def __init__(self):
        self.logger = logger
        self.config_loader = ConfigLoader()
        self._pendula_service = None

    @property
    def pendula_service(self):
        """Lazy load PendulaService (it builds systems through this service's models)"""
        if self._pendula_service is None:
            from ..pendula.pendula_service import PendulaService
            self._pendula_service = PendulaService()
        return self._pendula_service

    # ==========================================
    # Documents
    # ==========================================

    def system_from_document(self, document: Dict[str, Any], source: str = "<document>") -> LtiSystem:
        """Validate a parsed {"A", "Ba", "Bd"[, "labels"]} mapping"""
        try:
            self.config_loader.validate_config_keys(document, SYSTEM_KEYS)
        except ConfigError as e:
            raise DocumentError(f"{source}: {e}")
        try:
            system = LtiSystem(
                a=document["A"],
                b_attack=document["Ba"],
                b_defend=document["Bd"],
                labels=document.get("labels"),
            )
        except ValidationError as e:
            raise DocumentError(f"Invalid system document {source}: {e}")
        self.logger.debug(f"System from {source}: n={system.n}, m_a={system.m_attack}, m_d={system.m_defend}")
        return system

    def load_system(self, source: Union[str, Path, Dict[str, Any]]) -> LtiSystem:
        """Load a system document from a path or an already parsed mapping"""
        if isinstance(source, dict):
            return self.system_from_document(source)
        try:
            document = self.config_loader.load_document(source)
        except ConfigError as e:
            raise DocumentError(str(e))
        return self.system_from_document(document, source=str(source))

    def save_system(self, system: LtiSystem, path: Union[str, Path]) -> Path:
        """Write the system document as JSON (float repr round-trips bit-exactly)"""
        path = Path(path)
        try:
            path.write_text(self.dumps_system(system), encoding='utf-8')
        except OSError as e:
            raise ConfigError(f"Could not write system document {path}: {e}")
        self.logger.debug(f"Saved system document to {path}")
        return path

    def dumps_system(self, system: LtiSystem) -> str:
        return json.dumps(system.to_document(), indent=2) + "\n"

    def resolve_selector(self, selector: str) -> LtiSystem:
        """`pendula[:<attacker>/<defender>]` builtin benchmark, otherwise a document path"""
        if selector == PENDULA_PREFIX or selector.startswith(PENDULA_PREFIX + ":"):
            attacker, defender = "all", "all"
            if ":" in selector:
                placement = selector.split(":", 1)[1]
                if placement.count("/") != 1:
                    raise ConfigError(f"Selector '{selector}' must look like pendula:<attacker>/<defender>")
                attacker, defender = placement.split("/")
            try:
                return self.pendula_service.build_from_names(attacker, defender)
            except ValueError as e:
                raise ConfigError(f"Invalid selector '{selector}': {e}")
        return self.load_system(selector)

    # ==========================================
    # Diagnostics
    # ==========================================

    def kalman_matrix(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """[B, AB, ..., A^(n-1) B]"""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        blocks = [b]
        for _ in range(a.shape[0] - 1):
            blocks.append(a @ blocks[-1])
        return np.hstack(blocks)

    def controllability(self, a: np.ndarray, b: np.ndarray,
                        tolerance: float = KALMAN_RANK_TOLERANCE) -> ControllabilityReport:
        """Numerical rank of the Kalman matrix with a relative SVD cutoff"""
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DocumentError(f"A must be square, got shape {a.shape}")
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise DocumentError(f"B must have {a.shape[0]} rows, got shape {b.shape}")
        if not tolerance > 0:
            raise ConfigError("rank tolerance must be > 0")

        sigma = linalg.svdvals(self.kalman_matrix(a, b))
        sigma_max = sigma[0] if len(sigma) else 0.0
        rank = int(np.sum(sigma > tolerance * sigma_max)) if sigma_max > 0 else 0
        report = ControllabilityReport(
            numerical_rank=rank,
            n=a.shape[0],
            rank_tolerance=tolerance,
            singular_values=sigma.tolist(),
        )
        self.logger.debug(f"Kalman rank {rank}/{a.shape[0]} at tolerance {tolerance:g}")
        return report

    def is_stable(self, a: np.ndarray) -> StabilityReport:
        """Stable iff the spectral abscissa is negative"""
        a = np.asarray(a, dtype=float)
        if not np.all(np.isfinite(a)):
            raise NumericalError("Eigenvalues requested for a matrix with non-finite entries")
        try:
            eigenvalues = linalg.eigvals(a)
        except linalg.LinAlgError as e:
            raise NumericalError(f"Eigen-solver failed: {e}")
        abscissa = float(np.max(eigenvalues.real))
        stable = abscissa < 0
        return StabilityReport(
            is_stable=stable,
            abscissa=abscissa,
            characteristic_time=1.0 / abs(abscissa) if stable else math.inf,
        )

    def characteristic_time(self, a: np.ndarray) -> float:
        """1 / |max Re(eig(A))| (slowest mode); inf when A is not stable"""
        return self.is_stable(a).characteristic_time

    def require_controllable(self, a: np.ndarray, b: np.ndarray, role: str = "defender",
                             tolerance: float = KALMAN_RANK_TOLERANCE) -> ControllabilityReport:
        """Raise UncontrollableError naming the unreachable subspace dimension"""
        report = self.controllability(a, b, tolerance)
        if not report.is_controllable:
            raise UncontrollableError(
                f"(A, B) for the {role} is not controllable: rank {report.numerical_rank} of {report.n}, "
                f"unreachable subspace of dimension {report.unreachable_dim}",
                unreachable_dim=report.unreachable_dim,
            )
        return report

    def stability_warning(self, a: np.ndarray, context: str) -> Optional[float]:
        """Log a warning (do not reject) when A is not stable; returns the abscissa"""
        report = self.is_stable(a)
        if not report.is_stable:
            self.logger.warning(
                f"{context}: A is not stable (abscissa {report.abscissa:.6g}); "
                f"the index is evaluated mechanically and has no established meaning here"
            )
        return report.abscissa
