"""
Array field types for pydantic models

Matrices and vectors are stored as read-only float64 numpy arrays so model
instances stay immutable after construction.
"""

from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator, ConfigDict

# Shared config for every model that holds numpy arrays
ARRAY_MODEL_CONFIG = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def _frozen_array(value: Any, ndim: int) -> np.ndarray:
    try:
        array = np.array(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValueError(f"not a rectangular numeric array: {e}")
    if array.ndim != ndim:
        raise ValueError(f"expected {ndim}-dimensional array, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("array contains non-finite entries")
    array.setflags(write=False)
    return array


def as_matrix(value: Any) -> np.ndarray:
    """Coerce a nested list or array into a finite read-only 2-D float array"""
    return _frozen_array(value, 2)


def as_vector(value: Any) -> np.ndarray:
    """Coerce a list or array into a finite read-only 1-D float array"""
    return _frozen_array(value, 1)


Matrix = Annotated[np.ndarray, BeforeValidator(as_matrix)]
Vector = Annotated[np.ndarray, BeforeValidator(as_vector)]


def to_nested_list(array: np.ndarray) -> list:
    """Plain-Python nested list for JSON/YAML serialization"""
    return np.asarray(array, dtype=float).tolist()


def format_number(value: float, precision: int = 6) -> str:
    """Format a scalar with `precision` significant digits; sentinels as "inf"/"nan" """
    if value is None:
        return "nan"
    value = float(value)
    if np.isnan(value):
        return "nan"
    if np.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{precision}g}"


def encode_scalar(value: float) -> Any:
    """JSON-safe scalar: infinities and NaN become the strings "inf" / "nan" """
    if value is None:
        return None
    value = float(value)
    if np.isnan(value):
        return "nan"
    if np.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value
