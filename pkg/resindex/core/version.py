"""
Version utilities - Read versions from package metadata
"""

from importlib.metadata import version, PackageNotFoundError
from typing import Dict

STACK = ("numpy", "scipy", "pydantic", "click", "loguru")


def get_version(package: str = "resindex") -> str:
    """Installed version of a package, or "unknown" when running from a source tree"""
    try:
        return version(package)
    except PackageNotFoundError:
        return "unknown"


def get_stack_versions() -> Dict[str, str]:
    """Versions of the libraries resindex runs on; regression numbers are tied to numpy and scipy"""
    return {name: get_version(name) for name in STACK}
