"""
Global pytest configuration for resindex
"""

import pytest

def pytest_addoption(parser):
    """Add integration test option to pytest"""
    parser.addoption(
        "--integration",
        action="store_true",
        default=False,
        help="run the long horizon sweeps"
    )

def pytest_configure(config):
    """Register the integration marker"""
    config.addinivalue_line("markers", "integration: long-running horizon sweeps")

def pytest_collection_modifyitems(config, items):
    """Skip integration tests unless --integration is given"""
    if config.getoption("--integration"):
        return
    skip_integration = pytest.mark.skip(reason="use --integration to run the long sweeps")
    for item in items:
        if "integration" in item.keywords:
            item.add_marker(skip_integration)
