"""
Custom pytest configuration module.

Registers the --runslow option. Tests marked `slow` (the exhaustive 2**32 sweep,
the repeated discrepancy comparison and throughput ratios) are skipped unless it
is given.
"""

# Third-party imports
import pytest


def pytest_addoption(parser):
    """
    Add the --runslow command-line option.

    Args:
        parser: The pytest argument parser.
    """
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    """
    Skip slow tests unless --runslow was given.

    Args:
        config: The pytest config object.
        items: Collected test items.
    """
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
