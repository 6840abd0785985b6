"""Shared fixtures for the test suite."""

import pytest

from circle3bp.model import build_context


@pytest.fixture(scope="session")
def ctx13():
    """Equal-pair context at the reference mass ratio m = 1/3."""
    return build_context(1.0 / 3.0)
