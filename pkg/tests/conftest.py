"""Suite-wide fixtures and hypothesis configuration."""

from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from zwcalc.rules import catalog

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def rules_by_name():
    """The full catalog at the default arity bound, indexed by name."""
    return {rule.name: rule for rule in catalog(4)}
