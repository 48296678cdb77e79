import pytest
from hypothesis import HealthCheck, settings

from qhverify.qdouble import DoublePresentation

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def dp():
    """The shipped double at t = 2; algebras and coproducts are cached across tests."""
    return DoublePresentation.shipped("2")
