import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "morphoprobe",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("morphoprobe")


@pytest.fixture
def oracle_server():
    from morphoprobe.mockserver import MockChatServer

    with MockChatServer(mode="oracle") as server:
        yield server
