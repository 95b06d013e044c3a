from __future__ import annotations

import pytest

from ems_eval.gateway import Gateway, GatewayConfig
from ems_eval.mock import MockLLMServer

TEST_KEY = "test-key"


@pytest.fixture(autouse=True)
def api_key(monkeypatch):
    monkeypatch.setenv("EMS_API_KEY", TEST_KEY)
    return TEST_KEY


@pytest.fixture
def mock_server():
    with MockLLMServer() as server:
        yield server


@pytest.fixture
def make_gateway(mock_server, tmp_path):
    """Gateway pointed at the mock server; no sleeping between retries."""
    sleeps: list[float] = []
    opened: list[Gateway] = []

    def factory(cache: bool = True, **overrides) -> Gateway:
        cfg = GatewayConfig(
            base_url=mock_server.url,
            cache_dir=str(tmp_path / "cache") if cache else None,
            backoff_base=0.01,
            **overrides,
        )
        gw = Gateway(cfg, sleep=sleeps.append)
        gw.sleeps = sleeps
        opened.append(gw)
        return gw

    yield factory
    for gw in opened:
        gw.close()
