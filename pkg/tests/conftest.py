from pathlib import Path

import pytest

from shared.clients.oeis_client import DEFAULT_FIXTURE_DIR


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Tests never see a developer's env overrides and never wait on backoff."""
    monkeypatch.delenv("OEIS_BASE_URL", raising=False)
    monkeypatch.delenv("OEIS_FIXTURE_DIR", raising=False)
    monkeypatch.delenv("HYPERSUM_LOG_LEVEL", raising=False)
    monkeypatch.setenv("OEIS_BACKOFF_SECONDS", "0")


@pytest.fixture
def fixture_dir() -> Path:
    return DEFAULT_FIXTURE_DIR


class FakeResponse:
    def __init__(self, text: str = "", status_code: int = 200):
        self.text = text
        self.status_code = status_code

    def raise_for_status(self):
        import requests

        if self.status_code >= 400:
            raise requests.HTTPError(f"HTTP {self.status_code}")


@pytest.fixture
def fake_response():
    return FakeResponse
