import pytest

from src.config import reset_overrides


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_overrides()
    yield
    reset_overrides()
