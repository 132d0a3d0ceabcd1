from pathlib import Path

import pytest

from delaystab.config import Settings, get_settings

SPEC_DIR = Path(__file__).resolve().parents[1] / "data" / "specs"


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    for name in ("DELAYSTAB_ARCHIVE_PATH", "DELAYSTAB_LOG", "DELAYSTAB_JOBS", "DELAYSTAB_SEED"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def cfg() -> Settings:
    return Settings(jobs=2)


@pytest.fixture
def spec_dir() -> Path:
    return SPEC_DIR
