from pathlib import Path

import pytest

from opendialog.config import EngineConfig
from opendialog.engine import Engine
from opendialog.resources import default_data_dir

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def engine():
    """Shared engine over the bundled resources; tests create their own sessions."""
    return Engine()


@pytest.fixture(scope="session")
def sample_flow_engine():
    """Engine loading only the Fig.-2-style sample flow."""
    return Engine(EngineConfig(flows_dir=default_data_dir() / "flows_sample"))


@pytest.fixture
def session(engine):
    return engine.create_session(seed=7)


def winner_of(result):
    for item in result.debug["pool"]:
        if item["id"] == result.debug["winner_id"]:
            return item
    raise AssertionError("winner not present in debug pool")
