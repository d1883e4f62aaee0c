import pytest

from sfPlanner.phy import EnvironmentModel, RadioConfig
from sfPlanner.selector import RegionProfile, ScenarioSpec, ScoreWeights


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ('SFPLAN_SEED', 'SFPLAN_CONFIG', 'SFPLAN_LOG_FILE'):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def radio():
    return RadioConfig()


@pytest.fixture
def open_los():
    return EnvironmentModel.preset('open-los')


@pytest.fixture
def weights():
    return ScoreWeights()


@pytest.fixture
def make_spec():
    """ScenarioSpec factory with the nominal traffic profile."""
    def _make(distance, speed=0.0, **kwargs):
        kwargs.setdefault('scenario_id', f"d{distance:g}-v{speed:g}")
        return ScenarioSpec(distance=distance, speed=speed, **kwargs)
    return _make


@pytest.fixture
def strict_region():
    return RegionProfile.preset('ism433-strict')
