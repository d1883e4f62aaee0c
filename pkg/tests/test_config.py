import json

import pytest

from config import AppConfig, Config, build_app_config, load_app_config, resolve_seed
from sfPlanner.errors import InvalidConfigError


def _write(tmp_path, text, name='planner.cfg'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


class TestLoadAppConfig:
    def test_defaults(self):
        app = load_app_config(None)
        assert app == AppConfig()
        assert app.region.name == 'ism433'
        assert app.environment.class_label.value == 'open-los'
        assert app.simulator.n_packets == 1000
        assert app.selector.fade_margin == 10.0
        assert app.seed is None

    def test_default_radio_fits_default_region(self):
        app = AppConfig()
        low, high = app.region.allowed_band
        assert low <= app.radio.carrier_frequency <= high
        assert app.radio.carrier_frequency == 433.175e6
        assert app.environment.reference_loss_1m == pytest.approx(25.18, abs=0.01)

    def test_empty_file(self, tmp_path):
        assert load_app_config(_write(tmp_path, '')) == AppConfig()

    def test_key_value_file(self, tmp_path):
        path = _write(tmp_path, (
            '# field trial settings\n'
            'radio.tx_power = 8\n'
            'environment.class_label = coastal-los\n'
            'weights.preset = reliability\n'
            'simulator.n_packets = 500\n'
            'grid.speeds = 0, 10\n'
            'grid.distances = [500]\n'
            'seed = 7\n'
        ))
        app = load_app_config(path)
        assert app.radio.tx_power == 8.0
        assert app.environment.shadowing_sigma == 2.5
        assert app.weights.w_link_margin == pytest.approx(0.6)
        assert app.simulator.n_packets == 500
        assert app.grid.speeds == [0.0, 10.0]
        assert app.grid.distances == [500.0]
        assert app.seed == 7

    def test_json_file(self, tmp_path):
        path = _write(tmp_path, json.dumps({
            'region': {'name': 'ism433-strict'},
            'dynamic': {'beacon_interval': 60},
        }), name='planner.json')
        app = load_app_config(path)
        assert app.region.duty_cycle_limit == 0.01
        assert app.dynamic.beacon_interval == 60.0

    def test_unknown_key(self, tmp_path):
        with pytest.raises(InvalidConfigError, match='tx_powr'):
            load_app_config(_write(tmp_path, 'radio.tx_powr = 8\n'))

    def test_unknown_section(self, tmp_path):
        with pytest.raises(InvalidConfigError, match='antenna'):
            load_app_config(_write(tmp_path, 'antenna.gain = 3\n'))

    def test_invalid_value_names_setting(self, tmp_path):
        with pytest.raises(InvalidConfigError, match='simulator.n_packets'):
            load_app_config(_write(tmp_path, 'simulator.n_packets = 0\n'))

    def test_radio_must_fit_region(self, tmp_path):
        with pytest.raises(InvalidConfigError, match='exceeds'):
            load_app_config(_write(tmp_path, 'radio.tx_power = 14\n'))

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidConfigError, match='not found'):
            load_app_config(tmp_path / 'nope.cfg')

    def test_bad_json(self, tmp_path):
        with pytest.raises(InvalidConfigError):
            load_app_config(_write(tmp_path, '{"radio": ', name='broken.json'))


class TestOverrides:
    def test_dotted_overrides(self):
        app = AppConfig().with_overrides({'simulator.n_packets': 200, 'selector.fade_margin': None})
        assert app.simulator.n_packets == 200
        assert app.selector.fade_margin == 10.0

    def test_override_validated(self):
        with pytest.raises(InvalidConfigError):
            AppConfig().with_overrides({'simulator.tie_tolerance': 2.0})

    def test_section_replacement(self):
        app = build_app_config({'region': {'name': 'eu868'}, 'radio': {'carrier_frequency': 868.1e6}})
        assert app.region.max_tx_power == 14.0
        assert app.environment.reference_loss_1m == pytest.approx(31.2, abs=0.05)

    def test_region_retunes_default_carrier(self, tmp_path):
        app = load_app_config(_write(tmp_path, 'region.name = eu868\n'))
        assert app.radio.carrier_frequency == 868.1e6
        assert app.environment.reference_loss_1m == pytest.approx(31.2, abs=0.05)

    def test_explicit_carrier_not_retuned(self, tmp_path):
        text = 'region.name = eu868\nradio.carrier_frequency = 433.175e6\n'
        with pytest.raises(InvalidConfigError, match='outside band'):
            load_app_config(_write(tmp_path, text))


class TestSeedResolution:
    def test_precedence(self, monkeypatch):
        monkeypatch.setenv('SFPLAN_SEED', '9')
        assert resolve_seed(5, AppConfig(seed=7)) == 5
        assert resolve_seed(None, AppConfig(seed=7)) == 7
        assert resolve_seed(None, AppConfig()) == 9
        monkeypatch.delenv('SFPLAN_SEED')
        assert resolve_seed(None, AppConfig()) == 42

    def test_bad_env_seed(self, monkeypatch):
        monkeypatch.setenv('SFPLAN_SEED', 'abc')
        with pytest.raises(InvalidConfigError):
            Config.env_seed()

    def test_process_settings(self):
        assert Config.validate()
